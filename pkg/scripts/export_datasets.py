"""Regenerate the bundled benchmark CSVs under data/ from scikit-learn's local copies.

scikit-learn is only needed to run this script, not to use the package.
"""

import csv
import re
import hashlib
from pathlib import Path

from sklearn import datasets

OUT = Path(__file__).resolve().parent.parent / "data"

SOURCES = {
    "iris": datasets.load_iris,
    "wine": datasets.load_wine,
    "cancer": datasets.load_breast_cancer,
}


def export(name, loader):
    bunch = loader()
    header = [re.sub(r"\s*\(.*?\)", "", str(f)).replace(" ", "_") for f in bunch.feature_names] + ["class"]
    path = OUT / f"{name}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row, target in zip(bunch.data, bunch.target):
            w.writerow([repr(float(v)) for v in row] + [str(bunch.target_names[target])])
    return path


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    for name, loader in SOURCES.items():
        p = export(name, loader)
        print(f"{p.name}  sha256={hashlib.sha256(p.read_bytes()).hexdigest()}")
