"""Dataset loading and deterministic stratified train/test splitting."""

import csv
import hashlib
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyDataset, InfeasibleSplit, MissingColumn, ParseError

DATA_DIR_ENV = "FEBIM_DATA_DIR"

# sha256 of the files written by scripts/export_datasets.py
BUNDLED_SHA256 = {
    "iris": "2495d965d79282f30ad3b9828f2be678d37de4bb6ecad0825358528d2a75797d",
    "wine": "a58a82783d9f0df396aaca72d41e547a16b5c77459829bfe31b21930c7722ba6",
    "cancer": "88fc719552dad60442ddc9805abcaebe8c8146d522a10ed14b667384b0eb62ef",
}


def _readonly(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labeled samples with continuous features.

    ``labels`` hold class indices in ``[0, k)`` where ``k = len(class_names)``.
    Arrays are made read-only so a dataset can be shared between workers.
    """

    name: str
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    class_names: tuple

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if x.shape[0] != y.shape[0]:
            raise ValueError(f"{x.shape[0]} feature rows but {y.shape[0]} labels")
        if x.shape[1] < 1 or len(self.class_names) < 1:
            raise ValueError("need at least one feature and one class")
        if len(self.feature_names) != x.shape[1]:
            raise ValueError("feature_names length does not match feature count")
        if not np.all(np.isfinite(x)):
            raise ValueError("features contain NaN or infinite values")
        if y.size and (y.min() < 0 or y.max() >= len(self.class_names)):
            raise ValueError("label index out of range")
        object.__setattr__(self, "features", _readonly(x))
        object.__setattr__(self, "labels", _readonly(y))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def k(self):
        return len(self.class_names)

    def __len__(self):
        return self.n_samples

    def subset(self, indices):
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.name, self.features[idx], self.labels[idx],
                       self.feature_names, self.class_names)

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.k)


def load_csv(path, label_column=None, name=None):
    """Read a headered CSV; every column except ``label_column`` must be numeric.

    The label column defaults to the last one. Classes are indexed in order of
    first appearance.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise EmptyDataset(f"{path}: no header row")
    header = [h.strip() for h in rows[0]]
    if label_column is None:
        label_idx = len(header) - 1
    elif label_column in header:
        label_idx = header.index(label_column)
    else:
        raise MissingColumn(f"{path}: label column {label_column!r} not in header {header}")

    feat_idx = [i for i in range(len(header)) if i != label_idx]
    if not feat_idx:
        raise EmptyDataset(f"{path}: no feature columns")

    features, labels, class_names = [], [], {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(lineno, None, ",".join(row), path)
        vals = []
        for i in feat_idx:
            try:
                v = float(row[i])
            except ValueError:
                raise ParseError(lineno, header[i], row[i], path) from None
            if not math.isfinite(v):
                raise ParseError(lineno, header[i], row[i], path)
            vals.append(v)
        features.append(vals)
        labels.append(class_names.setdefault(row[label_idx].strip(), len(class_names)))
    if not features:
        raise EmptyDataset(f"{path}: header present but no data rows")

    return Dataset(
        name=name or path.stem,
        features=np.array(features, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
        feature_names=[header[i] for i in feat_idx],
        class_names=list(class_names),
    )


def data_dir():
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "data"


def resolve_dataset_path(name_or_path):
    """Accept a bundled dataset name (``iris``) or a filesystem path."""
    p = Path(name_or_path)
    if p.suffix.lower() == ".csv" or p.exists():
        return p
    return data_dir() / f"{name_or_path}.csv"


def load_dataset(name_or_path, label_column=None):
    return load_csv(resolve_dataset_path(name_or_path), label_column)


def file_sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.7
    seed: int = 0
    epoch: int = 0
    stratify: bool = True

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.epoch < 0:
            raise ValueError("epoch must be >= 0")

    def rng(self):
        # one independent stream per (seed, epoch)
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(self.epoch,)))


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def stratified_test_counts(class_counts, test_fraction):
    """Per-class test counts.

    The total target is ``round(test_fraction * N)``, shared out by largest
    remainder and capped so each class keeps one training sample. Capped
    excess moves to classes with spare room; the total shrinks only when
    nothing is left to take it.
    """
    counts = np.asarray(class_counts, dtype=np.int64)
    if np.any(counts == 0):
        empty = np.flatnonzero(counts == 0).tolist()
        raise InfeasibleSplit(f"classes {empty} have no samples and cannot appear in training")
    n = int(counts.sum())
    target = _round_half_up(test_fraction * n)

    quota = target * counts / n
    alloc = np.floor(quota).astype(np.int64)
    rem = quota - alloc
    # stable: ties broken by class index
    order = sorted(range(len(counts)), key=lambda c: (-rem[c], c))
    for c in order[: target - int(alloc.sum())]:
        alloc[c] += 1

    cap = counts - 1
    spill = int(np.maximum(alloc - cap, 0).sum())
    alloc = np.minimum(alloc, cap)
    for c in order:
        if spill == 0:
            break
        take = min(spill, int(cap[c] - alloc[c]))
        alloc[c] += take
        spill -= take

    if alloc.sum() == 0:
        raise InfeasibleSplit(
            f"test_fraction={test_fraction} leaves no test samples once every class keeps one training sample")
    return alloc


def split_indices(ds, spec):
    """Return sorted ``(train_idx, test_idx)`` index arrays."""
    rng = spec.rng()
    if spec.stratify:
        n_test = stratified_test_counts(ds.class_counts(), spec.test_fraction)
        test = []
        for c in range(ds.k):
            members = np.flatnonzero(ds.labels == c)
            test.append(rng.permutation(members)[: n_test[c]])
        test = np.concatenate(test)
    else:
        target = _round_half_up(spec.test_fraction * ds.n_samples)
        if not 0 < target < ds.n_samples:
            raise InfeasibleSplit(f"cannot hold out {target} of {ds.n_samples} samples")
        test = rng.permutation(ds.n_samples)[:target]
    mask = np.zeros(ds.n_samples, dtype=bool)
    mask[test] = True
    return np.flatnonzero(~mask), np.flatnonzero(mask)


def split(ds, spec):
    train_idx, test_idx = split_indices(ds, spec)
    return ds.subset(train_idx), ds.subset(test_idx)
