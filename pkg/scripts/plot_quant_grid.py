"""Heatmap of delta_acc from a quant-sweep report. Needs matplotlib (not a package dependency)."""

import argparse

import matplotlib.pyplot as plt
import numpy as np

from febim.experiments import load_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("report")
    ap.add_argument("-o", "--output", default="quant_grid.png")
    args = ap.parse_args()

    rep = load_report(args.report)
    qfs = sorted({r.q_f for r in rep.records})
    qls = sorted({r.q_l for r in rep.records})
    grid = np.array([[100 * rep.cell(qf, ql).delta_acc for ql in qls] for qf in qfs])

    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(grid, origin="lower", cmap="viridis_r")
    ax.set_xticks(range(len(qls)), qls)
    ax.set_yticks(range(len(qfs)), qfs)
    ax.set_xlabel("q_l (bits)")
    ax.set_ylabel("q_f (bits)")
    for i, j in zip(*np.nonzero(grid < 1.0)):
        ax.add_patch(plt.Rectangle((j - 0.5, i - 0.5), 1, 1, fill=False, ec="red", lw=1.5))
    fig.colorbar(im, label="accuracy drop (%)")
    ax.set_title(f"{rep.dataset}: drop vs. float baseline")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
