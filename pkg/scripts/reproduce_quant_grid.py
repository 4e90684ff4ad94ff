"""Full (q_f, q_l) accuracy grid for one or more datasets; writes reports to --out-dir."""

import argparse
from pathlib import Path

from febim import experiments as ex
from febim.data import load_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("datasets", nargs="*", default=["iris", "wine", "cancer"])
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    args = ap.parse_args()

    for name in args.datasets:
        cfg = ex.ExperimentConfig(dataset=name, epochs=args.epochs, base_seed=args.seed, threads=args.threads)
        report = ex.quant_sweep(load_dataset(name), cfg)
        ex.emit_report(report, args.out_dir / f"{name}_quant")
        print(f"{name}: delta_acc (%) rows q_f=1..8, columns q_l=1..8")
        for qf in cfg.q_f_grid:
            row = " ".join(f"{100 * report.cell(qf, ql).delta_acc:6.2f}" for ql in cfg.q_l_grid)
            print(f"  {qf}  {row}")


if __name__ == "__main__":
    main()
