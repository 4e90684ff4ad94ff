"""Monte Carlo V_TH-variation sweep at one quantization point."""

import argparse
from pathlib import Path

from febim import experiments as ex
from febim.data import load_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dataset", default="iris")
    ap.add_argument("--qf", type=int, default=4)
    ap.add_argument("--ql", type=int, default=2)
    ap.add_argument("--sigmas-mv", default="0,15,30,45,60")
    ap.add_argument("--memory-window", type=float, default=1.8, help="V; sets the current sensitivity")
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    args = ap.parse_args()

    sigmas = tuple(float(s) / 1e3 for s in args.sigmas_mv.split(","))
    cfg = ex.ExperimentConfig(dataset=args.dataset, epochs=args.epochs, sigmas=sigmas,
                              memory_window=args.memory_window)
    report = ex.variation_sweep(load_dataset(args.dataset), cfg, args.qf, args.ql)
    ex.emit_report(report, args.out_dir / f"{args.dataset}_variation")
    for r in report.records:
        print(f"{1e3 * r.sigma_vth:5.0f} mV  {100 * r.mean_acc:6.2f}% +/- {100 * r.std_acc:.2f}")
    print(report.notes[0])


if __name__ == "__main__":
    main()
