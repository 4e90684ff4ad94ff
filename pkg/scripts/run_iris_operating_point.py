"""Iris at q_f=4, q_l=2 with no variation: float, quantized and crossbar accuracy."""

import argparse

from febim import experiments as ex
from febim.data import load_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = ex.ExperimentConfig(epochs=args.epochs, base_seed=args.seed, q_f_grid=(4,), q_l_grid=(2,))
    rec = ex.quant_sweep(load_dataset("iris"), cfg).records[0]
    print(f"baseline   {100 * rec.baseline_mean_acc:6.2f}%")
    print(f"quantized  {100 * rec.quantized_mean_acc:6.2f}%")
    print(f"crossbar   {100 * rec.mean_acc:6.2f}% +/- {100 * rec.std_acc:.2f}")
    print(f"delta      {100 * rec.delta_acc:6.2f}%")


if __name__ == "__main__":
    main()
