"""Command-line driver: train, map, infer, sweep-quant, sweep-variation, report.

Settings resolve as built-in defaults < ``--config`` JSON file < explicit
flags. Exit status: 0 success, 1 usage/config error, 2 data/runtime error.
"""

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import crossbar, gnbc, mapping
from .data import load_dataset, split, split_indices
from .errors import ConfigError, FebimError
from .experiments import ExperimentConfig, emit_report, load_report, quant_sweep, task_seed, variation_sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


@dataclass
class CliConfig:
    dataset: str = "iris"
    label_column: str | None = None
    seed: int = 0
    epoch: int = 0
    epochs: int = 100
    test_fraction: float = 0.7
    stratify: bool = True
    q_f: int = 4
    q_l: int = 2
    q_f_grid: list = None
    q_l_grid: list = None
    sigma_vth_mV: float = 0.0
    sigmas_mV: list = None
    log_base: float = 10.0
    range_decades: float = 3.0
    likelihood_mode: str = "integrated"
    i_min: float = 0.1
    i_max: float = 1.0
    memory_window: float = 1.8
    sensitivity: float | None = None
    wta_delta: float = 0.0
    var_smoothing: float = gnbc.VAR_SMOOTHING
    threads: int = 1
    out_dir: str = "."
    pulse_table: str | None = None

    def __post_init__(self):
        if self.q_f_grid is None:
            self.q_f_grid = list(range(1, 9))
        if self.q_l_grid is None:
            self.q_l_grid = list(range(1, 9))
        if self.sigmas_mV is None:
            self.sigmas_mV = [0.0, 15.0, 30.0, 45.0, 60.0]

    def experiment(self, **over):
        cfg = ExperimentConfig(
            dataset=self.dataset, label_column=self.label_column, epochs=self.epochs,
            test_fraction=self.test_fraction, base_seed=self.seed, stratify=self.stratify,
            q_f_grid=tuple(self.q_f_grid), q_l_grid=tuple(self.q_l_grid),
            sigmas=tuple(s / 1e3 for s in self.sigmas_mV), log_base=self.log_base,
            range_decades=self.range_decades, likelihood_mode=self.likelihood_mode,
            i_min=self.i_min, i_max=self.i_max, memory_window=self.memory_window,
            sensitivity=self.sensitivity, wta_delta=self.wta_delta,
            var_smoothing=self.var_smoothing, threads=self.threads)
        return replace(cfg, **over)

    def to_json(self):
        d = asdict(self)
        if isinstance(d["range_decades"], float) and math.isinf(d["range_decades"]):
            d["range_decades"] = "inf"
        return d


# flag dest -> CliConfig field
_FLAG_FIELDS = {f.name for f in fields(CliConfig)}


def resolve_config(args):
    cfg = CliConfig()
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            file_vals = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from None
        if not isinstance(file_vals, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        unknown = set(file_vals) - _FLAG_FIELDS
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
        if "range_decades" in file_vals:
            file_vals["range_decades"] = float(file_vals["range_decades"])
        cfg = replace(cfg, **file_vals)
    flags = {k: v for k, v in vars(args).items() if k in _FLAG_FIELDS and v is not None}
    return replace(cfg, **flags)


def _int_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _float_list(text):
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    common = _Parser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--config", help="JSON config file; flags override its values")
    g.add_argument("--seed", type=int, help="base seed for splits and variation draws")
    g.add_argument("--threads", type=int, help="worker processes for sweeps")
    g.add_argument("--out-dir", dest="out_dir", help="directory for outputs")
    g.add_argument("--print-config", action="store_true", help="print the resolved configuration")

    data_opts = _Parser(add_help=False)
    d = data_opts.add_argument_group("data")
    d.add_argument("--dataset", help="bundled name (iris, wine, cancer) or CSV path")
    d.add_argument("--label", dest="label_column", help="label column name (default: last)")
    d.add_argument("--test-fraction", dest="test_fraction", type=float)
    d.add_argument("--epoch", type=int, help="split epoch index")
    d.add_argument("--no-stratify", dest="stratify", action="store_const", const=False)

    quant_opts = _Parser(add_help=False)
    q = quant_opts.add_argument_group("quantization")
    q.add_argument("--log-base", dest="log_base", type=float)
    q.add_argument("--range-decades", dest="range_decades", type=float,
                   help="truncation depth below each column maximum, in log-base units")
    q.add_argument("--likelihood-mode", dest="likelihood_mode", choices=["center", "integrated"])
    q.add_argument("--i-min", dest="i_min", type=float, help="lowest cell current, uA")
    q.add_argument("--i-max", dest="i_max", type=float, help="highest cell current, uA")

    dev_opts = _Parser(add_help=False)
    v = dev_opts.add_argument_group("device")
    v.add_argument("--memory-window", dest="memory_window", type=float, help="V")
    v.add_argument("--sensitivity", type=float, help="uA per V of threshold shift")
    v.add_argument("--wta-delta", dest="wta_delta", type=float, help="WTA resolution, uA")

    p = _Parser(prog="febim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("train", parents=[common, data_opts], help="train a GNBC and write model JSON")
    s.add_argument("-o", "--output", help="model JSON path (default: <out-dir>/model.json)")

    s = sub.add_parser("map", parents=[common, data_opts, quant_opts, dev_opts],
                       help="map a model to P' tables, a crossbar image and a pulse schedule")
    s.add_argument("--model", required=True)
    s.add_argument("--qf", dest="q_f", type=int)
    s.add_argument("--ql", dest="q_l", type=int)
    s.add_argument("--pulse-table", dest="pulse_table", help="JSON array of pulse counts per state")

    s = sub.add_parser("infer", parents=[common, data_opts, dev_opts], help="run crossbar inference")
    s.add_argument("--mapped", required=True, help="mapped model JSON from `map`")
    s.add_argument("--crossbar", help="crossbar image JSON (default: program from --mapped)")
    s.add_argument("--subset", choices=["test", "train", "all"], default="test")
    s.add_argument("--sigma-vth", dest="sigma_vth_mV", type=float, help="V_TH spread, mV")
    s.add_argument("--trace", action="store_true", help="also emit per-row currents")
    s.add_argument("-o", "--output", help="predictions CSV (default: <out-dir>/predictions.csv)")

    s = sub.add_parser("sweep-quant", parents=[common, data_opts, quant_opts, dev_opts],
                       help="accuracy over a (q_f, q_l) grid")
    s.add_argument("--epochs", type=int)
    s.add_argument("--qf-grid", dest="q_f_grid", type=_int_list, help="e.g. 1-8 or 2,4,8")
    s.add_argument("--ql-grid", dest="q_l_grid", type=_int_list)
    s.add_argument("-o", "--output", help="report path stem")

    s = sub.add_parser("sweep-variation", parents=[common, data_opts, quant_opts, dev_opts],
                       help="accuracy under V_TH variation")
    s.add_argument("--epochs", type=int)
    s.add_argument("--qf", dest="q_f", type=int)
    s.add_argument("--ql", dest="q_l", type=int)
    s.add_argument("--sigmas", dest="sigmas_mV", type=_float_list, help="mV, e.g. 0,15,30,45,60")
    s.add_argument("-o", "--output", help="report path stem")

    s = sub.add_parser("report", parents=[common], help="validate and summarize a report JSON")
    s.add_argument("report")
    s.add_argument("--csv", dest="csv_stem", help="re-emit CSV files to this path stem")
    return p


def _out(cfg, given, default_name):
    path = Path(given) if given else Path(cfg.out_dir) / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def cmd_train(args, cfg):
    ds = load_dataset(cfg.dataset, cfg.label_column)
    exp = cfg.experiment()
    train, test = split(ds, exp.split_spec(cfg.epoch))
    params = gnbc.train(train, cfg.var_smoothing)
    path = _out(cfg, args.output, "model.json")
    gnbc.save_model(params, path)
    print(f"wrote {path}  (k={params.k}, n={params.n}, train={len(train)}, test={len(test)}, "
          f"float test accuracy={gnbc.accuracy(params, test):.4f})")


def cmd_map(args, cfg):
    params = gnbc.load_model(args.model)
    spec = cfg.experiment().quant_spec(cfg.q_f, cfg.q_l)
    table = (mapping.load_pulse_table(cfg.pulse_table, spec.levels) if cfg.pulse_table
             else mapping.identity_pulse_table(spec.levels))
    train = None
    if params.feature_lo is None:
        ds = load_dataset(cfg.dataset, cfg.label_column)
        train, _ = split(ds, cfg.experiment().split_spec(cfg.epoch))
    mapped = mapping.map_model(params, train, spec)
    image = crossbar.program(mapped)
    dev = cfg.experiment().device(cfg.sigma_vth_mV / 1e3)

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mapping.save_mapped(mapped, out / "mapped.json")
    crossbar.save_image(image, out / "crossbar.json", dev, table)
    sched = mapping.programming_schedule(image.states, table)
    with open(out / "pulse_schedule.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "state", "pulses"])
        for r in range(image.k):
            for c in range(image.cols):
                w.writerow([r, c, int(image.states[r, c]), int(sched[r, c])])
    print(f"wrote {out}/mapped.json, crossbar.json, pulse_schedule.csv  "
          f"(array {image.k}x{image.cols}, prior column {'present' if image.has_prior_col else 'omitted'})")


def cmd_infer(args, cfg):
    mapped = mapping.load_mapped(args.mapped)
    if args.crossbar:
        image, dev, _ = crossbar.load_image(args.crossbar)
        dev = replace(dev, sigma_vth=cfg.sigma_vth_mV / 1e3, wta_delta=cfg.wta_delta)
    else:
        image = crossbar.program(mapped)
        dev = cfg.experiment().device(cfg.sigma_vth_mV / 1e3)

    ds = load_dataset(cfg.dataset, cfg.label_column)
    if args.subset == "all":
        idx = np.arange(len(ds))
    else:
        tr, te = split_indices(ds, cfg.experiment().split_spec(cfg.epoch))
        idx = te if args.subset == "test" else tr
    X, y = ds.features[idx], ds.labels[idx]

    bins = mapping.discretize(mapped.bins, X)
    software = np.argmax(mapped.state_scores(bins), axis=-1)
    noise = crossbar.perturb(image, dev, task_seed(cfg.seed, mapped.spec.q_f, mapped.spec.q_l,
                                                   dev.sigma_vth, cfg.epoch))
    winners, ambiguous, currents = crossbar.infer_batch(image, dev, bins, noise)

    names = mapped.class_names or ds.class_names
    path = _out(cfg, args.output, "predictions.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        head = ["sample", "label", "predicted", "software_predicted", "ambiguous"]
        if args.trace:
            head += [f"i_wl_{c}_uA" for c in range(image.k)]
        w.writerow(head)
        for j in range(len(idx)):
            row = [int(idx[j]), ds.class_names[y[j]], names[winners[j]], names[software[j]], int(ambiguous[j])]
            if args.trace:
                row += [repr(float(v)) for v in currents[j]]
            w.writerow(row)
    acc = float(np.mean(winners == y))
    agree = float(np.mean(winners == software))
    print(f"wrote {path}  ({len(idx)} samples, crossbar accuracy={acc:.4f}, agreement with software={agree:.4f})")


def _print_quant_grid(report):
    qfs = sorted({r.q_f for r in report.records})
    qls = sorted({r.q_l for r in report.records})
    print(f"{report.dataset}: mean crossbar accuracy %, '*' marks delta_acc < 1%")
    print("q_f\\q_l " + "".join(f"{ql:>8d}" for ql in qls))
    for qf in qfs:
        cells = []
        for ql in qls:
            r = report.cell(qf, ql)
            cells.append(f"{100 * r.mean_acc:7.2f}{'*' if r.within_1pct else ' '}")
        print(f"{qf:>7d} " + "".join(cells))
    print(f"float baseline: {100 * report.records[0].baseline_mean_acc:.2f}%")


def _print_variation(report):
    print(f"{report.dataset}: accuracy under V_TH variation")
    print(f"{'sigma_mV':>9} {'mean%':>8} {'std%':>7} {'drop%':>7}")
    for r in report.records:
        print(f"{1e3 * r.sigma_vth:9.1f} {100 * r.mean_acc:8.2f} {100 * r.std_acc:7.2f} {100 * r.delta_acc:7.2f}")
    for note in report.notes:
        print(note)


def cmd_sweep_quant(args, cfg):
    ds = load_dataset(cfg.dataset, cfg.label_column)
    report = quant_sweep(ds, cfg.experiment())
    stem = args.output or Path(cfg.out_dir) / f"{ds.name}_quant"
    paths = emit_report(report, stem)
    _print_quant_grid(report)
    print("wrote " + ", ".join(str(p) for p in paths))


def cmd_sweep_variation(args, cfg):
    ds = load_dataset(cfg.dataset, cfg.label_column)
    exp = cfg.experiment(q_f_grid=(cfg.q_f,), q_l_grid=(cfg.q_l,))
    report = variation_sweep(ds, exp, cfg.q_f, cfg.q_l)
    stem = args.output or Path(cfg.out_dir) / f"{ds.name}_variation"
    paths = emit_report(report, stem)
    _print_variation(report)
    print("wrote " + ", ".join(str(p) for p in paths))


def cmd_report(args, cfg):
    path = Path(args.report)
    if not path.is_file():
        raise ConfigError(f"report not found: {path}")
    report = load_report(path)
    if report.kind == "quant_sweep":
        _print_quant_grid(report)
    else:
        _print_variation(report)
    print(f"config hash {report.metadata['config_hash']}")
    if args.csv_stem:
        paths = emit_report(report, args.csv_stem, formats=("csv",))
        print("wrote " + ", ".join(str(p) for p in paths))


COMMANDS = {
    "train": cmd_train,
    "map": cmd_map,
    "infer": cmd_infer,
    "sweep-quant": cmd_sweep_quant,
    "sweep-variation": cmd_sweep_variation,
    "report": cmd_report,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.print_config:
            print(json.dumps(cfg.to_json(), indent=2))
        COMMANDS[args.command](args, cfg)
    except ConfigError as e:
        print(f"febim: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (TypeError, ValueError) as e:
        # bad values that survive argparse, e.g. test_fraction=1.5
        print(f"febim: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FebimError as e:
        print(f"febim: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as e:
        print(f"febim: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
