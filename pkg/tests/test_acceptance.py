"""End-to-end acceptance checks. Each test prints one PASS/FAIL line."""

import itertools
import time

import numpy as np
import pytest

from febim import crossbar, experiments as ex, gnbc, mapping
from febim.cli import main
from febim.data import SplitSpec, load_dataset, split

EPOCHS = 100


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return _report


def test_1_iris_operating_point(iris, report):
    t = time.perf_counter()
    cfg = ex.ExperimentConfig(epochs=EPOCHS, q_f_grid=(4,), q_l_grid=(2,))
    rec = ex.quant_sweep(iris, cfg).records[0]
    dt = time.perf_counter() - t
    ok = 0.926 <= rec.mean_acc <= 0.966 and dt < 30
    report(1, ok, f"iris (4,2) crossbar acc {100 * rec.mean_acc:.2f}% "
                  f"(baseline {100 * rec.baseline_mean_acc:.2f}%), {dt:.1f} s")


def test_2_delta_region(iris, report):
    t = time.perf_counter()
    rep = ex.quant_sweep(iris, ex.ExperimentConfig(epochs=EPOCHS))
    dt = time.perf_counter() - t
    d42 = rep.cell(4, 2).delta_acc
    d88 = rep.cell(8, 8).delta_acc
    d11 = rep.cell(1, 1).delta_acc
    ok = len(rep.records) == 64 and d42 < 0.01 and d88 <= d11 and dt < 600
    report(2, ok, f"delta(4,2)={100 * d42:.2f}% delta(8,8)={100 * d88:.2f}% "
                  f"delta(1,1)={100 * d11:.2f}%, {dt:.1f} s")


@pytest.mark.parametrize("name", ["iris", "wine", "cancer"])
@pytest.mark.parametrize("q_f,q_l", [(8, 2), (2, 8)])
def test_3_low_precision(name, q_f, q_l, report):
    ds = load_dataset(name)
    cfg = ex.ExperimentConfig(dataset=name, epochs=EPOCHS, q_f_grid=(q_f,), q_l_grid=(q_l,))
    rec = ex.quant_sweep(ds, cfg).records[0]
    report(3, rec.delta_acc < 0.02,
           f"{name} (q_f={q_f}, q_l={q_l}) drop {100 * rec.delta_acc:.2f}% "
           f"(baseline {100 * rec.baseline_mean_acc:.2f}%, crossbar {100 * rec.mean_acc:.2f}%)")


def _oracle(mm, ev):
    """Direct argmax of prior plus summed likelihood states; lowest index on ties."""
    scores = [int(mm.prior_states[c]) + sum(int(mm.q_states[i, ev[i], c]) for i in range(mm.n))
              for c in range(mm.k)]
    return scores.index(max(scores))


def _small_model():
    rng = np.random.default_rng(3)
    X = np.vstack([rng.normal([0, 1], 1.0, (7, 2)), rng.normal([2, -1], 1.5, (5, 2))])
    y = np.repeat([0, 1], [7, 5])
    from febim.data import Dataset
    ds = Dataset("small", X, y, ("a", "b"), ("c0", "c1"))
    return mapping.map_model(gnbc.train(ds), ds, mapping.QuantSpec(q_f=2, q_l=2))


def test_4_oracle_equivalence(iris, report):
    dev = crossbar.DeviceModel()
    mm = _small_model()
    img = crossbar.program(mm)
    combos = list(itertools.product(range(4), repeat=2))
    small_ok = sum(crossbar.infer(img, dev, ev).winner == _oracle(mm, ev) for ev in combos)

    rng = np.random.default_rng(2024)
    agree = 0
    for j in range(1000):
        epoch = j // 50
        train, test = split(iris, SplitSpec(0.7, 0, epoch))
        mm = mapping.map_model(gnbc.train(train), train, mapping.QuantSpec(4, 2))
        x = test.features[rng.integers(test.n_samples)]
        ev = mapping.discretize(mm.bins, x)
        agree += crossbar.infer(crossbar.program(mm), dev, ev).winner == _oracle(mm, ev)
    ok = small_ok == 16 and agree == 1000
    report(4, ok, f"synthetic {small_ok}/16, iris {agree}/1000 agree with direct oracle")


def test_5_normalization_invariance(report):
    rng = np.random.default_rng(7)
    trials = 10_000
    agree = 0
    for _ in range(trials):
        k = int(rng.integers(2, 6))
        n = int(rng.integers(1, 8))
        cols = rng.dirichlet(np.ones(k), size=n)      # one column per feature
        prior = rng.dirichlet(np.ones(k))
        raw = np.log10(prior) + np.log10(cols).sum(axis=0)
        pp = (mapping.normalize_log_columns(np.log10(prior), np.inf)
              + mapping.normalize_log_columns(np.log10(cols), np.inf, axis=-1).sum(axis=0))
        agree += int(np.argmax(raw) == np.argmax(pp))
    report(5, agree == trials, f"{agree}/{trials} argmax matches at R=inf")


def test_6_current_range(report):
    spec = mapping.QuantSpec(q_l=2)
    levels = 10
    img = crossbar._build_image(2, 2, 2, levels, False,
                                np.array([[0, 0, 0, 0], [levels - 1] * 4]), spec.i_min, spec.i_max)
    lo = float(crossbar.row_currents(img, [0, 2])[0])
    hi = float(crossbar.row_currents(img, [0, 2])[1])
    report(6, lo == 0.2 and hi == 2.0, f"two-cell I_WL min {lo!r} uA, max {hi!r} uA at L=10")


def test_7_variation(iris, report):
    sigmas = (0.0, 0.015, 0.030, 0.045, 0.060)
    cfg = ex.ExperimentConfig(epochs=EPOCHS, sigmas=sigmas)
    rep = ex.variation_sweep(iris, cfg, 4, 2)
    acc = [rep.cell(4, 2, s).mean_acc for s in sigmas]
    zero = rep.cell(4, 2, 0.0)
    exact = zero.per_epoch_acc == zero.per_epoch_quantized_acc

    train, test = split(iris, SplitSpec(0.7, 0, 0))
    mm = mapping.map_model(gnbc.train(train), train, mapping.QuantSpec(4, 2))
    img = crossbar.program(mm)
    dev = crossbar.DeviceModel(sigma_vth=0.0)
    ev = mapping.discretize(mm.bins, test.features)
    a = crossbar.infer_batch(img, dev, ev, None)
    b = crossbar.infer_batch(img, dev, ev, crossbar.perturb(img, dev, 1))
    exact = exact and all(np.array_equal(x, y) for x, y in zip(a, b))

    monotone = all(acc[i + 1] <= acc[i] + 0.005 for i in range(len(acc) - 1))
    curve = ", ".join(f"{1000 * s:.0f}mV {100 * v:.2f}%" for s, v in zip(sigmas, acc))
    report(7, exact and monotone, f"bit-exact={exact}, {curve}; {rep.notes[0]}")


def test_8_determinism(tmp_path, report):
    def run_all(out):
        codes = [
            main(["sweep-quant", "--epochs", "3", "--qf-grid", "2-4", "--ql-grid", "1-2", "--out-dir", str(out)]),
            main(["sweep-variation", "--epochs", "3", "--sigmas", "0,45", "--out-dir", str(out)]),
            main(["train", "--seed", "4", "-o", str(out / "model.json")]),
            main(["map", "--model", str(out / "model.json"), "--out-dir", str(out)]),
            main(["infer", "--mapped", str(out / "mapped.json"), "--seed", "4", "--sigma-vth", "30",
                  "--trace", "-o", str(out / "pred.csv")]),
        ]
        return codes, {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.is_file()}

    c1, f1 = run_all(tmp_path / "a")
    c2, f2 = run_all(tmp_path / "b")
    ok = c1 == c2 == [0] * 5 and f1 == f2 and len(f1) >= 9
    report(8, ok, f"{len(f1)} output files byte-identical across two runs")


def test_9_excluded(capsys):
    with capsys.disabled():
        print("\nACCEPTANCE 9 EXCLUDED: density/efficiency figures, WTA transient timing and "
              "delay/energy scaling need circuit-level simulation; property checks above substitute")
    pytest.skip("circuit-level metrics are outside a behavioral simulator")
