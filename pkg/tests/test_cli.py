import csv
import json

import pytest

from febim import gnbc
from febim.cli import main
from febim.data import data_dir


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def mapped_dir(tmp_path):
    assert run("train", "--dataset", data_dir() / "iris.csv", "--seed", 42, "-o", tmp_path / "model.json") == 0
    assert run("map", "--model", tmp_path / "model.json", "--qf", 4, "--ql", 2, "--out-dir", tmp_path / "out") == 0
    return tmp_path


def test_train_writes_loadable_model(tmp_path):
    path = tmp_path / "model.json"
    assert run("train", "--dataset", data_dir() / "iris.csv", "--seed", 42, "-o", path) == 0
    params = gnbc.load_model(path)
    assert params.k == 3 and params.n == 4
    assert gnbc.GnbcParams.from_json(params.to_json()).means.tolist() == params.means.tolist()


def test_train_missing_file(tmp_path, capsys):
    assert run("train", "--dataset", tmp_path / "missing.csv") == 1
    assert "missing.csv" in capsys.readouterr().err


def test_bad_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run("train", "--bogus")
    assert exc.value.code == 1


def test_data_error_exit_code(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x,label\n1,a\nzz,b\n")
    assert run("train", "--dataset", p) == 2


def test_map_outputs(mapped_dir):
    doc = json.loads((mapped_dir / "out" / "crossbar.json").read_text())
    assert doc["geometry"]["rows"] == 3 and doc["geometry"]["cols"] == 64
    assert doc["geometry"]["has_prior_col"] is False
    with open(mapped_dir / "out" / "pulse_schedule.csv") as fh:
        assert len(list(csv.reader(fh))) == 1 + 3 * 64


def test_map_malformed_pulse_table(mapped_dir):
    (mapped_dir / "t.json").write_text("[0, 3, 2, 5]")
    assert run("map", "--model", mapped_dir / "model.json", "--pulse-table", mapped_dir / "t.json",
               "--out-dir", mapped_dir / "o2") == 1


def test_map_custom_pulse_table(mapped_dir):
    (mapped_dir / "t.json").write_text("[0, 1, 3, 7]")
    assert run("map", "--model", mapped_dir / "model.json", "--pulse-table", mapped_dir / "t.json",
               "--out-dir", mapped_dir / "o3") == 0
    doc = json.loads((mapped_dir / "o3" / "crossbar.json").read_text())
    assert {v for row in doc["pulse_schedule"] for v in row} <= {0, 1, 3, 7}


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_infer_noise_free_matches_software(mapped_dir):
    out = mapped_dir / "pred.csv"
    assert run("infer", "--mapped", mapped_dir / "out" / "mapped.json", "--crossbar",
               mapped_dir / "out" / "crossbar.json", "--dataset", "iris", "--seed", 42, "-o", out) == 0
    rows = _read(out)
    assert len(rows) == 105
    assert all(r["predicted"] == r["software_predicted"] for r in rows)


def test_infer_deterministic_and_trace(mapped_dir):
    outs = []
    for name in ("a.csv", "b.csv"):
        out = mapped_dir / name
        assert run("infer", "--mapped", mapped_dir / "out" / "mapped.json", "--sigma-vth", 45,
                   "--trace", "--seed", 3, "-o", out) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rows = _read(mapped_dir / "a.csv")
    assert {"i_wl_0_uA", "i_wl_1_uA", "i_wl_2_uA"} <= set(rows[0])
    for r in rows:
        assert 4 * 0.1 - 0.5 < float(r["i_wl_0_uA"]) < 4 * 1.0 + 0.5


def test_sweep_quant_rows_and_determinism(tmp_path, capsys):
    for d in ("a", "b"):
        assert run("sweep-quant", "--dataset", "iris", "--epochs", 2, "--qf-grid", "2-4",
                   "--ql-grid", "1,2", "--out-dir", tmp_path / d) == 0
    for name in ("iris_quant.json", "iris_quant.csv", "iris_quant_summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert len(_read(tmp_path / "a" / "iris_quant.csv")) == 3 * 2 * 2
    assert "q_f\\q_l" in capsys.readouterr().out


def test_default_sweep_contains_operating_point(tmp_path):
    assert run("sweep-quant", "--epochs", 1, "--out-dir", tmp_path) == 0
    rows = _read(tmp_path / "iris_quant_summary.csv")
    assert len(rows) == 64
    assert any(r["q_f"] == "4" and r["q_l"] == "2" for r in rows)


def test_sweep_variation_and_report(tmp_path, capsys):
    assert run("sweep-variation", "--epochs", 3, "--sigmas", "0,45", "--out-dir", tmp_path) == 0
    out = capsys.readouterr().out
    assert "45 mV" in out
    assert run("report", tmp_path / "iris_variation.json", "--csv", tmp_path / "again") == 0
    assert (tmp_path / "again.csv").read_bytes() == (tmp_path / "iris_variation.csv").read_bytes()


def test_report_rejects_invalid(tmp_path):
    p = tmp_path / "r.json"
    p.write_text('{"schema": "other"}')
    assert run("report", p) == 1


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"epochs": 2, "q_f_grid": [3], "q_l_grid": [3], "seed": 5}))
    assert run("sweep-quant", "--config", cfg, "--seed", 9, "--print-config", "--out-dir", tmp_path) == 0
    printed = capsys.readouterr().out
    resolved = json.loads(printed[: printed.index("\n}") + 2])
    assert resolved["seed"] == 9 and resolved["epochs"] == 2
    doc = json.loads((tmp_path / "iris_quant.json").read_text())
    assert doc["metadata"]["seed"] == 9
    assert doc["metadata"]["config"]["q_f_grid"] == [3]


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"nope": 1}')
    assert run("train", "--config", cfg) == 1


def test_smoke_epoch_fast(tmp_path):
    import time
    t = time.perf_counter()
    assert run("sweep-variation", "--epochs", 1, "--out-dir", tmp_path) == 0
    assert time.perf_counter() - t < 5
