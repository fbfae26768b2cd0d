import json
import subprocess
import sys

import numpy as np
import pytest

from weakspin import CouplingTensor, first_order_expectation
from weakspin.cli import main
from weakspin.fileio import dump_json, load_records

from _helpers import random_unit

NV_DOC = {
    "coupling_mhz": {
        "xx": 5.0, "yy": 4.2, "zz": 8.2, "xy": -6.3, "xz": -2.9, "yz": -2.3,
    },
    "runs": [
        {"r_i": [0, 0, 1], "p": [0, 0.59, 0.81], "q": [-0.16, 0, 0.99], "dt": 0.091},
        {"r_i": [-0.48, 0.59, 0.65], "p": [0, 0, 1], "q": [-0.25, 0.59, -0.77], "dt": 0.086},
        {"r_i": [-0.81, 0.59, 0], "p": [-0.65, 0.59, -0.48], "q": [0.25, 0.59, -0.77], "dt": 0.073},
        {"r_i": [0, 0, 1], "p": [0, 0, 1], "q": [-0.99, 0, -0.16], "dt": 0.069},
        {"r_i": [0.81, 0, -0.59], "p": [-0.10, 0.95, 0.29], "q": [0, 0.81, -0.59], "dt": 0.066},
        {"r_i": [0.31, 0.95, 0], "p": [-0.18, 0.95, -0.25], "q": [0, 0.81, 0.59], "dt": 0.051},
    ],
    "options": {"seed": 5},
}


def _normalized_doc(doc):
    out = json.loads(json.dumps(doc))
    for run in out["runs"]:
        for key in ("r_i", "p", "q"):
            v = np.asarray(run[key], dtype=float)
            run[key] = (v / np.linalg.norm(v)).tolist()
    return out


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(dump_json(doc), encoding="utf-8")
    return str(path)


@pytest.fixture()
def nv_config(tmp_path):
    return _write(tmp_path, "nv.json", _normalized_doc(NV_DOC))


def test_simulate_writes_expected_dt_column(nv_config, tmp_path):
    out = tmp_path / "records.json"
    assert main(["simulate", "--config", nv_config, "--out", str(out)]) == 0
    records = load_records(str(out))
    assert [rec.dt for rec in records] == [0.091, 0.086, 0.073, 0.069, 0.066, 0.051]


def test_simulate_zero_coupling_keeps_inner_product(tmp_path):
    doc = _normalized_doc(NV_DOC)
    doc["coupling_mhz"] = {k: 0.0 for k in doc["coupling_mhz"]}
    config = _write(tmp_path, "zero.json", doc)
    out = tmp_path / "records.json"
    assert main(["simulate", "--config", config, "--out", str(out)]) == 0
    for rec in load_records(str(out)):
        assert rec.expectation == pytest.approx(float(rec.q @ rec.p), abs=1e-12)


def test_simulate_deterministic_bytes(nv_config, tmp_path):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    for out in (out1, out2):
        code = main(
            ["simulate", "--config", nv_config, "--out", str(out),
             "--seed", "11", "--noise", "0.01"]
        )
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_simulate_rejects_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"coupling_mhz": {', encoding="utf-8")
    assert main(["simulate", "--config", str(bad), "--out", "-"]) == 2
    err = capsys.readouterr().err
    assert "line" in err and "column" in err


def test_simulate_rejects_unknown_key(tmp_path):
    doc = _normalized_doc(NV_DOC)
    doc["unsupported"] = True
    config = _write(tmp_path, "unknown.json", doc)
    assert main(["simulate", "--config", config, "--out", "-"]) == 2


def test_simulate_rejects_invalid_run(tmp_path, capsys):
    doc = _normalized_doc(NV_DOC)
    doc["runs"][3]["dt"] = -0.5
    config = _write(tmp_path, "invalid.json", doc)
    assert main(["simulate", "--config", config, "--out", "-"]) == 3
    assert "dt" in capsys.readouterr().err


def test_estimate_round_trip_recovers_tensor(nv_config, tmp_path):
    records = tmp_path / "records.json"
    report = tmp_path / "report.json"
    assert main(["simulate", "--config", nv_config, "--out", str(records)]) == 0
    code = main(
        ["estimate", "--records", str(records), "--config", nv_config,
         "--out", str(report)]
    )
    assert code == 0
    doc = json.loads(report.read_text())
    assert set(doc["coupling_mhz"]) == {"xx", "yy", "zz", "xy", "xz", "yz"}
    assert "error_mean_mhz" in doc
    assert doc["condition_number"] > 1.0
    assert len(doc["per_record_residuals"]) == 6


def test_estimate_exact_on_model_synthesized_records(tmp_path):
    rng = np.random.default_rng(123)
    g = CouplingTensor(np.array([5.0, 4.2, 8.2, -6.3, -2.9, -2.3]))
    records = []
    while len(records) < 6:
        r_i, r_f, p, q = (random_unit(rng) for _ in range(4))
        if 1.0 + r_i @ r_f < 0.2:
            continue
        dt = rng.uniform(0.02, 0.08)
        e = first_order_expectation(r_i, r_f, p, q, dt, g)
        if abs(e) > 1.0:
            continue
        records.append(
            {"r_i": r_i.tolist(), "r_f": r_f.tolist(), "p": p.tolist(),
             "q": q.tolist(), "dt": dt, "expectation": e}
        )
    path = tmp_path / "synthetic.json"
    path.write_text(dump_json({"records": records}), encoding="utf-8")
    report = tmp_path / "report.json"
    assert main(["estimate", "--records", str(path), "--out", str(report)]) == 0
    doc = json.loads(report.read_text())
    estimated = [doc["coupling_mhz"][k] for k in ("xx", "yy", "zz", "xy", "xz", "yz")]
    assert np.abs(np.array(estimated) - g.values).max() < 1e-9
    assert doc["residual_norm"] < 1e-9


def test_estimate_needs_six_records(tmp_path):
    doc = {"records": []}
    path = tmp_path / "empty.json"
    path.write_text(dump_json(doc), encoding="utf-8")
    assert main(["estimate", "--records", str(path), "--out", "-"]) == 3


def test_estimate_duplicate_records_ill_conditioned(nv_config, tmp_path, capsys):
    records = tmp_path / "records.json"
    main(["simulate", "--config", nv_config, "--out", str(records)])
    doc = json.loads(records.read_text())
    doc["records"] = [doc["records"][0]] * 6
    dup = tmp_path / "dup.json"
    dup.write_text(dump_json(doc), encoding="utf-8")
    assert main(["estimate", "--records", str(dup), "--out", "-"]) == 4
    assert "condition number" in capsys.readouterr().err


def test_curve_csv_output(nv_config, tmp_path):
    out = tmp_path / "curve.csv"
    code = main(
        ["curve", "--config", nv_config, "--run-index", "0",
         "--grid", "0.002:0.2:0.002", "--out", str(out)]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "dt_us,delta,dent"
    assert len(lines) == 101
    # a deep dent exists on this curve; it must be flagged
    flags = [int(line.split(",")[2]) for line in lines[1:]]
    assert sum(flags) >= 1


def test_curve_zero_coupling_all_zero(tmp_path):
    doc = _normalized_doc(NV_DOC)
    doc["coupling_mhz"] = {k: 0.0 for k in doc["coupling_mhz"]}
    config = _write(tmp_path, "zero.json", doc)
    out = tmp_path / "curve.csv"
    assert main(["curve", "--config", config, "--run-index", "0", "--out", str(out)]) == 0
    deltas = [float(line.split(",")[1]) for line in out.read_text().splitlines()[1:]]
    assert max(deltas) < 1e-12


def test_curve_bad_grid_is_parse_error(nv_config):
    assert main(["curve", "--config", nv_config, "--run-index", "0",
                 "--grid", "0.2:0.1:0.001", "--out", "-"]) == 2


def test_curve_index_out_of_range(nv_config):
    assert main(["curve", "--config", nv_config, "--run-index", "6", "--out", "-"]) == 3


def test_design_command_runs(nv_config, tmp_path, capsys):
    out = tmp_path / "designs.json"
    code = main(
        ["design", "--config", nv_config, "--count", "4", "--seed", "2",
         "--grid", "0.002:0.08:0.002", "--out", str(out)]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["candidates"]) == 4
    conds = [c["condition_number"] for c in doc["candidates"]]
    assert conds == sorted(conds)
    assert "best of 4" in capsys.readouterr().out


def test_reproduce_nv_default_fails_honestly(capsys):
    # the bundled scenario does not reproduce its published reference at
    # the published interaction times under either unit convention
    code = main(["reproduce-nv"])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL" in out
    assert "published reference" in out


def test_reproduce_nv_passes_deep_in_weak_regime(capsys):
    code = main(["reproduce-nv", "--dt-scale", "0.001"])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS" in out


def test_reproduce_nv_noise_degrades(capsys):
    code = main(["reproduce-nv", "--dt-scale", "0.001", "--noise", "0.05"])
    assert code == 1


def test_entry_point_runs_as_subprocess(nv_config, tmp_path):
    out = tmp_path / "rec.json"
    proc = subprocess.run(
        [sys.executable, "-m", "weakspin.cli", "simulate",
         "--config", nv_config, "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert out.exists()


def test_bad_subcommand_exits_with_parse_code():
    assert main(["frobnicate"]) == 2
