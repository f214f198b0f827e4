import csv
import json
import os
import xml.etree.ElementTree as ET

import numpy as np
import pytest

import nhse_lab.cli as cli
from nhse_lab import (
    ConfigError,
    WaveState,
    load_config,
    model_from_dict,
    model_to_dict,
    parse_config,
    serialize_config,
    write_csv,
    write_state_csv,
)

SKIN = {"label": "skin", "hoppings": [
    {"r": -2, "re": 0.6}, {"r": -1, "re": 0.8}, {"r": 1, "re": 1.0}, {"r": 2, "re": 0.8}]}
HERMITIAN = {"label": "herm", "hoppings": [{"r": -1, "re": 1.0}, {"r": 1, "re": 1.0}]}
RECIPROCAL = {"label": "recip", "hoppings": [
    {"r": -1, "re": 1.0, "im": -0.6}, {"r": 1, "re": 1.0, "im": -0.6},
    {"r": -2, "re": 0.5, "im": 0.1}, {"r": 2, "re": 0.5, "im": 0.1}]}


def _cfg_file(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def _read_csv(path):
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


def test_model_dict_roundtrip():
    m = model_from_dict(SKIN)
    assert m.hoppings == {-2: 0.6, -1: 0.8, 1: 1.0, 2: 0.8}
    assert model_from_dict(model_to_dict(m)) == m


def test_model_dict_fail_closed():
    with pytest.raises(ConfigError):
        model_from_dict({"hoppings": [], "extra": 1})
    with pytest.raises(ConfigError):
        model_from_dict({"label": "x"})
    with pytest.raises(ConfigError):
        model_from_dict({"hoppings": [{"r": 1, "re": 1.0, "phase": 0.0}]})
    with pytest.raises(ConfigError):
        model_from_dict({"hoppings": [{"r": 1, "re": 1.0}, {"r": 1, "re": 2.0}]})
    with pytest.raises(ConfigError):
        model_from_dict({"hoppings": [{"r": 1, "re": "big"}]})
    with pytest.raises(ConfigError):
        model_from_dict({"hoppings": []})


def test_config_roundtrip_all_kinds():
    docs = [
        {"schema": 1, "kind": "spectrum", "model": SKIN},
        {"schema": 1, "kind": "evolve", "model": SKIN, "t_final": 10.0},
        {"schema": 1, "kind": "walk", "beta": 1.2, "h": 0.05,
         "protocol": "two_pulse", "steps": 12},
        {"schema": 1, "kind": "accel_report", "seed": 3},
    ]
    for doc in docs:
        cfg = parse_config(doc)
        assert parse_config(serialize_config(cfg)) == cfg


def test_config_defaults():
    cfg = parse_config({"schema": 1, "kind": "evolve", "model": SKIN, "t_final": 5})
    assert cfg.n_times == 25 and cfg.dt == 0.01 and cfg.engine == "bloch"
    rep = parse_config({"schema": 1, "kind": "accel_report", "seed": 0})
    assert rep.n_models == 20 and rep.family == "nhse"


@pytest.mark.parametrize("doc", [
    {"kind": "spectrum", "model": SKIN},
    {"schema": 2, "kind": "spectrum", "model": SKIN},
    {"schema": 1, "kind": "banded", "model": SKIN},
    {"schema": 1, "kind": "spectrum", "model": SKIN, "t_final": 4},
    {"schema": 1, "kind": "evolve", "model": SKIN},
    {"schema": 1, "kind": "evolve", "model": SKIN, "t_final": 4, "engine": "euler"},
    {"schema": 1, "kind": "evolve", "model": SKIN, "t_final": 4, "n_k": 333},
    {"schema": 1, "kind": "walk", "beta": 4.0, "h": 0.0,
     "protocol": "two_pulse", "steps": 5},
    {"schema": 1, "kind": "walk", "beta": 1.2, "h": 0.0,
     "protocol": "three_pulse", "steps": 5},
    {"schema": 1, "kind": "walk", "beta": 1.2, "h": 0.0,
     "protocol": "two_pulse", "steps": 5, "window_halfwidth": 3},
    {"schema": 1, "kind": "walk", "beta": 1.2, "h": 0.0,
     "protocol": "two_pulse", "steps": 5, "fit_window": 1},
    {"schema": 1, "kind": "accel_report", "seed": 3, "family": "exotic"},
    {"schema": 1, "kind": "accel_report"},
])
def test_config_rejection(doc):
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_csv_full_precision(tmp_path):
    values = [np.pi, 1.0 / 3.0, -2.8902652413026098, 1e-17]
    path = tmp_path / "x.csv"
    write_csv(path, "i,x", ((i, v) for i, v in enumerate(values)))
    header, rows = _read_csv(path)
    assert header == ["i", "x"]
    assert [float(r[1]) for r in rows] == values
    assert rows[0][0] == "0"


def test_state_csv(tmp_path):
    st = WaveState((-1, 1), np.array([0.5j, 1.0, 0.0]))
    path = tmp_path / "state.csv"
    write_state_csv(path, st)
    header, rows = _read_csv(path)
    assert header == ["n", "Re_psi", "Im_psi", "abs2"]
    assert rows[0][0] == "-1"
    assert float(rows[0][2]) == 0.5
    assert float(rows[0][3]) == 0.25


def test_cli_spectrum(tmp_path):
    cfgp = _cfg_file(tmp_path, "s.json",
                     {"schema": 1, "kind": "spectrum", "model": SKIN, "obc_sites": 50})
    out = str(tmp_path / "out")
    assert cli.main(["spectrum", "--config", cfgp, "--out", out]) == 0
    summary = json.load(open(os.path.join(out, "summary.json")))
    assert abs(summary["area"] - (-2.8902652413026098)) < 1e-9
    assert abs(summary["area_quadrature"] - summary["area"]) < 1e-9
    assert abs(summary["v_m"] - (-4.1233325)) < 1e-4
    assert summary["nhse_flag"] is True
    assert summary["degenerate_max"] is False
    header, rows = _read_csv(os.path.join(out, "obc.csv"))
    assert header == ["index", "Re_E", "Im_E"]
    assert len(rows) == 50
    ET.parse(os.path.join(out, "spectrum.svg"))


def test_cli_spectrum_hermitian_obc_real(tmp_path):
    cfgp = _cfg_file(tmp_path, "h.json",
                     {"schema": 1, "kind": "spectrum", "model": HERMITIAN})
    out = str(tmp_path / "out")
    assert cli.main(["spectrum", "--config", cfgp, "--out", out]) == 0
    _, rows = _read_csv(os.path.join(out, "obc.csv"))
    assert len(rows) == 60
    assert max(abs(float(r[2])) for r in rows) < 1e-10


def test_cli_evolve_reciprocal_stays_put(tmp_path):
    cfgp = _cfg_file(tmp_path, "e.json",
                     {"schema": 1, "kind": "evolve", "model": RECIPROCAL,
                      "t_final": 2.0, "n_times": 5, "n_k": 512})
    out = str(tmp_path / "out")
    assert cli.main(["evolve", "--config", cfgp, "--out", out]) == 0
    fit = json.load(open(os.path.join(out, "fit.json")))
    assert set(fit) == {"a_fit", "a_predicted", "rel_err", "t_star", "v_fit", "v_m"}
    assert abs(fit["a_predicted"]) < 1e-12
    _, rows = _read_csv(os.path.join(out, "trajectory.csv"))
    assert max(abs(float(r[1])) for r in rows) < 1e-6
    assert rows[0][2] == "bloch"
    ET.parse(os.path.join(out, "evolution.svg"))


def test_cli_evolve_hermitian_symmetric_map(tmp_path):
    cfgp = _cfg_file(tmp_path, "e.json",
                     {"schema": 1, "kind": "evolve", "model": HERMITIAN,
                      "t_final": 3.0, "n_times": 4, "n_k": 512})
    out = str(tmp_path / "out")
    assert cli.main(["evolve", "--config", cfgp, "--out", out]) == 0
    _, rows = _read_csv(os.path.join(out, "intensity_map.csv"))
    by_tn = {(r[0], int(r[1])): float(r[2]) for r in rows}
    for (t, n), a in by_tn.items():
        assert abs(a - by_tn[(t, -n)]) < 1e-8


def test_cli_walk(tmp_path):
    cfgp = _cfg_file(tmp_path, "w.json",
                     {"schema": 1, "kind": "walk", "beta": 0.45 * np.pi, "h": 0.05,
                      "protocol": "two_pulse", "steps": 8})
    out = str(tmp_path / "out")
    assert cli.main(["walk", "--config", cfgp, "--out", out]) == 0
    fit = json.load(open(os.path.join(out, "walk_fit.json")))
    assert set(fit) == {"a_fit", "a_predicted", "rel_err", "fit_window"}
    header, rows = _read_csv(os.path.join(out, "walk_map.csv"))
    assert header == ["m", "n", "intensity_u", "intensity_v"]
    assert len(rows) == 9 * 37
    ET.parse(os.path.join(out, "walk.svg"))


def test_cli_walk_balanced_gain_is_static(tmp_path):
    cfgp = _cfg_file(tmp_path, "w0.json",
                     {"schema": 1, "kind": "walk", "beta": 1.2, "h": 0.0,
                      "protocol": "two_pulse", "steps": 10})
    out = str(tmp_path / "out")
    assert cli.main(["walk", "--config", cfgp, "--out", out]) == 0
    _, rows = _read_csv(os.path.join(out, "walk_trajectory.csv"))
    assert max(abs(float(r[1])) for r in rows) < 1e-8


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    out = str(tmp_path / "out")
    assert cli.main(["spectrum", "--config", str(bad), "--out", out]) == 1

    walk_cfg = _cfg_file(tmp_path, "w.json",
                         {"schema": 1, "kind": "walk", "beta": 1.2, "h": 0.0,
                          "protocol": "two_pulse", "steps": 5})
    assert cli.main(["spectrum", "--config", walk_cfg, "--out", out]) == 1

    spec_cfg = _cfg_file(tmp_path, "s.json",
                         {"schema": 1, "kind": "spectrum", "model": SKIN})
    with pytest.raises(ConfigError):
        # argparse errors are rethrown as config errors before main's handler
        cli._build_parser().parse_args(["spectrum", "--bogus"])
    assert cli.main(["spectrum", "--config", spec_cfg, "--out", out,
                     "--steps", "5"]) == 1
    assert cli.main(["spectrum", "--config", spec_cfg, "--out", out,
                     "--nk", "333"]) == 1

    walk_cfg2 = _cfg_file(tmp_path, "w2.json",
                          {"schema": 1, "kind": "walk", "beta": 1.2, "h": 0.0,
                           "protocol": "two_pulse", "steps": 5})
    assert cli.main(["walk", "--config", walk_cfg2, "--out", out, "--seed", "4"]) == 1


def test_cli_numerical_failure(tmp_path):
    cfgp = _cfg_file(tmp_path, "e.json",
                     {"schema": 1, "kind": "evolve", "model": SKIN,
                      "t_final": 20.0, "n_times": 5, "n_k": 512,
                      "window_halfwidth": 30})
    out = str(tmp_path / "out")
    assert cli.main(["evolve", "--config", cfgp, "--out", out]) == 2


def test_cli_report_breach(tmp_path, monkeypatch):
    cfgp = _cfg_file(tmp_path, "r.json",
                     {"schema": 1, "kind": "accel_report", "seed": 1,
                      "n_models": 3, "n_k": 1024})
    out = str(tmp_path / "out")
    monkeypatch.setattr(cli, "_REPORT_THRESHOLD", 1e-9)
    assert cli.main(["report", "--config", cfgp, "--out", out]) == 3
    summary = json.load(open(os.path.join(out, "report_summary.json")))
    assert summary["breach"] is True


def test_report_determinism_across_threads(tmp_path, monkeypatch):
    cfgp = _cfg_file(tmp_path, "r.json",
                     {"schema": 1, "kind": "accel_report", "seed": 7,
                      "n_models": 4, "n_k": 1024})
    blobs = []
    for threads in ("1", "4"):
        out = tmp_path / f"out{threads}"
        monkeypatch.setenv("NHSE_LAB_THREADS", threads)
        assert cli.main(["report", "--config", cfgp, "--out", str(out)]) == 0
        blobs.append((out / "report.csv").read_bytes()
                     + (out / "report_summary.json").read_bytes())
    assert blobs[0] == blobs[1]

    monkeypatch.setenv("NHSE_LAB_THREADS", "0")
    assert cli.main(["report", "--config", cfgp, "--out", str(tmp_path / "o")]) == 1


def test_shipped_configs_parse():
    base = os.path.join(os.path.dirname(__file__), "..", "configs")
    names = sorted(os.listdir(base))
    assert len(names) == 11
    for name in names:
        load_config(os.path.join(base, name))
