"""Run configuration, drop evaluation, experiment outputs, sweeps, and the
command line entry point."""

import filecmp
import json
import os

import numpy as np
import pytest

from cfmimo import (ConfigError, RunConfig, cdf, cli, consistency_pass,
                    evaluate_drop, run_energy_curve, run_experiment, sweep)


def tiny_config(**top):
    """Small but structurally complete run: both links, sharing pilots."""
    data = {
        "scenario": {"L": 4, "K": 3, "N": 2, "area_side_m": 500.0},
        "aging": {"tau_c": 20, "tau_p": 2, "f_D_Ts": 0.002},
        "uplink": {"schemes": ["lsfd", "mf"]},
        "downlink": {"schemes": ["coherent"]},
        "drops": 3,
        "seed": 5,
    }
    data.update(top)
    return RunConfig.from_dict(data)


def test_cdf_summary():
    c = cdf(np.arange(1, 101))
    assert abs(c.p05 - 5.95) < 1e-12
    assert abs(c.median - 50.5) < 1e-12
    assert abs(c.mean - 50.5) < 1e-12
    assert abs(c.quantile(1.0) - 100.0) < 1e-12
    rows = c.rows()
    assert rows[0] == (1.0, 0.01) and rows[-1] == (100.0, 1.0)
    with pytest.raises(ValueError):
        cdf([])


def test_config_roundtrip(tmp_path):
    cfg = tiny_config()
    again = RunConfig.from_dict(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict()
    path = tmp_path / "run.json"
    cfg.save(path)
    assert RunConfig.load(path).to_dict() == cfg.to_dict()


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"scenario": {"bogus": 1}})
    cfg = tiny_config()
    with pytest.raises(ConfigError):
        cfg.override("scenario.bogus", 1)
    with pytest.raises(ConfigError):
        cfg.override("uplink.power_control", "waterfilling")


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        tiny_config(aging={"tau_c": 2, "tau_p": 2, "f_D_Ts": 0.002})
    with pytest.raises(ConfigError):
        tiny_config(uplink={"schemes": ["zf"]})
    with pytest.raises(ConfigError):
        tiny_config(uplink={"schemes": []}, downlink={"schemes": []})
    with pytest.raises(ConfigError):
        tiny_config(aging={"tau_c": 20, "tau_p": 2, "f_D_Ts": -0.1})
    with pytest.raises(ConfigError):
        tiny_config(aging={"tau_c": 20, "tau_p": 2, "f_D_Ts": None})
    with pytest.raises(ConfigError):
        tiny_config(scenario={"L": 0})


def test_tau_c_auto_applies_design_rule():
    cfg = tiny_config(aging={"tau_c": "auto", "tau_p": 2, "f_D_Ts": 0.002})
    assert cfg.frame().tau_c == 191
    static = tiny_config(aging={"tau_c": "auto", "tau_p": 2, "f_D_Ts": 0.0})
    with pytest.raises(ValueError):
        static.frame()


def test_evaluate_drop_energy_requires_both_links():
    both = evaluate_drop(tiny_config(), 0)
    assert both.energy is not None and both.energy.ee > 0
    assert set(both.se) == {"lsfd", "mf", "coherent"}
    ul_only = evaluate_drop(tiny_config(downlink={"schemes": []}), 0)
    assert ul_only.energy is None


def test_run_experiment_outputs(tmp_path):
    cfg = tiny_config()
    res = run_experiment(cfg, out_dir=tmp_path / "a")
    want = {"cdf_coherent.csv", "cdf_lsfd.csv", "cdf_mf.csv", "energy.csv",
            "run_manifest.json"}
    assert set(res.files) == want
    assert set(os.listdir(tmp_path / "a")) == want
    with open(tmp_path / "a" / "cdf_lsfd.csv") as fh:
        assert fh.readline().strip() == "se_bits_per_hz,cdf"
    with open(tmp_path / "a" / "energy.csv") as fh:
        header = fh.readline().strip().split(",")
    assert header == ["drop", "p_tx_ul_w", "p_tx_dl_w", "p_cp_w", "p_total_w",
                      "se_sum_bits_per_hz", "ee_bits_per_joule"]
    with open(tmp_path / "a" / "run_manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["summary"]["lsfd"]["median"] > 0
    assert manifest["config"]["drops"] == 3
    assert "workers" not in manifest["config"]

    run_experiment(cfg, out_dir=tmp_path / "b")
    cmp = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", sorted(want),
                           shallow=False)
    assert cmp[1] == [] and cmp[2] == []


def test_consistency_pass_report(tmp_path):
    cfg = tiny_config(trials=1000, drops=2)
    res = run_experiment(cfg, out_dir=tmp_path)
    assert res.oracle_passed is True
    assert res.oracle_max_rel_err < cfg.oracle_rel_tol
    # lsfd + mf + coherent, 3 probe instants, 3 UEs
    assert len(res.oracle_rows) == 3 * 3 * 3
    with open(tmp_path / "run_manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["oracle"]["passed"] is True
    with open(tmp_path / "oracle_report.csv") as fh:
        header = fh.readline().strip().split(",")
    assert header == ["link", "scheme", "quantity", "instant", "ue", "closed",
                      "oracle", "oracle_stderr", "rel_err"]


def test_sweep_rows_and_csv(tmp_path):
    cfg = tiny_config(drops=2)
    with pytest.raises(ValueError):
        sweep(cfg, "bandwidth", [1, 2], write=False)
    rows = sweep(cfg, "f_D_Ts", [0.0, 0.002], out_dir=tmp_path)
    with open(tmp_path / "sweep_f_D_Ts.csv") as fh:
        header = fh.readline().strip().split(",")
    assert header == ["f_D_Ts", "scheme", "power_mode", "statistic", "value",
                      "stderr"]

    def pick(v, sch, stat):
        got = [r for r in rows if r["axis_value"] == v and r["scheme"] == sch
               and r["statistic"] == stat]
        assert len(got) == 1
        return got[0]["value"]

    for sch in ("lsfd", "mf", "coherent"):
        assert pick(0.0, sch, "median") > pick(0.002, sch, "median")
    assert pick(0.0, "lsfd+coherent", "ee") > 0
    assert pick(0.002, "lsfd+coherent", "p_total") > 0


def test_run_energy_curve_forces_reference_schemes():
    cfg = tiny_config(uplink={"schemes": ["mf"]}, downlink={"schemes": []})
    curve = run_energy_curve(cfg, [4, 8], drops=2)
    assert [l for l, _ in curve] == [4, 8]
    assert all(e.ee > 0 for _, e in curve)


def test_cli_run_and_exit_codes(tmp_path, capsys):
    path = tmp_path / "run.json"
    tiny_config(drops=2).save(path)
    out = tmp_path / "res"
    assert cli.main(["--config", str(path), "--out", str(out)]) == 0
    assert (out / "run_manifest.json").exists()
    printed = capsys.readouterr().out
    assert "lsfd: median" in printed and "wrote" in printed

    bad = tmp_path / "bad.json"
    bad.write_text('{"bogus": 1}\n')
    assert cli.main(["--config", str(bad)]) == 2
    assert cli.main(["--config", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["--config", str(path), "--set", "scenario.L=0"]) == 2


def test_cli_overrides_reach_the_manifest(tmp_path):
    path = tmp_path / "run.json"
    tiny_config().save(path)
    out = tmp_path / "res"
    code = cli.main(["--config", str(path), "--out", str(out), "--drops", "2",
                     "--seed", "9", "--set", "scenario.L=3"])
    assert code == 0
    with open(out / "run_manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["config"]["drops"] == 2
    assert manifest["config"]["seed"] == 9
    assert manifest["config"]["scenario"]["L"] == 3


def test_cli_oracle_failure_exit(tmp_path, monkeypatch):
    path = tmp_path / "run.json"
    tiny_config(drops=2).save(path)
    monkeypatch.setattr("cfmimo.harness.consistency_pass",
                        lambda cfg, drop_index=0: ([], 1.0))
    code = cli.main(["--config", str(path), "--out", str(tmp_path / "res"),
                     "--oracle", "50"])
    assert code == 3


def test_cli_sweep(tmp_path, capsys):
    path = tmp_path / "run.json"
    tiny_config(drops=2).save(path)
    out = tmp_path / "res"
    code = cli.main(["--config", str(path), "--out", str(out),
                     "--sweep", "f_D_Ts=0.0,0.002"])
    assert code == 0
    assert (out / "sweep_f_D_Ts.csv").exists()
