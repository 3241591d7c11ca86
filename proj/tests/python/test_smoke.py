"""Smoke tests for the Python bindings.

These exercise the binding layer end to end on small problem sizes; the
numerical heavy lifting is validated by the C++ test suite.
"""

import math

import pytest

import fdmimo


def small_config() -> fdmimo.SystemConfig:
    cfg = fdmimo.SystemConfig()
    cfg.opt.max_iters = 8
    cfg.trials = 2
    cfg.tau_grid_db = [-40.0, -15.0]
    return cfg


def test_default_config_fields():
    cfg = fdmimo.SystemConfig()
    assert cfg.n_tx == 4
    assert cfg.m_rx == 4
    assert cfg.n_tap == 8
    assert cfg.p_max_dbm == 20.0
    assert cfg.noise_dbm == -90.0
    assert cfg.epsilon_dbm == -47.0
    assert cfg.tau_grid_db == [-40.0, -35.0, -30.0, -25.0, -20.0, -15.0]
    assert cfg.opt.max_iters == 50
    assert cfg.opt.memory_len == 8
    cfg.validate()  # defaults are valid


def test_nested_optimizer_config_mutation_sticks():
    cfg = fdmimo.SystemConfig()
    cfg.opt.max_iters = 8
    assert cfg.opt.max_iters == 8


def test_validate_rejects_bad_fields():
    cfg = fdmimo.SystemConfig()
    cfg.n_tap = 0
    cfg.tau_db = 0.1
    with pytest.raises(fdmimo.ConfigError) as exc:
        cfg.validate()
    message = str(exc.value)
    assert "n_tap" in message
    assert "tau_db" in message


def test_config_json_round_trip():
    cfg = small_config()
    cfg.tau_db = -25.0
    text = cfg.to_json()
    back = fdmimo.SystemConfig.from_json(text)
    assert back.tau_db == -25.0
    assert back.opt.max_iters == 8
    assert back.tau_grid_db == [-40.0, -15.0]
    with pytest.raises(fdmimo.ConfigError):
        fdmimo.SystemConfig.from_json('{"n_tapp": 3}')


def test_run_trial_structure_and_determinism():
    cfg = small_config()
    res = fdmimo.run_trial(cfg, tau_db=-40.0, seed=7)

    assert len(res["nodes"]) == 2
    for k, node in enumerate(res["nodes"]):
        assert node["node"] == k + 1
        assert len(node["resid_si_dbm"]) == cfg.m_rx
        assert math.isfinite(node["sinr_db"])
        expected = math.log2(1.0 + 10.0 ** (node["sinr_db"] / 10.0))
        assert node["throughput_bps_hz"] == pytest.approx(expected, rel=1e-9)

    assert 1 <= res["iterations"] <= cfg.opt.max_iters
    assert len(res["objective_history"]) == res["iterations"] + 1
    assert res["fd_sum_throughput_bps_hz"] == pytest.approx(
        sum(n["throughput_bps_hz"] for n in res["nodes"]), rel=1e-12
    )
    assert res["hd_throughput_bps_hz"] > 0.0

    again = fdmimo.run_trial(cfg, tau_db=-40.0, seed=7)
    assert again == res
    other = fdmimo.run_trial(cfg, tau_db=-40.0, seed=8)
    assert other["objective_history"] != res["objective_history"]


def test_run_sweep_shape_and_run_id_determinism():
    cfg = small_config()
    out = fdmimo.run_sweep(cfg, master_seed=3, parallel=2)

    lines = out["csv"].strip().split("\n")
    assert len(lines) == 1 + 2 * cfg.trials * len(cfg.tau_grid_db)
    assert lines[0].startswith("tau_db,trial,node,sinr_db")

    summary = out["summary"]
    assert summary["failures"] == []
    assert len(summary["grid_points"]) == 2
    assert summary["grid_points"][0]["tau_db"] == -40.0
    assert summary["grid_points"][0]["trials"] == cfg.trials

    serial = fdmimo.run_sweep(cfg, master_seed=3, parallel=1)
    assert serial["csv"] == out["csv"]
    assert serial["summary"]["run_id"] == summary["run_id"]

    reseeded = fdmimo.run_sweep(cfg, master_seed=4, parallel=1)
    assert reseeded["summary"]["run_id"] != summary["run_id"]


def test_selfcheck_gradient_quick():
    ok, detail = fdmimo.selfcheck_gradient(seed=5, instances=5, tol=1e-5)
    assert ok, detail


def test_run_cli_help_and_bad_flag():
    assert fdmimo.run_cli(["--help"]) == 0
    assert fdmimo.run_cli(["solve", "--no-such-flag"]) == 2
