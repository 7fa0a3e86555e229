import pytest

from svirs.config import parse_config
from svirs.sweep import header, sweep


def _rows(cfg):
    cols = header(cfg)
    return [dict(zip(cols, r)) for r in sweep(cfg)]


def test_pi_axis_R0_column():
    cfg = parse_config("sweep_param = Pi\nsweep_values = 5, 20\nt_end = 2000\n")
    rows = _rows(cfg)
    assert [r["pi"] for r in rows] == [5.0, 20.0]
    assert rows[0]["R0"] == pytest.approx(0.57031, abs=1e-4)
    assert rows[1]["R0"] == pytest.approx(2.2812, abs=1e-4)
    assert rows[0]["equilibrium"] == "disease-free" and rows[1]["equilibrium"] == "endemic"
    assert rows[0]["regime"] == "converged-disease-free"
    assert rows[1]["regime"] == "converged-endemic"
    assert all(r["error"] is None for r in rows)


def test_tau_axis_regimes():
    # tau = 19 sits just below the threshold; its oscillation decays at ~1e-3 per unit time
    cfg = parse_config("sweep_param = tau\nsweep_values = 60, 12, 20, 19\nt_end = 20000\nsample_every = 40\njobs = 2\n")
    rows = _rows(cfg)
    assert [r["tau"] for r in rows] == [12.0, 19.0, 20.0, 60.0]
    assert [r["regime"] for r in rows] == ["converged-endemic", "converged-endemic", "oscillatory", "oscillatory"]


def test_beta_zero_row_present():
    cfg = parse_config("sweep_param = beta\nsweep_values = 0, 0.0009\nsweep_mode = hopf\n")
    rows = _rows(cfg)
    assert rows[0]["beta"] == 0.0 and rows[0]["R0"] == 0.0
    assert rows[0]["equilibrium"] == "disease-free"
    assert "HypothesisError" in rows[0]["error"]
    assert rows[1]["classification"] == "stable-below-tau0-hopf-at-tau0"
    assert 19 < rows[1]["tau0"] < 20


def test_point_failures_do_not_stop_sweep():
    cfg = parse_config("sweep_param = tau\nsweep_values = 12, 95\nt_end = 700\n")
    rows = _rows(cfg)
    assert rows[0]["error"] is None
    assert "too short" in rows[1]["error"] and rows[1]["R0"] is not None


def test_parallel_matches_serial():
    text = "sweep_param = tau\nsweep_start = 10\nsweep_stop = 30\nsweep_count = 3\nsweep_mode = hopf\ntau_max = 40\n"
    assert sweep(parse_config(text)) == sweep(parse_config(text + "jobs = 3\n"))


def test_sweep_requires_axis():
    with pytest.raises(ValueError):
        sweep(parse_config(""))
