"""One-parameter sweeps producing a CSV-ready table of per-point summaries."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

from .config import RunConfig
from .equilibria import disease_free_equilibrium, endemic_equilibrium, thresholds
from .errors import SvirsError
from .hopf import critical_delays
from .simulate import AgeGrid, baseline_initial_state, detect_regime, run

COMMON = ("R0", "J_tau", "equilibrium", "S_eq", "V_eq", "I_eq")
MODE_COLUMNS = {
    "simulate": ("regime", "amplitude", "period", "mean_I", "clamp_count"),
    "hopf": ("classification", "tau0", "v0", "transversality_sign"),
}


def header(cfg: RunConfig) -> tuple:
    return (cfg.sweep.name, *COMMON, *MODE_COLUMNS[cfg.sweep_mode], "error")


def _simulate(cfg, params):
    grid = AgeGrid.build(params, da=cfg.dt, a_max=cfg.a_max)
    traj = run(params, baseline_initial_state(params, grid), grid, cfg.t_end, sample_every=cfg.sample_every)
    reg = detect_regime(traj)
    return {"regime": reg.label, "amplitude": reg.amplitude, "period": reg.period,
            "mean_I": reg.mean, "clamp_count": traj.clamp_count}


def _hopf(cfg, params):
    res = critical_delays(params, tau_max=cfg.tau_max, grid_step=cfg.grid_step, n_max=cfg.n_max)
    return {"classification": res.classification.value, "tau0": res.tau0, "v0": res.v0,
            "transversality_sign": res.transversality_sign}


def sweep_point(cfg: RunConfig, value: float) -> dict:
    """Summary for one axis value; failures go to the ``error`` field."""
    row = {cfg.sweep.name: value}
    try:
        params = cfg.params.replace(**{cfg.sweep.name: value})
        th = thresholds(params)
        row.update(R0=th.R0, J_tau=th.J_tau)
        eq = endemic_equilibrium(params) or disease_free_equilibrium(params)
        row.update(equilibrium=eq.kind.value, S_eq=eq.S, V_eq=eq.V, I_eq=eq.I)
        row.update(_simulate(cfg, params) if cfg.sweep_mode == "simulate" else _hopf(cfg, params))
    except (SvirsError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _point(args):
    return sweep_point(*args)


def sweep(cfg: RunConfig) -> list[tuple]:
    """Rows in ascending axis order, one per grid value.

    With ``cfg.jobs > 1`` points run in a process pool; row order does not
    depend on completion order.
    """
    if cfg.sweep is None:
        raise ValueError("config has no sweep axis")
    tasks = [(cfg, v) for v in cfg.sweep.values]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_point, tasks))
    else:
        results = [_point(t) for t in tasks]
    cols = header(cfg)
    return [tuple(r.get(c) for c in cols) for r in results]
