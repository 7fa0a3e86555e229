"""Command-line entry point: ``svirs <command> [options]``.

Exit status is 0 on success, 1 when the input is well formed but an
analysis hypothesis fails (or a run blows up), and 2 on usage errors.
Data goes to stdout (or ``--output``), diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .config import COMMANDS, SWEEP_MODES, RunConfig, parse_config
from .equilibria import disease_free_equilibrium, endemic_equilibrium, thresholds
from .errors import DomainError, UsageError
from .hopf import critical_delays
from .model import PARAMETER_NAMES
from .output import csv_text, dumps, snapshot_csv, trajectory_csv
from .plot import emit_plot
from .simulate import AgeGrid, baseline_initial_state, detect_regime, run
from .stability import (
    char_coefficients,
    delay_free_polynomial,
    dfe_eigenvalues,
    polynomial_roots,
    routh_hurwitz_H,
    zero_delay_coefficients,
)
from .sweep import header, sweep

_PARAM_HELP = {
    "pi": "recruitment rate",
    "beta": "transmission rate",
    "mu": "natural mortality",
    "iota": "vaccination rate",
    "eta": "vaccine waning rate",
    "gamma": "recovery rate",
    "d": "disease-induced mortality",
    "sigma": "relative susceptibility of vaccinated",
    "theta_star": "immunity-loss rate after the immunity period",
    "tau": "immunity period",
}


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="key = value file; flags override it")
    common.add_argument("-o", "--output", metavar="PATH", help="write data here instead of stdout")
    group = common.add_argument_group("model parameters (default: reference set)")
    for name in PARAMETER_NAMES:
        flags = [f"--{name.replace('_', '-')}"]
        if name == "pi":
            flags.append("--Pi")
        group.add_argument(*flags, dest=name, type=float, metavar="X", help=_PARAM_HELP[name])
    return common


def _sim_options(p):
    p.add_argument("--dt", type=float, help="time step, equal to the age step (default 0.05)")
    p.add_argument("--t-end", dest="t_end", type=float, help="final time (default 2000)")
    p.add_argument("--sample-every", dest="sample_every", type=int, help="store every k-th step (default 20)")
    p.add_argument("--a-max", dest="a_max", type=float, help="age truncation (default 100)")


def _hopf_options(p):
    p.add_argument("--tau-max", dest="tau_max", type=float, help="upper end of the delay scan (default 100)")
    p.add_argument("--grid-step", dest="grid_step", type=float, help="delay scan step (default 0.05)")
    p.add_argument("--n-max", dest="n_max", type=int, help="largest 2*pi branch index (default 10)")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="svirs", description="SVIRS model with age-structured immunity loss.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub.add_parser("equilibria", parents=[common], help="R0, J(tau) and steady states (JSON)")
    sub.add_parser("stability", parents=[common], help="linearisation at the steady states (JSON)")
    h = sub.add_parser("hopf", parents=[common], help="critical delays and transversality (JSON)")
    _hopf_options(h)

    s = sub.add_parser("simulate", parents=[common], help="time integration (CSV)")
    _sim_options(s)
    s.add_argument("--snapshots", type=str, metavar="T1,T2,...", help="times at which to dump R(a)")
    s.add_argument("--snapshot-dir", dest="snapshot_dir", metavar="DIR", help="directory for a,R snapshot CSVs")
    s.add_argument("--plot", metavar="SVG", help="write an SVG plot of S, V, I")

    w = sub.add_parser("sweep", parents=[common], help="one-parameter sweep (CSV)")
    w.add_argument("--param", dest="sweep_param", metavar="NAME", help="parameter to vary")
    w.add_argument("--values", dest="sweep_values", metavar="X1,X2,...", help="explicit axis values")
    w.add_argument("--start", dest="sweep_start", type=float)
    w.add_argument("--stop", dest="sweep_stop", type=float)
    w.add_argument("--count", dest="sweep_count", type=int)
    w.add_argument("--mode", dest="sweep_mode", choices=SWEEP_MODES, help="per-point analysis (default simulate)")
    w.add_argument("--jobs", type=int, help="worker processes (default 1)")
    _sim_options(w)
    _hopf_options(w)
    return parser


def _write(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_equilibria(cfg):
    p = cfg.params
    th = thresholds(p)
    report = {
        "parameters": p.as_dict(),
        "R0": th.R0,
        "J_tau": th.J_tau,
        "J_below_removal_rate": th.hopf_feasible,
        "disease_free": disease_free_equilibrium(p).as_dict(),
        "endemic": None,
    }
    eq = endemic_equilibrium(p)
    if eq is not None:
        report["endemic"] = eq.as_dict()
    _write(dumps(report), cfg.output)


def cmd_stability(cfg):
    p = cfg.params
    eig = dfe_eigenvalues(p)
    report = {
        "parameters": p.as_dict(),
        "R0": thresholds(p).R0,
        "disease_free": {"eigenvalues": list(eig), "stable": all(e < 0 for e in eig)},
        "endemic": None,
    }
    eq = endemic_equilibrium(p)
    if eq is not None:
        coeffs = char_coefficients(p, eq)
        eq0, c0 = zero_delay_coefficients(p)
        rh = routh_hurwitz_H(c0)
        report["endemic"] = {
            "equilibrium": eq.as_dict(),
            "coefficients": coeffs.as_dict(),
            "zero_delay": {
                "equilibrium": eq0.as_dict(),
                "coefficients": c0.as_dict(),
                "routh_hurwitz": rh.as_dict(),
                "roots": list(polynomial_roots(delay_free_polynomial(c0))),
            },
        }
    _write(dumps(report), cfg.output)


def cmd_hopf(cfg):
    res = critical_delays(cfg.params, tau_max=cfg.tau_max, grid_step=cfg.grid_step, n_max=cfg.n_max)
    _write(dumps({"parameters": cfg.params.as_dict(), **res.as_dict()}), cfg.output)


def cmd_simulate(cfg):
    p = cfg.params
    grid = AgeGrid.build(p, da=cfg.dt, a_max=cfg.a_max)
    traj = run(p, baseline_initial_state(p, grid), grid, cfg.t_end,
               sample_every=cfg.sample_every, snapshot_times=cfg.snapshots)
    _write(trajectory_csv(traj), cfg.output)
    if cfg.snapshots:
        folder = cfg.snapshot_dir or "."
        os.makedirs(folder, exist_ok=True)
        for ts, R in sorted(traj.snapshots.items()):
            with open(os.path.join(folder, f"R_t{ts:g}.csv"), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(snapshot_csv(grid.ages, R))
    if cfg.plot:
        emit_plot(traj, cfg.plot)
    summary = {"clamp_count": traj.clamp_count}
    try:
        summary.update(detect_regime(traj).as_dict())
    except ValueError as exc:
        summary["regime"] = f"unclassified: {exc}"
    # keep stdout pure CSV when it carries the trajectory
    stream = sys.stderr if cfg.output in (None, "-") else sys.stdout
    stream.write(dumps(summary))


def cmd_sweep(cfg):
    if cfg.sweep is None:
        raise UsageError("sweep needs --param with --values or --start/--stop/--count")
    _write(csv_text(header(cfg), sweep(cfg)), cfg.output)


HANDLERS = {
    "equilibria": cmd_equilibria,
    "stability": cmd_stability,
    "hopf": cmd_hopf,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}
assert set(HANDLERS) == set(COMMANDS)


def config_from_args(args) -> RunConfig:
    text = ""
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "command")}
    overrides["command"] = args.command
    return parse_config(text, overrides)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        HANDLERS[args.command](cfg)
    except UsageError as exc:
        print(f"svirs {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"svirs {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"svirs {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
