"""Run configuration: flat ``key = value`` files merged with CLI overrides."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ParameterError
from .model import PARAMETER_NAMES, Parameters, baseline_parameters

COMMANDS = ("equilibria", "stability", "hopf", "simulate", "sweep")
SWEEP_MODES = ("simulate", "hopf")


def canonical_parameter(name: str) -> str:
    """Map a user-supplied parameter name to its field name (case-insensitive)."""
    key = str(name).strip().lower()
    if key not in PARAMETER_NAMES:
        raise ConfigError(f"unknown parameter {name!r}; expected one of {', '.join(PARAMETER_NAMES)}", key=name)
    return key


@dataclass(frozen=True)
class SweepAxis:
    """Sweep over one parameter, either explicit ``values`` or a linear grid."""

    name: str
    values: tuple

    @classmethod
    def linear(cls, name, start, stop, count) -> SweepAxis:
        if count < 2:
            raise ConfigError(f"sweep count must be >= 2 (got {count})", key="sweep_count")
        if not start < stop:
            raise ConfigError(f"sweep start {start} must be < stop {stop}", key="sweep_start")
        return cls(canonical_parameter(name), tuple(float(v) for v in np.linspace(start, stop, int(count))))

    @classmethod
    def explicit(cls, name, values) -> SweepAxis:
        vals = tuple(sorted(float(v) for v in values))
        if len(vals) < 1:
            raise ConfigError("sweep values must not be empty", key="sweep_values")
        return cls(canonical_parameter(name), vals)


@dataclass(frozen=True)
class RunConfig:
    params: Parameters
    command: str | None = None
    dt: float = 0.05
    t_end: float = 2000.0
    sample_every: int = 20
    a_max: float = 100.0
    snapshots: tuple = ()
    tau_max: float = 100.0
    grid_step: float = 0.05
    n_max: int = 10
    output: str | None = None
    snapshot_dir: str | None = None
    plot: str | None = None
    sweep: SweepAxis | None = None
    sweep_mode: str = "simulate"
    jobs: int = 1
    sources: dict = field(default_factory=dict, compare=False, repr=False)


def _float_list(text):
    return tuple(float(x) for x in str(text).replace(",", " ").split())


def _str(text):
    return str(text).strip()


def _command(text):
    text = _str(text)
    if text not in COMMANDS:
        raise ValueError(f"expected one of {', '.join(COMMANDS)}")
    return text


def _sweep_mode(text):
    text = _str(text)
    if text not in SWEEP_MODES:
        raise ValueError(f"expected one of {', '.join(SWEEP_MODES)}")
    return text


def _int(text):
    if isinstance(text, (int, np.integer)) and not isinstance(text, bool):
        return int(text)
    value = float(text)
    if not value.is_integer():
        raise ValueError("expected an integer")
    return int(value)


def _float(text):
    if isinstance(text, bool):
        raise ValueError("expected a real number")
    return float(text)


# key -> converter; parameter names are added below
_CONTROLS = {
    "command": _command,
    "dt": _float,
    "t_end": _float,
    "sample_every": _int,
    "a_max": _float,
    "snapshots": _float_list,
    "tau_max": _float,
    "grid_step": _float,
    "n_max": _int,
    "output": _str,
    "snapshot_dir": _str,
    "plot": _str,
    "sweep_param": _str,
    "sweep_values": _float_list,
    "sweep_start": _float,
    "sweep_stop": _float,
    "sweep_count": _int,
    "sweep_mode": _sweep_mode,
    "jobs": _int,
}
KEYS = {**{name: _float for name in PARAMETER_NAMES}, **_CONTROLS}


def _normalise_key(key):
    k = key.strip().lower().replace("-", "_")
    return k


def read_entries(text: str) -> dict:
    """Parse ``key = value`` lines into ``{key: (raw_value, line_number)}``.

    ``#`` starts a comment; blank lines are ignored.  Duplicate and unknown
    keys are errors.
    """
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        norm = _normalise_key(key)
        if norm not in KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key, line=lineno)
        if norm in entries:
            raise ConfigError(f"duplicate key (first set on line {entries[norm][1]})", key=key, line=lineno)
        if not value:
            raise ConfigError("missing value", key=key, line=lineno)
        entries[norm] = (value, lineno)
    return entries


def parse_config(text: str = "", overrides: dict | None = None) -> RunConfig:
    """Build a :class:`RunConfig` from file contents and CLI overrides.

    Overrides win over file values; ``None`` override values are ignored.
    Parameters missing from both fall back to the baseline set.  Errors
    carry the offending key and, for file values, its line number.
    """
    entries = read_entries(text or "")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        norm = _normalise_key(key)
        if norm not in KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key)
        entries[norm] = (value, None)

    values = {}
    for key, (raw, lineno) in entries.items():
        try:
            values[key] = KEYS[key](raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value {raw!r}: {exc}", key=key, line=lineno) from None

    lines = {key: lineno for key, (_, lineno) in entries.items()}
    try:
        params = baseline_parameters(**{k: values[k] for k in PARAMETER_NAMES if k in values})
    except ParameterError as exc:
        raise ConfigError(str(exc), key=exc.name, line=lines.get(exc.name)) from None

    sweep = _sweep_axis(values, lines)
    controls = {k: values[k] for k in _CONTROLS if k in values and not k.startswith("sweep_")}
    if "sweep_mode" in values:
        controls["sweep_mode"] = values["sweep_mode"]
    cfg = RunConfig(params=params, sweep=sweep, sources=lines, **controls)
    _check_controls(cfg)
    return cfg


def _sweep_axis(values, lines):
    if "sweep_param" not in values:
        stray = [k for k in ("sweep_values", "sweep_start", "sweep_stop", "sweep_count") if k in values]
        if stray:
            raise ConfigError("sweep_param is required", key=stray[0], line=lines.get(stray[0]))
        return None
    name = values["sweep_param"]
    try:
        if "sweep_values" in values:
            return SweepAxis.explicit(name, values["sweep_values"])
        missing = [k for k in ("sweep_start", "sweep_stop", "sweep_count") if k not in values]
        if missing:
            raise ConfigError("sweep needs sweep_values or sweep_start/sweep_stop/sweep_count", key=missing[0])
        return SweepAxis.linear(name, values["sweep_start"], values["sweep_stop"], values["sweep_count"])
    except ConfigError as exc:
        key = exc.key if exc.key in lines else "sweep_param"
        raise ConfigError(str(exc).split(": ", 1)[-1], key=key, line=lines.get(key)) from None


_POSITIVE = ("dt", "t_end", "a_max", "tau_max", "grid_step")
_AT_LEAST_ONE = ("sample_every", "n_max", "jobs")


def _check_controls(cfg):
    for key in _POSITIVE:
        v = getattr(cfg, key)
        if not (np.isfinite(v) and v > 0):
            raise ConfigError(f"must be a positive finite number (got {v})", key=key, line=cfg.sources.get(key))
    for key in _AT_LEAST_ONE:
        if getattr(cfg, key) < 1:
            raise ConfigError("must be >= 1", key=key, line=cfg.sources.get(key))
    if any(t < 0 for t in cfg.snapshots):
        raise ConfigError("snapshot times must be >= 0", key="snapshots", line=cfg.sources.get("snapshots"))
