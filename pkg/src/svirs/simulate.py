"""Time integration of the SVIRS system with an age-structured R compartment.

The age step equals the time step, so the transport part of the
recovered-age equation is exact along characteristics: each step shifts
the age profile one cell to the right and applies the survival factor
``1 - (mu + theta) dt``.  ``S``, ``V`` and ``I`` use forward Euler.

Cells are ``[k da, (k+1) da)``; ``R_cells[k]`` is the density at the
left edge.  The cell containing the knot ``a = tau`` gets the fraction of
``theta_star`` covering its part above ``tau``, both in the immunity-return
integral and in the decay factor, so mass leaving R equals mass entering S.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .equilibria import Equilibrium, disease_free_equilibrium, endemic_equilibrium
from .errors import DomainError, SimulationUnstable, UsageError
from .model import Parameters

BLOWUP = 1e12
MAX_CLAMP_FRACTION = 1e-3


@dataclass(frozen=True)
class AgeGrid:
    da: float
    a_max: float
    n_cells: int
    knot_index: int
    theta_cells: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, params: Parameters, da: float = 0.05, a_max: float = 100.0,
              check_tail: bool = True) -> AgeGrid:
        """Grid of ``a_max / da`` cells with cell-averaged immunity-loss rates.

        Raises :class:`UsageError` if ``a_max / da`` is not an integer or
        (with ``check_tail``) if ``a_max < tau + 10 / (mu + theta_star)``,
        i.e. the truncated tail would carry relative mass above ~5e-5.
        """
        if not da > 0:
            raise UsageError("da must be positive")
        n = int(round(a_max / da))
        if n < 1 or abs(n * da - a_max) > 1e-9 * a_max:
            raise UsageError(f"a_max={a_max} is not an integer multiple of da={da}")
        need = params.tau + 10.0 / (params.mu + params.theta_star)
        if check_tail and a_max < need:
            raise UsageError(f"a_max={a_max} too short for tau={params.tau}: need >= {need:.3f}")
        # knot position in cell units, snapped when tau sits on a cell edge
        x = params.tau / da
        if abs(x - round(x)) <= 1e-9 * max(1.0, x):
            x = float(round(x))
        frac = np.clip(np.arange(1, n + 1) - x, 0.0, 1.0)
        knot = min(int(math.floor(x)), n)
        return cls(da, a_max, n, knot, params.theta_star * frac)

    @property
    def ages(self) -> np.ndarray:
        return self.da * np.arange(self.n_cells)


@dataclass
class SimState:
    t: float
    S: float
    V: float
    I: float
    R_cells: np.ndarray

    def copy(self) -> SimState:
        return SimState(self.t, self.S, self.V, self.I, self.R_cells.copy())


@dataclass
class Trajectory:
    """Sampled output of :func:`run`.

    ``samples`` columns are ``t, S, V, I, R_total, W``.
    """

    params: Parameters
    grid: AgeGrid
    samples: np.ndarray
    snapshots: dict = field(default_factory=dict)
    clamp_count: int = 0

    COLUMNS = ("t", "S", "V", "I", "R_total", "W")

    def __getattr__(self, name):
        if name in self.COLUMNS:
            return self.samples[:, self.COLUMNS.index(name)]
        raise AttributeError(name)

    def __len__(self):
        return len(self.samples)


def init(params: Parameters, S0: float, V0: float, I0: float, R0_profile, grid: AgeGrid) -> SimState:
    """Initial state; ``R0_profile`` is a callable of age (or ``None`` for zero)."""
    if min(S0, V0, I0) < 0:
        raise UsageError("initial S, V, I must be non-negative")
    if R0_profile is None:
        R = np.zeros(grid.n_cells)
    else:
        R = np.asarray(R0_profile(grid.ages), dtype=float) * np.ones(grid.n_cells)
    if np.any(R < 0) or not np.all(np.isfinite(R)):
        raise UsageError("initial age profile must be finite and non-negative")
    return SimState(0.0, float(S0), float(V0), float(I0), R)


def baseline_initial_state(params: Parameters, grid: AgeGrid) -> SimState:
    """``S=100, V=50, I=20, R(a)=10 exp(-0.05 a)``."""
    return init(params, 100.0, 50.0, 20.0, lambda a: 10.0 * np.exp(-0.05 * a), grid)


def equilibrium_state(eq: Equilibrium, grid: AgeGrid) -> SimState:
    return init(eq.params, eq.S, eq.V, eq.I, eq.recovered, grid)


def survival_factors(params: Parameters, grid: AgeGrid, dt: float) -> np.ndarray:
    return 1.0 - (params.mu + grid.theta_cells) * dt


def advect(R_cells: np.ndarray, inflow: float, survival: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Shift the age profile one cell, applying per-cell survival.

    ``out[k] = R[k-1] * survival[k-1]`` for ``k >= 1`` and
    ``out[0] = inflow``; the last cell leaves the grid.
    """
    if out is None:
        out = np.empty_like(R_cells)
    out[1:] = R_cells[:-1] * survival[:-1]
    out[0] = inflow
    return out


def total_population(state: SimState, grid: AgeGrid) -> float:
    """``W = S + V + I + sum(R) da``."""
    return state.S + state.V + state.I + float(state.R_cells.sum()) * grid.da


def _advance(state: SimState, params: Parameters, grid: AgeGrid, survival: np.ndarray) -> int:
    """One explicit step in place; returns the number of clamped entries."""
    p = params
    dt = grid.da
    S, V, I, R = state.S, state.V, state.I, state.R_cells
    Q = float(np.dot(grid.theta_cells, R)) * dt
    dS = p.pi - p.beta * I * S - (p.mu + p.iota) * S + p.eta * V + Q
    dV = p.iota * S - p.sigma * p.beta * I * V - (p.mu + p.eta) * V
    dI = p.beta * I * (S + p.sigma * V) - p.removal_rate * I
    advect(R, p.gamma * I, survival, out=R)
    S += dt * dS
    V += dt * dV
    I += dt * dI
    clamps = 0
    if S < 0:
        S, clamps = 0.0, clamps + 1
    if V < 0:
        V, clamps = 0.0, clamps + 1
    if I < 0:
        I, clamps = 0.0, clamps + 1
    neg = R < 0
    if neg.any():
        clamps += int(neg.sum())
        R[neg] = 0.0
    if not (abs(S) < BLOWUP and abs(V) < BLOWUP and abs(I) < BLOWUP):
        raise SimulationUnstable(
            f"state exceeded {BLOWUP:g} at t={state.t + dt:g}; reduce dt (currently {dt:g})"
        )
    state.S, state.V, state.I = S, V, I
    state.t += dt
    return clamps


def step(state: SimState, params: Parameters, grid: AgeGrid, dt: float | None = None) -> SimState:
    """Return the state one step later; ``state`` is not modified."""
    if dt is not None and abs(dt - grid.da) > 1e-12 * grid.da:
        raise UsageError(f"dt={dt} must equal the age step da={grid.da}")
    new = state.copy()
    _advance(new, params, grid, survival_factors(params, grid, grid.da))
    return new


def run(params: Parameters, state: SimState, grid: AgeGrid, t_end: float,
        dt: float | None = None, sample_every: int = 20, snapshot_times=()) -> Trajectory:
    """Integrate from ``state`` to ``t_end``.

    A sample ``(t, S, V, I, R_total, W)`` is stored every ``sample_every``
    steps (and at the final step); age profiles are copied at the steps
    closest to ``snapshot_times``.  ``state`` is not modified.

    Raises
    ------
    SimulationUnstable
        On blow-up, or if more than 0.1% of cell updates had to be clamped.
    """
    if dt is not None and abs(dt - grid.da) > 1e-12 * grid.da:
        raise UsageError(f"dt={dt} must equal the age step da={grid.da}")
    if sample_every < 1:
        raise UsageError("sample_every must be >= 1")
    dt = grid.da
    n_steps = int(round((t_end - state.t) / dt))
    if n_steps < 1:
        raise UsageError("t_end must be at least one step after the initial time")
    survival = survival_factors(params, grid, dt)
    if np.any(survival <= 0):
        raise SimulationUnstable(f"dt={dt} makes survival factors non-positive")

    cur = state.copy()
    t_start = cur.t
    snap_steps = {}
    for ts in snapshot_times:
        k = int(round((ts - t_start) / dt))
        if 0 <= k <= n_steps:
            snap_steps.setdefault(k, []).append(ts)

    rows = []
    snapshots = {}

    def record():
        R_total = float(cur.R_cells.sum()) * dt
        rows.append((cur.t, cur.S, cur.V, cur.I, R_total, cur.S + cur.V + cur.I + R_total))

    record()
    if 0 in snap_steps:
        for ts in snap_steps[0]:
            snapshots[ts] = cur.R_cells.copy()
    clamps = 0
    for k in range(1, n_steps + 1):
        clamps += _advance(cur, params, grid, survival)
        cur.t = t_start + k * dt
        if k % sample_every == 0 or k == n_steps:
            record()
        if k in snap_steps:
            for ts in snap_steps[k]:
                snapshots[ts] = cur.R_cells.copy()
    if clamps > MAX_CLAMP_FRACTION * n_steps * (grid.n_cells + 3):
        raise SimulationUnstable(f"{clamps} clamp events exceed 0.1% of cell updates; reduce dt")
    return Trajectory(params, grid, np.array(rows), snapshots, clamps)


class RegimeKind(enum.Enum):
    CONVERGED = "converged"
    OSCILLATORY = "oscillatory"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    amplitude: float
    mean: float
    period: float | None = None
    point: Equilibrium | None = None

    @property
    def label(self) -> str:
        if self.kind is RegimeKind.CONVERGED:
            return f"converged-{self.point.kind.value}"
        return self.kind.value

    def as_dict(self) -> dict:
        return {
            "regime": self.label,
            "amplitude": self.amplitude,
            "mean": self.mean,
            "period": self.period,
        }


def _window(traj, lo_frac, hi_frac):
    t = traj.t
    t0, t1 = t[0], t[-1]
    span = t1 - t0
    mask = (t >= t0 + lo_frac * span) & (t <= t0 + hi_frac * span)
    return t[mask], traj.I[mask]


def _period(t, x):
    centred = x - x.mean()
    up = np.flatnonzero((centred[:-1] < 0) & (centred[1:] >= 0))
    if len(up) < 2:
        return None
    # linear interpolation of upward zero crossings
    tc = t[up] - centred[up] * (t[up + 1] - t[up]) / (centred[up + 1] - centred[up])
    return float(np.mean(np.diff(tc)))


def _matches(eq: Equilibrium, S, V, I, rtol=0.01):
    return all(abs(x - y) <= rtol * max(abs(y), 1.0) for x, y in ((S, eq.S), (V, eq.V), (I, eq.I)))


def detect_regime(traj: Trajectory, equilibria=None) -> Regime:
    """Classify the long-time behaviour of ``I(t)``.

    On the final 20% of the run, with peak-to-trough amplitude ``A`` and
    mean ``M``: oscillatory if ``A > 1e-3 max(M, 1)`` and the amplitude of
    the last 10% window is at least 95% of the one before; converged if
    ``A <= 1e-6 max(M, 1)`` and the terminal ``(S, V, I)`` lie within 1%
    (relative to ``max(|x|, 1)``) of one of ``equilibria``; undetermined
    otherwise.  ``equilibria`` defaults to the disease-free and, when it
    exists, the endemic state of ``traj.params``.

    Raises
    ------
    ValueError
        If the run is shorter than ``5 / mu``.
    """
    p = traj.params
    span = traj.t[-1] - traj.t[0]
    if span < 5.0 / p.mu:
        raise ValueError(f"trajectory spans {span:g} < 5/mu = {5.0 / p.mu:g}; too short to classify")
    if equilibria is None:
        equilibria = [disease_free_equilibrium(p)]
        try:
            eq = endemic_equilibrium(p)
        except DomainError:
            eq = None
        if eq is not None:
            equilibria.append(eq)

    t, x = _window(traj, 0.8, 1.0)
    A = float(x.max() - x.min())
    M = float(x.mean())
    scale = max(M, 1.0)
    if A > 1e-3 * scale:
        _, prev = _window(traj, 0.8, 0.9)
        _, last = _window(traj, 0.9, 1.0)
        a_prev = prev.max() - prev.min()
        a_last = last.max() - last.min()
        if a_last >= 0.95 * a_prev:
            return Regime(RegimeKind.OSCILLATORY, A, M, _period(t, x))
        return Regime(RegimeKind.UNDETERMINED, A, M, _period(t, x))
    if A <= 1e-6 * scale:
        S, V, I = traj.S[-1], traj.V[-1], traj.I[-1]
        for eq in equilibria:
            if _matches(eq, S, V, I):
                return Regime(RegimeKind.CONVERGED, A, M, None, eq)
    return Regime(RegimeKind.UNDETERMINED, A, M)
