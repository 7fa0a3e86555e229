"""Steady states, the basic reproduction number and the endemic root-find."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, HypothesisError
from .model import Parameters, immunity_feedback


class Kind(enum.Enum):
    DISEASE_FREE = "disease-free"
    ENDEMIC = "endemic"


@dataclass(frozen=True)
class Thresholds:
    """``R0``, ``J(tau)`` and whether ``J(tau) < mu + gamma + d``."""

    R0: float
    J_tau: float
    hopf_feasible: bool


@dataclass(frozen=True)
class Equilibrium:
    """A steady state ``(S, V, I, R(a))``.

    The recovered-age profile is not stored; :meth:`recovered` evaluates
    its closed form ``gamma * I * exp(-int_0^a (mu + theta))``.
    """

    S: float
    V: float
    I: float
    kind: Kind
    params: Parameters
    residual: float

    def recovered(self, a):
        return recovered_profile_at(self, a)

    @property
    def recovered_total(self) -> float:
        """``int_0^inf R(a) da`` in closed form."""
        p = self.params
        head = (1.0 - math.exp(-p.mu * p.tau)) / p.mu
        tail = math.exp(-p.mu * p.tau) / (p.mu + p.theta_star)
        return p.gamma * self.I * (head + tail)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "S": self.S,
            "V": self.V,
            "I": self.I,
            "R_total": self.recovered_total,
            "residual": self.residual,
        }


def basic_reproduction_number(params: Parameters) -> float:
    """``R0 = pi beta (mu + eta + sigma iota) / (mu (mu + iota + eta) (mu + gamma + d))``."""
    p = params
    return (p.pi * p.beta * (p.mu + p.eta + p.sigma * p.iota)
            / (p.mu * (p.mu + p.iota + p.eta) * p.removal_rate))


def thresholds(params: Parameters) -> Thresholds:
    J = immunity_feedback(params)
    return Thresholds(basic_reproduction_number(params), J, J < params.removal_rate)


def stationary_residual(params: Parameters, S: float, V: float, I: float) -> float:
    """Largest absolute residual of the three algebraic stationary equations.

    The age equation and its boundary condition hold exactly for the
    closed-form profile, and the immunity-return integral equals
    ``J(tau) * I`` exactly, so only the ODE right-hand sides are checked.
    """
    p = params
    J = immunity_feedback(p)
    r1 = p.pi - p.beta * I * S - (p.mu + p.iota) * S + p.eta * V + J * I
    r2 = p.iota * S - p.sigma * p.beta * I * V - (p.mu + p.eta) * V
    r3 = p.beta * I * (S + p.sigma * V) - p.removal_rate * I
    return max(abs(r1), abs(r2), abs(r3))


def disease_free_equilibrium(params: Parameters) -> Equilibrium:
    p = params
    denom = p.mu * (p.mu + p.iota + p.eta)
    S = p.pi * (p.mu + p.eta) / denom
    V = p.iota * p.pi / denom
    return Equilibrium(S, V, 0.0, Kind.DISEASE_FREE, p, stationary_residual(p, S, V, 0.0))


def endemic_residual(I: float, params: Parameters) -> float:
    """The scalar function whose positive zero is the endemic infected level.

    Obtained by eliminating ``S`` and ``V`` from the stationary equations
    and substituting the immunity-return integral ``J(tau) * I``.
    """
    p = params
    m = p.removal_rate
    q = p.mu + p.eta + p.sigma * p.beta * I
    qs = q + p.sigma * p.iota
    if qs <= 0:
        raise DomainError("mu + eta + sigma*beta*I + sigma*iota must be positive")
    return (p.pi
            - m * q * I / qs
            - (p.mu + p.iota) * m * q / (p.beta * qs)
            + p.iota * p.eta * m / (p.beta * qs)
            + immunity_feedback(p) * I)


def _endemic_SV(I: float, params: Parameters) -> tuple[float, float]:
    p = params
    q = p.mu + p.eta + p.sigma * p.beta * I
    S = p.removal_rate / p.beta * q / (q + p.sigma * p.iota)
    V = p.iota * S / q
    return S, V


def endemic_equilibrium(params: Parameters, max_doublings: int = 200) -> Equilibrium | None:
    """Unique endemic steady state, or ``None`` when ``R0 <= 1``.

    The infected level is bracketed by doubling from ``I = 1`` until the
    residual turns negative, then bisected to a bracket width of
    ``1e-12 * max(1, I_hi)``.

    Raises
    ------
    HypothesisError
        If ``J(tau) >= mu + gamma + d``; uniqueness is not guaranteed
        there and no root-find is attempted.
    DomainError
        If the residual at ``I = 0`` is not positive although ``R0 > 1``.
    """
    p = params
    th = thresholds(p)
    if th.R0 <= 1.0:
        return None
    if not th.hopf_feasible:
        raise HypothesisError(
            f"J(tau) = {th.J_tau!r} >= mu + gamma + d = {p.removal_rate!r}; "
            "endemic equilibrium existence/uniqueness not established"
        )
    f0 = endemic_residual(0.0, p)
    if f0 <= 0:
        raise DomainError(f"non-bracketing: f(0) = {f0!r} <= 0 although R0 = {th.R0!r} > 1")

    lo, hi = 0.0, 1.0
    for _ in range(max_doublings):
        if endemic_residual(hi, p) < 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise DomainError("could not bracket the endemic root by doubling")

    width = 1e-12 * max(1.0, hi)
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if endemic_residual(mid, p) > 0:
            lo = mid
        else:
            hi = mid
    I = 0.5 * (lo + hi)
    S, V = _endemic_SV(I, p)
    return Equilibrium(S, V, I, Kind.ENDEMIC, p, stationary_residual(p, S, V, I))


def recovered_profile_at(eq: Equilibrium, a):
    """Evaluate the steady recovered-age density at age(s) ``a``."""
    p = eq.params
    a_arr = np.asarray(a, dtype=float)
    if np.any(a_arr < 0):
        raise ValueError("recovery age must be non-negative")
    exponent = np.where(
        a_arr < p.tau,
        p.mu * a_arr,
        p.mu * p.tau + (p.mu + p.theta_star) * (a_arr - p.tau),
    )
    out = p.gamma * eq.I * np.exp(-exponent)
    if out.ndim == 0:
        return float(out)
    return out
