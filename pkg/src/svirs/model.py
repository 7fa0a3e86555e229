"""Model parameters, the immunity-loss kernel and its Laplace-type transforms."""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

PARAMETER_NAMES = (
    "pi", "beta", "mu", "iota", "eta", "gamma", "d", "sigma", "theta_star", "tau",
)


@dataclass(frozen=True)
class Parameters:
    """Constants of the SVIRS model with recovery-age structure.

    Parameters
    ----------
    pi : float
        Recruitment rate into S (individuals per unit time).
    beta : float
        Transmission rate.
    mu : float
        Natural mortality rate, shared by all compartments.
    iota : float
        Vaccination rate of susceptibles.
    eta : float
        Waning rate of vaccine-induced protection (V -> S).
    gamma : float
        Recovery rate (I -> R).
    d : float
        Disease-induced mortality.
    sigma : float
        Relative susceptibility of vaccinated individuals, in [0, 1].
    theta_star : float
        Rate of immunity loss once recovery age exceeds ``tau``.
    tau : float
        Immunity period: recovered individuals of age < tau cannot lose
        immunity.
    """

    pi: float
    beta: float
    mu: float
    iota: float
    eta: float
    gamma: float
    d: float
    sigma: float
    theta_star: float
    tau: float

    def __post_init__(self):
        for name in PARAMETER_NAMES:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise ParameterError(name, f"expected a real number, got {value!r}")
            object.__setattr__(self, name, float(value))
        validate(self)

    def replace(self, **changes) -> Parameters:
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in PARAMETER_NAMES}

    @property
    def removal_rate(self) -> float:
        """Exit rate from I, ``mu + gamma + d``."""
        return self.mu + self.gamma + self.d


# name, predicate, message; checked in this order
_CONSTRAINTS = (
    ("pi", lambda v: v > 0, "must be > 0"),
    ("beta", lambda v: v >= 0, "must be >= 0"),
    ("mu", lambda v: v > 0, "must be > 0"),
    ("iota", lambda v: v >= 0, "must be >= 0"),
    ("eta", lambda v: v >= 0, "must be >= 0"),
    ("gamma", lambda v: v >= 0, "must be >= 0"),
    ("d", lambda v: v >= 0, "must be >= 0"),
    ("sigma", lambda v: 0 <= v <= 1, "must lie in [0, 1]"),
    ("theta_star", lambda v: v > 0, "must be > 0"),
    ("tau", lambda v: v >= 0, "must be >= 0"),
)


def validate(params: Parameters) -> Parameters:
    """Return ``params`` unchanged if every range constraint holds.

    Raises
    ------
    ParameterError
        Naming the first violated constraint.
    """
    for name, ok, message in _CONSTRAINTS:
        value = getattr(params, name)
        if not math.isfinite(value):
            raise ParameterError(name, "must be finite")
        if not ok(value):
            raise ParameterError(name, f"{message} (got {value!r})")
    return params


def baseline_parameters(**overrides) -> Parameters:
    """Parameter set of the reference numerical experiments.

    Defaults to the endemic scenario (``pi=20``, ``tau=12``); pass
    ``pi=5`` for the disease-free one.
    """
    values = dict(
        pi=20.0, beta=0.0009, mu=0.008, iota=0.58, eta=0.01, gamma=0.45,
        d=0.05, sigma=0.5, theta_star=0.35, tau=12.0,
    )
    values.update(overrides)
    return Parameters(**values)


def theta(a, params: Parameters):
    """Immunity-loss rate at recovery age ``a``.

    Zero below ``tau``, ``theta_star`` from ``tau`` on (the knot itself
    belongs to the upper branch).  Accepts scalars or arrays.
    """
    a_arr = np.asarray(a, dtype=float)
    if np.any(a_arr < 0):
        raise ValueError("recovery age must be non-negative")
    out = np.where(a_arr >= params.tau, params.theta_star, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def immunity_feedback(params: Parameters) -> float:
    """Steady-state return rate ``J(tau)`` from R to S per infected.

    ``J(tau) = theta_star * gamma * exp(-mu * tau) / (mu + theta_star)``.
    """
    p = params
    return p.theta_star * p.gamma * math.exp(-p.mu * p.tau) / (p.mu + p.theta_star)


def immunity_feedback_lambda(lam: complex, params: Parameters) -> complex:
    """Frequency-domain feedback ``J(lambda, tau)``.

    Equals ``gamma * theta_star * exp(-(lambda + mu) tau) / (lambda + mu + theta_star)``
    and reduces to :func:`immunity_feedback` at ``lambda = 0``.
    """
    p = params
    lam = complex(lam)
    denom = lam + p.mu + p.theta_star
    if abs(denom) <= 1e-14 * (p.mu + p.theta_star):
        raise DomainError(f"J(lambda, tau) has a pole at lambda = -(mu + theta_star) = {-(p.mu + p.theta_star)}")
    return p.gamma * p.theta_star * cmath.exp(-(lam + p.mu) * p.tau) / denom
