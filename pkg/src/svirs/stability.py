"""Characteristic equations at the disease-free and endemic equilibria.

The endemic characteristic function is

    m(lambda, tau) = lambda^4 + A3 lambda^3 + A2 lambda^2 + A1 lambda + A0
                     + (G1 lambda + G0) exp(-lambda tau)

and is available in two independent forms: :func:`char_function_poly`
from closed-form coefficients, and :func:`char_function_det` from the
numerical determinant of the 3x3 eigen-system for the perturbations of
``(S, V, I)`` after the age-structured perturbation has been integrated
out.  The determinant form is the reference; :func:`char_coefficients`
refuses to return coefficients that disagree with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibria import (
    Equilibrium,
    basic_reproduction_number,
    disease_free_equilibrium,
    endemic_equilibrium,
)
from .errors import CoefficientMismatch, HypothesisError
from .model import Parameters, immunity_feedback_lambda

STABLE_REAL_PART = -1e-10


@dataclass(frozen=True)
class CharCoefficients:
    """Coefficients of ``m(lambda, tau)``; ``G1`` and ``G0`` carry ``exp(-mu tau)``."""

    A3: float
    A2: float
    A1: float
    A0: float
    G1: float
    G0: float
    tau: float

    @property
    def polynomial(self) -> np.ndarray:
        """``[1, A3, A2, A1, A0]``, highest degree first."""
        return np.array([1.0, self.A3, self.A2, self.A1, self.A0])

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("A3", "A2", "A1", "A0", "G1", "G0", "tau")}


def dfe_eigenvalues(params: Parameters) -> tuple[float, float, float]:
    """Roots of the factored characteristic equation at the disease-free state.

    Returns ``(beta (S0 + sigma V0) - (mu + gamma + d), -mu, -mu - iota - eta)``.
    """
    p = params
    e0 = disease_free_equilibrium(p)
    lam1 = p.beta * (e0.S + p.sigma * e0.V) - p.removal_rate
    return lam1, -p.mu, -p.mu - p.iota - p.eta


def _rates(params, eq):
    p = params
    a = p.mu + p.iota + p.beta * eq.I
    b = p.mu + p.eta + p.sigma * p.beta * eq.I
    e = p.removal_rate - p.beta * (eq.S + p.sigma * eq.V)
    k = p.mu + p.theta_star
    return a, b, e, k


def _delay_terms(params, eq):
    p = params
    decay = math.exp(-p.mu * p.tau)
    g = p.beta * p.gamma * p.theta_star * eq.I
    G1 = -g * decay
    G0 = -g * (p.mu + p.eta + p.sigma * p.iota + p.sigma * p.beta * eq.I) * decay
    return G1, G0


def char_coefficients(params: Parameters, eq: Equilibrium, check: bool = True,
                      n_check: int = 64, rtol: float = 1e-8) -> CharCoefficients:
    """Closed-form coefficients of ``m(lambda, tau)`` at ``eq``.

    ``A3..A0`` come from expanding ``(lambda + mu + theta_star) * det`` of
    the delay-free part of the 3x3 system; this includes the term
    ``mu + gamma + d - beta (S + sigma V)``, which vanishes at the endemic
    state but not at an arbitrary linearisation point.

    With ``check=True`` the result is compared with
    :func:`char_function_det` at ``n_check`` pseudo-random points in the
    disk ``|lambda| <= 2``.

    Raises
    ------
    CoefficientMismatch
        If the two forms differ by more than ``rtol * term_scale(lambda)``.
    """
    p = params
    a, b, e, k = _rates(p, eq)
    S, V, I = eq.S, eq.V, eq.I
    bb = p.beta * p.beta
    cross = p.sigma ** 2 * bb * I * V  # sigma beta I * sigma beta V
    infect = bb * S * I                # beta S * beta I

    # cubic det(lambda) = l^3 + c2 l^2 + c1 l + c0 (immunity return excluded)
    c2 = a + b + e
    c1 = a * b + a * e + b * e + cross - p.eta * p.iota + infect
    c0 = (a * (b * e + cross) - p.eta * p.iota * e + p.eta * p.sigma * bb * I * V
          + infect * (b + p.sigma * p.iota))
    G1, G0 = _delay_terms(p, eq)
    coeffs = CharCoefficients(
        A3=c2 + k, A2=c1 + k * c2, A1=c0 + k * c1, A0=k * c0, G1=G1, G0=G0, tau=p.tau,
    )
    if check:
        cross_validate(coeffs, p, eq, n_check=n_check, rtol=rtol)
    return coeffs


def cross_validate(coeffs: CharCoefficients, params: Parameters, eq: Equilibrium,
                   n_check: int = 64, rtol: float = 1e-8, seed: int = 20240601) -> float:
    """Compare polynomial and determinant forms; return the worst scaled error."""
    rng = np.random.default_rng(seed)
    radius = 2.0 * np.sqrt(rng.uniform(size=n_check))
    angle = rng.uniform(0, 2 * np.pi, size=n_check)
    pole = -(params.mu + params.theta_star)
    worst = 0.0
    for lam in radius * np.exp(1j * angle):
        if abs(lam - pole) < 1e-6:
            continue
        poly = char_function_poly(lam, coeffs, params.tau)
        det = char_function_det(lam, params, eq)
        err = abs(poly - det) / term_scale(lam, coeffs, params.tau)
        if err > rtol:
            raise CoefficientMismatch(
                f"polynomial form {poly!r} != determinant form {det!r} at lambda={lam!r} "
                f"(scaled error {err:.3e} > {rtol:.1e})"
            )
        worst = max(worst, err)
    return worst


def term_scale(lam: complex, coeffs: CharCoefficients, tau: float | None = None) -> float:
    """Magnitude scale for relative errors in ``m(lambda, tau)``.

    ``max(1, sum of |term|)``; the sum includes the delay term,
    whose factor ``exp(-lambda tau)`` dominates for ``Re lambda < 0``.
    """
    if tau is None:
        tau = coeffs.tau
    c = coeffs
    x = abs(lam)
    terms = (x ** 4 + abs(c.A3) * x ** 3 + abs(c.A2) * x ** 2 + abs(c.A1) * x + abs(c.A0)
             + (abs(c.G1) * x + abs(c.G0)) * abs(np.exp(-complex(lam) * tau)))
    return max(1.0, terms)


def long_form_coefficients(params: Parameters, eq: Equilibrium) -> CharCoefficients:
    """Alternative long-form expansion of ``A3..A0``, kept as a negative control.

    ``A3``, ``G1`` and ``G0`` agree with :func:`char_coefficients`; the
    long-form ``A2``, ``A1`` and ``A0`` do not satisfy the determinant identity (``A2`` even contains terms
    linear in the rates) and must not be used for analysis.
    """
    p = params
    S, V, I = eq.S, eq.V, eq.I
    be, sg = p.beta, p.sigma
    a, b, c, k = p.mu + p.iota, p.mu + p.eta, p.removal_rate, p.mu + p.theta_star
    B = S + sg * V
    io, et = p.iota, p.eta

    A3 = (a + b + c + k) - be * B + sg * be * I + be * I
    A2 = ((b + c + k) + (a * b + a * c + a * k + b * c + b * k + c * k)
          + sg**2 * be**2 * I * V + sg * be**2 * I**2 + be**2 * S**2
          + sg * be * I * (a + c + k) - be * B * (a + b + k) - io * et
          - sg * be**2 * I * B - be**2 * I * B)
    A1 = ((a * b * c + a * c * k + b * c * k + a * b * k)
          + be * I * (b * c + b * k + c * k)
          + sg * be * I * (a * c + a * k + c * k)
          + sg**2 * be**3 * I**2 * V + sg * io * be**2 * I * S
          + sg**2 * be**2 * I * V * (a + k) + sg * be**2 * I**2 * (c + k)
          + be**2 * S**2 * (b + k)
          + io * be * et * B + sg * et * be**2 * S * V + sg * be**3 * S**2 * I
          - sg * be**2 * I * B * (a + k) - sg * be**3 * I**2 * B
          - be * B * (a * b + a * k + b * k) - io * et * (c + k)
          - be**2 * I * B * (b + k))
    A0 = (a * b * c * k + sg * be * I * a * c * k + sg**2 * be**2 * I * V * a * k
          + sg * be**2 * I**2 * c * k + io * be * et * B * k + sg**2 * be**3 * I**2 * V * k
          + sg * io * be**2 * I * S * k
          + b * c * k + be**2 * S**2 * b * k + sg * et * be**2 * S * V * k + sg * be**3 * S**2 * I * k
          - be * B * a * b * k - sg * be**2 * I * B * a * k - sg * be**3 * I**2 * B * k
          - be**2 * I * B * b * k - io * et * c * k)
    G1, G0 = _delay_terms(p, eq)
    return CharCoefficients(A3, A2, A1, A0, G1, G0, p.tau)


def char_function_poly(lam, coeffs: CharCoefficients, tau: float | None = None):
    """Evaluate ``m(lambda, tau)`` from coefficients (scalar or array ``lam``)."""
    if tau is None:
        tau = coeffs.tau
    lam = np.asarray(lam, dtype=complex)
    c = coeffs
    val = (((lam + c.A3) * lam + c.A2) * lam + c.A1) * lam + c.A0
    val = val + (c.G1 * lam + c.G0) * np.exp(-lam * tau)
    return complex(val) if val.ndim == 0 else val


def char_function_det(lam: complex, params: Parameters, eq: Equilibrium) -> complex:
    """``(lambda + mu + theta_star) * det M(lambda)`` for the 3x3 eigen-system.

    ``M`` is the coefficient matrix of the linear system for
    ``(x, y, z)`` (perturbations of ``S, V, I``) with the age-structured
    perturbation eliminated through ``J(lambda, tau)``.
    """
    p = params
    lam = complex(lam)
    J = immunity_feedback_lambda(lam, p)
    S, V, I = eq.S, eq.V, eq.I
    sb = p.sigma * p.beta
    M = np.array([
        [lam + p.mu + p.iota + p.beta * I, -p.eta, p.beta * S - J],
        [-p.iota, lam + p.mu + p.eta + sb * I, sb * V],
        [-p.beta * I, -sb * I, lam + p.removal_rate - p.beta * (S + p.sigma * V)],
    ], dtype=complex)
    return complex(np.linalg.det(M) * (lam + p.mu + p.theta_star))


def char_function_dlambda(lam, coeffs: CharCoefficients, tau: float | None = None):
    """``d m / d lambda`` at fixed ``tau``."""
    if tau is None:
        tau = coeffs.tau
    lam = np.asarray(lam, dtype=complex)
    c = coeffs
    val = ((4 * lam + 3 * c.A3) * lam + 2 * c.A2) * lam + c.A1
    val = val + (c.G1 - tau * (c.G1 * lam + c.G0)) * np.exp(-lam * tau)
    return complex(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class RouthHurwitz:
    conditions: dict
    holds: bool
    first_failure: str | None

    def as_dict(self) -> dict:
        return {"conditions": dict(self.conditions), "holds": self.holds,
                "first_failure": self.first_failure}


def routh_hurwitz_H(coeffs: CharCoefficients) -> RouthHurwitz:
    """Check the six strict Routh-Hurwitz inequalities of the delay-free quartic.

    ``coeffs`` must be evaluated at ``tau = 0`` so that ``G1``, ``G0``
    are ``G1(0)``, ``G0(0)``.
    """
    if coeffs.tau != 0:
        raise ValueError("Routh-Hurwitz condition needs coefficients evaluated at tau = 0")
    A3, A2 = coeffs.A3, coeffs.A2
    B1 = coeffs.A1 + coeffs.G1
    B0 = coeffs.A0 + coeffs.G0
    conditions = {
        "A3 > 0": A3 > 0,
        "A2 > 0": A2 > 0,
        "A1 + G1(0) > 0": B1 > 0,
        "A0 + G0(0) > 0": B0 > 0,
        "A3*A2 > A1 + G1(0)": A3 * A2 > B1,
        "(A3*A2 - (A1 + G1(0)))*(A1 + G1(0)) > A3^2*(A0 + G0(0))": (A3 * A2 - B1) * B1 > A3 * A3 * B0,
    }
    failure = next((name for name, ok in conditions.items() if not ok), None)
    return RouthHurwitz(conditions, failure is None, failure)


def delay_free_polynomial(coeffs: CharCoefficients) -> np.ndarray:
    """Coefficients of ``m(lambda, 0)``, highest degree first."""
    return np.array([1.0, coeffs.A3, coeffs.A2, coeffs.A1 + coeffs.G1, coeffs.A0 + coeffs.G0])


def zero_delay_coefficients(params: Parameters) -> tuple[Equilibrium, CharCoefficients]:
    """Endemic state and characteristic coefficients of the ``tau = 0`` system."""
    p0 = params.replace(tau=0.0)
    eq = endemic_equilibrium(p0)
    if eq is None:
        raise HypothesisError(f"R0 = {basic_reproduction_number(p0)!r} <= 1: no endemic equilibrium")
    return eq, char_coefficients(p0, eq)


def polynomial_roots(coefficients, tol: float = 1e-12, max_iter: int = 1000) -> np.ndarray:
    """All complex roots of a polynomial (highest degree first).

    Weierstrass (Durand-Kerner) simultaneous iteration followed by a few
    Newton polishing steps per root.  Iterates that collide are nudged
    apart so that the Weierstrass correction never divides by zero.
    """
    c = np.asarray(coefficients, dtype=complex)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise ValueError("zero polynomial has no well-defined roots")
    c = c[nz[0]:]
    n_trailing = len(c) - 1 - np.flatnonzero(c)[-1]
    c = c[: len(c) - n_trailing]
    c = c / c[0]
    n = len(c) - 1
    zeros = np.zeros(n_trailing, dtype=complex)
    if n == 0:
        return zeros
    # Cauchy bound on root moduli
    radius = 1.0 + np.max(np.abs(c[1:]))
    z = radius * (0.4 + 0.9j) ** np.arange(n)
    for _ in range(max_iter):
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        tiny = np.abs(diff) < 1e-300
        if tiny.any():
            diff[tiny] = 1e-12 * radius
        step = np.polyval(c, z) / np.prod(diff, axis=1)
        z = z - step
        if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(z))):
            break
    dc = np.polyder(c)
    for _ in range(3):
        d = np.polyval(dc, z)
        ok = np.abs(d) > 1e-300
        trial = np.where(ok, z - np.polyval(c, z) / np.where(ok, d, 1.0), z)
        better = np.abs(np.polyval(c, trial)) <= np.abs(np.polyval(c, z))
        z = np.where(better, trial, z)
    return np.concatenate([z, zeros])
