"""Critical immunity periods at which the endemic state loses stability.

A purely imaginary root ``i v`` of ``m(lambda, tau)`` requires
``w = v^2`` to be a positive root of the quartic

    F(w) = w^4 + C1 w^3 + C2 w^2 + C3 w + C4,

and the crossing delay then solves ``tau = (angle(v, tau) + 2 n pi) / v``.
Because the coefficients (and the endemic state itself) depend on
``tau``, that equation is implicit; :func:`critical_delays` solves it by a
grid scan over ``tau`` with bisection refinement of every sign change.
"""

from __future__ import annotations

import cmath
import dataclasses
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .equilibria import endemic_equilibrium
from .errors import DomainError, HypothesisError, NoCriticalDelay
from .model import Parameters
from .stability import (
    CharCoefficients,
    char_coefficients,
    char_function_det,
    char_function_dlambda,
    char_function_poly,
    routh_hurwitz_H,
    term_scale,
    zero_delay_coefficients,
)

_P = complex(-0.5, math.sqrt(3) / 2)  # primitive cube root of unity


class Classification(enum.Enum):
    STABLE_ALL_TAU = "stable-for-all-tau"
    HOPF = "stable-below-tau0-hopf-at-tau0"
    INCONCLUSIVE = "inconclusive"


def _cbrt(z: complex, real: bool) -> complex:
    if real:
        return complex(np.cbrt(z.real))
    if z == 0:
        return 0j
    return cmath.exp(cmath.log(z) / 3)


def resolvent_cubic_roots(C1: float, C2: float, C3: float):
    """Cardano solution of ``F'(w) = 4w^3 + 3C1 w^2 + 2C2 w + C3 = 0``.

    The substitution ``w = h - C1/4`` gives ``h^3 + D1 h + D2 = 0``.

    Returns
    -------
    D1, D2, D : float
        Depressed-cubic coefficients and ``D = (D2/2)^2 + (D1/3)^3``.
    h : tuple of 3 complex
    w : tuple of 3 complex
        Critical points of ``F``; ``w[0]`` is real whenever ``D >= 0``.
    """
    D1 = 0.5 * C2 - 3.0 / 16.0 * C1 * C1
    D2 = C1 ** 3 / 32.0 - C1 * C2 / 8.0 + C3 / 4.0
    D = (D2 / 2) ** 2 + (D1 / 3) ** 3
    if D >= 0:
        s = math.sqrt(D)
        u = _cbrt(complex(-D2 / 2 + s), real=True)
        v = _cbrt(complex(-D2 / 2 - s), real=True)
    else:
        s = 1j * math.sqrt(-D)
        u = _cbrt(-D2 / 2 + s, real=False)
        # the two cube roots must multiply to -D1/3
        v = u.conjugate()
    h = (u + v, u * _P + v * _P * _P, u * _P * _P + v * _P)
    w = tuple(hi - C1 / 4.0 for hi in h)
    return D1, D2, D, h, w


def _F(w, C):
    C1, C2, C3, C4 = C
    return (((w + C1) * w + C2) * w + C3) * w + C4


def _dF(w, C):
    C1, C2, C3, _ = C
    return ((4 * w + 3 * C1) * w + 2 * C2) * w + C3


def positive_roots_F(C1: float, C2: float, C3: float, C4: float) -> tuple[float, ...]:
    """All real roots ``w > 0`` of ``F``, ascending.

    Candidates come from the companion matrix, are Newton-polished in
    real arithmetic and kept only if ``|F(w)| <= 1e-9 * max(1, w^4)``.
    """
    C = (C1, C2, C3, C4)
    found = []
    for r in np.roots([1.0, C1, C2, C3, C4]):
        if abs(r.imag) > 1e-6 * max(1.0, abs(r)):
            continue
        w = float(r.real)
        for _ in range(50):
            d = _dF(w, C)
            if d == 0:
                break
            step = _F(w, C) / d
            if abs(_F(w - step, C)) > abs(_F(w, C)):
                break
            w -= step
            if abs(step) <= 1e-15 * max(1.0, abs(w)):
                break
        if w > 0 and abs(_F(w, C)) <= 1e-9 * max(1.0, w ** 4):
            found.append(w)
    found.sort()
    roots = []
    for w in found:
        if not roots or w - roots[-1] > 1e-7 * max(1.0, w):
            roots.append(w)
    return tuple(roots)


@dataclass(frozen=True)
class QuarticData:
    """The quartic ``F`` together with its critical points and positive roots."""

    C1: float
    C2: float
    C3: float
    C4: float
    D1: float
    D2: float
    D: float
    h: tuple
    w_crit: tuple
    w_pos: tuple
    v: tuple

    @classmethod
    def from_coefficients(cls, C1, C2, C3, C4) -> QuarticData:
        D1, D2, D, h, w = resolvent_cubic_roots(C1, C2, C3)
        w_pos = positive_roots_F(C1, C2, C3, C4)
        return cls(C1, C2, C3, C4, D1, D2, D, h, w, w_pos, tuple(math.sqrt(x) for x in w_pos))

    @property
    def C(self):
        return (self.C1, self.C2, self.C3, self.C4)

    def F(self, w):
        return _F(w, self.C)

    def dF(self, w):
        return _dF(w, self.C)


def reduce_to_quartic(coeffs: CharCoefficients) -> QuarticData:
    """Square-and-add the real and imaginary parts of ``m(i v, tau) = 0``."""
    c = coeffs
    C1 = c.A3 ** 2 - 2 * c.A2
    C2 = 2 * c.A0 + c.A2 ** 2 - 2 * c.A1 * c.A3
    C3 = c.A1 ** 2 - 2 * c.A0 * c.A2 - c.G1 ** 2
    C4 = c.A0 ** 2 - c.G0 ** 2
    return QuarticData.from_coefficients(C1, C2, C3, C4)


def root_conditions(q: QuarticData, tol: float = 1e-9) -> dict[str, bool]:
    """Sufficient-and-necessary conditions for ``F`` to have a positive root.

    ``a``: ``C4 < 0``.  ``b``: ``C4 >= 0``, ``D >= 0``, ``w1 > 0`` and
    ``F(w1) <= 0``.  ``c``: ``C4 >= 0``, ``D < 0`` and some real critical
    point ``w* > 0`` has ``F(w*) <= 0``.
    """
    a = q.C4 < 0
    w1 = q.w_crit[0].real
    b = (not a) and q.D >= 0 and w1 > 0 and q.F(w1) <= 0
    c = False
    if not a and q.D < 0:
        for wc in q.w_crit:
            if abs(wc.imag) <= tol * max(1.0, abs(wc)) and wc.real > 0 and q.F(wc.real) <= 0:
                c = True
    return {"a": bool(a), "b": bool(b), "c": bool(c)}


def positive_root_exists(q: QuarticData) -> bool:
    return any(root_conditions(q).values())


def phi(v: float, coeffs: CharCoefficients) -> float:
    """``cos(tau v)`` implied by ``m(i v, tau) = 0``."""
    c = coeffs
    den = c.G0 ** 2 + c.G1 ** 2 * v * v
    if den <= 0:
        raise DomainError("phi undefined: G0(tau) = G1(tau) = 0 (no infected at equilibrium)")
    num = (c.A3 * c.G1 - c.G0) * v ** 4 + (c.A2 * c.G0 - c.A1 * c.G1) * v ** 2 - c.A0 * c.G0
    return num / den


def psi(v: float, coeffs: CharCoefficients) -> float:
    """``sin(tau v)`` implied by ``m(i v, tau) = 0``."""
    c = coeffs
    den = c.G0 ** 2 + c.G1 ** 2 * v * v
    if den <= 0:
        raise DomainError("psi undefined: G0(tau) = G1(tau) = 0 (no infected at equilibrium)")
    re = v ** 4 - c.A2 * v * v + c.A0
    im = c.A1 * v - c.A3 * v ** 3
    return (c.G0 * im - c.G1 * v * re) / den


def crossing_angle(v: float, coeffs: CharCoefficients, closure_tol: float = 1e-8) -> float:
    """Angle ``tau v`` modulo ``2 pi``, in ``[0, 2 pi)``.

    Uses both the cosine and the sine equation, so the branch of
    ``arccos`` is chosen correctly.  Raises :class:`DomainError` if
    ``cos^2 + sin^2`` is not 1, i.e. ``v^2`` is not a root of ``F``.
    """
    cs, sn = phi(v, coeffs), psi(v, coeffs)
    if abs(cs * cs + sn * sn - 1.0) > closure_tol:
        raise DomainError(f"v={v!r} is not a crossing frequency (cos^2+sin^2 = {cs*cs + sn*sn!r})")
    return math.atan2(sn, cs) % (2 * math.pi)


def imaginary_axis_residuals(v: float, tau: float, coeffs: CharCoefficients) -> tuple[float, float]:
    """Residuals of the real and imaginary parts of ``m(i v, tau) = 0``."""
    c = coeffs
    cs, sn = math.cos(tau * v), math.sin(tau * v)
    re = v ** 4 - c.A2 * v * v + c.A0 + c.G1 * v * sn + c.G0 * cs
    im = -c.A3 * v ** 3 + c.A1 * v + c.G1 * v * cs - c.G0 * sn
    return re, im


def transversality(q: QuarticData, w0: float, tol: float = 1e-8) -> int:
    """Sign of ``F'(w0)``; ``0`` when ``|F'(w0)| < tol`` (crossing not simple)."""
    d = q.dF(w0)
    if abs(d) < tol:
        return 0
    return 1 if d > 0 else -1


@dataclass(frozen=True)
class Candidate:
    """One solution ``(j, n)`` of the implicit delay equation."""

    j: int
    n: int
    tau: float
    v: float
    w: float
    fprime: float
    residual_re: float
    residual_im: float
    squaring_residual: float
    m_residual: float
    det_residual: float
    dm_dlambda: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Continuation:
    """Root ``s(tau)`` of ``m`` followed through ``tau`` from ``i v0`` at ``tau0``."""

    taus: np.ndarray
    roots: np.ndarray
    slope: float

    @property
    def sign(self) -> int:
        return int(np.sign(self.slope))


@dataclass(frozen=True)
class HopfAnalysis:
    candidates: list
    tau0: float | None
    v0: float | None
    w0: float | None
    fprime0: float | None
    transversality_sign: int
    classification: Classification
    any_condition: bool
    continuation: Continuation | None = None
    tau_max: float = 0.0
    grid_step: float = 0.0
    zero_delay_H: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "tau0": self.tau0,
            "v0": self.v0,
            "w0": self.w0,
            "fprime0": self.fprime0,
            "transversality_sign": self.transversality_sign,
            "classification": self.classification.value,
            "positive_root_condition": self.any_condition,
            "tau_max": self.tau_max,
            "grid_step": self.grid_step,
            "candidates": [c.as_dict() for c in self.candidates],
            "zero_delay_routh_hurwitz": self.zero_delay_H,
        }
        if self.continuation is not None:
            out["continuation_slope"] = self.continuation.slope
            out["continuation_sign"] = self.continuation.sign
        return out


def coefficients_at(params: Parameters, tau: float, check: bool = False) -> CharCoefficients:
    """Characteristic coefficients at the endemic state of the ``tau`` system."""
    p = params.replace(tau=float(tau))
    eq = endemic_equilibrium(p)
    if eq is None:
        raise HypothesisError("R0 <= 1: no endemic equilibrium")
    return char_coefficients(p, eq, check=check)


def _branches(params, tau):
    """Crossing frequencies and angles at one ``tau``; sorted by ``w``."""
    coeffs = coefficients_at(params, tau)
    q = reduce_to_quartic(coeffs)
    out = []
    for w, v in zip(q.w_pos, q.v):
        out.append((w, v, crossing_angle(v, coeffs, closure_tol=1e-6)))
    return q, out


def _mismatch(tau, v, angle, n):
    return tau - (angle + 2 * n * math.pi) / v


def _refine(params, j, n, lo, hi, g_lo, tol=1e-10, max_iter=200):
    """Bisect the mismatch of branch ``j`` on ``[lo, hi]``; ``None`` if not a root."""
    count = None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        q, br = _branches(params, mid)
        if count is None:
            count = len(br)
        if len(br) != count or j >= len(br):
            return None
        w, v, ang = br[j]
        g = _mismatch(mid, v, ang, n)
        if abs(g) <= tol:
            return mid
        if (g < 0) == (g_lo < 0):
            lo, g_lo = mid, g
        else:
            hi = mid
        if hi - lo <= 4e-16 * max(1.0, hi):
            break
    return None


def _candidate(params, j, n, tau) -> Candidate:
    p = params.replace(tau=tau)
    eq = endemic_equilibrium(p)
    coeffs = char_coefficients(p, eq, check=True)
    q = reduce_to_quartic(coeffs)
    w = q.w_pos[j]
    v = q.v[j]
    re, im = imaginary_axis_residuals(v, tau, coeffs)
    lhs = (v ** 4 - coeffs.A2 * v * v + coeffs.A0) ** 2 + (coeffs.A1 * v - coeffs.A3 * v ** 3) ** 2
    rhs = coeffs.G1 ** 2 * v * v + coeffs.G0 ** 2
    lam = 1j * v
    scale = term_scale(lam, coeffs, tau)
    return Candidate(
        j=j, n=n, tau=tau, v=v, w=w, fprime=q.dF(w),
        residual_re=re, residual_im=im, squaring_residual=lhs - rhs,
        m_residual=abs(char_function_poly(lam, coeffs, tau)) / scale,
        det_residual=abs(char_function_det(lam, p, eq)) / scale,
        dm_dlambda=abs(char_function_dlambda(lam, coeffs, tau)),
    )


def newton_root(params: Parameters, tau: float, guess: complex, tol: float = 1e-14,
                max_iter: int = 100) -> complex:
    """Damped Newton on ``m(., tau)`` at the endemic state of the ``tau`` system."""
    coeffs = coefficients_at(params, tau)
    lam = complex(guess)
    val = char_function_poly(lam, coeffs, tau)
    for _ in range(max_iter):
        d = char_function_dlambda(lam, coeffs, tau)
        if d == 0:
            break
        step = val / d
        alpha = 1.0
        while alpha > 1e-6:
            trial = lam - alpha * step
            tval = char_function_poly(trial, coeffs, tau)
            if abs(tval) < abs(val):
                break
            alpha *= 0.5
        else:
            break
        lam, val = trial, tval
        if abs(alpha * step) <= tol * max(1.0, abs(lam)):
            break
    return lam


def continue_root(params: Parameters, tau0: float, v0: float, half_width: float = 0.5,
                  step: float = 0.05) -> Continuation:
    """Follow the root through ``i v0`` across ``[tau0 - half_width, tau0 + half_width]``.

    Each side is stepped outward from ``tau0`` with damped Newton seeded by
    the previous root.  ``slope`` is the central difference of
    ``Re s(tau)`` at ``tau0 +- step``.
    """
    n = int(round(half_width / step))
    start = newton_root(params, tau0, 1j * v0)
    right, left = [start], [start]
    for k in range(1, n + 1):
        right.append(newton_root(params, tau0 + k * step, right[-1]))
        left.append(newton_root(params, tau0 - k * step, left[-1]))
    roots = np.array(left[:0:-1] + right)
    taus = tau0 + step * np.arange(-n, n + 1)
    slope = (right[1].real - left[1].real) / (2 * step)
    return Continuation(taus, roots, slope)


def critical_delays(params: Parameters, tau_max: float = 100.0, grid_step: float = 0.05,
                    n_max: int = 10, continuation: bool = True) -> HopfAnalysis:
    """Scan ``(0, tau_max]`` for delays at which ``m`` has roots on the imaginary axis.

    For every positive root ``v_j(tau)`` and every ``n <= n_max`` the
    mismatch ``tau - (angle_j(tau) + 2 n pi) / v_j(tau)`` is evaluated on
    the grid; sign changes are bisected to ``|mismatch| <= 1e-10``.
    Brackets across a ``2 pi`` wrap of the angle never converge and are
    dropped.

    Raises
    ------
    HypothesisError
        If ``R0 <= 1``, ``J(0) >= mu + gamma + d`` or the Routh-Hurwitz
        condition fails at ``tau = 0``.
    NoCriticalDelay
        If a positive root of ``F`` exists somewhere in the range but no
        crossing delay is found.
    """
    if tau_max <= 0 or grid_step <= 0:
        raise ValueError("tau_max and grid_step must be positive")
    _, c0 = zero_delay_coefficients(params)
    rh = routh_hurwitz_H(c0)
    if not rh.holds:
        raise HypothesisError(f"Routh-Hurwitz condition fails at tau = 0: {rh.first_failure}")

    n_grid = int(math.floor(tau_max / grid_step + 1e-9))
    taus = grid_step * np.arange(1, n_grid + 1)
    scan = [_branches(params, t) for t in taus]
    any_condition = any(positive_root_exists(q) for q, _ in scan)

    found = {}
    for i in range(len(taus) - 1):
        br_a, br_b = scan[i][1], scan[i + 1][1]
        if len(br_a) != len(br_b):
            continue
        for j, ((_, va, aa), (_, vb, ab)) in enumerate(zip(br_a, br_b)):
            for n in range(n_max + 1):
                ga = _mismatch(taus[i], va, aa, n)
                gb = _mismatch(taus[i + 1], vb, ab, n)
                if ga == 0.0:
                    root = float(taus[i])
                elif (ga < 0) != (gb < 0):
                    root = _refine(params, j, n, float(taus[i]), float(taus[i + 1]), ga)
                else:
                    continue
                if root is not None:
                    found[(j, n, round(root, 9))] = root

    candidates = sorted((_candidate(params, j, n, t) for (j, n, _), t in found.items()),
                        key=lambda c: (c.tau, c.j, c.n))
    if not candidates:
        if any_condition:
            raise NoCriticalDelay(
                f"F has positive roots but no crossing delay was found in (0, {tau_max}]"
            )
        return HopfAnalysis([], None, None, None, None, 0, Classification.STABLE_ALL_TAU,
                            False, None, tau_max, grid_step, rh.as_dict())

    first = candidates[0]
    q0 = reduce_to_quartic(coefficients_at(params, first.tau))
    sign = transversality(q0, first.w)
    cont = continue_root(params, first.tau, first.v) if continuation else None
    analysis = HopfAnalysis(
        candidates=candidates, tau0=first.tau, v0=first.v, w0=first.w,
        fprime0=first.fprime, transversality_sign=sign,
        classification=Classification.INCONCLUSIVE, any_condition=any_condition,
        continuation=cont, tau_max=tau_max, grid_step=grid_step, zero_delay_H=rh.as_dict(),
    )
    return _with_classification(analysis)


def classify(analysis: HopfAnalysis) -> Classification:
    """Stability verdict for the endemic state as ``tau`` increases.

    ``STABLE_ALL_TAU`` when ``F`` never has a positive root; ``HOPF``
    (stable on ``[0, tau0)``, Hopf bifurcation at ``tau0``) when it does
    and the crossing is transversal; ``INCONCLUSIVE`` otherwise.
    """
    if not analysis.any_condition:
        return Classification.STABLE_ALL_TAU
    if analysis.tau0 is not None and analysis.transversality_sign != 0:
        return Classification.HOPF
    return Classification.INCONCLUSIVE


def _with_classification(analysis: HopfAnalysis) -> HopfAnalysis:
    return dataclasses.replace(analysis, classification=classify(analysis))
