from dataclasses import replace

import numpy as np
import pytest
from conftest import random_parameters
from oracles import char_coefficients_symbolic, char_value

from svirs import CoefficientMismatch, baseline_parameters, endemic_equilibrium
from svirs.equilibria import basic_reproduction_number
from svirs.stability import (
    CharCoefficients,
    char_coefficients,
    char_function_det,
    char_function_dlambda,
    char_function_poly,
    cross_validate,
    delay_free_polynomial,
    dfe_eigenvalues,
    long_form_coefficients,
    polynomial_roots,
    routh_hurwitz_H,
    term_scale,
    zero_delay_coefficients,
)

# symbolic expansion of (lambda + mu + theta*) det M at the tau=12 endemic state
COEFFS_TAU12 = dict(A3=1.1112705699768235, A2=0.33952997553976966, A1=0.04265764123931392,
                    A0=0.006318012398917779, G1=-0.01404795141223661, G0=-0.005016385638797812)
# companion-matrix roots of the tau=0 quartic
ROOTS_TAU0 = (-0.04447583721969151, -0.1428412364943177, -0.32438405651858604, -0.6925218665075702)


def test_coefficients_reference():
    p = baseline_parameters()
    c = char_coefficients(p, endemic_equilibrium(p))
    for k, v in COEFFS_TAU12.items():
        assert getattr(c, k) == pytest.approx(v, rel=1e-9), k
    assert c.tau == 12.0


def test_coefficients_match_symbolic_expansion_on_random_sets(rng):
    for _ in range(15):
        p = random_parameters(rng)
        eq = endemic_equilibrium(p)
        c = char_coefficients(p, eq)
        ref = char_coefficients_symbolic(p.as_dict(), eq.S, eq.V, eq.I)
        got = (c.A3, c.A2, c.A1, c.A0, c.G1, c.G0)
        scale = max(abs(x) for x in ref)
        assert np.allclose(got, ref, rtol=1e-9, atol=1e-12 * scale)


def test_long_form_disagrees_beyond_A3():
    p = baseline_parameters()
    eq = endemic_equilibrium(p)
    good = char_coefficients(p, eq)
    lit = long_form_coefficients(p, eq)
    assert lit.A3 == pytest.approx(good.A3, rel=1e-12)
    assert (lit.G1, lit.G0) == (good.G1, good.G0)
    assert abs(lit.A2 - good.A2) > 0.5
    with pytest.raises(CoefficientMismatch):
        cross_validate(lit, p, eq)


@pytest.mark.parametrize("lam", [0.3 + 0.1j, -0.1 + 0.5j, 1.2 - 0.7j, 0.05j])
def test_determinant_form_against_quadrature_oracle(lam):
    p = baseline_parameters()
    eq = endemic_equilibrium(p)
    ref = char_value(lam, p.as_dict(), eq.S, eq.V, eq.I)
    assert char_function_det(lam, p, eq) == pytest.approx(ref, rel=1e-9, abs=1e-13)


def test_poly_and_det_agree_off_equilibrium(rng):
    # the expansion keeps the S,V-dependent diagonal term, so it holds at any point
    p = baseline_parameters()
    eq = endemic_equilibrium(p)
    off = replace(eq, S=eq.S * 1.3, V=eq.V * 0.7, I=eq.I * 2.0)
    c = char_coefficients(p, off, check=False)
    assert cross_validate(c, p, off) < 1e-10


def test_perturbed_coefficients_detected():
    p = baseline_parameters()
    eq = endemic_equilibrium(p)
    c = char_coefficients(p, eq)
    bad = CharCoefficients(c.A3, c.A2 * (1 + 1e-5), c.A1, c.A0, c.G1, c.G0, c.tau)
    with pytest.raises(CoefficientMismatch):
        cross_validate(bad, p, eq)


def test_derivative_against_finite_difference():
    p = baseline_parameters()
    c = char_coefficients(p, endemic_equilibrium(p))
    lam, h = 0.2 + 0.4j, 1e-6
    fd = (char_function_poly(lam + h, c) - char_function_poly(lam - h, c)) / (2 * h)
    assert char_function_dlambda(lam, c) == pytest.approx(fd, rel=1e-7)


def test_term_scale_covers_delay_term():
    c = CharCoefficients(0, 0, 0, 0, 1.0, 0.0, tau=20.0)
    assert term_scale(-1.0 + 0j, c) == pytest.approx(1 + np.exp(20.0))


def test_dfe_eigenvalue_sign_tracks_R0(rng):
    for _ in range(100):
        p = random_parameters(rng, endemic=False)
        lam1, lam2, lam3 = dfe_eigenvalues(p)
        assert lam2 < 0 and lam3 < 0
        R0 = basic_reproduction_number(p)
        if abs(R0 - 1) > 1e-9:
            assert (lam1 < 0) == (R0 < 1)


def test_dfe_reference_stable_for_small_pi():
    assert max(dfe_eigenvalues(baseline_parameters(pi=5))) < 0
    assert max(dfe_eigenvalues(baseline_parameters())) > 0


def test_zero_delay_reference_roots():
    _, c0 = zero_delay_coefficients(baseline_parameters())
    assert c0.tau == 0.0
    roots = polynomial_roots(delay_free_polynomial(c0))
    assert np.allclose(np.sort(roots.real)[::-1], ROOTS_TAU0, rtol=1e-8)
    assert np.all(np.abs(roots.imag) < 1e-9)
    assert routh_hurwitz_H(c0).holds


def _synthetic(roots):
    a = np.real(np.poly(roots))
    return CharCoefficients(a[1], a[2], a[3], a[4], 0.0, 0.0, 0.0)


@pytest.mark.parametrize("roots,stable", [
    ([-1, -2, -3, -4], True),
    ([-0.1 + 2j, -0.1 - 2j, -0.5, -3], True),
    ([0.1 + 2j, 0.1 - 2j, -0.5, -3], False),
    ([0.5, -1, -2, -3], False),
    ([1j, -1j, -1, -2], False),
    ([-1e-3 + 1j, -1e-3 - 1j, -1e-3 + 0.5j, -1e-3 - 0.5j], True),
])
def test_routh_hurwitz_synthetic(roots, stable):
    assert routh_hurwitz_H(_synthetic(roots)).holds is stable


def test_routh_hurwitz_reports_first_failure():
    rh = routh_hurwitz_H(_synthetic([0.5, 1.0, 2.0, 3.0]))
    assert not rh.holds and rh.first_failure == "A3 > 0"


def test_routh_hurwitz_rejects_positive_tau():
    with pytest.raises(ValueError):
        routh_hurwitz_H(CharCoefficients(1, 1, 1, 1, 0, 0, tau=1.0))


def test_routh_hurwitz_uses_delay_terms_at_zero():
    # A1 + G1 < 0 fails even though A1 > 0
    c = CharCoefficients(10.0, 35.0, 50.0, 24.0, -60.0, 0.0, 0.0)
    assert not routh_hurwitz_H(c).holds


def match_distance(a, b):
    """Largest distance after greedily pairing each root of ``b`` with one of ``a``."""
    left = list(a)
    worst = 0.0
    for z in b:
        k = int(np.argmin([abs(z - x) for x in left]))
        worst = max(worst, abs(z - left.pop(k)) / max(1.0, abs(z)))
    return worst


def test_polynomial_roots_against_companion_matrix(rng):
    for _ in range(200):
        n = rng.integers(1, 7)
        coeffs = rng.normal(size=n + 1)
        assert match_distance(polynomial_roots(coeffs), np.roots(coeffs)) < 1e-7


def test_polynomial_roots_edge_cases():
    assert np.allclose(np.sort(polynomial_roots([1, -3, 2, 0]).real), [0, 1, 2])
    r = polynomial_roots([1, -2, 1])
    assert np.allclose(r, [1, 1], atol=1e-6)
    assert polynomial_roots([0, 0, 2, -4]) == pytest.approx([2])
    with pytest.raises(ValueError):
        polynomial_roots([0, 0])
