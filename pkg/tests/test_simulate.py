import math

import numpy as np
import pytest

from svirs import (
    AgeGrid,
    SimState,
    SimulationUnstable,
    Trajectory,
    baseline_parameters,
    detect_regime,
    endemic_equilibrium,
    init,
    run,
    step,
    total_population,
)
from svirs.equilibria import disease_free_equilibrium
from svirs.simulate import (
    RegimeKind,
    advect,
    baseline_initial_state,
    equilibrium_state,
    survival_factors,
)

INIT_R_TOTAL = 200.0 * (1.0 - math.exp(-5.0))  # int_0^100 10 exp(-0.05 a) da


def test_grid_construction():
    p = baseline_parameters()
    g = AgeGrid.build(p)
    assert g.n_cells == 2000 and g.da == 0.05 and g.knot_index == 240
    assert g.theta_cells[239] == 0.0 and g.theta_cells[240] == p.theta_star


def test_grid_knot_inside_cell_gets_fraction():
    p = baseline_parameters(tau=12.02)
    g = AgeGrid.build(p)
    k = g.knot_index
    assert k == 240
    assert g.theta_cells[k] == pytest.approx(0.6 * p.theta_star)
    assert g.theta_cells[k - 1] == 0.0 and g.theta_cells[k + 1] == p.theta_star


def test_grid_rejects_short_truncation_and_misaligned_steps():
    with pytest.raises(ValueError):
        AgeGrid.build(baseline_parameters(tau=95.0))
    with pytest.raises(ValueError):
        AgeGrid.build(baseline_parameters(), da=0.03)
    with pytest.raises(ValueError):
        AgeGrid.build(baseline_parameters(), da=0.0)


def test_init_samples_left_edges_and_integrates():
    p = baseline_parameters()
    g = AgeGrid.build(p)
    s = baseline_initial_state(p, g)
    assert s.R_cells[0] == 10.0
    assert s.R_cells[1] == pytest.approx(10.0 * math.exp(-0.05 * 0.05))
    assert s.R_cells.sum() * g.da == pytest.approx(INIT_R_TOTAL, rel=5e-3)
    assert total_population(s, g) == pytest.approx(170.0 + s.R_cells.sum() * g.da)


def test_init_zero_profile_and_negative_rejection():
    p = baseline_parameters()
    g = AgeGrid.build(p)
    s = init(p, 1.0, 2.0, 3.0, None, g)
    assert s.R_cells.sum() == 0.0
    zero = init(p, 0.0, 0.0, 0.0, None, g)
    assert total_population(zero, g) == 0.0
    with pytest.raises(ValueError):
        init(p, -1.0, 0.0, 0.0, None, g)
    with pytest.raises(ValueError):
        init(p, 1.0, 0.0, 0.0, lambda a: -np.ones_like(a), g)


def test_disease_free_fixed_point_one_step():
    p = baseline_parameters(iota=0.0)
    g = AgeGrid.build(p)
    s = init(p, p.pi / p.mu, 0.0, 0.0, None, g)
    s1 = step(s, p, g, 0.05)
    assert s1.S == pytest.approx(p.pi / p.mu, rel=1e-15)
    assert s1.t == pytest.approx(0.05)
    assert s.t == 0.0  # input untouched
    with pytest.raises(ValueError):
        step(s, p, g, 0.1)


def test_pure_advection_shifts_one_cell():
    rng = np.random.default_rng(0)
    R = rng.uniform(size=50)
    out = advect(R, 7.0, np.ones(50))
    assert out[0] == 7.0
    assert np.array_equal(out[1:], R[:-1])
    # repeated shifts move the profile rigidly
    cur = R.copy()
    for _ in range(10):
        cur = advect(cur, 0.0, np.ones(50))
    assert np.array_equal(cur[10:], R[:-10]) and not cur[:10].any()


def _frozen_boundary_error(da):
    p = baseline_parameters()
    g = AgeGrid.build(p, da=da)
    surv = survival_factors(p, g, da)
    I_bar = 100.0
    R = np.zeros(g.n_cells)
    for _ in range(g.n_cells + 5):
        R = advect(R, p.gamma * I_bar, surv)
    a = g.ages
    exact = p.gamma * I_bar * np.exp(-p.mu * a - p.theta_star * np.clip(a - p.tau, 0, None))
    return np.max(np.abs(R - exact)) / (p.gamma * I_bar)


def test_frozen_boundary_matches_characteristic_solution_to_first_order():
    e1, e2 = _frozen_boundary_error(0.1), _frozen_boundary_error(0.05)
    assert e2 < 0.05
    assert 1.6 < e1 / e2 < 2.4


def test_equilibrium_start_drift():
    p = baseline_parameters()
    eq = endemic_equilibrium(p)
    g = AgeGrid.build(p)
    traj = run(p, equilibrium_state(eq, g), g, 10_000 * g.da, sample_every=10)
    for col, ref in (("S", eq.S), ("V", eq.V), ("I", eq.I)):
        drift = np.max(np.abs(getattr(traj, col) - ref)) / ref
        assert drift <= 5 * g.da, col


def test_trajectory_invariants_and_snapshots():
    p = baseline_parameters()
    g = AgeGrid.build(p)
    s0 = baseline_initial_state(p, g)
    traj = run(p, s0, g, 100.0, sample_every=1, snapshot_times=(0.0, 50.0))
    assert isinstance(traj, Trajectory)
    assert np.all(np.diff(traj.t) > 0)
    assert traj.t[-1] == pytest.approx(100.0)
    assert np.allclose(traj.W, traj.S + traj.V + traj.I + traj.R_total, rtol=1e-14)
    assert set(traj.snapshots) == {0.0, 50.0}
    assert np.array_equal(traj.snapshots[0.0], s0.R_cells)
    # boundary cell holds gamma I from the previous step
    k = int(np.argmin(abs(traj.t - 49.95)))
    assert traj.snapshots[50.0][0] == pytest.approx(p.gamma * traj.I[k], rel=1e-12)
    sparse = run(p, s0, g, 100.0, sample_every=7)
    assert np.all(np.diff(sparse.t) > 0) and sparse.t[-1] == pytest.approx(100.0)
    assert s0.t == 0.0


def test_run_argument_checks():
    p = baseline_parameters()
    g = AgeGrid.build(p)
    s0 = baseline_initial_state(p, g)
    with pytest.raises(ValueError):
        run(p, s0, g, 0.0)
    with pytest.raises(ValueError):
        run(p, s0, g, 10.0, dt=0.1)
    with pytest.raises(ValueError):
        run(p, s0, g, 10.0, sample_every=0)


def test_blow_up_detected():
    p = baseline_parameters(mu=0.008, theta_star=0.35)
    g = AgeGrid.build(p, da=4.0, a_max=100.0)
    with pytest.raises(SimulationUnstable):
        run(p, baseline_initial_state(p, g), g, 100.0)


def test_huge_growth_aborts():
    p = baseline_parameters(beta=0.5, pi=1e6)
    g = AgeGrid.build(p)
    with pytest.raises(SimulationUnstable):
        run(p, baseline_initial_state(p, g), g, 200.0)


def test_disease_free_convergence():
    p = baseline_parameters(pi=5.0)
    g = AgeGrid.build(p)
    traj = run(p, baseline_initial_state(p, g), g, 2000.0)
    assert traj.I[-1] < 1e-3
    reg = detect_regime(traj)
    assert reg.kind is RegimeKind.CONVERGED and reg.label == "converged-disease-free"


def test_endemic_final_window_close_to_equilibrium():
    p = baseline_parameters()
    g = AgeGrid.build(p)
    eq = endemic_equilibrium(p)
    traj = run(p, baseline_initial_state(p, g), g, 2000.0)
    tail = traj.t >= 1800.0
    for col, ref in (("S", eq.S), ("V", eq.V), ("I", eq.I)):
        assert np.max(np.abs(getattr(traj, col)[tail] - ref)) <= 0.01 * ref


def _synthetic(p, I_of_t, t_end=1000.0, n=5001, S=None, V=None):
    t = np.linspace(0, t_end, n)
    I = I_of_t(t)
    S = np.full_like(t, S if S is not None else 1.0)
    V = np.full_like(t, V if V is not None else 1.0)
    zeros = np.zeros_like(t)
    samples = np.column_stack([t, S, V, I, zeros, S + V + I])
    return Trajectory(p, None, samples)


def test_detect_regime_synthetic_cases():
    p = baseline_parameters()
    eq = endemic_equilibrium(p)
    const = _synthetic(p, lambda t: np.full_like(t, eq.I), S=eq.S, V=eq.V)
    reg = detect_regime(const)
    assert reg.kind is RegimeKind.CONVERGED and reg.point.kind.value == "endemic"

    osc = _synthetic(p, lambda t: 80 + 30 * np.sin(2 * np.pi * t / 40))
    reg = detect_regime(osc)
    assert reg.kind is RegimeKind.OSCILLATORY
    assert reg.period == pytest.approx(40.0, rel=1e-3)
    assert reg.amplitude == pytest.approx(60.0, rel=1e-3)

    decaying = _synthetic(p, lambda t: 80 + 30 * np.exp(-t / 100) * np.sin(2 * np.pi * t / 40))
    assert detect_regime(decaying).kind is RegimeKind.UNDETERMINED

    flat_elsewhere = _synthetic(p, lambda t: np.full_like(t, 3.0))
    assert detect_regime(flat_elsewhere).kind is RegimeKind.UNDETERMINED

    with pytest.raises(ValueError):
        detect_regime(_synthetic(p, lambda t: np.full_like(t, 3.0), t_end=100.0))


def test_detect_regime_with_explicit_candidates():
    p = baseline_parameters(pi=5.0)
    e0 = disease_free_equilibrium(p)
    traj = _synthetic(p, lambda t: np.zeros_like(t), S=e0.S, V=e0.V)
    assert detect_regime(traj, [e0]).point is e0
    assert detect_regime(traj, []).kind is RegimeKind.UNDETERMINED


def test_state_copy_is_independent():
    s = SimState(0.0, 1.0, 2.0, 3.0, np.ones(3))
    c = s.copy()
    c.R_cells[0] = 5.0
    assert s.R_cells[0] == 1.0
