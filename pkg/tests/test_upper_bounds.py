import math

import numpy as np
import pytest

from edbound.lower_bounds import Direction, thm3_geometric_lower
from edbound.profile import GeometricSpec, expand_geometric, fidelity_at, make_staircase
from edbound.upper_bounds import (
    InfeasibleError,
    OptimizeReport,
    SchemeConfig,
    achieved_fidelity,
    beta_star,
    digital_energy,
    digital_energy_gradient,
    digital_energy_hessian_diag,
    digital_only_energy,
    dilog_at_minus2,
    e0_feasible_max,
    layer_energy,
    optimize_e0,
    point_to_point_distortion,
    square_law_constant_d,
    thm4_geometric_upper,
    thm6_two_level,
    total_energy,
    total_energy_derivative,
)
from edbound.verify import sample_profiles

# Worked-instance goldens, oracle-confirmed before freezing.
WORKED_E0_STAR = 0.28077640640441515
WORKED_UPPER = 1.0073463489149375
# Dilogarithm at -2 via the convergent-series route (see series_dilog below).
LI2_MINUS_2 = -1.436746366883681

WORKED = make_staircase([1, 2], [2, 4])


def series_dilog_minus2() -> float:
    """Independent route: convergent series at -1/2 plus the inversion identity."""
    z = -0.5
    s = 0.0
    for k in range(200, 0, -1):
        s += z ** k / k ** 2
    return -math.pi ** 2 / 6.0 - 0.5 * math.log(2.0) ** 2 - s


# --- point to point ---

def test_point_to_point_examples():
    assert point_to_point_distortion(0.0, 1.0) == 1.0
    assert point_to_point_distortion(math.log(2.0), 1.0) == pytest.approx(0.5, abs=1e-15)
    assert point_to_point_distortion(math.log(2.0), 0.5) == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("E,N", [(-1.0, 1.0), (1.0, 0.0), (1.0, -2.0),
                                 (math.nan, 1.0), (1.0, math.inf)])
def test_point_to_point_rejects(E, N):
    with pytest.raises(ValueError):
        point_to_point_distortion(E, N)


# --- digital-only scheme ---

def test_digital_only_examples():
    r = digital_only_energy(WORKED)
    assert r.direction is Direction.UPPER
    assert r.energy == pytest.approx(1.0397207708399179, abs=1e-15)
    assert digital_only_energy(make_staircase([1], [2])).energy == pytest.approx(
        math.log(2.0), abs=1e-15)
    assert digital_only_energy(make_staircase([2, 4], [8, 64])).energy == pytest.approx(
        1.5595811562598767, abs=1e-15)


def test_thm4_examples():
    assert thm4_geometric_upper(GeometricSpec(2.0, 8.0)).energy == pytest.approx(
        math.log(8.0), abs=1e-15)
    assert thm4_geometric_upper(GeometricSpec(3.0, 3.0)).energy == pytest.approx(
        math.log(3.0) / 2.0, abs=1e-15)
    # bound ordering against the matching lower closed form
    assert thm4_geometric_upper(GeometricSpec(2.0, 8.0)).energy >= \
        thm3_geometric_lower(GeometricSpec(2.0, 8.0)).energy
    with pytest.raises(ValueError):
        thm4_geometric_upper(GeometricSpec(2.0, 8.0, levels=4))


# --- feasibility cap and corner solution ---

def test_e0_feasible_max_examples():
    assert e0_feasible_max(WORKED) == 1.0
    # geometric with lam/gamma >= 1: cap is (lam-1)/gamma at every depth
    for k in (5, 20):
        p = expand_geometric(GeometricSpec(2.0, 8.0), k)
        assert e0_feasible_max(p) == pytest.approx(3.5, abs=1e-15)
    # lam < gamma: the cap decays towards 0 with depth
    z10 = e0_feasible_max(expand_geometric(GeometricSpec(4.0, 2.0), 10))
    z20 = e0_feasible_max(expand_geometric(GeometricSpec(4.0, 2.0), 20))
    assert 0.0 < z20 < z10 < 1e-3


def test_beta_star_examples():
    assert beta_star(WORKED, 0.0) == (2.0, 4.0)
    assert beta_star(WORKED, 0.5) == (1.5, 3.0)
    with pytest.raises(InfeasibleError):
        beta_star(WORKED, 1.5)
    with pytest.raises(ValueError):
        beta_star(WORKED, -0.1)


def test_beta_star_accepts_cap_closure():
    beta = beta_star(WORKED, e0_feasible_max(WORKED))
    assert beta[0] == pytest.approx(1.0, abs=1e-12)


def test_layer_energy_examples():
    assert layer_energy(1, 0.0, [2.0, 4.0], WORKED) == pytest.approx(
        math.log(2.0), abs=1e-15)
    assert layer_energy(2, 0.0, [2.0, 4.0], WORKED) == pytest.approx(
        0.5 * math.log(2.0), abs=1e-15)
    assert layer_energy(1, 0.5, [1.5, 3.0], WORKED) == pytest.approx(
        0.28768207245178085, abs=1e-15)
    with pytest.raises(ValueError):
        layer_energy(0, 0.0, [2.0, 4.0], WORKED)
    with pytest.raises(ValueError):
        layer_energy(3, 0.0, [2.0, 4.0], WORKED)


# --- total energy and its derivative ---

def test_total_energy_zero_analog_equals_digital_exactly():
    assert total_energy(WORKED, 0.0) == digital_only_energy(WORKED).energy


def test_total_energy_worked_values():
    assert total_energy(WORKED, 0.2807764) == pytest.approx(WORKED_UPPER, abs=1e-10)
    single = make_staircase([1], [2])
    assert total_energy(single, math.log(2.0)) == pytest.approx(
        0.8597053269808461, abs=1e-15)


def test_total_energy_two_paths_agree():
    for p in sample_profiles(101, 30):
        z = e0_feasible_max(p)
        for frac in (0.0, 0.3, 0.9):
            e0 = frac * z
            via_layers = e0 + sum(
                layer_energy(k, e0, beta_star(p, e0), p)
                for k in range(1, p.levels + 1))
            assert total_energy(p, e0) == pytest.approx(via_layers, rel=1e-12)


def test_total_energy_infeasible():
    with pytest.raises(InfeasibleError):
        total_energy(WORKED, 1.2)
    with pytest.raises(InfeasibleError):
        total_energy_derivative(WORKED, 1.2)


def test_derivative_at_zero_worked():
    assert total_energy_derivative(WORKED, 0.0) == pytest.approx(-0.25, abs=1e-15)


def test_derivative_stationary_at_optimum():
    assert abs(total_energy_derivative(WORKED, WORKED_E0_STAR)) < 1e-8


def test_derivative_matches_finite_differences():
    for p in sample_profiles(103, 20):
        z = e0_feasible_max(p)
        for frac in (0.1, 0.5, 0.9):
            e0 = frac * z
            h = min(max(1e-6, 1e-6 * e0), 0.04 * z)
            fd = (total_energy(p, e0 + h) - total_energy(p, e0 - h)) / (2.0 * h)
            exact = total_energy_derivative(p, e0)
            assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


def test_derivative_nondecreasing():
    for p in sample_profiles(104, 20):
        z = e0_feasible_max(p)
        grid = np.linspace(0.0, z, 9)
        ds = [total_energy_derivative(p, float(e0)) for e0 in grid]
        assert all(d1 <= d2 + 1e-12 for d1, d2 in zip(ds, ds[1:]))


def test_total_energy_convexity_chord():
    rng = np.random.default_rng(21)
    for p in sample_profiles(105, 20):
        z = e0_feasible_max(p)
        x, y, w = sorted(float(v) for v in rng.uniform(0.0, z, size=3))
        if w - x < 1e-12:
            continue
        chord = ((w - y) * total_energy(p, x) + (y - x) * total_energy(p, w)) / (w - x)
        assert total_energy(p, y) <= chord + 1e-9


def test_total_energy_scaling_homogeneity():
    rng = np.random.default_rng(23)
    for s in (0.1, 3.0, 17.0):
        for p in sample_profiles(106, 10):
            e0 = float(rng.uniform(0.0, 0.9)) * e0_feasible_max(p)
            p_scaled = make_staircase([qk / s for qk in p.q], p.a)
            assert total_energy(p_scaled, s * e0) == pytest.approx(
                s * total_energy(p, e0), rel=1e-12)


# --- curvature structure in beta ---

def test_gradient_and_hessian_signs():
    rng = np.random.default_rng(29)
    for p in sample_profiles(107, 20):
        z = e0_feasible_max(p)
        e0 = float(rng.uniform(0.0, 0.9)) * z
        beta = tuple(np.asarray(beta_star(p, e0))
                     + np.cumsum(rng.uniform(0.05, 1.0, size=p.levels)))
        assert all(g > 0.0 for g in digital_energy_gradient(p, e0, beta))
        assert all(h < 0.0 for h in digital_energy_hessian_diag(p, e0, beta))


def test_digital_energy_separates_per_coordinate():
    # moving beta_j never changes the gradient in beta_k for k != j, j-1
    p = make_staircase([0.5, 1.5, 4.0], [1.6, 2.8, 6.0])
    e0 = 0.1
    beta = list(beta_star(p, e0))
    beta = [b + 0.3 * (i + 1) for i, b in enumerate(beta)]
    g_before = digital_energy_gradient(p, e0, tuple(beta))
    beta[2] += 0.5
    g_after = digital_energy_gradient(p, e0, tuple(beta))
    assert g_after[0] == g_before[0]


# --- optimization over the analog level ---

def test_optimize_worked_instance():
    report = optimize_e0(WORKED, 1e-10)
    assert report.z == 1.0
    assert report.e0_star == pytest.approx(WORKED_E0_STAR, abs=1e-12)
    assert report.e0_used == report.e0_star
    assert report.energy == pytest.approx(WORKED_UPPER, abs=1e-12)
    assert report.iterations > 0
    assert abs(total_energy_derivative(WORKED, report.e0_star)) < 1e-10


def test_optimize_single_level_prefers_no_analog():
    p = make_staircase([1], [2])
    report = optimize_e0(p, 1e-10)
    assert report.e0_star == 0.0
    assert report.e0_used == 0.0
    assert report.iterations == 0
    assert report.energy == pytest.approx(math.log(2.0), abs=1e-15)


def test_optimize_never_beats_digital_only():
    for p in sample_profiles(108, 40):
        report = optimize_e0(p, 1e-10)
        assert report.energy <= digital_only_energy(p).energy + 1e-12


def test_optimize_near_degenerate_cap():
    # lam < gamma: the cap shrinks towards 0 with depth and pins the analog level
    p = expand_geometric(GeometricSpec(4.0, 2.0), 20)
    report = optimize_e0(p, 1e-10)
    assert report.z < 1e-5
    assert report.e0_used <= report.z
    assert report.energy == pytest.approx(digital_only_energy(p).energy, rel=1e-4)


def test_optimize_rejects_bad_tol():
    with pytest.raises(ValueError):
        optimize_e0(WORKED, 0.0)


def test_optimize_report_selection_rule_enforced():
    with pytest.raises(ValueError):
        OptimizeReport(e0_star=0.5, z=1.0, e0_used=1.0, energy=1.0, iterations=0)
    with pytest.raises(ValueError):
        OptimizeReport(e0_star=2.0, z=1.0, e0_used=2.0, energy=1.0, iterations=0)


def test_thm6_worked_instance():
    report = thm6_two_level(1.0, 0.5, 2.0, 4.0)
    assert report.e0_star == pytest.approx(WORKED_E0_STAR, abs=1e-15)
    assert report.z == 1.0
    assert report.e0_used == report.e0_star
    assert report.energy == pytest.approx(WORKED_UPPER, abs=1e-15)
    assert report.iterations == 0
    # quadratic identity of the closed form
    M = 2.0
    assert report.e0_star ** 2 + report.e0_star * (M - 0.5) - 0.5 == pytest.approx(
        0.0, abs=1e-14)
    # strictly better than digital-only on this instance
    assert report.energy < digital_only_energy(WORKED).energy


def test_thm6_matches_optimize():
    rng = np.random.default_rng(31)
    for _ in range(50):
        a1 = float(rng.uniform(1.1, 5.0))
        a2 = a1 * float(rng.uniform(1.2, 4.0))
        n1 = float(rng.uniform(0.2, 3.0))
        n2 = n1 * float(rng.uniform(0.05, 0.95))
        p = make_staircase([1.0 / n1, 1.0 / n2], [a1, a2])
        closed = thm6_two_level(n1, n2, a1, a2)
        iterative = optimize_e0(p, 1e-12)
        assert closed.energy == pytest.approx(iterative.energy, rel=1e-8)


def test_thm6_cap_branch():
    report = thm6_two_level(1.0, 0.5, 1.01, 4.0)
    assert report.z == pytest.approx(0.01, abs=1e-15)
    assert report.e0_star > report.z
    assert report.e0_used == report.z
    p = make_staircase([1.0, 2.0], [1.01, 4.0])
    assert report.energy == pytest.approx(total_energy(p, report.e0_used), rel=1e-12)


def test_thm6_rejects():
    with pytest.raises(ValueError):
        thm6_two_level(0.5, 1.0, 2.0, 4.0)
    with pytest.raises(ValueError):
        thm6_two_level(1.0, 0.5, 4.0, 2.0)


# --- achieved fidelity ---

def test_achieved_fidelity_examples():
    digital = SchemeConfig(e0=0.0, beta=(2.0, 4.0))
    assert achieved_fidelity(WORKED, digital, 1.5) == 2.0
    corner = SchemeConfig(e0=0.5, beta=beta_star(WORKED, 0.5))
    assert achieved_fidelity(WORKED, corner, 1.0) == 2.0
    assert achieved_fidelity(WORKED, corner, 0.5) == pytest.approx(1.25, abs=1e-15)
    with pytest.raises(ValueError):
        achieved_fidelity(WORKED, corner, 0.0)
    with pytest.raises(ValueError):
        achieved_fidelity(WORKED, SchemeConfig(e0=0.5, beta=(1.5,)), 1.0)


def test_achieved_fidelity_dominates_profile():
    for p in sample_profiles(109, 20):
        report = optimize_e0(p, 1e-10)
        cfg = SchemeConfig(e0=report.e0_used, beta=beta_star(p, report.e0_used))
        for Q in np.geomspace(p.q[0] / 10.0, 10.0 * p.q[-1], 80):
            assert achieved_fidelity(p, cfg, float(Q)) >= fidelity_at(p, float(Q)) - 1e-12
        for qk, ak in zip(p.q, p.a):
            assert achieved_fidelity(p, cfg, qk) == pytest.approx(ak, abs=1e-9)


def test_scheme_config_validation():
    with pytest.raises(ValueError):
        SchemeConfig(e0=-0.1, beta=(2.0,))
    with pytest.raises(ValueError):
        SchemeConfig(e0=0.0, beta=(2.0, 1.5))
    with pytest.raises(ValueError):
        SchemeConfig(e0=0.0, beta=(0.5, 2.0))
    with pytest.raises(ValueError):
        SchemeConfig(e0=0.0, beta=())


# --- dilogarithm constant ---

def test_dilog_matches_series_route():
    assert series_dilog_minus2() == pytest.approx(LI2_MINUS_2, abs=1e-14)
    assert dilog_at_minus2(1e-10) == pytest.approx(LI2_MINUS_2, abs=1e-9)


def test_constant_d_reference_value():
    assert abs(square_law_constant_d(1e-8) - 3.1846) < 5e-4


def test_constant_d_identity():
    d = square_law_constant_d(1e-8)
    assert d * d / 4.0 + dilog_at_minus2(1e-8) == pytest.approx(
        math.log(3.0), abs=1e-8)


def test_constant_d_rejects():
    with pytest.raises(ValueError):
        square_law_constant_d(-1e-8)
