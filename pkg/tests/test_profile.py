import math

import numpy as np
import pytest

from edbound.profile import (
    GeometricSpec,
    StaircaseProfile,
    UNBOUNDED,
    distortion_at,
    expand_geometric,
    fidelity_at,
    make_staircase,
    truncation_level,
)


def test_make_staircase_valid():
    p = make_staircase([1, 2], [2, 4])
    assert p.levels == 2
    assert p.q == (1.0, 2.0)
    assert p.a == (2.0, 4.0)
    assert p.n == (1.0, 0.5)


@pytest.mark.parametrize("q,a", [
    ([1, 2], [4, 2]),         # a not increasing
    ([2, 1], [2, 4]),         # q not increasing
    ([1, 2], [2]),            # length mismatch
    ([], []),                 # empty
    ([0.0, 1], [2, 4]),       # q not positive
    ([-1, 1], [2, 4]),
    ([1, 2], [1.0, 4]),       # a must exceed 1
    ([1, 2], [0.5, 4]),
    ([1, 1], [2, 4]),         # q not strictly increasing
    ([1, 2], [2, 2]),
    ([1, math.inf], [2, 4]),  # non-finite
    ([1, 2], [2, math.nan]),
])
def test_make_staircase_rejects(q, a):
    with pytest.raises(ValueError):
        make_staircase(q, a)


def test_expand_geometric_finite():
    p = expand_geometric(GeometricSpec(gamma=2.0, lam=8.0, levels=2), 10)
    assert p.q == (2.0, 4.0)
    assert p.a == (8.0, 64.0)


def test_expand_geometric_unbounded_cap():
    p = expand_geometric(GeometricSpec(gamma=2.0, lam=8.0), 3)
    assert p.q == (2.0, 4.0, 8.0)
    assert p.a == (8.0, 64.0, 512.0)


def test_expand_geometric_overflow_rejected():
    with pytest.raises(ValueError):
        expand_geometric(GeometricSpec(gamma=10.0, lam=10.0, levels=400), 400)


def test_expand_geometric_bad_cap():
    with pytest.raises(ValueError):
        expand_geometric(GeometricSpec(gamma=2.0, lam=8.0), 0)


def test_expand_output_revalidates():
    p = expand_geometric(GeometricSpec(gamma=1.7, lam=3.2), 12)
    make_staircase(p.q, p.a)  # must pass validation unchanged


@pytest.mark.parametrize("kwargs", [
    {"gamma": 1.0, "lam": 8.0},
    {"gamma": 0.5, "lam": 8.0},
    {"gamma": 2.0, "lam": 1.0},
    {"gamma": math.inf, "lam": 8.0},
    {"gamma": 2.0, "lam": 8.0, "levels": 0},
    {"gamma": 2.0, "lam": 8.0, "levels": -3},
    {"gamma": 2.0, "lam": 8.0, "levels": 2.5},
])
def test_geometric_spec_rejects(kwargs):
    with pytest.raises(ValueError):
        GeometricSpec(**kwargs)


def test_fidelity_examples():
    p = make_staircase([1, 2], [2, 4])
    assert fidelity_at(p, 1.5) == 2.0
    assert fidelity_at(p, 0.5) == 1.0
    assert fidelity_at(p, 7.0) == 4.0


def test_fidelity_right_continuous_at_breakpoints():
    p = make_staircase([1, 2], [2, 4])
    assert fidelity_at(p, 1.0) == 2.0
    assert fidelity_at(p, 2.0) == 4.0
    assert fidelity_at(p, math.nextafter(1.0, 0.0)) == 1.0
    assert fidelity_at(p, math.nextafter(2.0, 0.0)) == 2.0


def test_fidelity_nondecreasing_step():
    p = make_staircase([0.5, 1.25, 6.0], [1.5, 3.0, 9.0])
    grid = np.geomspace(0.01, 100.0, 500)
    values = [fidelity_at(p, float(Q)) for Q in grid]
    assert all(v1 <= v2 for v1, v2 in zip(values, values[1:]))
    assert set(values) <= {1.0, 1.5, 3.0, 9.0}


@pytest.mark.parametrize("Q", [0.0, -1.0, math.inf, math.nan])
def test_fidelity_rejects(Q):
    p = make_staircase([1], [2])
    with pytest.raises(ValueError):
        fidelity_at(p, Q)


def test_distortion_examples():
    p = make_staircase([1, 2], [2, 4])
    assert distortion_at(p, 1.0) == 0.5
    assert distortion_at(p, 0.25) == 0.25
    assert distortion_at(p, 10.0) == 1.0


@pytest.mark.parametrize("N", [0.0, -0.5, math.inf, math.nan])
def test_distortion_rejects(N):
    p = make_staircase([1], [2])
    with pytest.raises(ValueError):
        distortion_at(p, N)


def test_duality_round_trip_exact():
    # D(1/Q) * F(Q) is exactly 1 because both go through the same lookup.
    p = make_staircase([0.5, 2.0, 8.0], [2.0, 4.0, 32.0])
    rng = np.random.default_rng(7)
    qs = [float(Q) for Q in rng.uniform(0.01, 50.0, size=200)]
    qs += [0.5, 2.0, 8.0]  # power-of-two breakpoints reciprocate exactly
    for Q in qs:
        assert distortion_at(p, 1.0 / Q) * fidelity_at(p, Q) == 1.0


def test_truncation_level_example():
    spec = GeometricSpec(gamma=2.0, lam=8.0)
    assert truncation_level(spec, 1e-6) == 21
    # direct tail evaluation around the returned level
    assert 2.0 ** -21 * math.log(8.0) < 1e-6 <= 2.0 ** -20 * math.log(8.0)


def test_truncation_level_large_eps():
    spec = GeometricSpec(gamma=2.0, lam=8.0)
    assert truncation_level(spec, math.log(8.0)) == 1


def test_truncation_level_monotone_in_eps():
    spec = GeometricSpec(gamma=1.3, lam=9.0)
    eps_grid = [10.0 ** e for e in range(-12, 1)]
    ks = [truncation_level(spec, eps) for eps in eps_grid]
    assert all(k1 >= k2 for k1, k2 in zip(ks, ks[1:]))


def test_truncation_level_rejects():
    with pytest.raises(ValueError):
        truncation_level(GeometricSpec(gamma=2.0, lam=8.0, levels=3), 1e-6)
    with pytest.raises(ValueError):
        truncation_level(GeometricSpec(gamma=2.0, lam=8.0), 0.0)
    with pytest.raises(ValueError):
        # a divergent-series spec cannot even be constructed
        GeometricSpec(gamma=1.0, lam=8.0)


def test_profiles_are_immutable():
    p = make_staircase([1, 2], [2, 4])
    with pytest.raises(AttributeError):
        p.q = (3.0, 4.0)
