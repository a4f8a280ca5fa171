"""Brute-force verifiers for the closed-form bounds.

Every closed form in lower_bounds/upper_bounds has an independent check
here: grid maximization over the two-level auxiliary parameter,
golden-section minimization over the analog level, random feasible-point
sampling around the corner solution, finite differences for the
convexity/concavity/monotonicity claims, and an exhaustive small-K
schedule search for the family bound.  All randomness comes from the
seed in OracleConfig, so identical configs reproduce identical verdicts.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .lower_bounds import LowerBoundSchedule, lemma1_bound, two_level_objective
from .profile import StaircaseProfile
from .upper_bounds import (
    beta_star,
    digital_energy,
    digital_only_energy,
    e0_feasible_max,
    total_energy,
    total_energy_derivative,
)

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OracleConfig:
    """Resolution, sample count, seed and agreement tolerance for the oracles.

    The defaults resolve the closed forms well past the verification
    tolerances (1e-6 absolute for the two-level lower bound, 1e-8
    relative for the analog-level optimum).
    """

    grid_points: int = 40_000
    samples: int = 1000
    seed: int = 20250810
    tol: float = 1e-8

    def __post_init__(self):
        if not (isinstance(self.grid_points, int) and self.grid_points >= 3):
            raise ValueError("grid_points must be an integer >= 3")
        if not (isinstance(self.samples, int) and self.samples >= 1):
            raise ValueError("samples must be a positive integer")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ValueError("seed must be a non-negative integer")
        if not (self.tol > 0.0 and math.isfinite(self.tol)):
            raise ValueError("tol must be a positive finite real")


@dataclass(frozen=True)
class Verdict:
    """Outcome of a sampled property check.

    worst_margin is the smallest signed margin observed; negative means
    the property failed at some sample.  checks carries one named margin
    per sub-property.
    """

    passed: bool
    worst_margin: float
    checks: tuple[tuple[str, float], ...] = ()


def _refine_max(fn: Callable[[float], float], lo: float, hi: float,
                best_x: float, best_v: float, rounds: int = 3) -> tuple[float, float]:
    """Trisection rounds on [lo, hi], tracking the best point seen."""
    for _ in range(rounds):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        v1, v2 = fn(m1), fn(m2)
        if v1 > best_v:
            best_x, best_v = m1, v1
        if v2 > best_v:
            best_x, best_v = m2, v2
        if v1 < v2:
            lo = m1
        else:
            hi = m2
    return best_x, best_v


def grid_max_tau1(N1: float, N2: float, a1: float, a2: float,
                  cfg: OracleConfig) -> tuple[float, float]:
    """Grid-maximize the two-level objective over tau1.

    The grid is {0} plus log-spaced points up to tau_hi, where tau_hi
    doubles from 1 until the objective sits within cfg.tol of its
    tau -> inf limit N2*log(a2); the winning bracket is then refined by
    three trisection rounds.
    """
    limit = N2 * math.log(a2)

    def obj(t: float) -> float:
        return two_level_objective(N1, N2, a1, a2, t)

    tau_hi = 1.0
    while abs(obj(tau_hi) - limit) > cfg.tol and tau_hi < 2.0 ** 100:
        tau_hi *= 2.0

    grid = np.concatenate([[0.0], np.geomspace(1e-9, tau_hi, cfg.grid_points - 1)])
    inv_a1, inv_a2 = 1.0 / a1, 1.0 / a2
    vals = (N1 * np.log((1.0 + grid) / (inv_a1 + grid))
            + N2 * np.log((inv_a2 + grid) / ((1.0 + grid) * inv_a2)))
    i = int(np.argmax(vals))
    best_x, best_v = float(grid[i]), float(vals[i])
    lo = float(grid[i - 1]) if i > 0 else 0.0
    hi = float(grid[i + 1]) if i + 1 < len(grid) else float(grid[i])
    return _refine_max(obj, lo, hi, best_x, best_v)


def golden_min_e0(p: StaircaseProfile, cfg: OracleConfig) -> tuple[float, float]:
    """Golden-section minimization of total energy over [0, Z].

    Returns (0, digital-only energy) for the degenerate Z = 0 case.  The
    interval shrinks to a width of Z*1e-10 before the midpoint is taken.
    """
    z = e0_feasible_max(p)
    if z == 0.0:
        return 0.0, digital_only_energy(p).energy
    lo, hi = 0.0, z
    f_lo_probe = hi - (hi - lo) * _INV_GOLDEN
    f_hi_probe = lo + (hi - lo) * _INV_GOLDEN
    v_lo, v_hi = total_energy(p, f_lo_probe), total_energy(p, f_hi_probe)
    while hi - lo > z * 1e-10:
        if v_lo < v_hi:
            hi, f_hi_probe, v_hi = f_hi_probe, f_lo_probe, v_lo
            f_lo_probe = hi - (hi - lo) * _INV_GOLDEN
            v_lo = total_energy(p, f_lo_probe)
        else:
            lo, f_lo_probe, v_lo = f_lo_probe, f_hi_probe, v_hi
            f_hi_probe = lo + (hi - lo) * _INV_GOLDEN
            v_hi = total_energy(p, f_hi_probe)
    e0 = 0.5 * (lo + hi)
    return e0, total_energy(p, e0)


def _chain_samples(rng: np.random.Generator, corner: Sequence[float],
                   count: int) -> np.ndarray:
    """Random beta vectors above the corner that keep the increasing chain.

    Cumulative non-negative perturbations preserve the chain; scales span
    tiny to adversarially large offsets.
    """
    corner = np.asarray(corner)
    scales = 10.0 ** rng.uniform(-6.0, 2.0, size=count)
    out = np.empty((count, corner.size))
    for i in range(count):
        out[i] = corner + np.cumsum(rng.uniform(0.0, scales[i], size=corner.size))
    return out


def sample_beta_feasible(p: StaircaseProfile, e0: float, cfg: OracleConfig) -> Verdict:
    """Check that no sampled feasible beta beats the corner solution.

    Draws cfg.samples feasible vectors beta = corner + chain-preserving
    positive perturbations and records the worst digital-energy margin
    against the corner value.
    """
    rng = np.random.default_rng(cfg.seed)
    corner = beta_star(p, e0)
    corner_value = digital_energy(p, e0, corner)
    worst = math.inf
    for beta in _chain_samples(rng, corner, cfg.samples):
        worst = min(worst, digital_energy(p, e0, tuple(beta)) - corner_value)
    worst = float(worst)
    return Verdict(passed=worst >= 0.0, worst_margin=worst,
                   checks=(("corner_optimality", worst),))


def finite_diff_check(p: StaircaseProfile, cfg: OracleConfig) -> Verdict:
    """Finite-difference confirmation of the curvature and slope claims.

    At cfg.samples random interior points: (i) centered differences of
    total energy match the analytic derivative to 1e-6 (scaled by
    max(1, |derivative|)); (ii) raw second differences in e0 stay above
    -1e-9 (convexity); (iii) raw second differences of the digital energy
    in each beta_k stay below +1e-9 (concavity); (iv) first differences
    in each beta_k are positive.  Steps follow h = max(1e-6, 1e-6*|x|),
    capped away from the feasibility boundary.
    """
    z = e0_feasible_max(p)
    if z <= 0.0:
        raise ValueError("finite_diff_check needs a profile with Z > 0")
    rng = np.random.default_rng(cfg.seed)
    m_deriv = math.inf
    m_convex = math.inf
    m_concave = math.inf
    m_monotone = math.inf
    for _ in range(cfg.samples):
        e0 = float(rng.uniform(0.05, 0.95)) * z
        h = min(max(1e-6, 1e-6 * e0), 0.04 * z)
        t_plus = total_energy(p, e0 + h)
        t_minus = total_energy(p, e0 - h)
        t_mid = total_energy(p, e0)
        fd1 = (t_plus - t_minus) / (2.0 * h)
        exact = total_energy_derivative(p, e0)
        m_deriv = min(m_deriv,
                      1e-6 * max(1.0, abs(exact)) - abs(fd1 - exact))
        m_convex = min(m_convex, (t_plus - 2.0 * t_mid + t_minus) + 1e-9)

        corner = np.asarray(beta_star(p, e0))
        beta = corner + np.cumsum(rng.uniform(0.05, 0.5, size=p.levels))
        for k in range(p.levels):
            hb = max(1e-6, 1e-6 * abs(beta[k]))
            up, down = beta.copy(), beta.copy()
            up[k] += hb
            down[k] -= hb
            e_up = digital_energy(p, e0, tuple(up))
            e_down = digital_energy(p, e0, tuple(down))
            e_mid = digital_energy(p, e0, tuple(beta))
            m_concave = min(m_concave, 1e-9 - (e_up - 2.0 * e_mid + e_down))
            m_monotone = min(m_monotone, (e_up - e_down) / (2.0 * hb))
    checks = (("derivative_fd", float(m_deriv)), ("e0_convexity", float(m_convex)),
              ("beta_concavity", float(m_concave)),
              ("beta_monotonicity", float(m_monotone)))
    return Verdict(passed=all(m >= 0.0 for _, m in checks),
                   worst_margin=min(m for _, m in checks), checks=checks)


def _coordinate_grid(lo: float, hi: float, points: int) -> list[float]:
    if hi <= lo:
        return [lo]
    start = max(lo, 1e-9)
    vals = {lo, hi}
    if hi > start:
        vals.update(float(x) for x in np.geomspace(start, hi, points))
    return sorted(vals)


def lemma1_search(n_levels: Sequence[float], d_levels: Sequence[float],
                  k_levels: int, cfg: OracleConfig) -> tuple[LowerBoundSchedule, float]:
    """Exhaustive small-K search for a strong family-bound schedule.

    Noise candidates are the staircase corners (n_levels[j], d_levels[j]);
    every ordered choice of k_levels of them is scored after coordinate
    ascent of the free tau values over log grids.  k_levels is capped at 3
    to keep the search exhaustive rather than heuristic.
    """
    if not (isinstance(k_levels, int) and 1 <= k_levels <= 3):
        raise ValueError("k_levels must be an integer in 1..3")
    if len(n_levels) != len(d_levels) or len(n_levels) < k_levels:
        raise ValueError("need matching level sequences with at least k_levels entries")
    if any(not math.isfinite(n) or n <= 0.0 for n in n_levels):
        raise ValueError("noise levels must be positive and finite")
    if any(not math.isfinite(d) or d <= 0.0 or d > 1.0 for d in d_levels):
        raise ValueError("distortion levels must lie in (0, 1]")

    points = min(cfg.grid_points, 512)
    tau_cap = 1e7
    best_sched: LowerBoundSchedule | None = None
    best_value = -math.inf

    for combo in itertools.combinations(range(len(n_levels)), k_levels):
        pairs = sorted(((n_levels[j], d_levels[j]) for j in combo),
                       key=lambda t: -t[0])
        ns = [n for n, _ in pairs]
        ds = [d for _, d in pairs]

        def value_at(taus: list[float]) -> float:
            sched = LowerBoundSchedule(n_seq=tuple(ns), tau_seq=tuple(taus))
            return lemma1_bound(ds, sched).energy

        # Two deterministic starts: all-zero taus and the distortion levels.
        starts = [[0.0] * k_levels]
        if k_levels > 1:
            starts.append([ds[j] for j in range(k_levels - 1)] + [0.0])
        for taus in starts:
            current = value_at(taus)
            for _ in range(8):
                improved = False
                for j in range(k_levels - 1):
                    hi = taus[j - 1] if j > 0 else tau_cap
                    lo = taus[j + 1]
                    grid = _coordinate_grid(lo, hi, points)

                    def coord_obj(t: float, j=j) -> float:
                        trial = list(taus)
                        trial[j] = t
                        return value_at(trial)

                    vals = [coord_obj(t) for t in grid]
                    i = int(np.argmax(vals))
                    b_lo = grid[i - 1] if i > 0 else grid[i]
                    b_hi = grid[i + 1] if i + 1 < len(grid) else grid[i]
                    t_best, v_best = _refine_max(coord_obj, b_lo, b_hi,
                                                 grid[i], vals[i])
                    if v_best > current + 1e-14:
                        taus[j] = t_best
                        current = v_best
                        improved = True
                if not improved:
                    break
            if current > best_value:
                best_value = current
                best_sched = LowerBoundSchedule(n_seq=tuple(ns), tau_seq=tuple(taus))

    assert best_sched is not None
    return best_sched, best_value
