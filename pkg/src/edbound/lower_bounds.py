"""Lower bounds on the minimum energy needed to meet a staircase profile.

The general evaluator scores any schedule of noise levels N_k and
auxiliary parameters tau_k against supplied distortion targets; every
valid schedule yields a true lower bound, so negative evaluations are
clamped to the trivial bound E >= 0.  Closed forms cover the unbounded
geometric staircase (method tag "thm3") and the two-level staircase
(method tag "thm5", piecewise in three cases).  The square-law series
constant is evaluated for the verification suite only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .profile import GeometricSpec


class Direction(Enum):
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class BoundResult:
    """One bound value with its direction, method tag and case branch."""

    energy: float
    direction: Direction
    method: str
    branch: str | None = None

    def __post_init__(self):
        if not (math.isfinite(self.energy) and self.energy >= 0.0):
            raise ValueError("energy must be finite and non-negative")


@dataclass(frozen=True)
class LowerBoundSchedule:
    """Schedule feeding the family bound.

    n_seq: noise levels N_1 >= ... >= N_K, all positive.
    tau_seq: auxiliaries tau_1 >= ... >= tau_K with tau_K exactly 0.
    """

    n_seq: tuple[float, ...]
    tau_seq: tuple[float, ...]

    def __post_init__(self):
        if len(self.n_seq) == 0 or len(self.n_seq) != len(self.tau_seq):
            raise ValueError("n_seq and tau_seq must be non-empty and of equal length")
        if any(not math.isfinite(x) or x <= 0.0 for x in self.n_seq):
            raise ValueError("noise levels must be positive and finite")
        if any(self.n_seq[i] < self.n_seq[i + 1] for i in range(len(self.n_seq) - 1)):
            raise ValueError("noise levels must be non-increasing")
        if any(not math.isfinite(x) or x < 0.0 for x in self.tau_seq):
            raise ValueError("tau values must be non-negative and finite")
        if any(self.tau_seq[i] < self.tau_seq[i + 1] for i in range(len(self.tau_seq) - 1)):
            raise ValueError("tau values must be non-increasing")
        if self.tau_seq[-1] != 0.0:
            raise ValueError("the last tau must be exactly 0")

    @property
    def levels(self) -> int:
        return len(self.n_seq)


def lemma1_bound(d_levels: Sequence[float], sched: LowerBoundSchedule) -> BoundResult:
    """Family lower bound for distortion targets d_levels[k] = D(N_k).

    Distortions are taken explicitly rather than through a profile object
    so callers can probe arbitrary (N, tau, D) combinations.  The raw sum
    is clamped below at 0 (a negative evaluation carries no information);
    the clamp is recorded in the branch field.
    """
    if len(d_levels) != sched.levels:
        raise ValueError("d_levels length must match the schedule")
    if any(not math.isfinite(d) or d <= 0.0 or d > 1.0 for d in d_levels):
        raise ValueError("distortion levels must lie in (0, 1]")
    n, tau = sched.n_seq, sched.tau_seq
    value = n[0] * math.log((1.0 + tau[0]) / (d_levels[0] + tau[0]))
    for k in range(1, sched.levels):
        value += n[k] * math.log(
            (1.0 + tau[k]) * (d_levels[k] + tau[k - 1])
            / ((1.0 + tau[k - 1]) * (d_levels[k] + tau[k])))
    clamped = value < 0.0
    return BoundResult(energy=max(0.0, value), direction=Direction.LOWER,
                       method="lemma1", branch="clamped" if clamped else None)


def thm3_geometric_lower(spec: GeometricSpec) -> BoundResult:
    """Closed-form lower bound log(lam/4)/(gamma-1) for the unbounded geometric staircase."""
    if not spec.unbounded:
        raise ValueError("thm3_geometric_lower applies to UNBOUNDED specs only")
    raw = math.log(spec.lam / 4.0) / (spec.gamma - 1.0)
    return BoundResult(energy=max(0.0, raw), direction=Direction.LOWER,
                       method="thm3", branch="clamped" if spec.lam <= 4.0 else None)


def thm3_partial_sum(spec: GeometricSpec, K: int) -> float:
    """Partial sum log(lam/4) * sum_{k=1..K} gamma^-k (not clamped).

    Increases monotonically in K (for lam > 4) towards the closed form.
    """
    if not (isinstance(K, int) and K >= 1):
        raise ValueError("K must be a positive integer")
    coeff = math.log(spec.lam / 4.0)
    total = 0.0
    for k in range(1, K + 1):
        total += spec.gamma ** (-k)
    return coeff * total


def two_level_objective(N1: float, N2: float, a1: float, a2: float,
                        tau1: float) -> float:
    """Two-level family bound as a function of the free parameter tau1.

    tau1 = inf evaluates the analytic limit N2*log(a2).  This is the
    objective the grid oracle maximizes; its maximizer has the closed
    form returned by thm5_tau_star.
    """
    _check_two_level(N1, N2, a1, a2)
    if tau1 < 0.0 or math.isnan(tau1):
        raise ValueError("tau1 must be non-negative")
    if math.isinf(tau1):
        return N2 * math.log(a2)
    return (N1 * math.log((1.0 + tau1) / (1.0 / a1 + tau1))
            + N2 * math.log((1.0 / a2 + tau1) / ((1.0 + tau1) / a2)))


def thm5_tau_star(N1: float, N2: float, a1: float, a2: float) -> tuple[float, str]:
    """Maximizer of the two-level objective, with its case branch.

    case1 (interior): the ratio N2/N1 lies between (a1-1)/(a2-1) and
    a2(a1-1)/(a1(a2-1)); ties land here and match the adjacent branch by
    continuity.  case2 returns inf (the supremum is the tau -> inf
    limit); case3 returns 0.
    """
    _check_two_level(N1, N2, a1, a2)
    ratio = N2 / N1
    t_lo = (a1 - 1.0) / (a2 - 1.0)
    t_hi = a2 * (a1 - 1.0) / (a1 * (a2 - 1.0))
    if ratio > t_hi:
        return math.inf, "case2"
    if ratio < t_lo:
        return 0.0, "case3"
    num = N1 * (1.0 / a1 - 1.0) / a2 - N2 * (1.0 / a2 - 1.0) / a1
    den = N1 * (1.0 - 1.0 / a1) - N2 * (1.0 - 1.0 / a2)
    if den <= 0.0:
        # Exact tie with the upper threshold; the interior formula degenerates
        # to the tau -> inf limit.
        return math.inf, "case1"
    return max(0.0, num / den), "case1"


def thm5_two_level_lower(N1: float, N2: float, a1: float, a2: float) -> BoundResult:
    """Closed-form two-level lower bound (the objective at its maximizer)."""
    tau, branch = thm5_tau_star(N1, N2, a1, a2)
    if math.isinf(tau):
        energy = N2 * math.log(a2)
    elif tau == 0.0:
        energy = N1 * math.log(a1)
    else:
        energy = (N1 * math.log(a1 * (a1 * a2 - a2 - a1 + 1.0) * (N1 - N2)
                                / (N1 * (a1 * a2 - a2 + a1 - a1 * a1)))
                  + N2 * math.log(N2 * (-a1 * a2 + a1 - a2 + a2 * a2)
                                  / ((a1 * a2 - a2 - a1 + 1.0) * (N1 - N2))))
    return BoundResult(energy=energy, direction=Direction.LOWER,
                       method="thm5", branch=branch)


def square_law_constant_c(tol: float) -> float:
    """Series constant sum_k 1/sqrt(4^k e^k - 1), about 0.4507.

    Terms shrink at least geometrically with ratio r = 1/(2 sqrt(e)), so
    the dropped tail after the last included term t_K is below
    t_K * r/(1-r); summation stops as soon as that bound is under tol.
    """
    if not (tol > 0.0 and math.isfinite(tol)):
        raise ValueError("tol must be a positive finite real")
    r = 1.0 / (2.0 * math.sqrt(math.e))
    tail_factor = r / (1.0 - r)
    total = 0.0
    k = 0
    while True:
        k += 1
        term = 1.0 / math.sqrt(4.0 ** k * math.exp(k) - 1.0)
        total += term
        if term * tail_factor < tol:
            return total


def _check_two_level(N1: float, N2: float, a1: float, a2: float) -> None:
    values = (N1, N2, a1, a2)
    if any(not (isinstance(v, (int, float)) and math.isfinite(v)) for v in values):
        raise ValueError("two-level parameters must be finite reals")
    if not 0.0 < N2 < N1:
        raise ValueError("noise levels must satisfy N1 > N2 > 0")
    if not 1.0 < a1 < a2:
        raise ValueError("fidelity levels must satisfy 1 < a1 < a2")
