"""Staircase fidelity-quality profiles and their distortion-noise duals.

A profile prescribes, for every channel quality Q = 1/N, the minimum
fidelity F = 1/D a transmission scheme must reach.  Staircase profiles
are piecewise constant and right-continuous, jumping to level a_k at
breakpoint q_k; geometric staircases take q_k = gamma^k, a_k = lam^k
with a possibly unbounded number of stairs.  Below the first stair the
requirement is the trivial one (F = 1, any unit-variance reconstruction
meets it).
"""

from __future__ import annotations

import math
import sys
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

# Distinguished stair count for geometric staircases with no last stair.
UNBOUNDED = math.inf

_LOG_FLOAT_MAX = math.log(sys.float_info.max)


@dataclass(frozen=True)
class StaircaseProfile:
    """Right-continuous staircase fidelity requirement.

    q: channel-quality breakpoints, strictly increasing, all > 0.
    a: required fidelity levels, strictly increasing, all > 1.
    """

    q: tuple[float, ...]
    a: tuple[float, ...]

    def __post_init__(self):
        if len(self.q) == 0 or len(self.q) != len(self.a):
            raise ValueError("q and a must be non-empty sequences of equal length")
        for name, seq in (("q", self.q), ("a", self.a)):
            if any(not math.isfinite(x) for x in seq):
                raise ValueError(f"{name} entries must be finite")
        if any(x <= 0.0 for x in self.q):
            raise ValueError("breakpoints q must be positive")
        if any(x <= 1.0 for x in self.a):
            raise ValueError("fidelity levels a must exceed 1")
        if any(self.q[i] >= self.q[i + 1] for i in range(len(self.q) - 1)):
            raise ValueError("q must be strictly increasing")
        if any(self.a[i] >= self.a[i + 1] for i in range(len(self.a) - 1)):
            raise ValueError("a must be strictly increasing")

    @property
    def levels(self) -> int:
        return len(self.q)

    @property
    def n(self) -> tuple[float, ...]:
        """Noise breakpoints N_k = 1/q_k (strictly decreasing)."""
        return tuple(1.0 / qk for qk in self.q)


@dataclass(frozen=True)
class GeometricSpec:
    """Geometric staircase: q_k = gamma^k, a_k = lam^k for k = 1..levels.

    levels is a positive integer or UNBOUNDED.  gamma > 1 is required even
    for finite levels so the tail sums used elsewhere always converge.
    """

    gamma: float
    lam: float
    levels: int | float = UNBOUNDED

    def __post_init__(self):
        if not (isinstance(self.gamma, (int, float)) and math.isfinite(self.gamma)
                and self.gamma > 1.0):
            raise ValueError("gamma must be a finite real > 1")
        if not (isinstance(self.lam, (int, float)) and math.isfinite(self.lam)
                and self.lam > 1.0):
            raise ValueError("lam must be a finite real > 1")
        if self.levels != UNBOUNDED and not (
                isinstance(self.levels, int) and self.levels >= 1):
            raise ValueError("levels must be a positive integer or UNBOUNDED")

    @property
    def unbounded(self) -> bool:
        return self.levels == UNBOUNDED


def make_staircase(q: Sequence[float], a: Sequence[float]) -> StaircaseProfile:
    """Validate and build a staircase profile from breakpoint/level sequences."""
    return StaircaseProfile(q=tuple(float(x) for x in q),
                            a=tuple(float(x) for x in a))


def expand_geometric(spec: GeometricSpec, levels_cap: int) -> StaircaseProfile:
    """Materialize a geometric spec as an explicit staircase.

    A finite spec expands to exactly spec.levels stairs regardless of the
    cap; an unbounded spec is truncated at levels_cap.  Rejects expansions
    whose q_k or a_k would overflow double precision.
    """
    if not (isinstance(levels_cap, int) and levels_cap >= 1):
        raise ValueError("levels_cap must be a positive integer")
    k_max = int(spec.levels) if not spec.unbounded else levels_cap
    if k_max * math.log(max(spec.gamma, spec.lam)) >= _LOG_FLOAT_MAX:
        raise ValueError(
            f"expanding {k_max} levels overflows double precision "
            f"(gamma={spec.gamma}, lam={spec.lam})")
    return StaircaseProfile(
        q=tuple(spec.gamma ** k for k in range(1, k_max + 1)),
        a=tuple(spec.lam ** k for k in range(1, k_max + 1)))


def fidelity_at(p: StaircaseProfile, Q: float) -> float:
    """Required fidelity F(Q): the level of the highest stair at or below Q.

    Returns 1 below the first breakpoint and a_K above the last; the
    profile is right-continuous, so F(q_k) = a_k.
    """
    if not (isinstance(Q, (int, float)) and math.isfinite(Q) and Q > 0.0):
        raise ValueError("Q must be a positive finite real")
    i = bisect_right(p.q, Q)
    return 1.0 if i == 0 else p.a[i - 1]


def distortion_at(p: StaircaseProfile, N: float) -> float:
    """Allowed distortion D(N) = 1/F(1/N), the dual view of the profile."""
    if not (isinstance(N, (int, float)) and math.isfinite(N) and N > 0.0):
        raise ValueError("N must be a positive finite real")
    return 1.0 / fidelity_at(p, 1.0 / N)


def truncation_level(spec: GeometricSpec, eps: float) -> int:
    """Smallest K whose dropped tail sum_{k>K} gamma^-k log(lam) is below eps.

    The tail equals gamma^-K log(lam)/(gamma - 1) exactly.  Only meaningful
    for unbounded specs; finite specs need no truncation.
    """
    if not spec.unbounded:
        raise ValueError("truncation_level applies to UNBOUNDED specs only")
    if not (isinstance(eps, (int, float)) and math.isfinite(eps) and eps > 0.0):
        raise ValueError("eps must be a positive finite real")

    def tail(k: int) -> float:
        return spec.gamma ** (-k) * math.log(spec.lam) / (spec.gamma - 1.0)

    guess = math.log(math.log(spec.lam) / (eps * (spec.gamma - 1.0))) / math.log(spec.gamma)
    k = max(1, math.ceil(guess))
    while tail(k) >= eps:
        k += 1
    while k > 1 and tail(k - 1) < eps:
        k -= 1
    return k
