"""Achievable energies for staircase profiles (upper bounds).

The layered scheme spends an analog energy e0 on uncoded transmission,
which contributes fidelity slope e0 in Q, and digital energies B_k on
successive refinement layers whose post-layer fidelity offsets beta_k
must keep e0*Q_k + beta_k at or above every stair.  The digital total is
increasing and concave in beta, so the cheapest feasible choice is the
corner beta_k = a_k - e0*q_k; the remaining scalar problem in e0 is
convex and is solved by bisection on its analytic derivative (the
golden-section route lives in the oracle module as the independent
check).  Closed forms cover the digital-only scheme, the unbounded
geometric staircase (method tag "thm4") and the two-level staircase
(method tag "thm6").
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

from scipy.integrate import quad

from .lower_bounds import BoundResult, Direction
from .profile import GeometricSpec, StaircaseProfile


class InfeasibleError(Exception):
    """Valid query whose feasible set is empty under the scheme constraints."""


@dataclass(frozen=True)
class SchemeConfig:
    """Analog energy and post-layer fidelity offsets of the layered scheme.

    The chain constraints beta_1 < ... < beta_K and beta_1 > 1 are
    implemented as closed constraints; equality only arises in degenerate
    configurations where the feasibility cap is attained.
    """

    e0: float
    beta: tuple[float, ...]

    def __post_init__(self):
        if not (math.isfinite(self.e0) and self.e0 >= 0.0):
            raise ValueError("e0 must be finite and non-negative")
        if len(self.beta) == 0:
            raise ValueError("beta must be non-empty")
        if any(not math.isfinite(b) for b in self.beta):
            raise ValueError("beta entries must be finite")
        # 1e-9 of slack absorbs rounding dust when e0 sits exactly on the cap.
        if self.beta[0] < 1.0 - 1e-9:
            raise ValueError("beta_1 must be at least 1")
        if any(self.beta[i] > self.beta[i + 1] + 1e-9
               for i in range(len(self.beta) - 1)):
            raise ValueError("beta must be non-decreasing")


@dataclass(frozen=True)
class OptimizeReport:
    """Outcome of minimizing total energy over the analog level e0.

    e0_star is the unconstrained minimizer, z the feasibility cap; the
    scheme uses e0_star when it is strictly inside [0, z) and z otherwise.
    """

    e0_star: float
    z: float
    e0_used: float
    energy: float
    iterations: int

    def __post_init__(self):
        expected = self.e0_star if self.e0_star < self.z else self.z
        if self.e0_used != expected:
            raise ValueError("e0_used must follow the cap selection rule")
        if not (math.isfinite(self.energy) and self.energy >= 0.0):
            raise ValueError("energy must be finite and non-negative")


def point_to_point_distortion(E: float, N: float) -> float:
    """Best distortion exp(-E/N) at a known noise level N with energy E."""
    if not (isinstance(E, (int, float)) and math.isfinite(E) and E >= 0.0):
        raise ValueError("E must be a non-negative finite real")
    if not (isinstance(N, (int, float)) and math.isfinite(N) and N > 0.0):
        raise ValueError("N must be a positive finite real")
    return math.exp(-E / N)


def digital_only_energy(p: StaircaseProfile) -> BoundResult:
    """Energy sum_k N_k log(a_k/a_{k-1}) of the purely digital scheme (a_0 = 1)."""
    total = 0.0
    a_prev = 1.0
    for qk, ak in zip(p.q, p.a):
        total += math.log(ak / a_prev) / qk
        a_prev = ak
    return BoundResult(energy=total, direction=Direction.UPPER, method="digital_only")


def thm4_geometric_upper(spec: GeometricSpec) -> BoundResult:
    """Digital-only closed form log(lam)/(gamma-1) for the unbounded geometric staircase."""
    if not spec.unbounded:
        raise ValueError("thm4_geometric_upper applies to UNBOUNDED specs only")
    return BoundResult(energy=math.log(spec.lam) / (spec.gamma - 1.0),
                       direction=Direction.UPPER, method="thm4")


def e0_feasible_max(p: StaircaseProfile) -> float:
    """Cap Z on the analog energy: min_k (a_k - a_{k-1})/(q_k - q_{k-1}).

    Uses the convention (a_0, q_0) = (1, 0), whose k = 1 term equals
    N_1 (a_1 - 1).
    """
    z = math.inf
    q_prev, a_prev = 0.0, 1.0
    for qk, ak in zip(p.q, p.a):
        z = min(z, (ak - a_prev) / (qk - q_prev))
        q_prev, a_prev = qk, ak
    return z


def _check_feasible(e0: float, z: float) -> None:
    # A 1-ulp overshoot of the cap is rounding noise, not infeasibility.
    if e0 > z and not math.isclose(e0, z, rel_tol=1e-12, abs_tol=0.0):
        raise InfeasibleError(f"e0={e0} exceeds the feasibility cap Z={z}")


def beta_star(p: StaircaseProfile, e0: float) -> tuple[float, ...]:
    """Corner solution beta_k = a_k - e0*q_k of the digital-energy problem.

    The digital total is increasing in every beta_k, so the cheapest
    feasible offsets sit on the profile constraint with equality.
    """
    if not (isinstance(e0, (int, float)) and math.isfinite(e0) and e0 >= 0.0):
        raise ValueError("e0 must be a non-negative finite real")
    _check_feasible(e0, e0_feasible_max(p))
    return tuple(ak - e0 * qk for qk, ak in zip(p.q, p.a))


def layer_energy(k: int, e0: float, beta: Sequence[float], p: StaircaseProfile) -> float:
    """Digital energy of layer k: N_k log((e0 q_k + beta_k)/(e0 q_k + beta_{k-1})).

    k is 1-based; beta_0 = 1 covers the first layer.
    """
    if not (isinstance(k, int) and 1 <= k <= p.levels):
        raise ValueError(f"layer index k={k} out of range 1..{p.levels}")
    if len(beta) != p.levels:
        raise ValueError("beta length must match the profile")
    b_prev = 1.0 if k == 1 else beta[k - 2]
    eq = e0 * p.q[k - 1]
    return math.log((eq + beta[k - 1]) / (eq + b_prev)) / p.q[k - 1]


def digital_energy(p: StaircaseProfile, e0: float, beta: Sequence[float]) -> float:
    """Total digital energy of the scheme, summed over all layers."""
    if len(beta) != p.levels:
        raise ValueError("beta length must match the profile")
    total = 0.0
    b_prev = 1.0
    for qk, bk in zip(p.q, beta):
        total += math.log((e0 * qk + bk) / (e0 * qk + b_prev)) / qk
        b_prev = bk
    return total


def digital_energy_gradient(p: StaircaseProfile, e0: float,
                            beta: Sequence[float]) -> tuple[float, ...]:
    """Analytic gradient of the digital energy in beta (every element positive)."""
    if len(beta) != p.levels:
        raise ValueError("beta length must match the profile")
    grad = []
    for k in range(p.levels):
        g = (1.0 / p.q[k]) / (e0 * p.q[k] + beta[k])
        if k + 1 < p.levels:
            g -= (1.0 / p.q[k + 1]) / (e0 * p.q[k + 1] + beta[k])
        grad.append(g)
    return tuple(grad)


def digital_energy_hessian_diag(p: StaircaseProfile, e0: float,
                                beta: Sequence[float]) -> tuple[float, ...]:
    """Diagonal of the Hessian in beta (every element negative; cross terms are 0)."""
    if len(beta) != p.levels:
        raise ValueError("beta length must match the profile")
    diag = []
    for k in range(p.levels):
        h = -(1.0 / p.q[k]) / (e0 * p.q[k] + beta[k]) ** 2
        if k + 1 < p.levels:
            h += (1.0 / p.q[k + 1]) / (e0 * p.q[k + 1] + beta[k]) ** 2
        diag.append(h)
    return tuple(diag)


def _total_energy_raw(p: StaircaseProfile, e0: float) -> float:
    total = e0
    q_prev, a_prev = 0.0, 1.0
    for qk, ak in zip(p.q, p.a):
        total += math.log(ak / (e0 * (qk - q_prev) + a_prev)) / qk
        q_prev, a_prev = qk, ak
    return total


def _total_energy_derivative_raw(p: StaircaseProfile, e0: float) -> float:
    d = 1.0
    q_prev, a_prev = 0.0, 1.0
    for qk, ak in zip(p.q, p.a):
        dq = qk - q_prev
        d -= (dq / qk) / (e0 * dq + a_prev)
        q_prev, a_prev = qk, ak
    return d


def total_energy(p: StaircaseProfile, e0: float) -> float:
    """Total scheme energy e0 + sum_k N_k log(a_k/(e0 (q_k - q_{k-1}) + a_{k-1})).

    Equals e0 plus the digital energy at the corner offsets; at e0 = 0 it
    reduces to the digital-only energy exactly.
    """
    if not (isinstance(e0, (int, float)) and math.isfinite(e0) and e0 >= 0.0):
        raise ValueError("e0 must be a non-negative finite real")
    _check_feasible(e0, e0_feasible_max(p))
    return _total_energy_raw(p, e0)


def total_energy_derivative(p: StaircaseProfile, e0: float) -> float:
    """Analytic d/d(e0) of total_energy; non-decreasing in e0 by convexity."""
    if not (isinstance(e0, (int, float)) and math.isfinite(e0) and e0 >= 0.0):
        raise ValueError("e0 must be a non-negative finite real")
    _check_feasible(e0, e0_feasible_max(p))
    return _total_energy_derivative_raw(p, e0)


def optimize_e0(p: StaircaseProfile, tol: float) -> OptimizeReport:
    """Minimize total energy over the analog level.

    The derivative is monotone (the objective is convex), so the
    unconstrained minimizer e0_star is found by bisection; the scheme then
    uses min(e0_star, Z) per the cap selection rule.  At an interior
    optimum the derivative magnitude ends below tol.
    """
    if not (tol > 0.0 and math.isfinite(tol)):
        raise ValueError("tol must be a positive finite real")
    z = e0_feasible_max(p)
    iterations = 0
    if _total_energy_derivative_raw(p, 0.0) >= 0.0:
        e0_star = 0.0
    else:
        lo, hi = 0.0, max(z, 1.0)
        while _total_energy_derivative_raw(p, hi) < 0.0:
            hi *= 2.0
            iterations += 1
        while hi - lo > 1e-15 * hi and iterations < 200:
            mid = 0.5 * (lo + hi)
            iterations += 1
            if _total_energy_derivative_raw(p, mid) < 0.0:
                lo = mid
            else:
                hi = mid
        e0_star = 0.5 * (lo + hi)
    e0_used = e0_star if e0_star < z else z
    return OptimizeReport(e0_star=e0_star, z=z, e0_used=e0_used,
                          energy=_total_energy_raw(p, e0_used),
                          iterations=iterations)


def thm6_two_level(N1: float, N2: float, a1: float, a2: float) -> OptimizeReport:
    """Closed-form two-level optimum of the analog level.

    e0_star is the positive root of e0^2 + e0 (M - N2) - N2 N1 = 0 with
    M = a1/(1/N2 - 1/N1); the cap L = min(N1 (a1-1), (a2-a1)/(1/N2-1/N1))
    then selects the used level exactly as in the general problem.
    """
    values = (N1, N2, a1, a2)
    if any(not (isinstance(v, (int, float)) and math.isfinite(v)) for v in values):
        raise ValueError("two-level parameters must be finite reals")
    if not 0.0 < N2 < N1:
        raise ValueError("noise levels must satisfy N1 > N2 > 0")
    if not 1.0 < a1 < a2:
        raise ValueError("fidelity levels must satisfy 1 < a1 < a2")
    dq = 1.0 / N2 - 1.0 / N1
    M = a1 / dq
    e0_star = 0.5 * (-(M - N2) + math.sqrt((M - N2) ** 2 + 4.0 * N2 * N1))
    cap = min(N1 * (a1 - 1.0), (a2 - a1) / dq)
    e0_used = e0_star if e0_star < cap else cap
    p = StaircaseProfile(q=(1.0 / N1, 1.0 / N2), a=(a1, a2))
    return OptimizeReport(e0_star=e0_star, z=cap, e0_used=e0_used,
                          energy=_total_energy_raw(p, e0_used), iterations=0)


def achieved_fidelity(p: StaircaseProfile, cfg: SchemeConfig, Q: float) -> float:
    """Fidelity e0*Q + beta_k(Q) the scheme reaches at channel quality Q.

    Each segment has slope e0; below the first stair only the uncoded
    layer contributes (beta_0 = 1).
    """
    if not (isinstance(Q, (int, float)) and math.isfinite(Q) and Q > 0.0):
        raise ValueError("Q must be a positive finite real")
    if len(cfg.beta) != p.levels:
        raise ValueError("scheme beta length must match the profile")
    i = bisect_right(p.q, Q)
    base = 1.0 if i == 0 else cfg.beta[i - 1]
    return cfg.e0 * Q + base


def dilog_at_minus2(tol: float) -> float:
    """Li_2(-2) = -integral_0^1 log(1+2u)/u du by adaptive quadrature.

    The integrand tends to 2 as u -> 0; the analytic limit is substituted
    on [0, 1e-12] to avoid 0/0.
    """
    if not (tol > 0.0 and math.isfinite(tol)):
        raise ValueError("tol must be a positive finite real")

    def integrand(u: float) -> float:
        if u < 1e-12:
            return 2.0
        return math.log1p(2.0 * u) / u

    value, _ = quad(integrand, 0.0, 1.0, epsabs=tol, epsrel=0.0)
    return -value


def square_law_constant_d(tol: float) -> float:
    """Square-law scheme constant 2 sqrt(log 3 - Li_2(-2)), about 3.1846."""
    return 2.0 * math.sqrt(math.log(3.0) - dilog_at_minus2(tol))
