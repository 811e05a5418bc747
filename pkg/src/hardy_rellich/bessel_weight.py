"""Bessel-pair decisions and the optimal weight beta(V, W; R).

A pair (V, W) of positive radial weights is a *Bessel pair* at multiplier c
when the shot solution of the pair equation stays positive on (0, R); the
*weight*

    beta(V, W; R) = sup { c : the pair equation at c has a positive solution }

is computed by bisection on that monotone predicate.  Sturm oscillation
gives monotonicity: once a sign change appears at some c it persists for
every larger c, so bracketing is sound.  The result carries the final
bracket and the certificate trajectories at both ends; no attainment claim
is made for the supremum itself.

Caveat (documented, by construction of shooting): for borderline weights
with iterated-log structure the first sign change beyond the critical
multiplier occurs only at radii far below any feasible integration start,
so the bisection certifies positivity on the truncated domain and returns
an upper-biased beta.  For those catalog families the closed-form
certificate (candidate_solution, multiplier 1/4) is the reliable source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .potentials import RadialPotential
from .radial_ode import (
    OdeProblem,
    OscillatoryOriginError,
    Trajectory,
    shoot_from_origin,
    theta,
)

DOUBLING_CAP = 2.0 ** 40
HALVING_FLOOR = 1e-12
UNBOUNDED_LIMIT = 1e12


class NeverPositiveError(ArithmeticError):
    """No positive multiplier admits a positive solution."""


@dataclass(frozen=True)
class PairCheck:
    """Outcome of a single Bessel-pair test, with its certificate."""

    is_pair: bool
    trajectory: Optional[Trajectory]
    reason: str


@dataclass(frozen=True)
class WeightResult:
    """beta with its bisection bracket and positivity certificates.

    ``beta`` is the midpoint of the final bracket (c_lo, c_hi) with
    c_hi - c_lo <= rel_tol * beta; ``certificates`` holds the trajectories
    at c_lo (positive) and c_hi (sign change).  ``unbounded`` marks pairs
    where no failing multiplier exists below the doubling cap (W == 0 like
    cases); then beta is +inf and the bracket degenerate.
    """

    beta: float
    bracket: tuple[float, Optional[float]]
    iterations: int
    theta_at_beta: Optional[float]
    certificates: tuple[Optional[Trajectory], Optional[Trajectory]]
    unbounded: bool = False


def is_bessel_pair(V: RadialPotential, W: RadialPotential, n: int, R: float,
                   c: float, ode_dim: str = "n", tol: float = 1e-10,
                   validate: bool = False) -> PairCheck:
    """Test whether (V, c W) admits a positive solution on (0, R)."""
    if validate:
        problem = OdeProblem.create(n, V, W, c, R, ode_dim=ode_dim)
    else:
        problem = OdeProblem(n, V, W, float(c), float(R), ode_dim=ode_dim)
    try:
        traj = shoot_from_origin(problem, tol=tol)
    except OscillatoryOriginError:
        return PairCheck(False, None, "oscillatory-at-origin")
    if traj.first_zero is not None:
        return PairCheck(False, traj, f"interior-zero at r={traj.first_zero:.6g}")
    return PairCheck(True, traj, "positive")


def weight(V: RadialPotential, W: RadialPotential, n: int, R: float,
           rel_tol: float = 1e-8, ode_dim: str = "n",
           shoot_tol: float = 1e-10) -> WeightResult:
    """Compute beta(V, W; R) by monotone bisection.

    Starts from c = 1, halving until a positive multiplier is found (or
    raising :class:`NeverPositiveError` below 1e-12), then doubling until a
    sign change appears.  If none appears below the cap the weight is
    reported unbounded rather than raised: that is the expected answer for
    vanishing W.
    """
    OdeProblem.create(n, V, W, 1.0, R, ode_dim=ode_dim)  # validate once

    def positive(c: float) -> PairCheck:
        return is_bessel_pair(V, W, n, R, c, ode_dim=ode_dim, tol=shoot_tol)

    iterations = 0
    c_lo = 1.0
    check_lo = positive(c_lo)
    while not check_lo.is_pair:
        iterations += 1
        c_lo *= 0.5
        if c_lo < HALVING_FLOOR:
            raise NeverPositiveError(
                "no positive solution found for any multiplier above 1e-12"
            )
        check_lo = positive(c_lo)

    c_hi = 2.0 * c_lo
    check_hi = positive(c_hi)
    while check_hi.is_pair:
        iterations += 1
        c_lo, check_lo = c_hi, check_hi
        c_hi *= 2.0
        if c_hi > min(DOUBLING_CAP * c_lo, UNBOUNDED_LIMIT):
            return WeightResult(
                beta=math.inf, bracket=(c_lo, None), iterations=iterations,
                theta_at_beta=None, certificates=(check_lo.trajectory, None),
                unbounded=True,
            )
        check_hi = positive(c_hi)

    while c_hi - c_lo > rel_tol * 0.5 * (c_lo + c_hi):
        iterations += 1
        mid = 0.5 * (c_lo + c_hi)
        chk = positive(mid)
        if chk.is_pair:
            c_lo, check_lo = mid, chk
        else:
            c_hi, check_hi = mid, chk

    beta = 0.5 * (c_lo + c_hi)
    theta_at_beta = None
    try:
        problem = OdeProblem(n, V, W, beta * (1.0 - 10.0 * rel_tol), R,
                             ode_dim=ode_dim)
        theta_at_beta = theta(problem, tol=shoot_tol)
    except ArithmeticError:
        theta_at_beta = None
    return WeightResult(
        beta=beta, bracket=(c_lo, c_hi), iterations=iterations,
        theta_at_beta=theta_at_beta,
        certificates=(check_lo.trajectory, check_hi.trajectory),
    )


@dataclass(frozen=True)
class EquivalenceEntry:
    name: str
    lhs: float
    rhs: float
    deficit: float
    quad_error: float


@dataclass(frozen=True)
class EquivalenceReport:
    """Cross-check of the pair criterion against the Hardy functional.

    When the pair test succeeds, every deficit over the suite must be
    >= -10 * quad_error; when it fails, a violating test function is sought
    (the positive trajectory at the last sub-critical multiplier violates
    the inequality at any larger multiplier).  A finite suite can refute but
    never prove, so the verdict may be 'inconclusive'.
    """

    is_pair: bool
    verdict: str
    entries: tuple[EquivalenceEntry, ...]
    theta_used: Optional[float]


def verify_pair_equivalence(V: RadialPotential, W: RadialPotential, n: int,
                            R: float, c: float,
                            suite: Sequence | None = None,
                            ode_dim: str = "n") -> EquivalenceReport:
    """Check pair positivity against Hardy deficits on a test suite."""
    from .inequality import hardy_deficit
    from .profiles import TestFunction, builtin_suite, profile_from_trajectory

    if suite is None:
        suite = [u for u in builtin_suite(R) if u.radial_only]
    Wc = _scaled_weight(W, c)

    check = is_bessel_pair(V, W, n, R, c, ode_dim=ode_dim)
    entries = []
    if check.is_pair:
        th = theta(OdeProblem(n, V, W, c, R, ode_dim=ode_dim)) \
            if not check.trajectory.boundary_degenerate else 0.0
        ok = True
        for u in suite:
            rep = hardy_deficit(V, Wc, th, u, n)
            entries.append(EquivalenceEntry(u.name, rep.lhs,
                                            rep.lhs - rep.deficit,
                                            rep.deficit, rep.quad_error))
            if rep.deficit < -10.0 * rep.quad_error:
                ok = False
        verdict = "consistent" if ok else "contradiction"
        return EquivalenceReport(True, verdict, tuple(entries), th)

    # failing side: bisect down to a sub-critical multiplier and use its
    # positive trajectory as the violating test function
    c_sub = c
    traj = None
    for _ in range(60):
        c_sub *= 0.5
        chk = is_bessel_pair(V, W, n, R, c_sub, ode_dim=ode_dim)
        if chk.is_pair and not chk.trajectory.boundary_degenerate:
            traj = chk.trajectory
            break
    if traj is None:
        return EquivalenceReport(False, "inconclusive", tuple(), None)
    th_sub = float(V.value(R)) * traj.end_ratio
    prob = OdeProblem(n, V, W, c_sub, R, ode_dim=ode_dim)
    u = TestFunction(modes=((0, profile_from_trajectory(traj, prob)),), R=R,
                     name=f"trajectory(c={c_sub:.6g})")
    rep = hardy_deficit(V, Wc, th_sub, u, n)
    entries.append(EquivalenceEntry(u.name, rep.lhs, rep.lhs - rep.deficit,
                                    rep.deficit, rep.quad_error))
    verdict = "violator-found" if rep.deficit < -10.0 * rep.quad_error \
        else "inconclusive"
    return EquivalenceReport(False, verdict, tuple(entries), th_sub)


def _scaled_weight(W: RadialPotential, c: float) -> RadialPotential:
    from .potentials import scaled
    return scaled(c, W)
