"""Quadrature evaluation of both sides of the weighted inequalities.

Every operation takes an explicit test function, integrates each side of
one inequality mode by mode with composite Gauss-Legendre panels on a
geometric mesh, and returns a :class:`DeficitReport` with named right-hand
terms, the deficit lhs - sum(rhs), and a conservative quadrature error.
For a valid inequality and admissible test function the deficit must be
>= -10 * quad_error; the report never rounds a violation away.

Mode-wise identities used throughout (surface measure n omega_n R^(n-1),
omega_n the volume of the unit ball):

    int V |grad u_k|^2 = n omega_n [ int V f'^2 r^(n-1)
                                     + c_k int V f^2 r^(n-3) ],
    int V |lap  u_k|^2 = n omega_n int V (f'' + (n-1) f'/r - c_k f/r^2)^2
                                     r^(n-1),

with c_k = k(n+k-2).  All quadratic forms are diagonal across modes, so
deficits add over modes exactly.

Boundary terms of the second-order inequality are computed mode-wise in the
dimensionally consistent form R^(n-2) [(n-1) V(R) + theta R] f_k'(R)^2 (the
"per-mode" aggregation); the alternative aggregation that multiplies the
full surface gradient integral by (theta + (n-1) V(R)) is also reported,
since printed statements of such inequalities mix the two and they differ
off R = 1 and for boundary-nonvanishing modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .grids import DivergentIntegralError, PanelQuadrature
from .potentials import (
    RadialPotential,
    UnsupportedKindError,
    candidate_solution,
    lambda_limit,
)
from .profiles import RadialProfile, TestFunction, builtin_suite

VARIANTS = ("A", "B", "C", "D", "E", "F")


@dataclass(frozen=True)
class DeficitReport:
    inequality_name: str
    lhs: float
    rhs_terms: dict
    deficit: float
    quad_error: float
    labels: tuple[str, ...] = field(default_factory=tuple)

    @property
    def holds(self) -> bool:
        return self.deficit >= -10.0 * self.quad_error


@lru_cache(maxsize=32)
def _default_quad(R: float, r_min_factor: float = 1e-18,
                  n_panels: int = 288) -> PanelQuadrature:
    return PanelQuadrature.geometric(R, r_min_factor * R, n_panels)


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


class _Accumulator:
    """Sums weighted integrals and their error estimates."""

    def __init__(self, quad: PanelQuadrature):
        self.quad = quad
        self.err = 0.0

    def integral(self, fn: Callable[[np.ndarray], np.ndarray],
                 coeff: float = 1.0, check: bool = True) -> float:
        if coeff == 0.0:
            return 0.0
        val, err = self.quad.integrate(fn, check_divergence=check)
        self.err += abs(coeff) * err
        return coeff * val


def _grad_sq(V: Callable, u: TestFunction, n: int, acc: _Accumulator,
             extra_power: float = 0.0) -> float:
    """int V(r) r^extra |grad u|^2 dx / (n omega_n)."""
    total = 0.0
    for k, f in u.modes:
        ck = k * (n + k - 2)
        total += acc.integral(
            lambda r: V(r) * r ** (n - 1 + extra_power) * f.d1(r) ** 2)
        total += acc.integral(
            lambda r: V(r) * r ** (n - 3 + extra_power) * f.value(r) ** 2,
            coeff=float(ck))
    return total


def _mass(V: Callable, u: TestFunction, n: int, acc: _Accumulator,
          extra_power: float = 0.0) -> float:
    """int V(r) r^extra u^2 dx / (n omega_n)."""
    return sum(
        acc.integral(lambda r: V(r) * r ** (n - 1 + extra_power)
                     * f.value(r) ** 2)
        for _, f in u.modes
    )


def _lap_sq(V: Callable, u: TestFunction, n: int, acc: _Accumulator,
            extra_power: float = 0.0) -> float:
    """int V(r) r^extra |lap u|^2 dx / (n omega_n)."""
    total = 0.0
    for k, f in u.modes:
        ck = float(k * (n + k - 2))

        def lap(r, f=f, ck=ck):
            r = np.asarray(r, dtype=float)
            return f.d2(r) + (n - 1) * f.d1(r) / r - ck * f.value(r) / r ** 2

        total += acc.integral(
            lambda r: V(r) * r ** (n - 1 + extra_power) * lap(r) ** 2)
    return total


def hardy_deficit(V: RadialPotential, W: RadialPotential, theta: float,
                  u: TestFunction, n: int,
                  quad: PanelQuadrature | None = None) -> DeficitReport:
    """Deficit of int V |grad u|^2 >= int W u^2 + theta int_dB u^2.

    W is the full right-hand weight (scale it by the multiplier yourself)
    and theta the boundary ratio of the pair's positive solution.
    """
    R = u.R
    quad = quad or _default_quad(R)
    acc = _Accumulator(quad)
    nwn = n * unit_ball_volume(n)
    lhs = nwn * _grad_sq(V.value, u, n, acc)
    vol = nwn * _mass(W.value, u, n, acc)
    bnd = theta * nwn * R ** (n - 1) * sum(
        v ** 2 for v in u.boundary_values().values())
    deficit = lhs - vol - bnd
    return DeficitReport(
        inequality_name="hardy",
        lhs=lhs,
        rhs_terms={"volume": vol, "boundary": bnd},
        deficit=deficit,
        quad_error=nwn * acc.err,
    )


def _boundary_second_order(V: RadialPotential, theta: float, u: TestFunction,
                           n: int) -> tuple[float, float]:
    """(per-mode aggregation, surface-integral aggregation), without n omega_n."""
    R = u.R
    VR = float(V.value(R))
    fp2 = 0.0
    surface = 0.0
    for k, f in u.modes:
        ck = k * (n + k - 2)
        fpR = float(f.d1(np.array([R]))[0])
        fR = float(f.value(np.array([R]))[0])
        fp2 += fpR ** 2
        surface += fpR ** 2 + ck * fR ** 2 / R ** 2
    per_mode = R ** (n - 2) * ((n - 1) * VR + theta * R) * fp2
    statement = (theta + (n - 1) * VR) * R ** (n - 1) * surface
    return per_mode, statement


def hardy_rellich_deficit(V: RadialPotential, W: RadialPotential,
                          u: TestFunction, n: int, theta: float,
                          quad: PanelQuadrature | None = None) -> DeficitReport:
    """Deficit of the second-order inequality of the pair (V, W):

    int V |lap u|^2 >= int W |grad u|^2
                     + (n-1) int (V/|x|^2 - V'/|x|) |grad u|^2
                     + boundary term.

    The deficit uses the per-mode boundary aggregation; the
    surface-integral aggregation is reported alongside.  For non-radial u
    the pointwise condition W - 2V/r^2 + 2V'/r - V'' >= 0 is sampled and a
    label records when the report is outside the proven hypotheses.
    """
    R = u.R
    quad = quad or _default_quad(R)
    acc = _Accumulator(quad)
    nwn = n * unit_ball_volume(n)
    lhs = nwn * _lap_sq(V.value, u, n, acc)
    w_term = nwn * _grad_sq(W.value, u, n, acc)

    def hess_weight(r):
        r = np.asarray(r, dtype=float)
        return V.value(r) / r ** 2 - V.deriv(r) / r

    curv = (n - 1) * nwn * _grad_sq(hess_weight, u, n, acc)
    per_mode, statement = _boundary_second_order(V, theta, u, n)
    labels = []
    if not u.radial_only:
        rs = np.geomspace(1e-8 * R, R, 400)
        cond = W.value(rs) - 2 * V.value(rs) / rs ** 2 \
            + 2 * V.deriv(rs) / rs - V.deriv2(rs)
        if np.min(cond) < -1e-10 * max(1.0, float(np.max(np.abs(cond)))):
            labels.append("outside-hypotheses: pointwise condition fails")
    deficit = lhs - w_term - curv - nwn * per_mode
    return DeficitReport(
        inequality_name="hardy_rellich",
        lhs=lhs,
        rhs_terms={
            "gradient": w_term,
            "curvature": curv,
            "boundary": nwn * per_mode,
            "boundary_surface_aggregation": nwn * statement,
        },
        deficit=deficit,
        quad_error=nwn * acc.err,
        labels=tuple(labels),
    )


def _resolve_beta(W: RadialPotential, n: int) -> tuple[float, str]:
    """Improvement weight of W in the log-radial convention, from the catalog."""
    if W.kind == "zero":
        return 0.0, "vanishing weight"
    try:
        cand = candidate_solution(W, n=n)
        return cand.multiplier, f"catalog({W.kind})"
    except UnsupportedKindError:
        raise UnsupportedKindError(
            f"no catalogued improvement weight for kind {W.kind!r}; pass beta="
        )


def _resolve_lambda(W: RadialPotential) -> float:
    if W.kind == "zero":
        return 0.0
    return lambda_limit(W).lam


def _boundary_ratio(W: RadialPotential, n: int) -> Optional[float]:
    if W.kind == "zero":
        return 0.0
    try:
        return candidate_solution(W, n=n).boundary_ratio
    except UnsupportedKindError:
        return None


def best_constant_gradient(n: int) -> float:
    """Best constant of int |lap u|^2 >= C(n) int |grad u|^2/|x|^2."""
    if n == 3:
        return 25.0 / 36.0
    if n == 4:
        return 3.0
    return n * n / 4.0


def improved_rellich_deficit(W: RadialPotential, u: TestFunction, n: int,
                             variant: str, m: float = 0.0,
                             beta: float | None = None,
                             lam: float | None = None,
                             W2: RadialPotential | None = None,
                             beta2: float | None = None,
                             quad: PanelQuadrature | None = None) -> DeficitReport:
    """Deficit of one of the improved second-order inequalities.

    Variants (all with V = 1; u in H^2 cap H^1_0 except F which is H^2):

    * ``A``: lap^2 - n^2(n-4)^2/16 u^2/r^4 >= beta (n^2/4 + (n-lam-2)^2/4)
      W u^2 / r^2;
    * ``B``: weighted version of A with power m: lhs |lap u|^2/r^(2m), mass
      constant ((n+2m)(n-4-2m)/4)^2 and improvement
      beta ((n+2m)^2/4 + (n-2m-lam-2)^2/4) W u^2/r^(2m+2);
    * ``C``: iterated-log improvement with the printed coefficient
      1 + n(n-4)/8 (W must be a logchain weight);
    * ``D``: two-weight improvement combining W (scaled by n^2/4 beta1) and
      W2 (scaled by mu^2/R^2 beta2) plus mu^2/R^2 (n-2)^2/4 u^2/r^2;
    * ``E``: single-weight improvement plus the full-gradient term
      mu^2/R^2 int |grad u|^2;
    * ``F``: gradient-quotient improvement
      |lap u|^2 >= C(n) |grad u|^2/r^2 + beta W |grad u|^2.

    Missing ``beta``/``lam`` are resolved from the catalog (improvement
    weight 1/4 for the chain families, mu(n)^2/R^2 for the constant
    weight).  Hypothesis violations are labeled, never silently enforced;
    the deficit is computed regardless.
    """
    variant = variant.upper()
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    R = u.R
    quad = quad or _default_quad(R)
    acc = _Accumulator(quad)
    nwn = n * unit_ball_volume(n)
    labels = []

    if beta is None:
        beta, src = _resolve_beta(W, n)
        labels.append(f"beta={beta:.6g} from {src}")
    if lam is None and variant in ("A", "B"):
        lam = _resolve_lambda(W)

    if variant != "F" and not u.vanishes_at_boundary:
        labels.append("outside-hypotheses: u does not vanish on the boundary")

    rhs: dict[str, float] = {}
    if variant == "B":
        lhs = nwn * _lap_sq(lambda r: r ** (-2 * m), u, n, acc)
        if not (-n / 2.0 <= m <= (n - 4.0) / 2.0):
            labels.append(f"outside-hypotheses: m={m} not in [-n/2,(n-4)/2]")
        if lam > n / 2.0 + m + 1e-12:
            labels.append(f"outside-hypotheses: lambda={lam:.4g} > n/2+m")
        Hnm = ((n + 2 * m) * (n - 4 - 2 * m) / 4.0) ** 2
        rhs["mass"] = Hnm * nwn * _mass(lambda r: r ** (-2 * m - 4.0), u, n, acc)
        coeff = beta * ((n + 2 * m) ** 2 / 4.0 + (n - 2 * m - lam - 2.0) ** 2 / 4.0)
        rhs["improvement"] = coeff * nwn * _mass(
            lambda r: W.value(r) * r ** (-2 * m - 2.0), u, n, acc)
    elif variant == "F":
        lhs = nwn * _lap_sq(lambda r: np.ones_like(r), u, n, acc)
        br = _boundary_ratio(W, n)
        if br is not None and br < -n / 2.0 - 1e-9:
            labels.append(f"outside-hypotheses: R phi'/phi = {br:.4g} < -n/2")
        rhs["gradient_quotient"] = best_constant_gradient(n) * nwn * _grad_sq(
            lambda r: r ** -2.0, u, n, acc)
        rhs["improvement"] = beta * nwn * _grad_sq(W.value, u, n, acc)
    else:
        lhs = nwn * _lap_sq(lambda r: np.ones_like(r), u, n, acc)
        rhs["mass"] = (n ** 2 * (n - 4) ** 2 / 16.0) * nwn * _mass(
            lambda r: r ** -4.0, u, n, acc)
        if variant == "A":
            if lam > n - 2.0 + 1e-12:
                labels.append(f"outside-hypotheses: lambda={lam:.4g} > n-2")
            br = _boundary_ratio(W, n)
            if br is not None and br < -n / 2.0 - 1e-9:
                labels.append(f"outside-hypotheses: R phi'/phi = {br:.4g} < -n/2")
            coeff = beta * (n ** 2 / 4.0 + (n - lam - 2.0) ** 2 / 4.0)
            rhs["improvement"] = coeff * nwn * _mass(
                lambda r: W.value(r) * r ** -2.0, u, n, acc)
        elif variant == "C":
            if W.kind != "logchain":
                raise ValueError("variant C requires a logchain weight")
            coeff = 1.0 + n * (n - 4) / 8.0
            rhs["log_improvement"] = coeff * nwn * _mass(
                lambda r: W.value(r) * r ** -2.0, u, n, acc)
        elif variant == "D":
            from .special_functions import mu_for_dimension
            if W2 is None:
                raise ValueError("variant D requires the second weight W2")
            if beta2 is None:
                beta2, src2 = _resolve_beta(W2, n)
                labels.append(f"beta2={beta2:.6g} from {src2}")
            mu2 = (mu_for_dimension(n) / R) ** 2
            labels.append("mu^2/R^2 convention for the printed mu")
            rhs["improvement_1"] = (n ** 2 / 4.0) * beta * nwn * _mass(
                lambda r: W.value(r) * r ** -2.0, u, n, acc)
            rhs["hardy_term"] = mu2 * ((n - 2) ** 2 / 4.0) * nwn * _mass(
                lambda r: r ** -2.0, u, n, acc)
            rhs["improvement_2"] = mu2 * beta2 * nwn * _mass(W2.value, u, n, acc)
        elif variant == "E":
            from .special_functions import mu_for_dimension
            mu2 = (mu_for_dimension(n) / R) ** 2
            labels.append("mu^2/R^2 convention for the printed mu")
            rhs["improvement"] = (n ** 2 / 4.0) * beta * nwn * _mass(
                lambda r: W.value(r) * r ** -2.0, u, n, acc)
            rhs["gradient_norm"] = mu2 * nwn * _grad_sq(
                lambda r: np.ones_like(r), u, n, acc)
    deficit = lhs - sum(rhs.values())
    return DeficitReport(
        inequality_name=f"improved_rellich_{variant}",
        lhs=lhs, rhs_terms=rhs, deficit=deficit,
        quad_error=nwn * acc.err, labels=tuple(labels),
    )


def one_dim_deficit(alpha: float, W: RadialPotential, f: RadialProfile,
                    R: float, beta: float | None = None,
                    phi_ratio: float | None = None,
                    quad: PanelQuadrature | None = None) -> DeficitReport:
    """Deficit of the one-dimensional weighted inequality

    int_0^R r^alpha f'^2 >= ((alpha-1)/2)^2 int r^(alpha-2) f^2
                          + beta int r^alpha W f^2
                          + (phi'(R)/phi(R) - (alpha-1)/(2R)) R^alpha f(R)^2.

    ``phi_ratio`` is phi'(R)/phi(R) of the certificate solution of W (0 for
    the vanishing weight); the boundary summand carries the f(R)^2 factor.
    """
    if alpha < 1.0:
        raise ValueError("alpha must be >= 1")
    quad = quad or _default_quad(R)
    acc = _Accumulator(quad)
    labels = []
    if beta is None:
        beta, src = _resolve_beta(W, max(1, int(round(alpha)) + 1))
        labels.append(f"beta={beta:.6g} from {src}")
    if phi_ratio is None:
        br = _boundary_ratio(W, max(1, int(round(alpha)) + 1))
        phi_ratio = 0.0 if br is None else br / R
    lhs = acc.integral(lambda r: r ** alpha * f.d1(r) ** 2)
    rhs: dict[str, float] = {}
    hardy_coeff = ((alpha - 1.0) / 2.0) ** 2
    rhs["hardy"] = acc.integral(lambda r: r ** (alpha - 2.0) * f.value(r) ** 2,
                                coeff=hardy_coeff)
    if beta != 0.0 and W.kind != "zero":
        rhs["improvement"] = acc.integral(
            lambda r: r ** alpha * W.value(r) * f.value(r) ** 2, coeff=beta)
    fR = float(f.value(np.array([R]))[0])
    rhs["boundary"] = (phi_ratio - (alpha - 1.0) / (2.0 * R)) * R ** alpha * fR ** 2
    deficit = lhs - sum(rhs.values())
    return DeficitReport(
        inequality_name=f"one_dim(alpha={alpha:g})",
        lhs=lhs, rhs_terms=rhs, deficit=deficit, quad_error=acc.err,
        labels=tuple(labels),
    )


@dataclass(frozen=True)
class DecayReport:
    """Decay hypotheses of a weight V and the constants they produce.

    lambda1 = -lim r V'/V and lambda2 = -lim r V''/V' (None when V' == 0,
    flagged vacuous); the three sampled conditions are

    * r V'/V + lambda1 >= 0,
    * r V''/V' + lambda2 >= 0,
    * ((n-lambda1-2)^2/2 + 3(n-3)) V - (n-5) r V' - r^2 V'' >= 0,

    and the reported constants are
    ((n-lambda1-2)^2/4 + (n-1)) (n-lambda1-4)^2/4 and
    (n-1)(n-lambda2-2)^2/4.
    """

    lambda1: float
    lambda2: Optional[float]
    cond_lambda1_ok: bool
    cond_lambda2_ok: Optional[bool]
    cond_pointwise_ok: bool
    pointwise_min: float
    constant_mass: Optional[float]
    constant_slope: Optional[float]
    labels: tuple[str, ...]


def check_decay_conditions(V: RadialPotential, n: int, R: float,
                           n_samples: int = 400) -> DecayReport:
    labels = []
    lam1 = lambda_limit(V).lam if V.kind != "constant" else 0.0
    rs = np.geomspace(1e-8 * R, R * (1 - 1e-12), n_samples)
    Vv = V.value(rs)
    Vd = V.deriv(rs)
    Vd2 = V.deriv2(rs)
    tol = 1e-9
    cond1 = bool(np.min(rs * Vd / Vv + lam1) >= -tol * max(1.0, abs(lam1)))
    lam2 = None
    cond2 = None
    if np.max(np.abs(Vd)) == 0.0:
        labels.append("lambda2 vacuous: V' == 0")
    else:
        probes = [R * 10.0 ** (-j) for j in range(2, 10)]
        pr = np.asarray(probes)
        ratios = pr * V.deriv2(pr) / V.deriv(pr)
        u = 1.0 / np.log(math.e * R / pr)
        lam2 = -float(np.polynomial.polynomial.polyfit(u, ratios, 3)[0])
        cond2 = bool(np.min(rs * Vd2 / Vd + lam2) >= -tol * max(1.0, abs(lam2)))
    pw = (0.5 * (n - lam1 - 2.0) ** 2 + 3.0 * (n - 3.0)) * Vv \
        - (n - 5.0) * rs * Vd - rs ** 2 * Vd2
    pw_min = float(np.min(pw))
    scale = float(np.max(np.abs(pw))) or 1.0
    const_mass = ((n - lam1 - 2.0) ** 2 / 4.0 + (n - 1.0)) \
        * (n - lam1 - 4.0) ** 2 / 4.0
    const_slope = None if lam2 is None else (n - 1.0) * (n - lam2 - 2.0) ** 2 / 4.0
    return DecayReport(
        lambda1=lam1, lambda2=lam2,
        cond_lambda1_ok=cond1, cond_lambda2_ok=cond2,
        cond_pointwise_ok=pw_min >= -1e-9 * scale,
        pointwise_min=pw_min,
        constant_mass=const_mass, constant_slope=const_slope,
        labels=tuple(labels),
    )


def ckn_pair(n: int, a: float, R: float = 1.0):
    """Critical power pair: (V, W, theta) with V = r^(-2a),
    W = ((n-2a-2)/2)^2 r^(-2a-2), theta = -((n-2a-2)/2) R^(-2a-1)."""
    from .potentials import power, scaled
    V = power(a, R)
    W = scaled(((n - 2 * a - 2) / 2.0) ** 2, power(a + 1.0, R))
    theta = -((n - 2 * a - 2) / 2.0) * R ** (-2 * a - 1.0)
    return V, W, theta


def suite_deficits(variant: str, n: int, R: float = 1.0,
                   suite: Sequence[TestFunction] | None = None,
                   quad: PanelQuadrature | None = None,
                   **kwargs) -> tuple[list[DeficitReport], list[str]]:
    """Run one named inequality over (the admissible part of) a suite.

    ``variant`` is one of 'hardy', 'hardy_rellich_radial', 'hardy_rellich',
    'A'..'F', 'one_dim'.  Returns (reports, skipped names).  The per-variant
    defaults pick hypotheses that hold: the critical power pair for 'hardy'
    and the second-order pairs, chain weights for the improvements.
    """
    from .potentials import constant, log_chain, power, scaled, x_chain, zero

    suite = list(suite if suite is not None else builtin_suite(R))
    reports = []
    skipped = []
    if variant == "hardy":
        a = kwargs.get("a", 0.5)
        V, W, th = ckn_pair(n, a, R)
        for u in suite:
            reports.append(hardy_deficit(V, W, th, u, n, quad=quad))
    elif variant in ("hardy_rellich_radial", "hardy_rellich"):
        cW = ((n - 2.0) / 2.0) ** 2
        V = constant(R)
        W = scaled(cW, power(1.0, R))
        th = -((n - 2.0) / 2.0) / R
        for u in suite:
            if variant == "hardy_rellich_radial" and not u.radial_only:
                skipped.append(u.name)
                continue
            reports.append(hardy_rellich_deficit(V, W, u, n, th, quad=quad))
    elif variant in ("A", "B", "C", "D", "E"):
        W = kwargs.get("W") or log_chain(1, math.e * R, R)
        W2 = kwargs.get("W2") or x_chain(1, R)
        m = kwargs.get("m", 0.0)
        for u in suite:
            if not u.vanishes_at_boundary:
                skipped.append(u.name)
                continue
            reports.append(improved_rellich_deficit(
                W, u, n, variant, m=m, W2=W2 if variant == "D" else None,
                quad=quad))
    elif variant == "F":
        W = kwargs.get("W") or log_chain(1, math.e * R, R)
        for u in suite:
            reports.append(improved_rellich_deficit(W, u, n, "F", quad=quad))
    elif variant == "one_dim":
        alpha = kwargs.get("alpha", float(n - 1))
        Wz = zero(R)
        for u in suite:
            if not u.radial_only:
                skipped.append(u.name)
                continue
            for _, f in u.modes:
                reports.append(one_dim_deficit(alpha, Wz, f, R, quad=quad))
    else:
        raise ValueError(f"unknown inequality name {variant!r}")
    return reports, skipped
