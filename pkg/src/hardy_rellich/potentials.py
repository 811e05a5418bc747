"""Radial weight functions: powers, iterated-log chains, X-chains, and sums.

Every weight is packaged as a :class:`RadialPotential`: a positive function
of r on (0, R_max] together with analytic first and second derivatives and
its leading power behaviour at the origin (``value(r) ~ v0 * r^s``).  The
singularity data drive the Frobenius start of the ODE shooter and the
integrability checks, so they are part of the contract, not a convenience.

The catalogued families:

* ``zero``, ``constant`` -- the trivial weights 0 and 1;
* ``power`` -- r^(-2m);
* ``logchain`` -- sum_{j<=k} r^-2 (prod_{i<=j} log^(i)(rho/r))^-2 with
  log^(1) = log and log^(i+1) = log o log^(i);
* ``xchain`` -- sum_{j<=k} r^-2 (X_1 ... X_j)^2(r/R) with
  X_1(t) = (1 - log t)^-1 and X_(i+1) = X_1 o X_i;
* ``scaled``, ``sum`` -- positive combinations of the above;
* ``custom`` -- user-supplied callables with declared singularity data.

Chain derivatives are computed by analytic recursion (never finite
differences): the recursions stay stable arbitrarily close to r = 0.

The module also houses two operations used throughout the package:
``lambda_limit`` estimates the logarithmic decay rate
lambda = -lim r W'(r)/W(r), and ``candidate_solution`` returns the known
closed-form positive solution of y'' + y'/r + c W y = 0 for the catalogued
Bessel potentials, together with the multiplier c it certifies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

LOGCHAIN_MIN_LOG = 1e-8


class PotentialError(ValueError):
    """Invalid potential specification."""


class UnsupportedKindError(PotentialError):
    """No closed-form solution is catalogued for this potential kind."""


class NoConvergenceError(ArithmeticError):
    """Probe-radius extrapolation failed to settle."""


@dataclass(frozen=True)
class RadialPotential:
    """Evaluatable radial weight with derivatives and origin data.

    ``value(r) ~ sing_coefficient * r^sing_exponent`` as r -> 0; a zero
    coefficient marks sub-power (iterated-log) corrections on top of the
    stated exponent.  Evaluators are pure and vectorized; instances are
    immutable and safe to share across workers.
    """

    kind: str
    value: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    deriv2: Callable[[np.ndarray], np.ndarray]
    R_max: float
    sing_exponent: float
    sing_coefficient: float
    params: dict = field(default_factory=dict)

    def __call__(self, r):
        return self.value(r)

    def spec(self) -> dict:
        """Serializable {kind, params} record (None for custom potentials)."""
        if self.kind == "custom":
            return {"kind": "custom"}
        return {"kind": self.kind, "params": dict(self.params)}


def zero(R: float = 1.0) -> RadialPotential:
    return RadialPotential(
        kind="zero",
        value=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        deriv=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        deriv2=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        R_max=float(R), sing_exponent=0.0, sing_coefficient=0.0,
        params={"R": float(R)},
    )


def constant(R: float = 1.0) -> RadialPotential:
    return RadialPotential(
        kind="constant",
        value=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        deriv=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        deriv2=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        R_max=float(R), sing_exponent=0.0, sing_coefficient=1.0,
        params={"R": float(R)},
    )


def power(m: float, R: float = 1.0) -> RadialPotential:
    """r^(-2m); positive for all r > 0."""
    m = float(m)
    e = -2.0 * m
    return RadialPotential(
        kind="power",
        value=lambda r: np.asarray(r, dtype=float) ** e,
        deriv=lambda r: e * np.asarray(r, dtype=float) ** (e - 1.0),
        deriv2=lambda r: e * (e - 1.0) * np.asarray(r, dtype=float) ** (e - 2.0),
        R_max=float(R), sing_exponent=e, sing_coefficient=1.0,
        params={"m": m, "R": float(R)},
    )


def _log_levels(k: int, rho: float, r: np.ndarray):
    """(L_i, L_i', L_i'') for i = 1..k with L_1 = log(rho/r)."""
    r = np.asarray(r, dtype=float)
    L = np.log(rho / r)
    dL = -1.0 / r
    d2L = 1.0 / r ** 2
    out = [(L, dL, d2L)]
    for _ in range(k - 1):
        Lp, dLp, d2Lp = out[-1]
        out.append((np.log(Lp), dLp / Lp, (d2Lp * Lp - dLp ** 2) / Lp ** 2))
    return out


def log_chain(k: int, rho: float, R: float = 1.0) -> RadialPotential:
    """Iterated-log improvement weight W_(k,rho)."""
    k = int(k)
    rho = float(rho)
    R = float(R)
    if k < 1:
        raise PotentialError("logchain needs k >= 1")
    if R <= 0:
        raise PotentialError("logchain needs R > 0")
    levels = _log_levels(k, rho, np.array([R]))
    for i, (L, _, _) in enumerate(levels):
        if not np.all(L >= LOGCHAIN_MIN_LOG):
            raise PotentialError(
                f"rho={rho} too small: log^({i + 1})(rho/r) < {LOGCHAIN_MIN_LOG} at r=R"
            )

    def _terms(r):
        lv = _log_levels(k, rho, r)
        r = np.asarray(r, dtype=float)
        vals, d1s, d2s = [], [], []
        S = np.zeros_like(r)
        dS = np.zeros_like(r)
        P = np.ones_like(r)
        for (L, dL, d2L) in lv:
            P = P * L
            S = S + dL / L
            dS = dS + (d2L * L - dL ** 2) / L ** 2
            T = 1.0 / (r ** 2 * P ** 2)
            lt = -2.0 / r - 2.0 * S
            vals.append(T)
            d1s.append(T * lt)
            d2s.append(T * (lt ** 2 + 2.0 / r ** 2 - 2.0 * dS))
        return np.sum(vals, axis=0), np.sum(d1s, axis=0), np.sum(d2s, axis=0)

    return RadialPotential(
        kind="logchain",
        value=lambda r: _terms(r)[0],
        deriv=lambda r: _terms(r)[1],
        deriv2=lambda r: _terms(r)[2],
        R_max=R, sing_exponent=-2.0, sing_coefficient=0.0,
        params={"k": k, "rho": rho, "R": R},
    )


def _x_levels(k: int, t: np.ndarray):
    """(X_i, X_i', X_i'') in the scaled variable t for i = 1..k."""
    t = np.asarray(t, dtype=float)
    X = 1.0 / (1.0 - np.log(t))
    dX = X ** 2 / t
    d2X = (2.0 * X ** 3 - X ** 2) / t ** 2
    out = [(X, dX, d2X)]
    for _ in range(k - 1):
        Xp, dXp, d2Xp = out[-1]
        Xn = 1.0 / (1.0 - np.log(Xp))
        dXn = Xn ** 2 / Xp * dXp
        d2Xn = (2.0 * Xn ** 3 - Xn ** 2) / Xp ** 2 * dXp ** 2 + Xn ** 2 / Xp * d2Xp
        out.append((Xn, dXn, d2Xn))
    return out


def x_chain(k: int, R: float = 1.0) -> RadialPotential:
    """X-chain improvement weight on (0, R]."""
    k = int(k)
    R = float(R)
    if k < 1:
        raise PotentialError("xchain needs k >= 1")
    if R <= 0:
        raise PotentialError("xchain needs R > 0")

    def _terms(r):
        r = np.asarray(r, dtype=float)
        lv = _x_levels(k, r / R)
        vals, d1s, d2s = [], [], []
        S = np.zeros_like(r)
        dS = np.zeros_like(r)
        Q = np.ones_like(r)
        for (X, dX, d2X) in lv:
            Q = Q * X
            S = S + dX / X                       # d/dt of log Q
            dS = dS + (d2X * X - dX ** 2) / X ** 2
            U = Q ** 2 / r ** 2
            lt = -2.0 / r + 2.0 * S / R          # U'/U
            vals.append(U)
            d1s.append(U * lt)
            d2s.append(U * (lt ** 2 + 2.0 / r ** 2 + 2.0 * dS / R ** 2))
        return np.sum(vals, axis=0), np.sum(d1s, axis=0), np.sum(d2s, axis=0)

    return RadialPotential(
        kind="xchain",
        value=lambda r: _terms(r)[0],
        deriv=lambda r: _terms(r)[1],
        deriv2=lambda r: _terms(r)[2],
        R_max=R, sing_exponent=-2.0, sing_coefficient=0.0,
        params={"k": k, "R": R},
    )


def scaled(c: float, inner: RadialPotential) -> RadialPotential:
    c = float(c)
    if c < 0:
        raise PotentialError("scaled needs c >= 0")
    return RadialPotential(
        kind="scaled",
        value=lambda r: c * inner.value(r),
        deriv=lambda r: c * inner.deriv(r),
        deriv2=lambda r: c * inner.deriv2(r),
        R_max=inner.R_max,
        sing_exponent=inner.sing_exponent,
        sing_coefficient=c * inner.sing_coefficient,
        params={"c": c, "inner": inner.spec()},
    )


def sum_of(parts: Sequence[RadialPotential]) -> RadialPotential:
    parts = list(parts)
    if not parts:
        raise PotentialError("sum needs at least one part")
    R = min(p.R_max for p in parts)
    s = min(p.sing_exponent for p in parts)
    coeff = sum(p.sing_coefficient for p in parts if p.sing_exponent == s)
    return RadialPotential(
        kind="sum",
        value=lambda r: np.sum([p.value(r) for p in parts], axis=0),
        deriv=lambda r: np.sum([p.deriv(r) for p in parts], axis=0),
        deriv2=lambda r: np.sum([p.deriv2(r) for p in parts], axis=0),
        R_max=R, sing_exponent=s, sing_coefficient=coeff,
        params={"parts": [p.spec() for p in parts]},
    )


def custom(value, deriv, deriv2, sing_exponent: float, sing_coefficient: float,
           R: float = 1.0) -> RadialPotential:
    """Wrap user callables; the singularity data must be declared explicitly."""
    return RadialPotential(
        kind="custom", value=value, deriv=deriv, deriv2=deriv2,
        R_max=float(R), sing_exponent=float(sing_exponent),
        sing_coefficient=float(sing_coefficient), params={},
    )


_BUILDERS = {
    "zero": lambda p: zero(R=p.get("R", 1.0)),
    "constant": lambda p: constant(R=p.get("R", 1.0)),
    "power": lambda p: power(p["m"], R=p.get("R", 1.0)),
    "logchain": lambda p: log_chain(p["k"], p["rho"], R=p.get("R", 1.0)),
    "xchain": lambda p: x_chain(p["k"], R=p.get("R", 1.0)),
}


def make_potential(spec: dict) -> RadialPotential:
    """Build a potential from a {kind, params} record (nested for scaled/sum).

    This is the file-facing constructor: the record tree is exactly what the
    CLI reads from JSON config files.  ``custom`` is not expressible here.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise PotentialError(f"potential spec must be a dict with 'kind': {spec!r}")
    kind = str(spec["kind"]).lower()
    params = spec.get("params", {}) or {}
    if kind in _BUILDERS:
        try:
            return _BUILDERS[kind](params)
        except KeyError as exc:
            raise PotentialError(f"{kind} spec missing parameter {exc}") from exc
    if kind == "scaled":
        return scaled(params["c"], make_potential(params["inner"]))
    if kind == "sum":
        return sum_of([make_potential(s) for s in params["parts"]])
    if kind == "custom":
        raise PotentialError("custom potentials cannot be built from config records")
    raise PotentialError(f"unknown potential kind {kind!r}")


@dataclass(frozen=True)
class LambdaData:
    """Decay rate lambda with W'/W = -lambda/r + f(r), r f(r) -> 0."""

    lam: float
    residual: Callable[[np.ndarray], np.ndarray]
    estimates: tuple


def lambda_limit(W: RadialPotential, probe_radii: Sequence[float] | None = None,
                 tol: float = 5e-2) -> LambdaData:
    """Estimate lambda = -lim_{r->0} r W'(r)/W(r) by probe extrapolation.

    Probes decrease geometrically toward 0; the raw ratios are extrapolated
    by a polynomial fit in u = 1/log(e R/r), which removes the slow 1/log
    corrections of the chain potentials exactly enough for the catalog.
    Raises :class:`NoConvergenceError` when dropping the last probe moves
    the extrapolated value by more than ``tol``.
    """
    R = W.R_max
    if probe_radii is None:
        probe_radii = [R * 10.0 ** (-j) for j in range(2, 10)]
    probes = np.asarray(sorted(probe_radii, reverse=True), dtype=float)
    if np.any(probes <= 0) or np.any(probes >= R * (1 + 1e-12)):
        raise PotentialError("probe radii must lie in (0, R]")
    vals = W.value(probes)
    if np.any(vals <= 0):
        raise PotentialError("W must be positive on the probe radii")
    a = probes * W.deriv(probes) / vals
    u = 1.0 / np.log(math.e * R / probes)

    def _extrapolate(uu, aa):
        deg = min(3, len(uu) - 1)
        return float(np.polynomial.polynomial.polyfit(uu, aa, deg)[0])

    full = _extrapolate(u, a)
    trimmed = _extrapolate(u[:-1], a[:-1])
    if not (math.isfinite(full) and abs(full - trimmed) <= tol * max(1.0, abs(full))):
        raise NoConvergenceError(
            f"r W'/W probe estimates did not settle: {full} vs {trimmed}"
        )
    lam = -full

    def residual(r):
        r = np.asarray(r, dtype=float)
        return W.deriv(r) / W.value(r) + lam / r

    return LambdaData(lam=lam, residual=residual, estimates=tuple(-a))


@dataclass(frozen=True)
class CandidateSolution:
    """Closed-form positive solution of y'' + y'/r + c W y = 0 on (0, R].

    ``multiplier`` is the c the solution certifies (1/4 for both chain
    families, mu(n)^2/R^2 for the constant weight); ``boundary_ratio`` is
    R y'(R)/y(R).  The ODE is the two-dimensional radial form; see the
    ``ode_dim`` flag on :class:`~hardy_rellich.radial_ode.OdeProblem` for
    how the n-dimensional convention relates.
    """

    kind: str
    value: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    deriv2: Callable[[np.ndarray], np.ndarray]
    multiplier: float
    boundary_ratio: float

    def __call__(self, r):
        return self.value(r)


def candidate_solution(W: RadialPotential, n: int | None = None) -> CandidateSolution:
    """Known positive solution for the catalogued Bessel potentials.

    For ``logchain`` the solution is (prod log^(i)(rho/r))^(1/2) and for
    ``xchain`` it is (X_1 ... X_k)^(-1/2); both satisfy the equation with
    multiplier 1/4 exactly (the X-chain boundary ratio is -k/2).  For the
    constant weight the solution is J_0(mu(n) r/R) with multiplier
    mu(n)^2/R^2 and boundary ratio -n/2, which requires ``n``.
    """
    kind = W.kind
    R = W.R_max
    if kind == "zero":
        one = lambda r: np.ones_like(np.asarray(r, dtype=float))
        nil = lambda r: np.zeros_like(np.asarray(r, dtype=float))
        return CandidateSolution("zero", one, nil, nil, multiplier=1.0,
                                 boundary_ratio=0.0)
    if kind == "constant":
        if n is None:
            raise UnsupportedKindError("constant weight needs the dimension n")
        from .special_functions import bessel_j_many, mu_for_dimension
        mu = mu_for_dimension(n)
        c = (mu / R) ** 2

        def val(r):
            return bessel_j_many(0.0, mu * np.asarray(r, dtype=float) / R)

        def d1(r):
            r = np.asarray(r, dtype=float)
            return -(mu / R) * bessel_j_many(1.0, mu * r / R)

        def d2(r):
            r = np.asarray(r, dtype=float)
            return -d1(r) / r - c * val(r)

        return CandidateSolution("constant", val, d1, d2, multiplier=c,
                                 boundary_ratio=-0.5 * n)
    if kind == "logchain":
        k = W.params["k"]
        rho = W.params["rho"]

        def _phi(r):
            lv = _log_levels(k, rho, r)
            r = np.asarray(r, dtype=float)
            P = np.ones_like(r)
            S = np.zeros_like(r)
            dS = np.zeros_like(r)
            for (L, dL, d2L) in lv:
                P = P * L
                S = S + dL / L
                dS = dS + (d2L * L - dL ** 2) / L ** 2
            phi = np.sqrt(P)
            return phi, phi * S / 2.0, phi * ((S / 2.0) ** 2 + dS / 2.0)

        br = float(R * _phi(np.array([R]))[1][0] / _phi(np.array([R]))[0][0])
        return CandidateSolution(
            "logchain",
            value=lambda r: _phi(r)[0],
            deriv=lambda r: _phi(r)[1],
            deriv2=lambda r: _phi(r)[2],
            multiplier=0.25, boundary_ratio=br,
        )
    if kind == "xchain":
        k = W.params["k"]

        def _phi(r):
            r = np.asarray(r, dtype=float)
            lv = _x_levels(k, r / R)
            S = np.zeros_like(r)
            dS = np.zeros_like(r)
            Q = np.ones_like(r)
            for (X, dX, d2X) in lv:
                Q = Q * X
                S = S + dX / X
                dS = dS + (d2X * X - dX ** 2) / X ** 2
            phi = Q ** -0.5
            lt = -0.5 * S / R
            return phi, phi * lt, phi * (lt ** 2 - 0.5 * dS / R ** 2)

        return CandidateSolution(
            "xchain",
            value=lambda r: _phi(r)[0],
            deriv=lambda r: _phi(r)[1],
            deriv2=lambda r: _phi(r)[2],
            multiplier=0.25, boundary_ratio=-0.5 * k,
        )
    raise UnsupportedKindError(f"no catalogued solution for kind {kind!r}")
