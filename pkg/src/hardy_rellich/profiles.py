"""Radial test-function library for deficit evaluation.

A :class:`TestFunction` is a finite list of spherical-harmonic modes
(k, f_k) with smooth radial profiles carrying analytic first and second
derivatives.  Profiles for mode k must vanish like r^k at the origin; the
built-in suite keeps f_k(R) = 0 for every k >= 1 (the regime in which the
mode-wise identities of the inequality module are exact) and mixes
boundary-vanishing and boundary-free radial parts.

The library covers polynomials, trigonometric and Gaussian bumps, a
mollifier, power-times-log-cutoff families saturating the critical Hardy
pairs, and profiles imported from shot trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline


@dataclass(frozen=True)
class RadialProfile:
    """Radial factor with derivatives up to order 2, vectorized in r."""

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]

    def __call__(self, r):
        return self.value(r)


@dataclass(frozen=True)
class TestFunction:
    """u = sum_k f_k(|x|) phi_k(x) with finitely many modes."""

    modes: tuple[tuple[int, RadialProfile], ...]
    R: float
    name: str

    @property
    def radial_only(self) -> bool:
        return all(k == 0 for k, _ in self.modes)

    def boundary_values(self) -> dict[int, float]:
        return {k: float(f.value(np.array([self.R]))[0]) for k, f in self.modes}

    @property
    def vanishes_at_boundary(self) -> bool:
        scale = max(
            float(np.max(np.abs(f.value(np.linspace(self.R / 4, self.R, 16)))))
            for _, f in self.modes
        ) or 1.0
        return all(abs(v) <= 1e-12 * scale for v in self.boundary_values().values())


def poly_profile(coeffs: Sequence[float], R: float = 1.0,
                 name: str | None = None) -> RadialProfile:
    """Polynomial in the scaled variable x = r/R (coeffs in ascending order)."""
    c = np.polynomial.Polynomial(list(coeffs))
    c1 = c.deriv(1)
    c2 = c.deriv(2)
    nm = name or f"poly{list(coeffs)}"
    return RadialProfile(
        name=nm,
        value=lambda r: c(np.asarray(r, dtype=float) / R),
        d1=lambda r: c1(np.asarray(r, dtype=float) / R) / R,
        d2=lambda r: c2(np.asarray(r, dtype=float) / R) / R ** 2,
    )


def profile_product(a: RadialProfile, b: RadialProfile,
                    name: str | None = None) -> RadialProfile:
    return RadialProfile(
        name=name or f"{a.name}*{b.name}",
        value=lambda r: a.value(r) * b.value(r),
        d1=lambda r: a.d1(r) * b.value(r) + a.value(r) * b.d1(r),
        d2=lambda r: a.d2(r) * b.value(r) + 2.0 * a.d1(r) * b.d1(r)
        + a.value(r) * b.d2(r),
    )


def cos_squared_profile(R: float = 1.0) -> RadialProfile:
    w = math.pi / R
    return RadialProfile(
        name="cos^2(pi r/2R)",
        value=lambda r: 0.5 * (1.0 + np.cos(w * np.asarray(r, dtype=float))),
        d1=lambda r: -0.5 * w * np.sin(w * np.asarray(r, dtype=float)),
        d2=lambda r: -0.5 * w * w * np.cos(w * np.asarray(r, dtype=float)),
    )


def sin_profile(R: float = 1.0) -> RadialProfile:
    w = math.pi / R
    return RadialProfile(
        name="sin(pi r/R)",
        value=lambda r: np.sin(w * np.asarray(r, dtype=float)),
        d1=lambda r: w * np.cos(w * np.asarray(r, dtype=float)),
        d2=lambda r: -w * w * np.sin(w * np.asarray(r, dtype=float)),
    )


def cos_profile(freq: float, R: float = 1.0) -> RadialProfile:
    w = freq / R
    return RadialProfile(
        name=f"cos({freq} r/R)",
        value=lambda r: np.cos(w * np.asarray(r, dtype=float)),
        d1=lambda r: -w * np.sin(w * np.asarray(r, dtype=float)),
        d2=lambda r: -w * w * np.cos(w * np.asarray(r, dtype=float)),
    )


def cosh_profile(R: float = 1.0) -> RadialProfile:
    return RadialProfile(
        name="cosh(r/R)",
        value=lambda r: np.cosh(np.asarray(r, dtype=float) / R),
        d1=lambda r: np.sinh(np.asarray(r, dtype=float) / R) / R,
        d2=lambda r: np.cosh(np.asarray(r, dtype=float) / R) / R ** 2,
    )


def lorentz_profile(R: float = 1.0) -> RadialProfile:
    def x(r):
        return np.asarray(r, dtype=float) / R

    return RadialProfile(
        name="1/(1+(r/R)^2)",
        value=lambda r: 1.0 / (1.0 + x(r) ** 2),
        d1=lambda r: -2.0 * x(r) / (1.0 + x(r) ** 2) ** 2 / R,
        d2=lambda r: (6.0 * x(r) ** 2 - 2.0) / (1.0 + x(r) ** 2) ** 3 / R ** 2,
    )


def gauss_profile(a: float, R: float = 1.0) -> RadialProfile:
    """exp(-a (r/R)^2) - exp(-a); vanishes at r = R."""
    shift = math.exp(-a)

    def x(r):
        return np.asarray(r, dtype=float) / R

    return RadialProfile(
        name=f"gauss(a={a})",
        value=lambda r: np.exp(-a * x(r) ** 2) - shift,
        d1=lambda r: -2.0 * a * x(r) * np.exp(-a * x(r) ** 2) / R,
        d2=lambda r: (4.0 * a * a * x(r) ** 2 - 2.0 * a)
        * np.exp(-a * x(r) ** 2) / R ** 2,
    )


def mollifier_profile(R: float = 1.0) -> RadialProfile:
    """exp(1 - 1/(1-(r/R)^2)) inside, 0 at the boundary, C^infinity."""

    def parts(r):
        xx = np.asarray(r, dtype=float) / R
        inside = xx < 1.0
        s = np.where(inside, 1.0 - xx ** 2, 1.0)
        f = np.where(inside, np.exp(1.0 - 1.0 / s), 0.0)
        g = np.where(inside, -2.0 * xx / s ** 2, 0.0)          # (log f)'
        gp = np.where(inside, (-2.0 - 6.0 * xx ** 2) / s ** 3, 0.0)
        return f, g / R, gp / R ** 2

    return RadialProfile(
        name="mollifier",
        value=lambda r: parts(r)[0],
        d1=lambda r: parts(r)[0] * parts(r)[1],
        d2=lambda r: parts(r)[0] * (parts(r)[1] ** 2 + parts(r)[2]),
    )


def _smoothstep(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Descending C^2 smoothstep: 1 at x<=0, 0 at x>=1."""
    x = np.clip(x, 0.0, 1.0)
    v = 1.0 - (10.0 * x ** 3 - 15.0 * x ** 4 + 6.0 * x ** 5)
    d1 = -(30.0 * x ** 2 - 60.0 * x ** 3 + 30.0 * x ** 4)
    d2 = -(60.0 * x - 180.0 * x ** 2 + 120.0 * x ** 3)
    return v, d1, d2


def power_log_cutoff(sigma: float, T: float, R: float = 1.0) -> RadialProfile:
    """(r/R)^sigma times a C^2 cutoff over one log-decade ladder.

    The cutoff variable is ln(R/r)/T, so the profile equals (r/R)^sigma near
    the boundary and vanishes identically for r <= R e^-T.  Against the
    critical power pair these profiles make the Hardy deficit exactly the
    cutoff's kinetic cost, which decays like 1/T.
    """

    def parts(r):
        r = np.asarray(r, dtype=float)
        xx = np.maximum(r / R, 1e-300)
        t = np.log(1.0 / xx) / T
        psi, dpsi, d2psi = _smoothstep(t)
        base = np.where(t < 1.0, xx ** sigma, 0.0)
        val = base * psi
        # u' = R^-1 x^(sigma-1) [sigma psi - dpsi/T]
        d1 = base / xx * (sigma * psi - dpsi / T) / R
        d2 = base / xx ** 2 * ((sigma - 1.0) * (sigma * psi - dpsi / T)
                               - sigma * dpsi / T + d2psi / T ** 2) / R ** 2
        return val, d1, d2

    return RadialProfile(
        name=f"x^{sigma:.3g}*cutoff(T={T:g})",
        value=lambda r: parts(r)[0],
        d1=lambda r: parts(r)[1],
        d2=lambda r: parts(r)[2],
    )


def profile_from_samples(r: np.ndarray, f: np.ndarray, f1: np.ndarray,
                         f2: np.ndarray, name: str = "sampled") -> RadialProfile:
    s0 = CubicSpline(r, f)
    s1 = CubicSpline(r, f1)
    s2 = CubicSpline(r, f2)
    return RadialProfile(name=name, value=lambda x: s0(x), d1=lambda x: s1(x),
                         d2=lambda x: s2(x))


def profile_from_trajectory(traj, problem, name: str | None = None) -> RadialProfile:
    """Wrap a shot trajectory as a radial profile.

    First and second derivatives are consistent with the equation itself:
    y'' is evaluated as -(a/r + V'/V) y' - (c W/V) y rather than by
    differentiating the spline twice.  Below the integration start the
    profile is extended by its Frobenius power.
    """
    g = traj.grid
    s0 = CubicSpline(g, traj.y)
    s1 = CubicSpline(g, traj.yp)
    r0 = g[0]
    y0 = traj.y[0]
    sig = traj.sigma
    p = problem

    def val(r):
        r = np.asarray(r, dtype=float)
        out = np.where(r >= r0, s0(np.clip(r, r0, g[-1])),
                       y0 * (np.maximum(r, 1e-300) / r0) ** sig)
        return out

    def d1(r):
        r = np.asarray(r, dtype=float)
        inner = y0 * sig * (np.maximum(r, 1e-300) / r0) ** sig \
            / np.maximum(r, 1e-300)
        return np.where(r >= r0, s1(np.clip(r, r0, g[-1])), inner)

    def d2(r):
        r = np.asarray(r, dtype=float)
        rr = np.maximum(r, 1e-300)
        v = p.V.value(rr)
        a = p.dim_coeff / rr + p.V.deriv(rr) / v
        q = p.c * p.W.value(rr) / v
        return -a * d1(r) - q * val(r)

    return RadialProfile(name=name or "trajectory", value=val, d1=d1, d2=d2)


def builtin_suite(R: float = 1.0) -> list[TestFunction]:
    """The 30-function verification suite.

    Mode-k profiles vanish at the boundary for every k >= 1; radial parts
    split into boundary-vanishing (usable for the H^2 cap H^1_0 statements)
    and boundary-free members (Hardy and plain-H^2 statements).
    """
    P = poly_profile

    def tf(name, *modes):
        return TestFunction(modes=tuple(modes), R=R, name=name)

    radial_vanishing = [
        P([1, 0, -1], R, "1-x^2"),
        P([1, 0, -2, 0, 1], R, "(1-x^2)^2"),
        P([1, 0, -3, 0, 3, 0, -1], R, "(1-x^2)^3"),
        P([1, 0, -1.5, 0, 0, 0, 0.5], R, "(1-x^2)^2(1+x^2/2)"),
        mollifier_profile(R),
        profile_product(P([1, 0, -2, 0, 1], R), cos_profile(2.0, R),
                        "(1-x^2)^2 cos(2x)"),
        cos_squared_profile(R),
        P([1, 0, -3, 2], R, "(1-x)^2(1+2x)"),
        P([1, -2, 0, 2, -1], R, "(1-x^2)(1-x)^2"),
        gauss_profile(4.0, R),
    ]
    radial_free = [
        P([1], R, "1"),
        P([1, 0, 1], R, "1+x^2"),
        P([2, 0, -1], R, "2-x^2"),
        cosh_profile(R),
        lorentz_profile(R),
    ]
    k1 = [
        P([0, 1, 0, -1], R, "x(1-x^2)"),
        P([0, 1, 0, -2, 0, 1], R, "x(1-x^2)^2"),
        P([0, 1, -2, 1], R, "x(1-x)^2"),
        sin_profile(R),
        profile_product(P([0, 1], R, "x"), gauss_profile(2.0, R), "x gauss"),
    ]
    k2 = [
        P([0, 0, 1, 0, -1], R, "x^2(1-x^2)"),
        P([0, 0, 1, 0, -2, 0, 1], R, "x^2(1-x^2)^2"),
        P([0, 0, 1, -2, 1], R, "x^2(1-x)^2"),
    ]
    k3 = [
        P([0, 0, 0, 1, 0, -1], R, "x^3(1-x^2)"),
        P([0, 0, 0, 1, 0, -2, 0, 1], R, "x^3(1-x^2)^2"),
    ]
    suite = []
    for f in radial_vanishing:
        suite.append(tf(f.name, (0, f)))
    for f in radial_free:
        suite.append(tf(f.name, (0, f)))
    for f in k1:
        suite.append(tf(f"k1:{f.name}", (1, f)))
    for f in k2:
        suite.append(tf(f"k2:{f.name}", (2, f)))
    for f in k3:
        suite.append(tf(f"k3:{f.name}", (3, f)))
    suite.append(tf("mix{0,1}", (0, radial_vanishing[1]), (1, k1[1])))
    suite.append(tf("mix{0,1,2}", (0, radial_vanishing[0]), (1, k1[0]), (2, k2[0])))
    suite.append(tf("mix{1,3}", (1, k1[2]), (3, k3[0])))
    suite.append(tf("mix{0free,1}", (0, radial_free[2]), (1, k1[0])))
    suite.append(tf("mix{0,2}", (0, radial_vanishing[6]), (2, k2[2])))
    return suite


def random_suite(seed: int, size: int, R: float = 1.0) -> list[TestFunction]:
    """Seeded random polynomial suite (boundary-vanishing modes k >= 1)."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(size):
        n_modes = int(rng.integers(1, 4))
        modes = []
        ks = rng.choice(np.arange(0, 4), size=n_modes, replace=False)
        for k in sorted(int(k) for k in ks):
            deg = int(rng.integers(1, 4))
            body = rng.uniform(-1.0, 1.0, size=deg + 1)
            # f = x^k * body(x) * (1 - x^2)   (vanishes at boundary)
            base = np.zeros(k + 1)
            base[k] = 1.0
            poly = np.polynomial.Polynomial(base) \
                * np.polynomial.Polynomial(body) \
                * np.polynomial.Polynomial([1.0, 0.0, -1.0])
            modes.append((k, poly_profile(poly.coef, R, f"rand{i}k{k}")))
        out.append(TestFunction(modes=tuple(modes), R=R, name=f"random-{i}"))
    return out


def ckn_cutoff_family(n: int, a: float, R: float = 1.0,
                      Ts: Sequence[float] = (0.3, 1.34, 6.0, 26.8, 120.0)
                      ) -> list[TestFunction]:
    """Log-cutoff regularizations of the critical power profile r^sigma.

    sigma = -(n-2a-2)/2 is the exponent of the extremal for the critical
    power pair; the Hardy deficit of member T equals the cutoff cost ~ 1/T,
    so the family saturates the inequality along a geometric ladder of T.
    """
    sigma = -(n - 2.0 * a - 2.0) / 2.0
    return [
        TestFunction(modes=((0, power_log_cutoff(sigma, T, R)),), R=R,
                     name=f"ckn-cutoff T={T:g}")
        for T in Ts
    ]
