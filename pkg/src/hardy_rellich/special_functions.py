"""Bessel functions of the first kind, their zeros, and the boundary parameter mu(n).

Two evaluation branches, crossing over at x = 10:

* power series for x < 10 -- the alternating series loses at most ~1e-12
  absolute accuracy to cancellation there, since sum of |terms| ~ e^x/sqrt(x);
* integral representation for x >= 10 --
  J_nu(x) = (1/pi) int_0^pi cos(nu*t - x sin t) dt
            - sin(nu*pi)/pi int_0^inf exp(-x sinh s - nu s) ds,
  evaluated with composite Gauss-Legendre panels.  Unlike the divergent
  large-argument asymptotic series, this branch reaches full double accuracy
  uniformly down to the crossover point.

mu(n) is the unique root in (0, z0) of  x J_0'(x)/J_0(x) = -n/2,  where z0
is the first zero of J_0; it calibrates the constant-weight improvement
terms in the inequality module.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

SERIES_CUTOFF = 10.0
_GL16 = leggauss(16)
_GL24 = leggauss(24)


def _series(nu: float, x: float) -> float:
    # J_nu(x) = (x/2)^nu / Gamma(nu+1) * sum_k (-(x/2)^2)^k / (k! (nu+1)_k)
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    lead = math.exp(nu * math.log(0.5 * x) - math.lgamma(nu + 1.0))
    q = -0.25 * x * x
    term, total = 1.0, 1.0
    for k in range(1, 400):
        term *= q / (k * (nu + k))
        total += term
        if abs(term) <= 1e-20 * abs(total) and k > 0.5 * x:
            break
    return lead * total


def _integral(nu: float, x: float) -> float:
    # oscillatory part on [0, pi]
    n_panels = max(4, int((x + nu) / 3.0) + 4)
    edges = np.linspace(0.0, math.pi, n_panels + 1)
    xg, wg = _GL16
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    osc = float(np.sum(w * np.cos(nu * t - x * np.sin(t)))) / math.pi
    # exponential tail, absent for integer order
    s_pi = math.sin(nu * math.pi)
    if s_pi == 0.0 or nu == round(nu):
        return osc
    upper = math.asinh(760.0 / x) + 1.0
    edges = np.array([0.0, 0.5, 1.5, upper])
    xg, wg = _GL24
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    s = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    tail = float(np.sum(w * np.exp(-x * np.sinh(s) - nu * s)))
    return osc - s_pi * tail / math.pi


def bessel_j(nu: float, x: float) -> float:
    """J_nu(x) for nu >= 0, x >= 0, to ~1e-10 absolute accuracy on [0, 50]."""
    nu = float(nu)
    x = float(x)
    if nu < 0 or x < 0:
        raise ValueError("bessel_j requires nu >= 0 and x >= 0")
    if x < SERIES_CUTOFF:
        return _series(nu, x)
    return _integral(nu, x)


def bessel_j_series(nu: float, x: float) -> float:
    """Power-series branch (exposed for crossover testing)."""
    return _series(float(nu), float(x))


def bessel_j_integral(nu: float, x: float) -> float:
    """Integral-representation branch (exposed for crossover testing)."""
    return _integral(float(nu), float(x))


def bessel_j_many(nu: float, xs) -> np.ndarray:
    """Vectorized J_nu over an array of arguments."""
    xs = np.asarray(xs, dtype=float)
    flat = xs.ravel()
    out = np.fromiter((bessel_j(nu, x) for x in flat), dtype=float, count=flat.size)
    return out.reshape(xs.shape)


def first_zero(nu: float = 0.0) -> float:
    """First positive zero of J_nu, by bracket scan plus Brent refinement."""
    nu = float(nu)
    if nu == 0.0:
        a, b = 2.0, 3.0
    else:
        a = max(0.5, nu + 0.25)
        step = 0.5
        while bessel_j(nu, a) <= 0.0:
            a += step
        b = a + step
        while bessel_j(nu, b) > 0.0:
            a = b
            b += step
    return float(brentq(lambda x: bessel_j(nu, x), a, b, xtol=1e-12, rtol=1e-14))


def first_zero_j0() -> float:
    """First zero of J_0 (~2.40483), bracketed on [2, 3]."""
    return first_zero(0.0)


def mu_for_dimension(n: int) -> float:
    """The mu in (0, z0) with mu J_0'(mu)/J_0(mu) = -n/2.

    Equivalent root problem: mu J_1(mu) - (n/2) J_0(mu) = 0, which changes
    sign exactly once on (0, z0) because x J_0'(x)/J_0(x) decreases from 0
    to -infinity there.
    """
    if n < 1:
        raise ValueError("mu_for_dimension requires n >= 1")
    z0 = first_zero_j0()

    def h(x: float) -> float:
        return x * bessel_j(1.0, x) - 0.5 * n * bessel_j(0.0, x)

    return float(brentq(h, 1e-9, z0 - 1e-12, xtol=1e-13, rtol=1e-15))


def mu_residual(n: int, mu: float) -> float:
    """|mu J_0'(mu)/J_0(mu) + n/2| for reporting."""
    return abs(-mu * bessel_j(1.0, mu) / bessel_j(0.0, mu) + 0.5 * n)
