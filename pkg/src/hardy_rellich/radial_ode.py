"""Shooting integrator for the singular radial equation of a weight pair.

The equation attached to a pair (V, W) with multiplier c on (0, R] is

    y'' + (a/r + V'/V) y' + c W/V y = 0,

where a = n-1 in the n-dimensional radial convention (``ode_dim='n'``) or
a = 1 in the two-dimensional convention (``ode_dim='2d'``) used by the
closed-form chain solutions.  r = 0 is a regular singular point; the shooter
starts on the dominant Frobenius branch at r0 = 1e-8 R and integrates the
log-radius form of the equation,

    y_tt + (1 - a - r V'/V) y_t - r^2 (c W/V) y = 0,    t = ln(r/R),

which is uniformly non-stiff on t in [ln(r0/R), 0] for the whole potential
catalog.  Zero crossings are located by the integrator's event root-finding
on dense output; overflow is handled by joint rescaling of (y, y'), exact
for a linear equation.

Positivity of the shot branch on (0, R) is the package's operational
criterion for a pair being a Bessel pair at the given multiplier; the weight
module bisises on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp

from .potentials import RadialPotential

_GL5 = leggauss(5)


class ProblemValidationError(ValueError):
    """The pair violates the integrability preconditions."""


class TooSingularError(ValueError):
    """W/V is more singular than r^-2: no Frobenius branch exists."""


class OscillatoryOriginError(ArithmeticError):
    """Complex indicial roots: the solution oscillates immediately at r=0.

    Raised when the multiplier exceeds the critical Hardy threshold of the
    pair; the pair is not a Bessel pair at this multiplier.
    """


class IntegrationError(RuntimeError):
    """The adaptive integrator failed; carries the radius where it stopped."""

    def __init__(self, msg: str, radius: float):
        super().__init__(msg)
        self.radius = radius


class NotPositiveError(ArithmeticError):
    """The shot solution changes sign before R."""


class CriticalBoundaryError(ArithmeticError):
    """y(R) vanishes to working precision: the boundary ratio is -inf-like."""


@dataclass(frozen=True)
class OdeProblem:
    """One instance of the pair equation.

    Use :meth:`create` to get the integrability preconditions checked; the
    plain constructor skips them (useful inside bisection loops where the
    same (V, n, R) recurs with varying c).
    """

    n: int
    V: RadialPotential
    W: RadialPotential
    c: float
    R: float
    ode_dim: str = "n"

    def __post_init__(self):
        if self.n < 1:
            raise ProblemValidationError("need n >= 1")
        if self.R <= 0:
            raise ProblemValidationError("need R > 0")
        if self.c < 0:
            raise ProblemValidationError("need c >= 0")
        if self.ode_dim not in ("n", "2d"):
            raise ProblemValidationError("ode_dim must be 'n' or '2d'")

    @property
    def dim_coeff(self) -> float:
        """The a in y'' + (a/r + V'/V) y' + ... = 0."""
        return float(self.n - 1) if self.ode_dim == "n" else 1.0

    @classmethod
    def create(cls, n: int, V: RadialPotential, W: RadialPotential, c: float,
               R: float, ode_dim: str = "n") -> "OdeProblem":
        p = cls(n=n, V=V, W=W, c=float(c), R=float(R), ode_dim=ode_dim)
        check_integrability(V, p.dim_coeff + 1.0, R)
        return p

    def with_c(self, c: float) -> "OdeProblem":
        return replace(self, c=float(c))


def _shell_integrals(f, a: float, n_shells: int = 48) -> np.ndarray:
    xg, wg = _GL5
    hi = a * 2.0 ** (-np.arange(n_shells, dtype=float))
    lo = 0.5 * hi
    mid = 0.5 * (hi + lo)
    half = 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * xg[None, :]
    w = half[:, None] * wg[None, :]
    return (w * f(x)).sum(axis=1)


def _limit_ratio(vals: np.ndarray) -> float:
    # extrapolated geometric decay ratio of the inner shells
    v = vals[-12:]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = v[1:] / v[:-1]
    ratios = ratios[np.isfinite(ratios)]
    if len(ratios) == 0:
        return 0.0
    return float(np.median(ratios[-6:]))


def check_integrability(V: RadialPotential, nu: float, R: float) -> None:
    """Verify int_0 dr/(r^(nu-1) V) = +inf and int_0 r^(nu-1) V dr < inf.

    Both checks run shell quadrature on dyadic shells shrinking to 0 and
    classify by the extrapolated shell-sum ratio (>= 1 means divergence).
    """
    a = 0.5 * R
    inv = _shell_integrals(lambda r: 1.0 / (r ** (nu - 1.0) * V.value(r)), a)
    vol = _shell_integrals(lambda r: r ** (nu - 1.0) * V.value(r), a)
    if not np.all(np.isfinite(inv)) or _limit_ratio(inv) < 1.0 - 5e-3:
        raise ProblemValidationError(
            "int dr/(r^(n-1) V) converges at 0; the pair equation criterion "
            "does not apply to this V"
        )
    if not np.all(np.isfinite(vol)) or _limit_ratio(vol) >= 1.0 - 5e-3:
        raise ProblemValidationError("int r^(n-1) V dr diverges at 0")


@dataclass(frozen=True)
class Trajectory:
    """Shot solution sampled on an increasing radial grid in (r0, R].

    ``first_zero`` is the first interior sign change (None if y > 0
    throughout); ``end_ratio`` is y'(R)/y(R), or None when y(R) vanishes to
    working precision (``boundary_degenerate``).
    """

    grid: np.ndarray
    y: np.ndarray
    yp: np.ndarray
    first_zero: Optional[float]
    end_ratio: Optional[float]
    boundary_degenerate: bool
    sigma: float

    @property
    def positive_open(self) -> bool:
        return self.first_zero is None


def indicial_exponents(p: OdeProblem) -> tuple[float, float]:
    """Roots of s(s-1) + (a + s_V) s + c w2 = 0, sorted descending.

    w2 = lim r^2 W/V, read off the declared singularity data.  Complex roots
    raise :class:`OscillatoryOriginError`: the multiplier is already past the
    critical Hardy threshold of the pair.
    """
    sV = p.V.sing_exponent
    ds = p.W.sing_exponent - sV
    if p.W.kind == "zero":
        w2 = 0.0
    elif ds < -2.0 - 1e-9:
        raise TooSingularError(
            f"W/V ~ r^{ds:.3g} at the origin is more singular than r^-2"
        )
    elif abs(ds + 2.0) <= 1e-9:
        if p.V.sing_coefficient == 0.0:
            raise TooSingularError("V has zero leading coefficient with W/V ~ r^-2")
        w2 = p.W.sing_coefficient / p.V.sing_coefficient
    else:
        w2 = 0.0
    pm1 = p.dim_coeff + sV
    disc = (pm1 - 1.0) ** 2 - 4.0 * p.c * w2
    if disc < 0.0:
        raise OscillatoryOriginError(
            f"complex indicial roots (disc={disc:.3g}): not a Bessel pair at c={p.c}"
        )
    root = math.sqrt(disc)
    s_plus = 0.5 * ((1.0 - pm1) + root)
    s_minus = 0.5 * ((1.0 - pm1) - root)
    return s_plus, s_minus


def _frobenius_start(p: OdeProblem, r0: float, sigma: float) -> float:
    """Return r0 * y'(r0)/y(r0) for y = r^sigma (1 + a1 r + a2 r^2).

    The correction coefficients come from the Frobenius recursion against
    locally evaluated expansion coefficients of the ODE; for pure power
    pairs they vanish identically.
    """
    sV = p.V.sing_exponent
    pm1 = p.dim_coeff + sV
    # sigma is a root of the indicial polynomial, so q_{-2} is recoverable
    q2 = -(sigma * (sigma - 1.0) + pm1 * sigma)

    def Find(s: float) -> float:
        return s * (s - 1.0) + pm1 * s + q2

    Vr0 = float(p.V.value(r0))
    Wr0 = float(p.W.value(r0))
    p_hat0 = p.dim_coeff / r0 + float(p.V.deriv(r0)) / Vr0 - pm1 / r0
    q_hat0 = p.c * Wr0 / Vr0 - q2 / r0 ** 2
    a1 = -sigma * p_hat0 / Find(sigma + 1.0)
    a2 = -((sigma + 1.0) * p_hat0 * a1 + q_hat0) / Find(sigma + 2.0)
    poly = 1.0 + a1 * r0 + a2 * r0 ** 2
    dpoly = a1 + 2.0 * a2 * r0
    return sigma + r0 * dpoly / poly


def shoot_from_origin(p: OdeProblem, tol: float = 1e-10, n_points: int = 512,
                      r0_factor: float = 1e-8) -> Trajectory:
    """Integrate the dominant branch from r0 = r0_factor*R to R.

    Linear in the initial amplitude: the start is normalized to y(r0) = 1
    and error control is purely relative, so rescaling the data rescales the
    trajectory exactly (up to roundoff).
    """
    sigma, _ = indicial_exponents(p)
    r0 = max(r0_factor * p.R, 1e-300)
    tau0 = math.log(r0 / p.R)
    ylog0 = _frobenius_start(p, r0, sigma)

    R = p.R
    dim = p.dim_coeff
    Vv, Vd, Wv = p.V.value, p.V.deriv, p.W.value
    c = p.c

    def rhs(tau, Y):
        r = R * math.exp(tau)
        v = float(Vv(r))
        a = dim + r * float(Vd(r)) / v
        q = c * float(Wv(r)) / v
        return (Y[1], (1.0 - a) * Y[1] - r * r * q * Y[0])

    def cross(tau, Y):
        return Y[0]

    cross.terminal = True
    cross.direction = 0

    def blow(tau, Y):
        return abs(Y[0]) + abs(Y[1]) - 1e120

    blow.terminal = True
    blow.direction = 1

    t_eval = np.linspace(tau0, 0.0, n_points)
    segs_t, segs_y, segs_yp = [], [], []
    t_start = tau0
    state = [1.0, ylog0]
    first_zero = None
    finished = False
    for _ in range(60):
        sol = solve_ivp(rhs, (t_start, 0.0), state, method="DOP853",
                        rtol=tol, atol=1e-290, events=(cross, blow),
                        t_eval=t_eval[t_eval >= t_start - 1e-14],
                        first_step=min(1e-3, abs(t_start) / 10 + 1e-6) or None)
        if sol.t.size:
            segs_t.append(sol.t)
            segs_y.append(sol.y[0])
            segs_yp.append(sol.y[1])
        if sol.status == 1:  # event
            if sol.t_events[0].size:
                tz = float(sol.t_events[0][0])
                if tz < -1e-12:
                    first_zero = R * math.exp(tz)
                finished = True
                break
            # overflow: rescale jointly and continue (linear equation)
            t_start = float(sol.t_events[1][0])
            Yev = sol.y_events[1][0]
            s = max(abs(Yev[0]), abs(Yev[1]))
            state = [Yev[0] / s, Yev[1] / s]
            for i in range(len(segs_y)):
                segs_y[i] = segs_y[i] / s
                segs_yp[i] = segs_yp[i] / s
            continue
        if sol.status != 0:
            r_stop = R * math.exp(sol.t[-1]) if sol.t.size else r0
            raise IntegrationError(f"integrator failed: {sol.message}", r_stop)
        state = [sol.y[0, -1], sol.y[1, -1]] if sol.t.size else state
        finished = True
        yR, ytR = float(sol.y[0, -1]), float(sol.y[1, -1])
        break
    if not finished:
        raise IntegrationError("too many rescaling restarts", R)

    tau = np.concatenate(segs_t) if segs_t else np.array([tau0])
    y = np.concatenate(segs_y) if segs_y else np.array([1.0])
    yt = np.concatenate(segs_yp) if segs_yp else np.array([ylog0])
    grid = R * np.exp(tau)
    yp = yt / grid

    boundary_degenerate = False
    end_ratio = None
    if first_zero is None:
        # Degeneracy means y approaches zero AT the boundary, so compare
        # against the local amplitude near R: a monotone decaying power has
        # y(R) tiny relative to the global max yet is perfectly regular.
        near = np.abs(y[grid >= 0.9 * R])
        yloc = float(near.max()) if near.size else float(np.max(np.abs(y))) or 1.0
        if abs(y[-1]) <= 1e-10 * yloc or grid[-1] < R * (1.0 - 1e-9):
            boundary_degenerate = True
        else:
            end_ratio = float(yt[-1] / (R * y[-1]))
    return Trajectory(grid=grid, y=y, yp=yp, first_zero=first_zero,
                      end_ratio=end_ratio, boundary_degenerate=boundary_degenerate,
                      sigma=sigma)


def theta(p: OdeProblem, tol: float = 1e-10) -> float:
    """Boundary ratio V(R) y'(R)/y(R) of the positive shot solution."""
    traj = shoot_from_origin(p, tol=tol)
    if traj.first_zero is not None:
        raise NotPositiveError(
            f"solution changes sign at r={traj.first_zero:.6g}; no positive "
            "solution at this multiplier"
        )
    if traj.boundary_degenerate or traj.end_ratio is None:
        raise CriticalBoundaryError("y(R) vanishes to working precision")
    return float(p.V.value(p.R)) * traj.end_ratio
