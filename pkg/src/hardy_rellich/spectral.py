"""Per-harmonic-mode quadratic forms and Rayleigh-quotient minimization.

Decomposing u into spherical harmonics u_k = f_k(|x|) phi_k(x) with
Laplace-Beltrami eigenvalues c_k = k(n+k-2) reduces the weighted
second-order quotients to one-dimensional forms per mode.  The numerator
implemented here is, per mode,

    N_k(f) = int r^(n-2m-1) f''^2 + [(n-1)(2m+1) + 2 c_k] int r^(n-2m-3) f'^2
           + c_k [c_k + (n-4-2m)(2m+2)] int r^(n-2m-5) f^2
           + (n-1) R^(n-2m-2) f'(R)^2,

paired with either the gradient-type denominator
int r^(n-2m-3) f'^2 + c_k int r^(n-2m-5) f^2 (``grad_over_grad``) or the
mass denominator int r^(n-2m-5) f^2 (``delta_over_u``).  Minimizing over
modes reproduces the known best constants: (n+2m)^2/4-type values for the
gradient quotient (e.g. 25/4, 3, 25/36 at m=0 for n = 5, 4, 3) and
((n+2m)(n-4-2m)/4)^2 for the mass quotient.

Discretization notes (all load-bearing):

* geometric mesh r = r_min e^t with uniform t, 4th-order stencils in t and
  4th-order Gregory quadrature; r_min defaults to 1e-30 R because the
  minimizers concentrate logarithmically at the origin and the truncated
  domain converges like (pi / ln(R/r_min))^2 toward the spectral edge;
* assembly in the exponent-weighted nodal basis f = r^s g with
  s = -(n-2m-4)/2, which makes every factor O(1) and is what keeps the
  quadratic forms numerically positive despite r-weights spanning sixty
  orders of magnitude;
* boundary conditions: f_k(R) = 0 is imposed for every k >= 1 under all
  three bc modes (the mode forms above are exact identities only under it);
  the modes differ in the k = 0 sector and in f'(R);
* the k = 0 gradient quotient is shift invariant, so it is minimized in the
  substituted variable w = f', which removes the constant 0/0 direction
  that otherwise cannot be pinned numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import cholesky, eigh, solve_triangular

from .grids import LogMesh, gregory_weights, uniform_derivative_matrices
from .potentials import RadialPotential
from .radial_ode import OdeProblem, theta as ode_theta

GRAD_OVER_GRAD = "grad_over_grad"
DELTA_OVER_U = "delta_over_u"
BCS = ("h2", "h2_h10", "h20")


class NonIntegrableModeError(ValueError):
    """The r^(n-2m-5) weight is not integrable for this mode's decay."""


class IndefiniteMassError(ArithmeticError):
    """The denominator form lost positivity (grid too coarse near 0)."""


@dataclass(frozen=True)
class GridParams:
    n_nodes: int = 400
    r_min_factor: float = 1e-30


@dataclass(frozen=True)
class ModeForm:
    """One harmonic mode of a weighted quotient."""

    n: int
    m: float
    k: int
    quotient_kind: str
    bc: str

    def __post_init__(self):
        if self.k < 0 or self.n < 1:
            raise ValueError("need k >= 0 and n >= 1")
        if self.quotient_kind not in (GRAD_OVER_GRAD, DELTA_OVER_U):
            raise ValueError(f"unknown quotient kind {self.quotient_kind!r}")
        if self.bc not in BCS:
            raise ValueError(f"unknown bc {self.bc!r}")

    @property
    def c_k(self) -> float:
        return float(self.k * (self.n + self.k - 2))

    @property
    def exponents(self) -> tuple[float, float, float]:
        """(e2, e1, e0) of the f'', f', f weights."""
        n, m = self.n, self.m
        return (n - 2 * m - 1, n - 2 * m - 3, n - 2 * m - 5)

    @property
    def coeff_fp(self) -> float:
        return (self.n - 1) * (2 * self.m + 1) + 2 * self.c_k

    @property
    def coeff_f(self) -> float:
        return self.c_k * (self.c_k + (self.n - 4 - 2 * self.m) * (2 * self.m + 2))

    def check_integrable(self) -> None:
        e0 = self.exponents[2]
        needs_mass = self.quotient_kind == DELTA_OVER_U or self.c_k > 0
        if needs_mass and 2 * self.k + e0 <= -1:
            raise NonIntegrableModeError(
                f"mode k={self.k}: r^{e0:g} f^2 with f = O(r^{self.k}) is not "
                "integrable at the origin"
            )


@dataclass(frozen=True)
class Discretization:
    """Mesh, derivative stencils, and quadrature weights on [r_min, R].

    ``Dr1``/``Dr2`` differentiate nodal values of f with respect to r;
    ``Dt1``/``Dt2`` act in the log coordinate.  Matrices returned by the
    assembly routines are expressed in the exponent-weighted basis
    f(r_j) = r_j^s g_j with ``s = basis_exponent(mode)``.
    """

    mesh: LogMesh
    Dt1: np.ndarray
    Dt2: np.ndarray
    wt: np.ndarray

    @classmethod
    def build(cls, R: float, n_nodes: int = 400,
              r_min_factor: float = 1e-30) -> "Discretization":
        mesh = LogMesh.build(R, r_min_factor * R, n_nodes)
        Dt1, Dt2 = uniform_derivative_matrices(mesh.t)
        wt = gregory_weights(n_nodes, mesh.h)
        return cls(mesh=mesh, Dt1=Dt1, Dt2=Dt2, wt=wt)

    @property
    def Dr1(self) -> np.ndarray:
        return (1.0 / self.mesh.r)[:, None] * self.Dt1

    @property
    def Dr2(self) -> np.ndarray:
        return (1.0 / self.mesh.r ** 2)[:, None] * (self.Dt2 - self.Dt1)

    def quad_weights(self) -> np.ndarray:
        return self.wt * self.mesh.r

    def basis_exponent(self, mode: ModeForm) -> float:
        return -(mode.exponents[2] + 1.0) / 2.0

    # L1 g and L2 g give f' = r^(s-1) L1 g and f'' = r^(s-2) L2 g
    def _ops(self, s: float) -> tuple[np.ndarray, np.ndarray]:
        n = len(self.mesh.t)
        L1 = s * np.eye(n) + self.Dt1
        L2 = s * (s - 1.0) * np.eye(n) + (2.0 * s - 1.0) * self.Dt1 + self.Dt2
        return L1, L2


def assemble_numerator(mode: ModeForm, disc: Discretization) -> np.ndarray:
    """Symmetric PSD matrix of the mode numerator in the weighted basis.

    The boundary term (n-1) R^(n-2m-2) f'(R)^2 is included for bc 'h2' and
    'h2_h10'; under 'h20' it vanishes on the admissible space and is left
    out of the matrix.
    """
    mode.check_integrable()
    e2, e1, e0 = mode.exponents
    s = disc.basis_exponent(mode)
    R = disc.mesh.R
    L1, L2 = disc._ops(s)
    w = disc.wt * R ** (e0 + 2 * s + 1)
    sw = np.sqrt(w)
    F2 = sw[:, None] * L2
    F1 = sw[:, None] * L1
    A = F2.T @ F2 + mode.coeff_fp * (F1.T @ F1) + mode.coeff_f * np.diag(w)
    if mode.bc in ("h2", "h2_h10"):
        brow = R ** (s - 1.0) * L1[-1]
        A = A + (mode.n - 1) * R ** (e1 + 1.0) * np.outer(brow, brow)
    return 0.5 * (A + A.T)


def assemble_denominator(mode: ModeForm, disc: Discretization) -> np.ndarray:
    """Symmetric PSD matrix of the mode denominator in the weighted basis."""
    mode.check_integrable()
    e2, e1, e0 = mode.exponents
    s = disc.basis_exponent(mode)
    w = disc.wt * disc.mesh.R ** (e0 + 2 * s + 1)
    if mode.quotient_kind == DELTA_OVER_U:
        return np.diag(w)
    L1, _ = disc._ops(s)
    F1 = np.sqrt(w)[:, None] * L1
    B = F1.T @ F1 + mode.c_k * np.diag(w)
    return 0.5 * (B + B.T)


def _smallest_pencil(A: np.ndarray, B: np.ndarray,
                     jitter: float = 1e-12) -> tuple[float, np.ndarray]:
    d = np.diag(B).copy()
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise IndefiniteMassError("denominator diagonal not positive")
    S = 1.0 / np.sqrt(d)
    At = S[:, None] * A * S[None, :]
    Bt = S[:, None] * B * S[None, :]
    At = 0.5 * (At + At.T)
    Bt = 0.5 * (Bt + Bt.T)
    try:
        L = cholesky(Bt + jitter * np.eye(len(Bt)), lower=True)
    except np.linalg.LinAlgError as exc:
        raise IndefiniteMassError(f"mass matrix not positive definite: {exc}")
    C = solve_triangular(L, At, lower=True)
    C = solve_triangular(L, C.T, lower=True)
    C = 0.5 * (C + C.T)
    vals, vecs = eigh(C, subset_by_index=[0, 0])
    y = solve_triangular(L, vecs[:, 0], lower=True, trans="T")
    return float(vals[0]), S * y


def _eliminate_last(A: np.ndarray, B: np.ndarray,
                    row: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Impose row . x = 0 by eliminating the final unknown."""
    v = -row[:-1] / row[-1]
    A2 = A[:-1, :-1] + np.outer(A[:-1, -1], v) + np.outer(v, A[-1, :-1]) \
        + A[-1, -1] * np.outer(v, v)
    B2 = B[:-1, :-1] + np.outer(B[:-1, -1], v) + np.outer(v, B[-1, :-1]) \
        + B[-1, -1] * np.outer(v, v)
    return A2, B2, v


@dataclass(frozen=True)
class ModeMinimum:
    k: int
    value: Optional[float]
    excluded: bool
    reason: str = ""


@dataclass(frozen=True)
class MinRayleighResult:
    value: float
    k_star: int
    grid_r: np.ndarray
    eigenprofile: np.ndarray
    per_k: tuple[ModeMinimum, ...]
    refinements: tuple[tuple[int, float], ...]
    richardson: float


def _mode_minimum(mode: ModeForm, disc: Discretization) -> tuple[float, np.ndarray]:
    """Smallest quotient of one mode; returns (value, f-profile on the mesh)."""
    N = len(disc.mesh.r)
    r = disc.mesh.r
    R = disc.mesh.R
    if mode.quotient_kind == GRAD_OVER_GRAD and mode.k == 0:
        # shift-invariant quotient: minimize over w = f'
        e2, e1, _ = mode.exponents
        s = -(e1 + 1.0) / 2.0
        L1, _ = disc._ops(s)
        w = disc.wt  # R^(e1+2s+1) = R^0
        F = np.sqrt(w)[:, None] * L1
        A = F.T @ F + mode.coeff_fp * np.diag(w)
        B = np.diag(w)
        if mode.bc in ("h2", "h2_h10"):
            bvec = np.zeros(N)
            bvec[-1] = 1.0
            A = A + (mode.n - 1) * np.outer(bvec, bvec)
        keep = np.ones(N, bool)
        if mode.bc == "h20":
            keep[-1] = False
        lam, v = _smallest_pencil(A[np.ix_(keep, keep)], B[np.ix_(keep, keep)])
        wfull = np.zeros(N)
        wfull[keep] = v
        wr = r ** s * wfull
        # integrate w back to f with f(R) = 0 (gauge); trapezoid on the mesh
        f = np.concatenate([[0.0], np.cumsum(0.5 * (wr[1:] + wr[:-1]) * np.diff(r))])
        f -= f[-1]
        return lam, f / (np.max(np.abs(f)) or 1.0)
    A = assemble_numerator(mode, disc)
    B = assemble_denominator(mode, disc)
    s = disc.basis_exponent(mode)
    keep = np.ones(N, bool)
    if mode.k >= 1:
        keep[0] = False
        keep[-1] = False
    elif mode.bc in ("h2_h10", "h20"):
        keep[-1] = False
    Ak = A[np.ix_(keep, keep)]
    Bk = B[np.ix_(keep, keep)]
    if mode.bc == "h20":
        L1, _ = disc._ops(s)
        row = L1[-1][keep]
        Ak, Bk, v_elim = _eliminate_last(Ak, Bk, row)
        lam, v = _smallest_pencil(Ak, Bk)
        v = np.concatenate([v, [v_elim @ v]])
    else:
        lam, v = _smallest_pencil(Ak, Bk)
    g = np.zeros(N)
    g[keep] = v
    f = r ** s * g
    return lam, f / (np.max(np.abs(f)) or 1.0)


def min_rayleigh(n: int, m: float, quotient_kind: str, bc: str,
                 k_max: int = 8, grid: GridParams = GridParams(),
                 R: float = 1.0) -> MinRayleighResult:
    """Minimize the mode quotients over k <= k_max, with one grid refinement.

    The coarse grid uses ``grid.n_nodes`` nodes and the fine grid twice as
    many; the reported value is the fine one and ``richardson`` its
    4th-order extrapolation.  The per-mode table records exclusions
    (non-integrable modes are skipped, not errors).
    """
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    results = []
    for n_nodes in (grid.n_nodes, 2 * grid.n_nodes):
        disc = Discretization.build(R, n_nodes, grid.r_min_factor)
        per_k = []
        best = None
        for k in range(k_max + 1):
            mode = ModeForm(n=n, m=m, k=k, quotient_kind=quotient_kind, bc=bc)
            try:
                mode.check_integrable()
            except NonIntegrableModeError as exc:
                per_k.append(ModeMinimum(k=k, value=None, excluded=True,
                                         reason=str(exc)))
                continue
            lam, prof = _mode_minimum(mode, disc)
            per_k.append(ModeMinimum(k=k, value=lam, excluded=False))
            if best is None or lam < best[0]:
                best = (lam, k, prof, disc.mesh.r)
        if best is None:
            raise NonIntegrableModeError(
                "every mode up to k_max is excluded by integrability"
            )
        results.append((n_nodes, best, per_k))
    (n1, best1, _), (n2, best2, per_k2) = results
    v1, v2 = best1[0], best2[0]
    richardson = v2 + (v2 - v1) / 15.0
    return MinRayleighResult(
        value=v2, k_star=best2[1], grid_r=best2[3], eigenprofile=best2[2],
        per_k=tuple(per_k2),
        refinements=((n1, v1), (n2, v2)),
        richardson=richardson,
    )


@dataclass(frozen=True)
class EqualInfimaReport:
    values: dict
    ordered: bool
    agree: bool
    rel_spread: float


def check_equal_infima(n: int, m: float, quotient_kind: str,
                       k_max: int = 8, grid: GridParams = GridParams(),
                       R: float = 1.0, rel_tol: float = 0.04) -> EqualInfimaReport:
    """Compare the quotient infimum across boundary-condition modes.

    For the gradient quotient all three bc modes are compared; for the mass
    quotient only 'h2_h10' and 'h20' (its unconstrained infimum is the
    degenerate zero of constants).  The report asserts the monotone chain
    value(h2) <= value(h2_h10) <= value(h20) up to discretization noise and
    flags agreement within ``rel_tol``.
    """
    bcs = BCS if quotient_kind == GRAD_OVER_GRAD else ("h2_h10", "h20")
    values = {}
    for bc in bcs:
        values[bc] = min_rayleigh(n, m, quotient_kind, bc, k_max=k_max,
                                  grid=grid, R=R).value
    seq = [values[bc] for bc in bcs]
    scale = max(abs(v) for v in seq) or 1.0
    ordered = all(seq[i] <= seq[i + 1] + 1e-6 * scale for i in range(len(seq) - 1))
    spread = (max(seq) - min(seq)) / scale
    return EqualInfimaReport(values=values, ordered=ordered,
                             agree=spread <= rel_tol, rel_spread=spread)


@dataclass(frozen=True)
class ConditionReport:
    """Pointwise and boundary hypotheses of the second-order inequality.

    ``min_value``/``argmin_r`` locate the minimum of
    W - 2V/r^2 + 2V'/r - V'' on a log-spaced grid; ``boundary_value`` is
    (n - 1 + R phi'(R)/phi(R)) V(R) with the ratio taken from the shot
    solution of the pair (V, W) at multiplier 1.
    """

    min_value: float
    argmin_r: float
    volume_ok: bool
    boundary_value: Optional[float]
    boundary_ok: Optional[bool]
    theta: Optional[float]
    note: str = ""


def check_hr_conditions(V: RadialPotential, W: RadialPotential, n: int,
                        R: float, n_samples: int = 600,
                        r_min_factor: float = 1e-8) -> ConditionReport:
    r = np.geomspace(r_min_factor * R, R, n_samples)
    expr = W.value(r) - 2.0 * V.value(r) / r ** 2 + 2.0 * V.deriv(r) / r \
        - V.deriv2(r)
    i = int(np.argmin(expr))
    min_value = float(expr[i])
    theta_val = None
    boundary_value = None
    boundary_ok = None
    note = ""
    try:
        theta_val = ode_theta(OdeProblem(n, V, W, 1.0, R))
        VR = float(V.value(R))
        boundary_value = (n - 1.0 + R * theta_val / VR) * VR
        boundary_ok = boundary_value >= -1e-12 * max(1.0, abs(boundary_value))
    except ArithmeticError as exc:
        note = f"boundary ratio unavailable: {exc}"
    return ConditionReport(
        min_value=min_value, argmin_r=float(r[i]),
        volume_ok=min_value >= -1e-12 * max(1.0, abs(min_value)),
        boundary_value=boundary_value, boundary_ok=boundary_ok,
        theta=theta_val, note=note,
    )
