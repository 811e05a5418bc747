import numpy as np
import pytest

from hardy_rellich.grids import (
    DivergentIntegralError,
    LogMesh,
    PanelQuadrature,
    fd_weights,
    gregory_weights,
    uniform_derivative_matrices,
)


def test_fd_weights_reproduce_derivatives():
    x = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    w = fd_weights(x, 0.0, 2)
    f = x ** 3
    assert abs(w[1] @ f - 0.0) < 1e-12
    assert abs(w[2] @ f - 0.0) < 1e-12
    g = x ** 2
    assert abs(w[1] @ g - 0.0) < 1e-12
    assert abs(w[2] @ g - 2.0) < 1e-12


def test_stencils_exact_on_cubics():
    t = np.linspace(0.0, 3.0, 41)
    D1, D2 = uniform_derivative_matrices(t)
    f = t ** 3 - 2.0 * t ** 2 + 0.5 * t
    d1 = 3 * t ** 2 - 4 * t + 0.5
    d2 = 6 * t - 4.0
    assert np.max(np.abs(D1 @ f - d1)) < 1e-10
    assert np.max(np.abs(D2 @ f - d2)) < 1e-9


def test_stencil_rows_annihilate_constants_exactly():
    t = np.linspace(0.0, 70.0, 233)
    D1, D2 = uniform_derivative_matrices(t)
    ones = np.ones(len(t))
    assert np.max(np.abs(D1 @ ones)) == 0.0
    assert np.max(np.abs(D2 @ ones)) == 0.0


def test_gregory_exact_on_cubics():
    T = 2.5
    n = 57
    t = np.linspace(0.0, T, n)
    w = gregory_weights(n, t[1] - t[0])
    f = 4.0 * t ** 3 - t ** 2 + 2.0
    exact = T ** 4 - T ** 3 / 3.0 + 2.0 * T
    assert abs(w @ f - exact) < 1e-11


def test_logmesh_quadrature():
    mesh = LogMesh.build(R=2.0, r_min=1e-10, n_nodes=300)
    w = mesh.quad_weights()
    # int_0^2 r^2 dr = 8/3 (inner truncation negligible)
    assert abs(w @ mesh.r ** 2 - 8.0 / 3.0) < 1e-8


def test_panel_quadrature_value_and_error():
    quad = PanelQuadrature.geometric(1.0, 1e-12, 200)
    val, err = quad.integrate(lambda r: r ** -0.5)
    assert abs(val - 2.0) < 1e-9
    assert err < 1e-6
    val2, err2 = quad.integrate(lambda r: np.cos(3.0 * r))
    assert abs(val2 - np.sin(3.0) / 3.0) < 1e-10


def test_panel_quadrature_flags_divergence():
    quad = PanelQuadrature.geometric(1.0, 1e-12, 200)
    with pytest.raises(DivergentIntegralError):
        quad.integrate(lambda r: 1.0 / r, check_divergence=True)
    with pytest.raises(DivergentIntegralError):
        quad.integrate(lambda r: r ** -1.4, check_divergence=True)
    # integrable power passes the same check
    val, _ = quad.integrate(lambda r: r ** -0.9, check_divergence=True)
    assert abs(val - 10.0) < 1e-6
