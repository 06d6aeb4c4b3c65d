import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.integrate import dblquad

from asymcharge.geometry import NullDirection, TimeVector, minkowski_dot
from asymcharge.harmonics import real_ylm
from asymcharge.quadrature import (
    HomogeneityError,
    LineQuadrature,
    NonConvergenceError,
    SubtractionError,
    build_sphere_grid,
    extract_limit,
    focused_sphere_grid,
    integrate_finite_interval,
    integrate_null_directions,
    integrate_s_line,
    integrate_singular_angular,
    inverse_null_dot,
)


def test_grid_normalisation_and_orthogonality():
    g = build_sphere_grid(16)
    assert_allclose(g.weights.sum(), 4 * np.pi, rtol=0, atol=1e-12)
    assert abs(np.sum(g.weights * real_ylm(2, 0, g.nodes))) < 1e-12
    assert_allclose(np.sum(g.weights * g.nodes[:, 2] ** 2), 4 * np.pi / 3, rtol=1e-13)


@pytest.mark.parametrize("order", [8, 16, 24])
def test_grid_exact_on_harmonic_products(order):
    g = build_sphere_grid(order)
    L = order // 2
    for (l1, m1), (l2, m2) in [((L, 1), (L, 1)), ((L, -L), (L, -L)), ((L - 1, 0), (L, 0))]:
        val = np.sum(g.weights * real_ylm(l1, m1, g.nodes) * real_ylm(l2, m2, g.nodes))
        assert_allclose(val, float((l1, m1) == (l2, m2)), atol=1e-12)


def test_grid_matches_scipy_oracle():
    # smooth non-polynomial integrand; oracle from scipy's adaptive dblquad
    f = lambda x, y, z: np.exp(0.7 * x - 0.3 * z) * (1 + y**2)
    oracle, _ = dblquad(lambda th, ph: f(np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)) * np.sin(th),
                        0, 2 * np.pi, 0, np.pi, epsabs=1e-13, epsrel=1e-13)
    g = build_sphere_grid(32)
    n = g.nodes
    assert_allclose(np.sum(g.weights * f(n[:, 0], n[:, 1], n[:, 2])), oracle, rtol=1e-12)


def test_focused_grid_integrates_peaked_kernel():
    # int dOmega / (a - b cos)^2 = 4 pi / (a^2 - b^2) for a peaked direction
    rho = 30.0
    a, b = np.sqrt(1 + rho**2), rho
    axis = np.array([0.0, 0.6, 0.8])
    g = focused_sphere_grid(axis, 1 / rho, 24)
    val = np.sum(g.weights / (a - b * g.nodes @ axis) ** 2)
    assert_allclose(val, 4 * np.pi, rtol=1e-10)


def test_null_integral_closed_forms(grid48):
    for rap, d in ((0.0, [0, 0, 1]), (0.8, [1, 2, -1])):
        tp = TimeVector.boosted(rap, d).components
        val = integrate_null_directions(lambda l: 1.0 / minkowski_dot(tp, l) ** 2, grid48)
        assert_allclose(val, 4 * np.pi, rtol=1e-10)
    f = lambda l: 1.0 / l[..., 0] ** 2
    assert_allclose(integrate_null_directions(f, build_sphere_grid(8)), 4 * np.pi, rtol=1e-14)
    boosted = integrate_null_directions(f, grid48, TimeVector.boosted(0.5, [0, 0, 1]))
    assert abs(boosted - 4 * np.pi) < 1e-8


def test_null_integral_rejects_wrong_homogeneity(grid24):
    with pytest.raises(HomogeneityError):
        integrate_null_directions(lambda l: 1.0 / l[..., 0], grid24)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 1.2), st.floats(-1, 1), st.floats(-1, 1))
def test_null_integral_t_independence(rap, a, b):
    d = np.array([a, b, 1.0])
    g = build_sphere_grid(40)
    w = TimeVector.boosted(0.3, [0, 1, 0]).components
    f = lambda l: (1.0 + 0.3 * l[..., 1] * l[..., 3] / l[..., 0] ** 2) / minkowski_dot(w, l) ** 2
    base = integrate_null_directions(f, g)
    assert_allclose(integrate_null_directions(f, g, TimeVector.boosted(rap, d)), base, rtol=1e-9)


@pytest.mark.parametrize("scheme", ["de", "composite"])
def test_s_line_known_values(scheme):
    q = LineQuadrature(scheme=scheme)
    assert_allclose(integrate_s_line(lambda s: -0.5 / np.cosh(s) ** 2, q), -1.0, rtol=1e-10)
    assert_allclose(integrate_s_line(lambda s: np.exp(-s * s), q), np.sqrt(np.pi), rtol=1e-10)


def test_s_line_algebraic_tail():
    assert_allclose(integrate_s_line(lambda s: 1 / (1 + s * s)), np.pi, rtol=1e-9)
    q = LineQuadrature.for_falloff(1.0, tol=1e-6)
    assert q.s_max >= 2e6
    assert_allclose(integrate_s_line(lambda s: 1 / (1 + s * s), q), np.pi, rtol=1e-5)
    with pytest.raises(ValueError):
        LineQuadrature.for_falloff(0.0)


def test_s_line_nonconvergence():
    q = LineQuadrature(scheme="composite", max_levels=3, s_max=1e4)
    with pytest.raises(NonConvergenceError):
        integrate_s_line(lambda s: np.cos(40 * s) / (1 + s * s) ** 0.3, q)
    with pytest.raises(NonConvergenceError):
        integrate_s_line(lambda s: np.cos(40 * s) / (1 + s * s) ** 0.3, LineQuadrature(max_levels=3))


def test_finite_interval():
    assert_allclose(integrate_finite_interval(np.abs, -1.0, 2.0, breakpoints=[0.0]), 2.5, rtol=1e-14)


def test_extract_limit_examples():
    est = extract_limit(lambda R: 7 + 3 / R, [10, 20, 40])
    assert_allclose(est.value, 7.0, rtol=1e-14)
    est = extract_limit(lambda R: 2 + 1 / R + 5 / R**2, [10, 20, 40, 80])
    assert abs(est.value - 2.0) < 1e-10
    est = extract_limit(lambda R: 3.25, [1, 2, 4])
    assert est.value == 3.25 and est.error_estimate == 0.0


def test_extract_limit_warns_on_divergence():
    with pytest.warns(RuntimeWarning):
        extract_limit(lambda R: R**2, [1.0, 1.1, 1.2, 1.3, 1.4])
    with pytest.raises(ValueError):
        extract_limit(lambda R: R, [2, 1])


def test_singular_angular_closed_form(grid24):
    # int (n'.z - 1) / (l.l') dOmega' at l = (1, z): (cos - 1)/(1 - cos) = -1 everywhere
    l = NullDirection([0, 0, 1])
    dens = lambda lp: lp[..., 3] / lp[..., 0]
    val = integrate_singular_angular(inverse_null_dot, lambda lp: dens(lp) - 1.0, l, grid24)
    assert_allclose(val, -4 * np.pi, rtol=1e-12)
    assert integrate_singular_angular(inverse_null_dot, lambda lp: 0 * lp[..., 0], l, grid24) == 0.0
    with pytest.raises(SubtractionError):
        integrate_singular_angular(inverse_null_dot, dens, l, grid24)


def test_singular_angular_linearity(grid24, rng):
    l = NullDirection(rng.normal(size=3))
    d1 = lambda lp: lp[..., 1] * lp[..., 2] - l.nhat[0] * l.nhat[1]
    d2 = lambda lp: lp[..., 3] ** 2 - l.nhat[2] ** 2
    a, b = 1.7, -0.4
    lhs = integrate_singular_angular(inverse_null_dot, lambda lp: a * d1(lp) + b * d2(lp), l, grid24)
    rhs = a * integrate_singular_angular(inverse_null_dot, d1, l, grid24) + \
        b * integrate_singular_angular(inverse_null_dot, d2, l, grid24)
    assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-12)
