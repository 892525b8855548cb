import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import j1

from derivsamp.errors import CapabilityError
from derivsamp.kernel import (
    Domain,
    TestFunction,
    deriv_norm_squared,
    eval_derivatives_at,
    interval_kernel_deriv,
    interval_kernel_derivs,
    kernel_deriv,
    kernel_eval,
    multi_indices,
    norm_squared,
    random_test_function,
)


def test_interval_values():
    dom = Domain.interval(1.0)
    assert kernel_eval(dom, 0.0) == pytest.approx(1 / math.pi, rel=1e-15)
    assert abs(kernel_eval(dom, math.pi)) < 1e-16
    x = np.array([1e-9, 1e-5, 0.3, 2.0, 50.0])
    np.testing.assert_allclose(kernel_eval(dom, x), np.sin(x) / (np.pi * x), rtol=1e-13)


@pytest.mark.parametrize("m", [0, 1, 2, 5, 10, 20, 40])
def test_even_derivatives_at_zero(m):
    W = 1.3
    ref = (-1) ** m * W ** (2 * m + 1) / (math.pi * (2 * m + 1))
    assert interval_kernel_deriv(W, 2 * m, 0.0) == pytest.approx(ref, rel=1e-12)
    assert interval_kernel_deriv(W, 2 * m + 1, 0.0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("l", [1, 2, 3, 4])
def test_interval_derivatives_finite_difference(l):
    W, h = 1.0, 1e-3
    x = np.linspace(-7.3, 9.1, 41)
    lower = interval_kernel_deriv(W, l - 1, x[:, None] + h * np.array([-2, -1, 1, 2]))
    fd = (lower[:, 0] - 8 * lower[:, 1] + 8 * lower[:, 2] - lower[:, 3]) / (12 * h)
    np.testing.assert_allclose(interval_kernel_deriv(W, l, x), fd, atol=1e-10)


def test_derivs_table_consistent():
    x = np.linspace(-30, 30, 201)
    tab = interval_kernel_derivs(0.7, 12, x)
    for l in range(13):
        np.testing.assert_allclose(tab[l], interval_kernel_deriv(0.7, l, x), rtol=1e-12, atol=1e-15)


def test_box_derivative_finite_difference():
    dom = Domain.box(1.0, 2)
    rng = np.random.default_rng(3)
    x = rng.uniform(-5, 5, size=(20, 2))
    h = 1e-5
    e = np.array([h, 0.0])
    fd = (kernel_eval(dom, x + e) - kernel_eval(dom, x - e)) / (2 * h)
    np.testing.assert_allclose(kernel_deriv(dom, (1, 0), x), fd, atol=1e-6)


def test_box_is_product():
    dom = Domain.box(0.8, 3)
    x = np.array([[0.3, -1.2, 2.5]])
    alpha = (1, 0, 2)
    ref = np.prod([interval_kernel_deriv(0.8, a, x[0, i]) for i, a in enumerate(alpha)])
    assert kernel_deriv(dom, alpha, x)[0] == pytest.approx(ref, rel=1e-14)


def test_ball_kernel_closed_form():
    rho = 1.4
    dom = Domain.ball(rho, 2)
    assert kernel_eval(dom, np.zeros((1, 2)))[0] == pytest.approx(rho**2 / (4 * math.pi), rel=1e-12)
    rng = np.random.default_rng(0)
    x = rng.uniform(-6, 6, size=(15, 2))
    r = np.linalg.norm(x, axis=1)
    np.testing.assert_allclose(kernel_eval(dom, x), rho * j1(rho * r) / (2 * math.pi * r), atol=1e-12)


def test_ball_derivative_finite_difference():
    dom = Domain.ball(1.0, 2)
    x = np.array([[0.7, -1.9], [3.0, 0.4]])
    h = 1e-5
    e = np.array([0.0, h])
    fd = (kernel_eval(dom, x + e) - kernel_eval(dom, x - e)) / (2 * h)
    np.testing.assert_allclose(kernel_deriv(dom, (0, 1), x), fd, atol=1e-7)


def test_ball_higher_dimension_unsupported():
    with pytest.raises(CapabilityError):
        kernel_eval(Domain.ball(1.0, 3), np.zeros((1, 3)))


def test_domain_geometry():
    assert Domain.interval(2.0).m_omega == 2.0
    assert Domain.box(1.0, 4).m_omega == pytest.approx(2.0)
    assert Domain.ball(1.5).m_omega == 1.5
    for dom in (Domain.interval(2.0), Domain.box(1.0, 4), Domain.ball(1.5)):
        assert dom.r == pytest.approx(dom.m_omega)
        assert Domain.parse(dom.describe()) == dom
    np.testing.assert_allclose(Domain.box(0.5, 3).bar_omega, [0.5, 0.5, 0.5])


def test_single_center_norm():
    f = TestFunction(Domain.interval(1.0), [[2.5]], [1.0])
    assert norm_squared(f) == pytest.approx(1 / math.pi, rel=1e-15)


def test_orthogonal_shifts():
    f = TestFunction(Domain.interval(1.0), [[0.0], [math.pi]], [1.0, 1.0])
    assert norm_squared(f) == pytest.approx(2 / math.pi, rel=1e-14)


def test_random_function_determinism_and_psd():
    dom = Domain.box(1.0, 2)
    f = random_test_function(dom, 12, 10.0, seed=4)
    g = random_test_function(dom, 12, 10.0, seed=4)
    np.testing.assert_array_equal(f.centers, g.centers)
    np.testing.assert_array_equal(f.coeffs, g.coeffs)
    assert np.linalg.eigvalsh(f.gram()).min() >= -1e-10


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), W=st.floats(0.3, 3.0))
def test_bernstein(seed, W):
    dom = Domain.interval(W)
    f = random_test_function(dom, 6, 20.0, seed=seed)
    n2 = norm_squared(f)
    for l in range(1, 4):
        assert deriv_norm_squared(f, l) <= W ** (2 * l) * n2 * (1 + 1e-10)


def test_bernstein_box():
    dom = Domain.box(0.9, 2)
    f = random_test_function(dom, 8, 6.0, seed=1)
    n2 = norm_squared(f)
    for alpha in [(1, 0), (0, 2), (1, 1), (2, 1)]:
        assert deriv_norm_squared(f, alpha) <= np.prod(dom.bar_omega ** (2 * np.array(alpha))) * n2 * (1 + 1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), x=st.floats(-30, 30))
def test_reproducing_property(seed, x):
    dom = Domain.interval(1.2)
    f = random_test_function(dom, 6, 20.0, seed=seed)
    # <f, Phi(. - x)> = sum_j c_j Phi(y_j - x) by the Gram identity
    inner = float(kernel_eval(dom, f.centers[:, 0] - x) @ f.coeffs)
    assert inner == pytest.approx(float(f(x)), abs=1e-10)


def test_eval_derivatives_against_finite_differences():
    dom = Domain.interval(1.0)
    f = random_test_function(dom, 8, 15.0, seed=9)
    x = np.linspace(-10, 10, 13)
    vals = eval_derivatives_at(f, x, 3)
    h = 1e-3
    for k in (1, 2, 3):
        lower = [f.derivative((k - 1,), x + s * h) for s in (-2, -1, 1, 2)]
        fd = (lower[0] - 8 * lower[1] + 8 * lower[2] - lower[3]) / (12 * h)
        np.testing.assert_allclose(vals[(k,)], fd, atol=1e-5)


def test_odd_derivatives_vanish_at_center():
    dom = Domain.box(1.0, 2)
    f = TestFunction(dom, [[1.0, -2.0]], [1.0])
    vals = eval_derivatives_at(f, [[1.0, -2.0]], 3)
    assert vals[(0, 0)][0] == pytest.approx(kernel_eval(dom, np.zeros((1, 2)))[0])
    for alpha, v in vals.items():
        if any(a % 2 for a in alpha):
            assert abs(v[0]) < 1e-15


def test_multi_indices():
    idx = multi_indices(2, 2)
    assert idx == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] or sorted(idx) == sorted(
        [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    )
    assert len(multi_indices(3, 3)) == math.comb(6, 3)


def test_scale_covariance_of_norm():
    # f(x) = Phi_W(x - y) scaled: ||Phi_{W/c}(. - c y)||^2 = ||Phi_W||^2 / c
    c = 2.5
    f = TestFunction(Domain.interval(1.0), [[0.3], [4.0]], [1.0, -0.5])
    g = TestFunction(Domain.interval(1.0 / c), [[0.3 * c], [4.0 * c]], [1.0, -0.5])
    assert norm_squared(g) == pytest.approx(norm_squared(f) / c, rel=1e-13)
