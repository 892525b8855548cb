import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from derivsamp.bunched import (
    BunchedConfig,
    bunched_bounds,
    bunched_constant,
    combined_asymptote,
    combined_density_check,
    combined_density_root,
    divided_diff_frame_sum,
    divided_differences,
    fusion_frame_sum,
    h_tilde,
    interp_error_check,
    lagrange_eval,
    newton_eval,
    tau_limit_check,
    verify_bunched,
)
from derivsamp.errors import BoundViolation
from derivsamp.geometry import BunchedSet, bunched_set, jittered_set, weights_1d
from derivsamp.harness import frame_sum
from derivsamp.kernel import Domain, TestFunction, random_test_function


def test_dd_constant():
    t = divided_differences([0.0, 0.4, 1.3, 2.0], [2.5] * 4)
    np.testing.assert_allclose(t.coefficients, [2.5, 0, 0, 0], atol=1e-15)


def test_dd_quadratic():
    t = divided_differences([0.0, 1.0, 2.0], [0.0, 1.0, 4.0])
    np.testing.assert_allclose(t.coefficients, [0, 1, 1])


def test_dd_coincident():
    with pytest.raises(ValueError):
        divided_differences([0.0, 1.0, 1.0], [1.0, 2.0, 3.0])


def test_newton_equals_lagrange():
    rng = np.random.default_rng(0)
    x = np.sort(rng.uniform(-1, 1, 6))
    y = rng.normal(size=6)
    probes = np.linspace(-1, 1, 100)
    t = divided_differences(x, y)
    np.testing.assert_allclose(t(probes), lagrange_eval(x, y, probes), atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 100_000), n=st.integers(1, 7))
def test_dd_symmetric_and_idempotent(seed, n):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, n)
    if np.min(np.diff(np.sort(x)), initial=1.0) < 1e-3:
        return
    y = rng.normal(size=n)
    top = divided_differences(x, y).coefficients[-1]
    perm = rng.permutation(n)
    assert divided_differences(x[perm], y[perm]).coefficients[-1] == pytest.approx(top, rel=1e-8, abs=1e-8)
    # interpolating the interpolant reproduces it
    t = divided_differences(x, y)
    np.testing.assert_allclose(t(x), y, atol=1e-9)
    again = divided_differences(x, t(x))
    probes = np.linspace(-1, 1, 25)
    np.testing.assert_allclose(again(probes), t(probes), atol=1e-9 * (1 + np.abs(t(probes)).max()))


def test_newton_eval_polynomial_exact():
    x = np.array([0.0, 0.5, 2.0, 3.0])
    p = np.polynomial.Polynomial([1.0, -2.0, 0.5, 0.25])
    t = divided_differences(x, p(x))
    probes = np.linspace(-2, 4, 31)
    np.testing.assert_allclose(newton_eval(x, t.coefficients, probes), p(probes), rtol=1e-12, atol=1e-12)


def test_constants_examples():
    assert bunched_constant(0, 1.0) == pytest.approx(0.5766, abs=5e-5)
    assert bunched_constant(9, 1 / 16) == pytest.approx(3.6099, abs=5e-5)
    for tau in (1.0, 0.5, 1 / 16):
        assert bunched_constant(0, tau) == bunched_constant(0, 1.0)
    for s in (0, 3, 12):
        assert h_tilde(s, 0.5, bunched_constant(s, 0.5)) == pytest.approx(1.0, abs=1e-10)


def test_asymptotic_constant():
    for tau in (1.0, 0.25):
        v = bunched_constant(60, tau) * (1 + tau) * math.e / 61
        assert abs(v - 1) < 0.05


def test_combined_reductions():
    for x in (0.2, 0.5):
        _, m = combined_density_check(3, 0, 0.5, x, 1.0)
        assert m == pytest.approx(float(h_tilde(3, 0.5, x)), rel=1e-12)
        _, m = combined_density_check(0, 3, 1e-9, x, 1.0)
        assert m == pytest.approx(x**4 / 24 * (1 + 4 * x / math.pi), rel=1e-8)


def test_combined_asymptote():
    r = combined_density_root(20, 20, 1.0)
    assert abs(r / combined_asymptote(20, 20, 1.0) - 1) < 0.05
    ok, m = combined_density_check(20, 20, 1.0, 0.99 * r, 1.0)
    assert ok and m < 1


def test_bounds_examples():
    b = bunched_bounds(0, 1.0, 0.3, 1.0)
    q = 0.3 * (1 + 1.2 / math.pi)
    assert b.q == pytest.approx(q)
    assert b.fusion_A == pytest.approx((1 - q) ** 2)
    assert b.fusion_B == pytest.approx((1 + q) ** 2)
    assert b.dd_A == pytest.approx((1 - q) ** 2 / math.e)
    assert not bunched_bounds(0, 1.0, 0.6, 1.0).admissible


def _f(seed=0, W=1.0):
    return random_test_function(Domain.interval(W), 8, 60.0, seed=seed)


def test_sums_zero_function():
    bs = bunched_set(jittered_set(1.0, 0.2, 40.0, seed=1), 2, 0.5, adapt_width=True)
    f0 = TestFunction(Domain.interval(1.0), [[0.0]], [0.0])
    assert fusion_frame_sum(f0, bs) == 0.0
    assert divided_diff_frame_sum(f0, bs) == 0.0


def test_s0_reduces_to_k0():
    c = jittered_set(1.0, 0.3, 40.0, seed=2)
    bs = bunched_set(c, 0, 1.0)
    f = _f(1)
    k0 = frame_sum(f, c.points, weights_1d(c, 0))
    assert divided_diff_frame_sum(f, bs) == pytest.approx(k0, rel=1e-13)
    assert fusion_frame_sum(f, bs) == pytest.approx(k0, rel=1e-13)


def test_fusion_reproduces_polynomials():
    # on one cell, p_n reproduces a polynomial of degree s exactly
    class Poly:
        domain = Domain.interval(1.0)

        def __call__(self, x):
            return 1.0 - 2.0 * np.asarray(x) + 0.5 * np.asarray(x) ** 2

    bs = BunchedSet(jittered_set(1.0, 0.0, 0.5), [[0.2, -0.3]], 1.0)
    a, b = bs.centers.lo, bs.centers.hi
    P = np.polynomial.Polynomial([1.0, -2.0, 0.5])
    exact = ((P * P).integ())(b) - ((P * P).integ())(a)
    assert fusion_frame_sum(Poly(), bs) == pytest.approx(exact, rel=1e-13)


@pytest.mark.parametrize("s,tau", [(1, 1.0), (2, 0.5), (4, 0.25)])
def test_interp_error_bound(s, tau):
    c = jittered_set(0.8, 0.2, 30.0, seed=s)
    bs = bunched_set(c, s, tau, adapt_width=True)
    assert interp_error_check(_f(s), bs)["ok"]


def test_verify_in_bounds():
    rep = verify_bunched(BunchedConfig(s=2, tau=0.5, delta_frac=0.5, n_functions=10, half_width=200.0))
    assert rep.passed


def test_verify_refuses_inadmissible():
    with pytest.raises(BoundViolation):
        verify_bunched(BunchedConfig(s=0, delta=1.0, n_functions=2))
    rep = verify_bunched(BunchedConfig(s=0, delta=1.0, n_functions=2, half_width=100.0, exploratory=True))
    assert rep.passed is None


def test_tau_limit_s0_zero():
    c = jittered_set(1.0, 0.3, 40.0, seed=3)
    rep = tau_limit_check(_f(3), c, 0, [0.25, 0.125, 1e-3])
    assert max(rep.deviations) == pytest.approx(0.0, abs=1e-14)


def test_tau_limit_s2():
    c = jittered_set(1.0, 0.3, 40.0, seed=3)
    taus = [0.25 / 2**i for i in range(8)]
    rep = tau_limit_check(_f(0), c, 2, taus)
    assert rep.monotone
    assert tau_limit_check(_f(0), c, 2, [1e-3]).deviations[0] <= 1e-4


@pytest.mark.parametrize("seed", range(10))
def test_tau_limit_first_order(seed):
    # the deviation is O(tau): it eventually halves with tau, whatever the sign
    c = jittered_set(1.0, 0.3, 40.0, seed=3)
    d = np.array(tau_limit_check(_f(seed), c, 2, [2.0**-i for i in range(9, 13)]).deviations)
    np.testing.assert_allclose(d[1:] / d[:-1], 0.5, atol=0.05)


def test_confluent_fallback_warns():
    c = jittered_set(1.0, 0.3, 20.0, seed=3)
    bs = bunched_set(c, 2, 1e-6, adapt_width=True)
    f = _f(4)
    with pytest.warns(RuntimeWarning):
        v = divided_diff_frame_sum(f, bs)
    ref = frame_sum(f, c.points, weights_1d(c, 2))
    assert v == pytest.approx(ref, rel=1e-4)
