import math

import numpy as np
import pytest
from scipy import integrate as sci_integrate
from scipy import special as sci_special

from gr24.errors import InvalidParameter, QuadratureFailure
from gr24.quadrature import (QuadratureSpec, bessel_tail_bound, gauss_legendre_nodes,
                             integrate_1d, integrate_2d, integrate_semi_infinite_1d,
                             integrate_semi_infinite_2d)

SQUARE = (-1.0, 1.0, -1.0, 1.0)
W_LOG_CLOSED = 1 - math.pi**2 / 16 - math.log(2) / 2


def test_gauss_legendre_examples():
    x, w = gauss_legendre_nodes(1)
    assert x[0] == 0.0 and w[0] == pytest.approx(2.0)
    x, w = gauss_legendre_nodes(2)
    assert np.allclose(x, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
    assert np.allclose(w, [1, 1], atol=1e-15)
    with pytest.raises(InvalidParameter):
        gauss_legendre_nodes(0)


@pytest.mark.parametrize("n", [2, 5, 12, 24, 64, 128])
def test_gauss_legendre_matches_reference(n):
    x, w = gauss_legendre_nodes(n)
    xr, wr = np.polynomial.legendre.leggauss(n)
    assert np.allclose(x, xr, atol=1e-14)
    assert np.allclose(w, wr, atol=1e-14)
    assert math.fsum(w) == pytest.approx(2.0, abs=1e-14)


@pytest.mark.parametrize("n", [3, 8, 24])
def test_tensor_rule_polynomial_exactness(n):
    x, w = gauss_legendre_nodes(n)
    W = np.outer(w, w)
    X, Y = np.meshgrid(x, x, indexing="ij")
    for p in range(2 * n):
        for q in (0, p // 2, 2 * n - 1):
            exact = (1 - (-1) ** (p + 1)) / (p + 1) * (1 - (-1) ** (q + 1)) / (q + 1)
            assert np.sum(W * X**p * Y**q) == pytest.approx(exact, abs=1e-12)


def test_integrate_2d_examples():
    ones = integrate_2d(lambda X, Y: np.ones_like(X), SQUARE)
    assert ones.value == pytest.approx(4.0, abs=1e-14)
    riesz = integrate_2d(lambda X, Y: 1.0 / (1.0 - X * Y), SQUARE, singular_corner=(1.0, 1.0))
    assert riesz.value == pytest.approx(math.pi**2 / 2, abs=1e-6)
    log = integrate_2d(lambda X, Y: np.log(1.0 - X * Y), SQUARE, singular_corner=(1.0, 1.0))
    assert log.value == pytest.approx(-8 * W_LOG_CLOSED, abs=1e-6)


def test_both_corners_flagged_is_tighter():
    f = lambda X, Y: 1.0 / (1.0 - X * Y)
    res = integrate_2d(f, SQUARE, singular_corner=[(1.0, 1.0), (-1.0, -1.0)])
    assert res.value == pytest.approx(math.pi**2 / 2, abs=1e-12)
    assert res.err_estimate <= 1e-9


def _err_at_depth(depth):
    spec = QuadratureSpec(max_depth=depth)
    try:
        return integrate_2d(lambda X, Y: 1.0 / (1.0 - X * Y), SQUARE, spec,
                            singular_corner=[(1.0, 1.0), (-1.0, -1.0)]).err_estimate
    except QuadratureFailure as exc:
        return exc.result.err_estimate


def test_refinement_monotonicity():
    depths = [2, 4, 8, 12, 16, 20, 24, 28]
    errs = [_err_at_depth(d) for d in depths]
    for a, b in zip(errs, errs[1:]):
        assert b <= a
    assert errs[-1] < 1e-12


def test_insufficient_depth_raises_with_partial_result():
    with pytest.raises(QuadratureFailure) as info:
        integrate_2d(lambda X, Y: 1.0 / (1.0 - X * Y), SQUARE, QuadratureSpec(max_depth=3),
                     singular_corner=(1.0, 1.0))
    assert math.isfinite(info.value.result.value)


def test_symmetric_half_domains():
    f = lambda X, Y: (1.0 - X * Y) ** -0.75
    left = integrate_2d(f, (-1.0, 0.0, -1.0, 1.0), singular_corner=(-1.0, -1.0))
    right = integrate_2d(f, (0.0, 1.0, -1.0, 1.0), singular_corner=(1.0, 1.0))
    assert left.value == pytest.approx(right.value, abs=1e-10)
    whole = integrate_2d(f, SQUARE, singular_corner=[(1.0, 1.0), (-1.0, -1.0)])
    assert whole.value == pytest.approx(left.value + right.value, abs=1e-9)


def test_summation_is_order_independent():
    f = lambda X, Y: np.cos(3 * X) * np.exp(Y)
    a = integrate_2d(f, SQUARE).value
    b = integrate_2d(lambda X, Y: f(X[::-1], Y[::-1]), SQUARE).value
    assert abs(a - b) <= 1e-13
    exact = (2 * math.sin(3) / 3) * (math.e - 1 / math.e)
    assert a == pytest.approx(exact, abs=1e-12)


def test_integrate_1d():
    res = integrate_1d(np.sqrt, 0.0, 1.0)
    assert res.value == pytest.approx(2 / 3, abs=1e-10)
    assert integrate_1d(np.cos, 0.0, math.pi / 2).value == pytest.approx(1.0, abs=1e-14)


def test_semi_infinite_1d_bessel():
    # integral_0^inf J1(x)^2 / x dx = 1/2; we add no tail estimate and bound it by (1/pi) R^-1
    f = lambda x: sci_special.j1(x) ** 2 / np.where(x > 0, x, 1.0)
    res = integrate_semi_infinite_1d(f, QuadratureSpec(abs_tol=1e-6, rel_tol=1e-6),
                                     tail_bound=lambda R: 1.0 / (math.pi * R),
                                     max_radius=1e7)
    assert res.value == pytest.approx(0.5, abs=2e-6)


def test_semi_infinite_2d_against_product():
    def a(x):
        safe = np.where(x > 0, x, 1.0)
        return np.where(x > 0, sci_special.j1(safe) ** 2 / safe * np.exp(-x), 0.0)

    ref_1d = sci_integrate.quad(lambda x: sci_special.j1(x) ** 2 / x * math.exp(-x), 0, np.inf,
                                epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    w = lambda X, Y: np.ones(np.broadcast(X, Y).shape)
    # exp(-x-y) (x^2+y^2)^{3/2} <= max_r r^3 e^{-r} = 27 e^{-3} < 1.4
    env = dict(tail_exponent=1.5, prefactor=1.4)
    res = integrate_semi_infinite_2d(None, separable=(a, w), **env)
    assert res.value == pytest.approx(ref_1d**2, rel=1e-8)
    full = integrate_semi_infinite_2d(lambda X, Y: a(X) * a(Y), **env)
    assert full.value == pytest.approx(res.value, rel=1e-12)
    parts = [integrate_semi_infinite_2d(None, separable=(a, w), parts=(p,), **env).value
             for p in ("inner", "strip", "far")]
    assert math.fsum(parts) == pytest.approx(res.value, rel=1e-12)


def test_bessel_tail_bound_decreasing():
    vals = [bessel_tail_bound(R, 1.0) for R in (1, 10, 100)]
    assert vals[0] > vals[1] > vals[2] > 0
    assert bessel_tail_bound(10.0, 0.0) == pytest.approx(2 / (10 * math.pi))


def test_spec_validation():
    with pytest.raises(InvalidParameter):
        QuadratureSpec(base_rule_order=3)
    with pytest.raises(InvalidParameter):
        QuadratureSpec(max_depth=0)
    with pytest.raises(InvalidParameter):
        QuadratureSpec(abs_tol=0.0)
    assert QuadratureSpec().with_tol(abs_tol=1e-3).abs_tol == 1e-3
