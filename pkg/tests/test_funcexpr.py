import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transop import funcexpr as fe
from transop import specfun


def test_parse_atoms():
    assert fe.parse("gaussian:2") == fe.Gaussian(2.0)
    assert fe.parse("bump:-1,3") == fe.Bump(-1.0, 3.0)
    assert fe.parse("hermite:4") == fe.Hermite(4)
    assert fe.parse("laguerre:2,0.5") == fe.parse("laguerre_fn:2,0.5")


def test_parse_combinators_round_trip():
    for text in ("shift(gaussian:0.7;1.5)", "scale(bump:-1,2;2)", "sum(gaussian:1|bump:0,1)",
                 "shift(sum(hermite:2|scale(gaussian:1;-0.5));-2)"):
        f = fe.parse(text)
        assert fe.parse(f.text()) == f


def test_evaluation():
    x = np.linspace(-3, 3, 13)
    assert np.allclose(fe.parse("gaussian:2")(x), np.exp(-x * x / 8))
    assert np.allclose(fe.parse("hermite:3")(x), specfun.hermite_fn(3, x))
    s = fe.parse("sum(shift(gaussian:1;1)|scale(bump:-1,1;3))")
    assert np.allclose(s(x), np.exp(-0.5 * (x - 1) ** 2) + 3 * np.where(np.abs(x) < 1, (1 - x * x) ** 3, 0))


@pytest.mark.parametrize("text", ["", "gaussian:1,2", "shift(gaussian:1)", "sum(gaussian:1", "bump:1"])
def test_malformed(text):
    with pytest.raises(fe.MalformedExpressionError):
        fe.parse(text)


def test_unknown_and_range():
    with pytest.raises(fe.UnknownFunctionError):
        fe.parse("sinc:1")
    with pytest.raises(fe.ParameterRangeError):
        fe.parse("gaussian:-1")
    with pytest.raises(fe.ParameterRangeError):
        fe.parse("hermite:1.5")
    with pytest.raises(fe.ParameterRangeError):
        fe.parse("hyperbolic_bump:2,1")


@pytest.mark.parametrize("text,order", [("gaussian:0.8", 3), ("hermite:5", 4), ("bump:-1,2", 2),
                                        ("shift(scale(gaussian:1.3;2);0.5)", 2), ("laguerre_fn:2,0.5", 2)])
def test_derivatives_against_finite_differences(text, order):
    f = fe.parse(text)
    x = np.linspace(0.2, 2.7, 11)
    h = 1e-3
    for k in range(1, order + 1):
        fd = (f.deriv(x + h, k - 1) - f.deriv(x - h, k - 1)) / (2 * h)
        assert np.allclose(f.deriv(x, k), fd, atol=1e-5 * max(1.0, np.max(np.abs(fd))))


def test_derivative_beyond_order():
    with pytest.raises(fe.FuncExprError):
        fe.Bump().deriv(np.array([0.0]), 3)


@given(st.floats(-5, 5), st.floats(0.1, 5), st.floats(-4, 4))
@settings(max_examples=60, deadline=None)
def test_shift_and_scale_properties(s, c, x):
    g = fe.Gaussian(1.0)
    assert fe.Shifted(g, s)(x) == pytest.approx(float(g(x - s)))
    assert fe.Scaled(g, c)(x) == pytest.approx(c * float(g(x)))
    lo, hi = fe.Shifted(fe.Bump(-1, 1), s).support
    assert (lo, hi) == pytest.approx((s - 1, s + 1))


def test_hyperbolic_bump_even_at_origin():
    f = fe.HyperbolicBump(0.0, 1.5)
    x = np.linspace(0, 1.4, 8)
    assert f(np.array([0.0]))[0] == pytest.approx(1.0)
    assert np.all(f(x) >= 0) and f(np.array([1.6]))[0] == 0.0


def test_gegenbauer_function():
    th = np.linspace(0, math.pi, 7)
    assert np.allclose(fe.Gegenbauer(3, 1.0)(th), specfun.gegenbauer_poly(3, 1.0, np.cos(th)))
