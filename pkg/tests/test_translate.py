import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transop import funcexpr as fe
from transop import specfun
from transop import translate as tr
from transop.numerics import GridFunction


def _mehler_series(x, y, t, N=80):
    # eigen-expansion of the Hermite heat kernel, independent of the closed form
    hx, hy = specfun.hermite_fn_all(N, np.atleast_1d(x)), specfun.hermite_fn_all(N, np.atleast_1d(y))
    m = np.exp(-(2 * np.arange(N + 1) + 1) * t)
    return np.sum(m[:, None] * hx * hy, axis=0)


def test_kernel_closed_forms():
    assert tr.kernel_eval(tr.poisson_halfplane(), 0.0, 0.0, 1.0) == pytest.approx(1 / math.pi)
    gw = tr.gauss_weierstrass(0.5)
    x = np.linspace(-2, 2, 9)
    ref = np.exp(-(x - 0.3) ** 2 / (4 * 0.25 * 0.7)) / math.sqrt(4 * math.pi * 0.25 * 0.7)
    assert np.allclose(tr.kernel_eval(gw, x, 0.3, 0.7), ref, rtol=1e-14)


@pytest.mark.parametrize("t", [0.2, 0.7, 2.0])
def test_mehler_closed_form_matches_series(t):
    x = np.linspace(-3, 3, 13)
    assert np.allclose(tr.kernel_eval(tr.hermite_heat(), x, 0.4, t), _mehler_series(x, 0.4, t), atol=1e-12)


def test_mehler_in_two_dimensions_factorises():
    spec = tr.hermite_heat(2)
    x, y, t = np.array([0.3, -1.1]), np.array([0.9, 0.2]), 0.4
    ref = _mehler_series(x[0], y[0], t)[0] * _mehler_series(x[1], y[1], t)[0]
    assert tr.kernel_eval(spec, x, y, t) == pytest.approx(ref, rel=1e-12)


@given(st.floats(-4, 4), st.floats(-4, 4), st.floats(0.01, 5))
@settings(max_examples=80, deadline=None)
def test_mehler_exponent_forms_agree(x, y, t):
    diff, prod = tr.mehler_exponent_forms(np.array([x]), np.array([y]), t)
    assert diff == pytest.approx(prod, rel=1e-9, abs=1e-9)


# t >= 0.05 keeps exp(-|x-y|^2/4t) above the double underflow threshold
@given(st.floats(-4, 4), st.floats(-4, 4), st.floats(0.05, 5))
@settings(max_examples=80, deadline=None)
def test_kernels_symmetric_and_positive(x, y, t):
    for spec in (tr.hermite_heat(), tr.gauss_weierstrass(1.0), tr.poisson_halfplane()):
        a, b = tr.kernel_eval(spec, x, y, t), tr.kernel_eval(spec, y, x, t)
        assert a > 0
        assert a == pytest.approx(b, rel=1e-12)


def test_laguerre_kernel_matches_series():
    a, t = 0.5, 0.3
    spec = tr.laguerre_heat(a)
    x = np.linspace(0.1, 3, 9)
    phi_x = np.array([specfun.laguerre_fn(k, a, x) for k in range(60)])
    phi_y = np.array([specfun.laguerre_fn(k, a, np.array([1.2]))[0] for k in range(60)])
    ref = np.exp(-(2 * np.arange(60) + a + 1) * t) @ (phi_x * phi_y[:, None])
    assert np.allclose(tr.kernel_eval(spec, x, 1.2, t), ref, atol=1e-12)


def test_jacobi_product_rule_matches_kernel_route():
    spec = tr.jacobi_hyperbolic(1.0, 0.0)
    f = fe.HyperbolicBump(0.0, 1.5)
    x = np.linspace(0.05, 2.0, 9)
    a = tr.evaluate(spec, f, 0.6, x)
    b = tr.evaluate(spec, f, 0.6, x, method="kernel")
    assert np.max(np.abs(a - b)) < 1e-5


def test_gegenbauer_kernel_matches_series():
    spec = tr.gegenbauer_poisson(1.0)
    th = np.linspace(0, math.pi, 13)
    # the kernel rule's panels ignore the bump's C^2 breakpoints, hence the looser bound
    for f, tol in ((fe.Shifted(fe.Gaussian(0.4), 1.2), 1e-12), (fe.Bump(0.5, 2.0), 1e-6)):
        a = tr.evaluate(spec, f, 0.6, th)
        b = tr.evaluate(spec, f, 0.6, th, method="series")
        assert np.max(np.abs(a - b)) < tol


def test_hermite_series_route_matches_kernel():
    spec = tr.hermite_heat()
    f = fe.Gaussian(0.8)
    x = np.linspace(-4, 4, 17)
    assert np.allclose(tr.evaluate(spec, f, 0.3, x), tr.evaluate(spec, f, 0.3, x, method="series"), atol=1e-10)


def test_identity_time():
    f = fe.Bump(0.2, 2.0)
    x = np.linspace(0, 3, 7)
    assert np.array_equal(tr.evaluate(tr.gegenbauer_poisson(0.5), f, 1.0, x), f(x))
    assert np.array_equal(tr.evaluate(tr.gauss_weierstrass(), f, 0.0, x), f(x))


def test_translate_example_hermite():
    x = np.linspace(-6, 6, 241)
    g = tr.translate(tr.hermite_heat(), fe.Hermite(3), 0.2, x)
    h = fe.Hermite(3)(x)
    mask = np.abs(h) > 1e-3
    assert np.allclose(g.values[mask] / h[mask], math.exp(-1.4), rtol=1e-10)
    assert g.meta["err_est"] < 1e-8


@given(st.floats(0.02, 0.5), st.floats(0.02, 0.5))
@settings(max_examples=15, deadline=None)
def test_hermite_semigroup(t1, t2):
    spec = tr.hermite_heat()
    x = np.linspace(-8, 8, 161)
    f = fe.Bump(-1.0, 1.5)
    two = tr.evaluate(spec, tr.Translated(spec, f, t2), t1, x)
    assert np.allclose(two, tr.evaluate(spec, f, t1 + t2, x), atol=1e-9)


def test_iterate_matches_single_step():
    spec = tr.gauss_weierstrass(1.0)
    x = np.linspace(-6, 6, 61)
    it = tr.iterate_translate(spec, fe.Gaussian(1.0), 0.1, 3, x)
    assert np.allclose(it.values, tr.evaluate(spec, fe.Gaussian(1.0), 0.3, x), atol=1e-10)


def test_poisson_extension_of_lorentzian():
    # the harmonic extension of 1/(1+x^2) is (1+t)/((1+t)^2+x^2)
    class Lorentz(fe.FuncExpr):
        decay = "none"

        def eval(self, x):
            return 1.0 / (1.0 + x * x)

    x = np.linspace(-5, 5, 21)
    t = 0.5
    ref = (1 + t) / ((1 + t) ** 2 + x * x)
    assert np.allclose(tr.evaluate(tr.poisson_halfplane(), Lorentz(), t, x), ref, atol=1e-8)


@pytest.mark.parametrize("spec,f,lam", [
    (tr.hermite_heat(), fe.Hermite(3), -7.0),
    (tr.laguerre_heat(0.5), fe.LaguerreFn(2, 0.5), -5.5),
    (tr.gegenbauer_poisson(1.0), fe.Gegenbauer(3, 1.0), 15.0),
])
def test_generator_eigenvalues(spec, f, lam):
    x = np.linspace(0.3, 2.5, 9)
    assert np.allclose(tr.generator_function(spec, f, 1)(x), lam * f(x), rtol=1e-8, atol=1e-10)


def test_generator_gauss_weierstrass_is_scaled_laplacian():
    f = fe.Gaussian(1.0)
    x = np.linspace(-2, 2, 9)
    assert np.allclose(tr.generator_function(tr.gauss_weierstrass(2.0), f, 1)(x), 4 * f.deriv(x, 2), atol=1e-8)
    assert np.allclose(tr.generator_function(tr.poisson_halfplane(), f, 1)(x), -f.deriv(x, 2), atol=1e-8)


def test_apply_generator_on_grid():
    spec = tr.hermite_heat()
    x = np.linspace(-8, 8, 3201)
    g = GridFunction(x, fe.Hermite(3)(x))
    d1 = tr.apply_generator(spec, g, 1, x)
    d2 = tr.apply_generator(spec, g, 2, x)
    inner = np.abs(x) < 6
    assert np.max(np.abs(d1.values - (-7) * g.values)[inner]) < 1e-7
    assert np.max(np.abs(d2.values - 49 * g.values)[inner]) < 1e-3
    with pytest.raises(tr.TranslateError):
        tr.apply_generator(spec, g, 1, x[:-1])


def test_norm_probe_contraction():
    fam = [fe.Gaussian(1.0), fe.Bump(-1, 1), fe.Hermite(4)]
    value, rows = tr.norm_probe(tr.gauss_weierstrass(1.0), 2, fam, (0.1, 0.5))
    assert value <= 1 + 1e-6 and len(rows) == 6
    value, _ = tr.norm_probe(tr.hermite_heat(), 1, fam, (0.1,))
    assert value <= 1 + 1e-6


def test_parameter_and_time_errors():
    with pytest.raises(tr.ParameterError):
        tr.TranslationSpec("jacobi-hyperbolic", alpha=0.0, beta=0.5)
    with pytest.raises(tr.ParameterError):
        tr.TranslationSpec("heat")
    with pytest.raises(tr.TimeDomainError):
        tr.evaluate(tr.hermite_heat(), fe.Gaussian(1.0), -0.1, np.zeros(2))
    with pytest.raises(tr.TimeDomainError):
        tr.evaluate(tr.gegenbauer_poisson(1.0), fe.Gaussian(1.0), 1.5, np.zeros(2))
    with pytest.raises(tr.UnsupportedFamilyError):
        tr.evaluate(tr.hermite_heat(2), fe.Gaussian(1.0), 0.1, np.zeros(2))
