import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from transop import funcexpr as fe
from transop import transforms as T
from transop import translate as tr


def test_fourier_of_gaussian():
    z = np.linspace(-6, 6, 25)
    F = T.forward(T.fourier(), fe.Gaussian(0.7), z)
    ref = math.sqrt(2 * math.pi) * 0.7 * np.exp(-0.5 * (0.7 * z) ** 2)
    assert np.max(np.abs(F.values - ref)) < 1e-13


def test_fourier_of_shift_is_phase():
    z = np.linspace(-4, 4, 17)
    F = T.forward(T.fourier(), fe.Shifted(fe.Gaussian(1.0), 1.5), z)
    G = T.forward(T.fourier(), fe.Gaussian(1.0), z)
    assert np.allclose(F.values, np.exp(-1.5j * z) * G.values, atol=1e-13)


def test_cosine_of_bump_at_zero():
    F = T.forward(T.cosine(), fe.Bump(-1, 1), np.array([0.0, 1.0]))
    assert F.values[0] == pytest.approx(32 / 35, rel=1e-13)


def test_fourier_round_trip():
    f = fe.Gaussian(1.0)
    z, w = T.spectral_rule(-12, 12, 48)
    F = T.forward(T.fourier(), f, z)
    x = np.linspace(-4, 4, 33)
    back = T.inverse(T.fourier(), T.SpectralGrid(T.FOURIER, z, F.values, w), x)
    assert np.max(np.abs(back.values - f(x))) < 1e-12


def test_cosine_round_trip():
    f = fe.Gaussian(0.8)
    z, w = T.spectral_rule(0, 15, 30)
    F = T.forward(T.cosine(), f, z)
    x = np.linspace(0, 3, 13)
    back = T.inverse(T.cosine(), T.SpectralGrid(T.COSINE, z, F.values, w), x)
    assert np.max(np.abs(back.values - f(x))) < 1e-12


def test_jacobi_transform_against_scipy_quad():
    f = fe.HyperbolicBump(0.0, 1.5)
    lam = np.array([0.3, 1.0, 2.5])
    F = T.forward(T.jacobi(0.5, -0.5), f, lam)
    # phi_lam = sin(lam x)/(lam sinh x), density 4 sinh^2 x / sqrt(2 pi)
    for l, v in zip(lam, F.values):
        ref, _ = integrate.quad(lambda x: f(np.array([x]))[0] * math.sin(l * x) / (l * math.sinh(x))
                                * 4 * math.sinh(x) ** 2 / math.sqrt(2 * math.pi), 0, 1.5, epsabs=1e-13)
        assert v == pytest.approx(ref, abs=1e-11)


@given(st.floats(-3, 3), st.floats(0.3, 3))
@settings(max_examples=25, deadline=None)
def test_fourier_parseval(s, sigma):
    f = fe.Shifted(fe.Gaussian(sigma), s)
    z, w = T.spectral_rule(-14 / sigma, 14 / sigma, 48)
    F = T.SpectralGrid(T.FOURIER, z, T.forward(T.fourier(), f, z).values, w)
    assert T.spectral_norm(T.fourier(), F) ** 2 == pytest.approx(2 * math.pi * sigma * math.sqrt(math.pi), rel=1e-9)


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=25, deadline=None)
def test_linearity(a, b):
    f, g = fe.Gaussian(1.0), fe.Bump(-1, 2)
    z = np.linspace(-5, 5, 11)
    lhs = T.forward(T.fourier(), fe.Sum((fe.Scaled(f, a), fe.Scaled(g, b))), z).values
    rhs = a * T.forward(T.fourier(), f, z).values + b * T.forward(T.fourier(), g, z).values
    assert np.allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("spec,ts,tol", [
    (tr.gauss_weierstrass(1.0), T.fourier(), 1e-12),
    (tr.poisson_halfplane(), T.cosine(), 1e-5),
    (tr.jacobi_hyperbolic(0.5, -0.5), T.jacobi(0.5, -0.5), 1e-3),
])
def test_multiplier_identity(spec, ts, tol):
    f = fe.HyperbolicBump(0.0, 1.5) if ts.kind == T.JACOBI else fe.Bump(-1, 1)
    res, base, moved = T.multiplier_residual(spec, ts, f, 0.3, np.array([0.5, 1.0, 2.0]))
    assert res < tol


def test_incompatible_pairs():
    with pytest.raises(T.IncompatiblePairError):
        T.multiplier(tr.hermite_heat(), T.fourier(), 0.1, np.array([1.0]))
    with pytest.raises(T.IncompatiblePairError):
        T.multiplier(tr.jacobi_hyperbolic(1.0, 0.0), T.jacobi(0.5, -0.5), 0.1, np.array([1.0]))


def test_spectral_grid_validation():
    with pytest.raises(T.TransformError):
        T.SpectralGrid(T.FOURIER, np.array([1.0, 0.0]), np.zeros(2))


def test_gauss_weierstrass_convolution_is_translation():
    spec = tr.gauss_weierstrass(1.0)
    s = 0.4
    kern = fe.Scaled(fe.Gaussian(math.sqrt(2 * s)), 1 / math.sqrt(4 * math.pi * s))
    t_nodes = np.linspace(-3, 3, 13)
    conv = T.convolve(spec, fe.Bump(-1, 1), kern, t_nodes)
    assert np.allclose(conv.values, tr.evaluate(spec, fe.Bump(-1, 1), s, t_nodes), atol=1e-12)


def test_jacobi_convolution_theorem():
    spec = tr.jacobi_hyperbolic(0.5, -0.5)
    ts = T.jacobi(0.5, -0.5)
    f, g = fe.HyperbolicBump(0.0, 1.0), fe.HyperbolicBump(0.0, 0.8)
    # f * g is supported in [0, 1.8]; the spline of its samples is transformed
    conv = T.convolve(spec, f, g, np.linspace(0.0, 1.9, 96))
    lam = np.array([0.5, 1.5])
    Ff, Fg = T.forward(ts, f, lam).values, T.forward(ts, g, lam).values
    Fh = T.forward(ts, conv, lam).values
    assert np.allclose(Fh, Ff * Fg, rtol=2e-3, atol=1e-4)


def test_dual_translation_is_transform_of_product():
    f = fe.HyperbolicBump(0.0, 1.5)
    lam = np.array([0.5, 1.0])
    vals = T.dual_translate(f, 0.7, lam, 0.5, -0.5).values
    ref = []
    for l in lam:
        r, _ = integrate.quad(lambda x: f(np.array([x]))[0] * math.sin(0.7 * x) / (0.7 * math.sinh(x))
                              * math.sin(l * x) / (l * math.sinh(x)) * 4 * math.sinh(x) ** 2
                              / math.sqrt(2 * math.pi), 0, 1.5, epsabs=1e-13)
        ref.append(r)
    assert np.allclose(vals, ref, atol=1e-10)


def test_jacobi_plancherel_single_bump():
    ts = T.jacobi(0.5, -0.5)
    f = fe.HyperbolicBump(0.0, 2.0)
    lam, w = T.spectral_rule(0, 40, 20)
    F = T.SpectralGrid(ts.kind, lam, T.forward(ts, f, lam).values, w)
    ref, _ = integrate.quad(lambda x: f(np.array([x]))[0] ** 2 * 4 * math.sinh(x) ** 2 / math.sqrt(2 * math.pi),
                            0, 2, epsabs=1e-14, limit=200)
    assert T.spectral_norm(ts, F) == pytest.approx(math.sqrt(ref), rel=1e-4)
