import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transop import specfun as S

mp.mp.dps = 30


def _hermite_oracle(k, x):
    return float(mp.hermite(k, x) * mp.exp(-mp.mpf(x) ** 2 / 2)
                 / mp.sqrt(2 ** k * mp.factorial(k) * mp.sqrt(mp.pi)))


def test_log_gamma_matches_mpmath():
    xs = np.array([1e-3, 0.5, 1.0, 2.5, 10.0, 171.3, 1e4])
    ref = np.array([float(mp.loggamma(x)) for x in xs])
    assert np.allclose(S.log_gamma(xs), ref, rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("k", [0, 1, 2, 5, 10, 30])
def test_hermite_fn_matches_mpmath(k):
    x = np.linspace(-7, 7, 29)
    ref = np.array([_hermite_oracle(k, v) for v in x])
    assert np.max(np.abs(S.hermite_fn(k, x) - ref)) < 1e-13


def test_hermite_fn_all_rows_agree_with_single():
    x = np.linspace(-5, 5, 11)
    rows = S.hermite_fn_all(6, x)
    for k in range(7):
        assert np.allclose(rows[k], S.hermite_fn(k, x), atol=1e-15)


def test_hermite_functions_orthonormal():
    x, w = np.polynomial.hermite.hermgauss(60)
    H = S.hermite_fn_all(12, x) * np.exp(x * x / 2)
    G = (H * w) @ H.T
    assert np.max(np.abs(G - np.eye(13))) < 1e-12


@pytest.mark.parametrize("n,a", [(0, 0.0), (3, -0.5), (7, 1.5), (12, 0.25)])
def test_laguerre_poly_matches_mpmath(n, a):
    x = np.linspace(0, 20, 17)
    ref = np.array([float(mp.laguerre(n, a, v)) for v in x])
    assert np.allclose(S.laguerre_poly(n, a, x), ref, rtol=1e-12, atol=1e-12)


def _gegenbauer_sum(n, lam, x):
    x = mp.mpf(x)
    return sum((-1) ** k * mp.gamma(n - k + lam) / (mp.gamma(lam) * mp.factorial(k) * mp.factorial(n - 2 * k))
               * (2 * x) ** (n - 2 * k) for k in range(n // 2 + 1))


@pytest.mark.parametrize("n,lam", [(0, 1.0), (4, 0.5), (6, 1.5), (5, -0.25), (4, -0.4)])
def test_gegenbauer_poly_matches_explicit_sum(n, lam):
    x = np.linspace(-1, 1, 21)
    ref = np.array([float(_gegenbauer_sum(n, lam, v)) for v in x])
    assert np.allclose(S.gegenbauer_poly(n, lam, x), ref, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("n,lam", [(0, 1.0), (3, 0.5), (5, 2.0)])
def test_gegenbauer_norm_sq_by_quadrature(n, lam):
    ref = mp.quad(lambda t: mp.gegenbauer(n, lam, mp.cos(t)) ** 2 * mp.sin(t) ** (2 * lam), [0, mp.pi])
    assert S.gegenbauer_norm_sq(n, lam) == pytest.approx(float(ref), rel=1e-12)


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.5, 1.0, 2.75])
def test_bessel_i_scaled_matches_mpmath(a):
    x = np.array([1e-3, 0.5, 3.0, 29.0, 31.0, 80.0, 400.0])
    ref = np.array([float(mp.besseli(a, v) * mp.exp(-v)) for v in x])
    assert np.allclose(S.bessel_i_scaled(a, x), ref, rtol=1e-12)


def test_bessel_i_scaled_at_zero():
    assert S.bessel_i_scaled(0.0, np.array([0.0]))[0] == 1.0
    assert S.bessel_i_scaled(1.0, np.array([0.0]))[0] == 0.0


@given(st.floats(0, 4), st.floats(0.01, 60))
@settings(max_examples=60, deadline=None)
def test_bessel_i_scaled_decreases_in_order(a, x):
    lo, hi = S.bessel_i_scaled(a, np.array([x]))[0], S.bessel_i_scaled(a + 0.5, np.array([x]))[0]
    assert 0 < hi <= lo * (1 + 1e-12)


def _jacobi_oracle(tau, a, b, x):
    rho = a + b + 1
    return float(mp.re(mp.hyp2f1((rho + 1j * tau) / 2, (rho - 1j * tau) / 2, a + 1, -mp.sinh(x) ** 2)))


@pytest.mark.parametrize("a,b", [(0.5, -0.5), (1.0, 0.0), (0.0, 0.0), (2.0, 1.0)])
def test_jacobi_fn_matches_mpmath(a, b):
    taus = np.array([0.0, 0.5, 2.0, 7.5])
    xs = np.array([0.05, 0.4, 1.0, 2.5, 5.0])
    got = S.jacobi_fn(taus[:, None], a, b, xs[None, :])
    ref = np.array([[_jacobi_oracle(t, a, b, x) for x in xs] for t in taus])
    assert np.max(np.abs(got - ref)) < 1e-8


def test_jacobi_fn_closed_forms():
    x = np.linspace(0.1, 4, 9)
    # (a, b) = (1/2, -1/2) gives sin(tau x) / (tau sinh x)
    assert np.allclose(S.jacobi_fn(1.3, 0.5, -0.5, x), np.sin(1.3 * x) / (1.3 * np.sinh(x)), atol=1e-10)


def test_jacobi_fn_large_argument_uses_ode_path():
    x = np.array([6.0])
    got = S.jacobi_fn(30.0, 0.5, -0.5, x)[0]
    assert got == pytest.approx(math.sin(30 * 6) / (30 * math.sinh(6)), abs=1e-10)
    with pytest.raises(S.SeriesConvergenceError):
        S.jacobi_fn(30.0, 0.5, -0.5, x, method="series")


@given(st.floats(0, 10), st.floats(0, 3))
@settings(max_examples=50, deadline=None)
def test_jacobi_fn_bounded_by_one(tau, x):
    assert abs(S.jacobi_fn(tau, 1.0, 0.0, np.array([x]))[0]) <= 1 + 1e-9


@pytest.mark.parametrize("a,b", [(0.5, -0.5), (1.0, 0.0), (1.5, 0.5)])
def test_jacobi_c_function(a, b):
    rho = a + b + 1
    for lam in (0.3, 1.0, 4.0):
        c = (mp.mpf(2) ** (rho - 1j * lam) * mp.gamma(a + 1) * mp.gamma(1j * lam)
             / (mp.gamma((1j * lam + rho) / 2) * mp.gamma((1j * lam + a - b + 1) / 2)))
        assert S.jacobi_c_inv_sq(np.array([lam]), a, b)[0] == pytest.approx(float(1 / abs(c) ** 2), rel=1e-10)


@pytest.mark.parametrize("a", [-0.5, 0.0, 1.5])
def test_laguerre_fn_orthonormal(a):
    x = np.linspace(1e-6, 12, 24001)
    rows = np.array([S.laguerre_fn(n, a, x) for n in range(6)])
    w = np.full_like(x, x[1] - x[0])
    w[[0, -1]] *= 0.5
    G = (rows * w) @ rows.T
    assert np.max(np.abs(G - np.eye(6))) < 1e-5


def test_laguerre_fn_matches_closed_form():
    n, a = 3, 0.5
    for x in (0.3, 1.0, 2.2):
        ref = (mp.sqrt(mp.factorial(n) / mp.gamma(n + a + 1)) * mp.mpf(x) ** a * mp.exp(-mp.mpf(x) ** 2 / 2)
               * mp.laguerre(n, a, mp.mpf(x) ** 2) * mp.sqrt(2 * x))
        assert S.laguerre_fn(n, a, np.array([x]))[0] == pytest.approx(float(ref), rel=1e-12)


def test_laguerre_fn_at_origin():
    assert S.laguerre_fn(2, 0.5, np.array([1e-12]))[0] == pytest.approx(0.0, abs=1e-9)
    # alpha = -1/2 gives (-1)^n sqrt(2) h_{2n}
    x = np.array([0.0, 0.7, 2.0])
    for n in (1, 2, 3):
        assert np.allclose(S.laguerre_fn(n, -0.5, x), (-1) ** n * math.sqrt(2) * S.hermite_fn(2 * n, x), atol=1e-12)


def test_parameter_errors():
    with pytest.raises(S.OrderRangeError):
        S.hermite_fn(-1, np.array([0.0]))
    with pytest.raises(S.SpecFunError):
        S.laguerre_poly(2, -0.75, np.array([1.0]))
    with pytest.raises(S.SpecFunError):
        S.gegenbauer_poly(2, 0.0, np.array([0.5]))
    with pytest.raises(S.SpecFunError):
        S.jacobi_fn(1.0, 0.0, 0.5, np.array([1.0]))
