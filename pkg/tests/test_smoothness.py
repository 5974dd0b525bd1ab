import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transop import funcexpr as fe
from transop import smoothness as sm
from transop import translate as tr

H = tr.hermite_heat()
X = np.linspace(-10, 10, 801)


@pytest.mark.parametrize("k,r,t", [(0, 1, 0.3), (1, 2, 0.2), (2, 1, 0.05)])
def test_modulus_of_eigenfunction(k, r, t):
    # Delta_h^r h_k = (e^{-(2k+1)h} - 1)^r h_k, largest at h = t
    ref = (1 - math.exp(-(2 * k + 1) * t)) ** r
    assert sm.modulus(H, fe.Hermite(k), t, r, nodes=X) == pytest.approx(ref, rel=1e-8)


def test_delta_r_exact_on_eigenfunction():
    d = sm.delta_r(H, fe.Hermite(3), 0.1, 2, X)
    assert np.allclose(d.values, (math.exp(-0.7) - 1) ** 2 * fe.Hermite(3)(X), atol=1e-12)


def test_gegenbauer_difference_uses_radius():
    spec = tr.gegenbauer_poisson(1.0)
    th = np.linspace(0, math.pi, 181)
    d = sm.delta_r(spec, fe.Gegenbauer(2, 1.0), 0.2, 1, th)
    assert np.allclose(d.values, (math.exp(-0.4) - 1) * fe.Gegenbauer(2, 1.0)(th), atol=1e-10)


@given(st.floats(0.02, 0.4), st.sampled_from([1, 2]))
@settings(max_examples=12, deadline=None)
def test_modulus_bounded_by_contraction(t, r):
    f = fe.Bump(-1, 1)
    om = sm.modulus(H, f, t, r, nodes=X, n=4)
    norm = math.sqrt(np.trapezoid(f(X) ** 2, X))
    assert 0 <= om <= 2 ** r * norm + 1e-12
    assert sm.modulus(H, f, t, r + 1, nodes=X, n=4) <= 2 * om + 1e-9


def test_averaged_generator_identity():
    # D^r g_{r,t} from the difference formula agrees with differentiating g_{r,t}
    f = fe.Gaussian(1.0)
    x = np.linspace(-8, 8, 1601)
    for r in (1, 2):
        g = sm.averaged_candidate(H, f, 0.2, r, x)
        lhs = sm.averaged_generator(H, f, 0.2, r, x)
        rhs = sm._grid_generator(H, x, g, r)
        inner = np.abs(x) < 6
        assert np.max(np.abs(lhs - rhs)[inner]) < 1e-4 * np.max(np.abs(lhs))


def test_simplex_rule_integrates_volume():
    for r in (1, 2, 3):
        S, W = sm._simplex_rule(r)
        # r^r times the volume of (0, 1/r)^r is one
        assert W.sum() == pytest.approx(1.0, rel=1e-13)
        assert S.max() < 1.0 + 1e-12


def test_eta_cutoff():
    s = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
    v = sm.eta(s)
    assert v[0] == v[1] == v[2] == 1.0 and v[4] == v[5] == 0.0
    assert v[3] == pytest.approx(0.5)
    h = 1e-4
    for a in (1.0, 2.0):
        d2 = (sm.eta(a + h) - 2 * sm.eta(a) + sm.eta(a - h)) / h ** 2
        assert abs(d2) < 1e-2


def test_mollified_candidate_keeps_band_limited_content():
    spec = tr.gauss_weierstrass(1.0)
    f = fe.Gaussian(2.0)
    x = np.linspace(-6, 6, 61)
    g, dg = sm.mollified_candidate(spec, f, 4.0, 1, x)
    assert np.max(np.abs(g - f(x))) < 1e-10
    assert np.allclose(dg, f.deriv(x, 2), atol=1e-8)


@pytest.mark.parametrize("fs", ["bump:-1,1", "gaussian:1"])
@pytest.mark.parametrize("spec", [tr.hermite_heat(), tr.gauss_weierstrass(1.0)])
def test_sandwich_flags(spec, fs):
    rows = sm.equivalence_report(spec, fe.parse(fs), 1, 2, (0.05, 0.2))
    for row in rows:
        assert row["upper_dist_ok"] and row["upper_gen_ok"] and row["lower_ok"]
        assert row["k_upper"] >= 0


def test_k_candidates_restricted_families():
    with pytest.raises(sm.SmoothnessError):
        sm.k_candidates(tr.poisson_halfplane(), fe.Gaussian(1.0), 0.1, 1)
    with pytest.raises(sm.SmoothnessError):
        sm.modulus(H, fe.Gaussian(1.0), 0.1, 4)


def test_third_order_warns():
    with pytest.warns(UserWarning):
        sm.k_candidates(H, fe.Gaussian(1.0), 0.001, 3, nodes=X)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_q_n_truncation(r):
    assert sm.q_n_degree(r) == 12
    assert sm.q_n_tail(r, 12) <= 1e-6
    # coefficients of (1-x)^{-r}
    x = 0.3
    a = sm.q_n_coeffs(r, 200)
    assert np.polynomial.polynomial.polyval(x, a) == pytest.approx((1 - x) ** -r, rel=1e-12)


@given(st.floats(1e-4, 3))
@settings(max_examples=60, deadline=None)
def test_seam_ratio_bounds(u):
    v = float(sm.seam_ratio(u))
    assert 1 - u * u - 1e-15 <= v <= 1 + 1e-15
