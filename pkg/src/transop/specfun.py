"""Special functions used by the translation kernels and eigen-expansions.

Everything is vectorised over the argument; integer orders are scalars.
Recurrences are used instead of explicit factorial sums and all Gamma
ratios go through ``log_gamma`` so orders up to 200 stay finite.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sp
from scipy.integrate import solve_ivp

MAX_ORDER = 200
BESSEL_SWITCH = 30.0
HYP_DIRECT_LIMIT = 0.5


class SpecFunError(ValueError):
    """Parameter outside the supported range."""


class OrderRangeError(SpecFunError):
    pass


class SeriesConvergenceError(ArithmeticError):
    """A hypergeometric series did not converge; carries the partial state."""

    def __init__(self, message, partial=None, diagnostics=None):
        super().__init__(message)
        self.partial = partial
        self.diagnostics = diagnostics or {}


def _check_order(n):
    if int(n) != n or n < 0:
        raise OrderRangeError(f"order must be a nonnegative integer, got {n}")
    if n > MAX_ORDER:
        raise OrderRangeError(f"order {n} exceeds cap {MAX_ORDER}")
    return int(n)


def log_gamma(x):
    """ln Gamma(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise SpecFunError("log_gamma requires x > 0")
    out = sp.gammaln(x)
    return float(out) if out.ndim == 0 else out


def hermite_fn(k, x):
    """Normalised Hermite function h~_k(x) = H_k(x) e^{-x^2/2} / sqrt(2^k k! sqrt(pi))."""
    k = _check_order(k)
    x = np.asarray(x, dtype=float)
    h_prev = np.zeros_like(x)
    h = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    for n in range(k):
        h_prev, h = h, math.sqrt(2.0 / (n + 1)) * x * h - math.sqrt(n / (n + 1)) * h_prev
    return h


def hermite_fn_all(kmax, x):
    """Rows h~_0 .. h~_kmax evaluated at x (shape (kmax+1, *x.shape))."""
    kmax = _check_order(kmax)
    x = np.asarray(x, dtype=float)
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if kmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, kmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _check_alpha(a):
    if a < -0.5:
        raise SpecFunError(f"Laguerre parameter must be >= -1/2, got {a}")


def laguerre_poly(n, a, x):
    """Generalised Laguerre polynomial L_n^{(a)}(x)."""
    n = _check_order(n)
    _check_alpha(a)
    x = np.asarray(x, dtype=float)
    l_prev = np.zeros_like(x)
    l_cur = np.ones_like(x)
    for m in range(n):
        l_prev, l_cur = l_cur, ((2 * m + 1 + a - x) * l_cur - (m + a) * l_prev) / (m + 1)
    return l_cur


def _check_lambda(lam):
    if lam <= -0.5 or lam == 0:
        raise SpecFunError(f"Gegenbauer parameter must satisfy lam > -1/2, lam != 0; got {lam}")


def gegenbauer_poly(n, lam, x):
    """Ultraspherical polynomial P_n^{(lam)}(x) (standard C_n^lam normalisation)."""
    n = _check_order(n)
    _check_lambda(lam)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1 + 1e-12):
        raise SpecFunError("gegenbauer_poly requires |x| <= 1")
    c_prev = np.zeros_like(x)
    c_cur = np.ones_like(x)
    for m in range(1, n + 1):
        c_prev, c_cur = c_cur, (2 * (m + lam - 1) * x * c_cur - (m + 2 * lam - 2) * c_prev) / m
    return c_cur


def gegenbauer_norm_sq(n, lam):
    """int_0^pi P_n^{(lam)}(cos t)^2 sin^{2 lam} t dt."""
    n = _check_order(n)
    _check_lambda(lam)
    # pi 2^{1-2lam} Gamma(n+2lam) / (n! (n+lam) Gamma(lam)^2); gammaln is log|Gamma|
    log_val = (math.log(math.pi) + (1 - 2 * lam) * math.log(2.0) + sp.gammaln(n + 2 * lam)
               - sp.gammaln(n + 1) - 2 * sp.gammaln(lam) - math.log(abs(n + lam)))
    return math.exp(log_val)


def bessel_i_scaled(a, x):
    """e^{-x} I_a(x) for a >= -1/2, x >= 0.

    Power series up to x = 30, large-argument expansion beyond.
    """
    if a < -0.5:
        raise SpecFunError(f"Bessel order must be >= -1/2, got {a}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise SpecFunError("bessel_i_scaled requires x >= 0")
    out = np.empty_like(x)
    small = x <= BESSEL_SWITCH
    if np.any(small):
        out[small] = _bessel_i_series(a, x[small])
    if np.any(~small):
        out[~small] = _bessel_i_asymptotic(a, x[~small])
    return out


def _bessel_i_series(a, x):
    zero = x == 0
    x = np.where(zero, 1.0, x)
    log_t0 = a * np.log(0.5 * x) - sp.gammaln(a + 1) - x
    term = np.exp(log_t0)
    total = term.copy()
    q = 0.25 * x * x
    for k in range(400):
        term = term * q / ((k + 1) * (k + 1 + a))
        total += term
        if np.all(term <= 1e-17 * total):
            break
    if a == 0:
        total[zero] = 1.0
    else:
        total[zero] = 0.0 if a > 0 else np.inf
    return total


def _bessel_i_asymptotic(a, x):
    mu = 4.0 * a * a
    total = np.ones_like(x)
    term = np.ones_like(x)
    best = np.full_like(x, np.inf)
    done = np.zeros(x.shape, dtype=bool)
    for k in range(1, 200):
        nxt = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        grow = np.abs(nxt) >= best
        done |= grow | (nxt == 0)
        best = np.where(done, best, np.abs(nxt))
        term = np.where(done, term, nxt)
        total = total + np.where(done, 0.0, nxt)
        done |= np.abs(nxt) <= 1e-17 * np.abs(total)
        if np.all(done):
            break
    return total / np.sqrt(2 * np.pi * x)


# -- Jacobi functions ---------------------------------------------------------

def _check_jacobi(a, b):
    if not (a >= b >= -0.5 and a > -0.5):
        raise SpecFunError(f"Jacobi parameters need a >= b >= -1/2, a > -1/2; got ({a}, {b})")


def _hyp_series(A, B, C, z, max_terms):
    """Partial sums of 2F1(A,B;C;z) with the largest term magnitude seen."""
    z = np.asarray(z, dtype=complex)
    term = np.ones_like(z)
    total = np.ones_like(z)
    biggest = np.ones(z.shape)
    done = np.zeros(z.shape, dtype=bool)
    for n in range(max_terms):
        term = term * ((A + n) * (B + n) / ((C + n) * (n + 1))) * z
        total = np.where(done, total, total + term)
        mag = np.abs(term)
        biggest = np.maximum(biggest, np.where(done, 0.0, mag))
        done |= mag <= 1e-17 * np.abs(total)
        if np.all(done):
            break
    return total, biggest, done


MAX_SERIES_TERMS = 2000
_MAX_LOSS = 1e5
# pre-screen: skip series whose terms grow like exp(|tau| sqrt|z|) past the loss budget
_GROWTH_LIMIT = 2 * math.log(_MAX_LOSS)
_PFAFF_W_MAX = 0.95


def jacobi_fn(tau, a, b, x, method="auto"):
    """Jacobi function phi_tau^{(a,b)}(x) = 2F1((rho+i tau)/2, (rho-i tau)/2; a+1; -sinh^2 x).

    Direct series for sinh^2 x <= 1/2, Pfaff transform z/(z-1) beyond. Points
    where a series loses more than five digits to cancellation or does not
    converge are integrated from the ODE when ``method='auto'``; with
    ``method='series'`` a :class:`SeriesConvergenceError` is raised instead.
    """
    _check_jacobi(a, b)
    tau, x = np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(x, dtype=float))
    if np.any(x < 0):
        raise SpecFunError("jacobi_fn requires x >= 0")
    out = np.empty(x.shape)
    flat_tau, flat_x, flat_out = tau.ravel(), x.ravel(), out.reshape(-1)
    vals, ok = _jacobi_series(flat_tau, a, b, flat_x)
    flat_out[:] = vals
    if not np.all(ok):
        if method != "auto":
            raise SeriesConvergenceError(
                "Jacobi function series did not converge",
                partial=vals,
                diagnostics={"tau": flat_tau[~ok].tolist(), "x": flat_x[~ok].tolist()},
            )
        bad = np.nonzero(~ok)[0]
        _jacobi_ode(flat_tau[bad], flat_x[bad], bad, a, b, flat_out)
    return float(out) if out.ndim == 0 else out


def _jacobi_series(tau, a, b, x):
    """Series paths for elementwise (tau, x); ``ok`` marks trustworthy entries."""
    rho = a + b + 1
    A = 0.5 * (rho + 1j * tau)
    B = 0.5 * (rho - 1j * tau)
    C = a + 1.0
    sh2 = np.sinh(x) ** 2
    vals = np.zeros(x.shape)
    ok = np.zeros(x.shape, dtype=bool)
    direct = (sh2 <= HYP_DIRECT_LIMIT) & (np.abs(tau) * np.sqrt(sh2) <= _GROWTH_LIMIT)
    if np.any(direct):
        s, big, conv = _hyp_series(A[direct], B[direct], C, -sh2[direct], MAX_SERIES_TERMS)
        vals[direct] = _real_part(s)
        ok[direct] = conv & (big <= _MAX_LOSS * np.abs(s)) & _imag_ok(s)
    w_all = np.tanh(x) ** 2
    far = ((sh2 > HYP_DIRECT_LIMIT) & (w_all <= _PFAFF_W_MAX)
           & (np.abs(tau) * np.sqrt(w_all) <= _GROWTH_LIMIT))
    if np.any(far):
        Af = A[far]
        s, big, conv = _hyp_series(Af, C - B[far], C, w_all[far], MAX_SERIES_TERMS)
        val = np.exp(-Af * 2.0 * _log_cosh(x[far])) * s
        vals[far] = _real_part(val)
        ok[far] = conv & (big <= _MAX_LOSS * np.abs(s)) & _imag_ok(val)
    return vals, ok


def _log_cosh(x):
    return np.abs(x) + np.log1p(np.exp(-2 * np.abs(x))) - math.log(2.0)


def _real_part(v):
    return np.asarray(v).real


def _imag_ok(v):
    v = np.asarray(v)
    return np.abs(v.imag) <= 1e-10 * (1 + np.abs(v.real))


def _jacobi_series_with_derivative(tau, a, b, x):
    rho = a + b + 1
    A = 0.5 * (rho + 1j * tau)
    B = 0.5 * (rho - 1j * tau)
    C = a + 1.0
    z = -np.sinh(x) ** 2
    f, _, _ = _hyp_series(A, B, C, z, MAX_SERIES_TERMS)
    g, _, _ = _hyp_series(A + 1, B + 1, C + 1, z, MAX_SERIES_TERMS)
    dfdx = (A * B / C) * g * (-2.0 * np.sinh(x) * np.cosh(x))
    return f.real, dfdx.real


def jacobi_q(a, b, x):
    """Drift coefficient q(x) = (2a+1) coth x + (2b+1) tanh x."""
    return (2 * a + 1) / np.tanh(x) + (2 * b + 1) * np.tanh(x)


def _jacobi_ode(taus_el, xs_el, where, a, b, flat_out):
    """Integrate y'' + q y' + (rho^2 + tau^2) y = 0 for every distinct tau at once."""
    rho = a + b + 1
    taus, inv = np.unique(taus_el, return_inverse=True)
    xs_needed, xinv = np.unique(xs_el, return_inverse=True)
    x0 = math.asinh(min(0.5, 1.0 / (1.0 + np.max(np.abs(taus)))))
    if xs_needed[0] > 0:
        x0 = min(x0, 0.5 * float(xs_needed[0]))
    n = len(taus)
    f0, df0 = _jacobi_series_with_derivative(taus, a, b, np.full(n, x0))
    y0 = np.concatenate([f0, df0])
    k2 = rho * rho + taus * taus

    def rhs(xv, y):
        u, v = y[:n], y[n:]
        return np.concatenate([v, -jacobi_q(a, b, xv) * v - k2 * u])

    sol = solve_ivp(rhs, (x0, float(xs_needed[-1])), y0, method="DOP853", rtol=1e-12,
                    atol=1e-15, t_eval=xs_needed)
    if not sol.success:
        raise SeriesConvergenceError("Jacobi ODE integration failed",
                                     diagnostics={"message": sol.message})
    flat_out[where] = sol.y[inv, xinv]


def jacobi_c_inv_sq(lam, a, b):
    """v(lam) = |c(lam)|^{-2}, the Plancherel density of the Jacobi transform."""
    _check_jacobi(a, b)
    lam = np.asarray(lam, dtype=float)
    rho = a + b + 1
    lz = np.where(lam == 0, 1.0, lam)
    s = 0.5 * (rho + 1j * lz)
    log_num = sp.loggamma(s) + sp.loggamma(s - b)
    log_den = rho * math.log(2.0) + sp.loggamma(1j * lz) + sp.gammaln(a + 1)
    val = np.exp(2.0 * (log_num.real - log_den.real))
    return np.where(lam == 0, 0.0, val)


def laguerre_fn(n, a, x):
    """Laguerre function of Hermite type on (0, inf).

    sqrt(n!/Gamma(n+a+1)) x^a e^{-x^2/2} L_n^{(a)}(x^2) sqrt(2x). The x^a factor
    makes the family orthonormal in L^2(0, inf) and the eigenbasis of
    1/2(-d^2/dx^2 + x^2 + (a^2 - 1/4)/x^2) with eigenvalues 2n + a + 1.
    """
    n = _check_order(n)
    _check_alpha(a)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise SpecFunError("laguerre_fn requires x > 0")
    with np.errstate(divide="ignore"):
        power = np.where(x > 0, x ** (a + 0.5), 1.0 if a == -0.5 else 0.0)
    return _laguerre_normalised(n, a, x * x) * math.sqrt(2.0) * power


def _laguerre_normalised(n, a, y):
    """sqrt(n!/Gamma(n+a+1)) e^{-y/2} L_n^{(a)}(y), by a normalised recurrence."""
    e = np.exp(-0.5 * y)
    l_prev = np.zeros_like(y)
    l_cur = e * math.exp(-0.5 * sp.gammaln(a + 1))
    for m in range(n):
        c1 = (2 * m + 1 + a - y) / math.sqrt((m + 1) * (m + a + 1))
        c2 = math.sqrt(m * (m + a) / ((m + 1) * (m + a + 1))) if m > 0 else 0.0
        l_prev, l_cur = l_cur, c1 * l_cur - c2 * l_prev
    return l_cur
