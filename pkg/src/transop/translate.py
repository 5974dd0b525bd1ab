"""Generalized translation operators T^t for six PDE families.

Every family is evaluated by a Nystrom discretisation: a fixed composite
quadrature rule in the integration variable, built from the input's support,
breakpoints and length scale and from the kernel width, and independent of
the output point.  Because the rule does not move with x, x -> T^t f(x) is
a smooth function of x up to rounding, so finite differences of translates
(generator commutation, Lipschitz checks) see no quadrature noise.

Translates are also available lazily (``Translated``) so they can be fed
back into ``translate``; nested rules are built from the metadata that the
lazy object reports.

Conventions: HermiteHeat acts on the already weighted function (the input is
f(y) e^{-y^2/2}); the GegenbauerPoisson time variable is the radius r in
[0, 1) with r = 1 the identity; JacobiHyperbolic inputs are even functions
given on [0, inf).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gammaln, hyp2f1

from . import funcexpr, numerics, specfun
from .numerics import DomainSpec, GridFunction, QuadSpec

HERMITE = "hermite-heat"
POISSON = "poisson-halfplane"
GAUSS_WEIERSTRASS = "gauss-weierstrass"
GEGENBAUER = "gegenbauer-poisson"
LAGUERRE = "laguerre-heat"
JACOBI = "jacobi-hyperbolic"
FAMILIES = (HERMITE, POISSON, GAUSS_WEIERSTRASS, GEGENBAUER, LAGUERRE, JACOBI)
PARABOLIC = (HERMITE, GAUSS_WEIERSTRASS, LAGUERRE)
SERIES_FAMILIES = (HERMITE, GEGENBAUER, LAGUERRE)

GL_ORDER = 20
JACOBI_RULE = 48
MAX_ITERATE = 8
_CHUNK = 4_000_000


class TranslateError(ValueError):
    pass


class TimeDomainError(TranslateError):
    pass


class UnsupportedFamilyError(TranslateError):
    pass


class ParameterError(TranslateError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    form: str
    operator: str


_GENERATORS = {
    HERMITE: GeneratorSpec("HermiteOsc", "f'' - x^2 f"),
    POISSON: GeneratorSpec("LaplaceHalfPlane", "-f''  (u_tt + u_xx = 0, T^t = exp(-t|D|))"),
    GAUSS_WEIERSTRASS: GeneratorSpec("Laplacian*b^2", "b^2 f''"),
    GEGENBAUER: GeneratorSpec(
        "GegenbauerElliptic",
        "-(f'' + 2 lam cot(theta) f')  (u_xx + u_tt + (2 lam/t) u_t = 0 in polar form)"),
    LAGUERRE: GeneratorSpec("LaguerreOsc", "1/2 f'' - 1/2 (x^2 + (alpha^2 - 1/4)/x^2) f"),
    JACOBI: GeneratorSpec("JacobiSturmLiouville",
                          "f'' + q f',  q = (2 alpha + 1) coth x + (2 beta + 1) tanh x"),
}


@dataclass(frozen=True)
class TranslationSpec:
    family: str
    d: int = 1
    b: float = 1.0
    lam: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if self.family == HERMITE and self.d not in (1, 2, 3):
            raise ParameterError("hermite-heat dimension must be 1, 2 or 3")
        if self.family == GAUSS_WEIERSTRASS and not self.b > 0:
            raise ParameterError("gauss-weierstrass needs b > 0")
        if self.family == GEGENBAUER and (not self.lam > -0.5 or self.lam == 0):
            raise ParameterError("gegenbauer-poisson needs lam > -1/2, lam != 0")
        if self.family == LAGUERRE and not self.alpha >= -0.5:
            raise ParameterError("laguerre-heat needs alpha >= -1/2")
        if self.family == JACOBI and not (self.alpha >= self.beta >= -0.5 and self.alpha > -0.5):
            raise ParameterError("jacobi-hyperbolic needs alpha >= beta >= -1/2, alpha > -1/2")

    @property
    def domain(self):
        if self.family == HERMITE:
            return DomainSpec(numerics.REAL_LINE, self.d)
        if self.family in (POISSON, GAUSS_WEIERSTRASS):
            return DomainSpec(numerics.REAL_LINE)
        if self.family == GEGENBAUER:
            return DomainSpec(numerics.UNIT_DISK)
        return DomainSpec(numerics.HALF_LINE)

    @property
    def measure(self):
        if self.family == GEGENBAUER:
            return numerics.gegenbauer_measure(self.lam)
        if self.family == JACOBI:
            return numerics.jacobi_measure(self.alpha, self.beta)
        return numerics.LEBESGUE

    @property
    def generator(self):
        return _GENERATORS[self.family]

    @property
    def rho(self):
        return self.alpha + self.beta + 1.0

    @property
    def is_parabolic(self):
        return self.family in PARABOLIC

    @property
    def is_semigroup(self):
        return self.family in (HERMITE, GAUSS_WEIERSTRASS, POISSON, LAGUERRE)

    def identity_time(self):
        return 1.0 if self.family == GEGENBAUER else 0.0

    def describe(self):
        params = {HERMITE: f"d={self.d}", GAUSS_WEIERSTRASS: f"b={self.b!r}",
                  GEGENBAUER: f"lambda={self.lam!r}", LAGUERRE: f"alpha={self.alpha!r}",
                  JACOBI: f"alpha={self.alpha!r},beta={self.beta!r}", POISSON: ""}[self.family]
        return f"{self.family}({params})"


def hermite_heat(d=1):
    return TranslationSpec(HERMITE, d=d)


def poisson_halfplane():
    return TranslationSpec(POISSON)


def gauss_weierstrass(b=1.0):
    return TranslationSpec(GAUSS_WEIERSTRASS, b=b)


def gegenbauer_poisson(lam):
    return TranslationSpec(GEGENBAUER, lam=lam)


def laguerre_heat(alpha):
    return TranslationSpec(LAGUERRE, alpha=alpha)


def jacobi_hyperbolic(alpha, beta):
    return TranslationSpec(JACOBI, alpha=alpha, beta=beta)


def _check_time(spec, t):
    t = float(t)
    if spec.family == GEGENBAUER:
        if not 0 <= t <= 1:
            raise TimeDomainError(f"gegenbauer-poisson radius must lie in [0, 1], got {t}")
    elif not t >= 0:
        raise TimeDomainError(f"time must be nonnegative, got {t}")
    return t


# ---------------------------------------------------------------- kernels

def kernel_eval(spec, x, y, t):
    """Kernel of T^t f(x) = int f(y) K(x, y, t) dmu(y), vectorised.

    For GegenbauerPoisson (x, y, t) are (theta, phi, r).  For HermiteHeat
    with d > 1 the last axis of x and y holds the coordinates.
    """
    t = float(t)
    if spec.family == GEGENBAUER:
        if not 0 <= t < 1:
            raise TimeDomainError("gegenbauer kernel needs r in [0, 1)")
    elif not t > 0:
        raise TimeDomainError("kernel needs t > 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fam = spec.family
    if fam == HERMITE:
        return _mehler(x, y, t, spec.d)
    if fam == POISSON:
        return t / (math.pi * ((y - x) ** 2 + t * t))
    if fam == GAUSS_WEIERSTRASS:
        s = spec.b * spec.b * t
        return np.exp(-(x - y) ** 2 / (4 * s)) / (2 * math.sqrt(math.pi * s))
    if fam == GEGENBAUER:
        return _gegenbauer_kernel(spec.lam, x, y, t)
    if fam == LAGUERRE:
        return _laguerre_kernel(spec.alpha, x, y, t)
    return _jacobi_kernel(spec.alpha, spec.beta, x, t, y)


def _mehler(x, y, t, d):
    if d > 1:
        if x.shape[-1] != d or y.shape[-1] != d:
            raise ParameterError(f"points must have {d} coordinates on the last axis")
        diff2 = np.sum((x - y) ** 2, axis=-1)
        dot = np.sum(x * y, axis=-1)
    else:
        diff2 = (x - y) ** 2
        dot = x * y
    s2 = math.sinh(2 * t)
    coth2 = 1.0 / math.tanh(2 * t)
    expo = -0.5 * diff2 * coth2 - dot * math.tanh(t)
    return (2 * math.pi * s2) ** (-0.5 * d) * np.exp(expo)


def mehler_exponent_forms(x, y, t):
    """Both algebraic forms of the Mehler exponent (difference form, product form)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = -0.5 * np.sum((x - y) ** 2, axis=-1) / math.tanh(2 * t) - np.sum(x * y, axis=-1) * math.tanh(t)
    prod = (-0.5 * (np.sum(x * x, axis=-1) + np.sum(y * y, axis=-1)) / math.tanh(2 * t)
            + np.sum(x * y, axis=-1) / math.sinh(2 * t))
    return diff, prod


def _laguerre_kernel(a, x, y, t):
    x, y = np.broadcast_arrays(x, y)
    sh = math.sinh(t)
    z = x * y / sh
    expo = -0.5 * (x - y) ** 2 / math.tanh(t) - x * y * math.tanh(0.5 * t)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        val = np.sqrt(x * y) / sh * specfun.bessel_i_scaled(a, z) * np.exp(expo)
    zero = z == 0
    if np.any(zero):
        lim = math.sqrt(2 * sh / math.pi) / sh if a == -0.5 else 0.0
        val = np.where(zero, lim * np.exp(-0.5 * (x * x + y * y) / math.tanh(t)), val)
    return val


def _gegenbauer_kernel(lam, theta, phi, r, q=None):
    theta, phi = np.broadcast_arrays(theta, phi)
    shape = theta.shape
    if lam < 0:
        return _gegenbauer_kernel_series(lam, theta.ravel(), phi.ravel(), r).reshape(shape)
    q = q or QuadSpec(abs_tol=1e-13, rel_tol=1e-11, max_subdivisions=20000)
    A = (1 - 2 * r * np.cos(theta) * np.cos(phi) + r * r).ravel()
    B = (2 * r * np.sin(theta) * np.sin(phi)).ravel()
    out = np.empty(A.shape)
    step = 4096
    for i in range(0, len(A), step):
        Ai, Bi = A[i:i + step], B[i:i + step]

        def inner(s, Ai=Ai, Bi=Bi):
            xi = math.pi * s * s * (3 - 2 * s)
            jac = 6 * math.pi * s * (1 - s)
            w = np.sin(xi) ** (2 * lam - 1) * jac
            return w[:, None] * (Ai[None, :] - Bi[None, :] * np.cos(xi)[:, None]) ** (-(lam + 1))

        val, _ = numerics.integrate(inner, DomainSpec(numerics.ZERO_PI), q=q,
                                    interval=(0.0, 1.0), batch=True)
        out[i:i + step] = val
    return (lam * (1 - r * r) / math.pi * out).reshape(shape)


def _gegenbauer_kernel_series(lam, theta, phi, r):
    n = _series_length(r)
    ct, cp = np.cos(theta), np.cos(phi)
    total = np.zeros(theta.shape)
    for k in range(n + 1):
        g = 1.0 / specfun.gegenbauer_norm_sq(k, lam)
        total += g * r ** k * specfun.gegenbauer_poly(k, lam, ct) * specfun.gegenbauer_poly(k, lam, cp)
    return total


def _series_length(r, eps=1e-15):
    if r <= 0:
        return 0
    return int(min(specfun.MAX_ORDER, max(8, math.ceil(math.log(eps) / math.log(r)) + 8)))


def _jacobi_kernel(a, b, x, t, z):
    """Closed-form product kernel w.r.t. dmu(z); zero off |x - t| < z < x + t."""
    x, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(z, float))
    rho = a + b + 1
    chx, cht, chz = np.cosh(x), math.cosh(t), np.cosh(z)
    shx, sht, shz = np.sinh(x), math.sinh(t), np.sinh(z)
    inside = (z > np.abs(x - t)) & (z < x + t) & (x > 0) & (t > 0)
    with np.errstate(all="ignore"):
        B = (chx ** 2 + cht ** 2 + chz ** 2 - 1) / (2 * chx * cht * chz)
        one_m = np.clip(1 - B * B, 0, None)
        logc = (-2 * rho * math.log(2) + gammaln(a + 1) - gammaln(0.5) - gammaln(a + 0.5))
        val = (np.exp(logc) * (chx * cht * chz) ** (a - b - 1) / (shx * sht * shz) ** (2 * a)
               * one_m ** (a - 0.5) * hyp2f1(a + b, a - b, a + 0.5, 0.5 * (1 - B)))
    return np.where(inside, math.sqrt(2 * math.pi) * val, 0.0)


# ---------------------------------------------------------- input adapters

class _GridSpline:
    """Cubic spline through a GridFunction, zero outside its node range."""

    analytic_order = 0
    decay = "compact"

    def __init__(self, g):
        self._s = CubicSpline(g.nodes, g.values)
        self._lo, self._hi = float(g.nodes[0]), float(g.nodes[-1])
        self.support = (self._lo, self._hi)
        self.breakpoints = ()
        self.scale = 4 * float(np.min(np.diff(g.nodes)))
        self.domain_kind = g.domain.kind

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self._lo) & (x <= self._hi)
        return np.where(inside, self._s(np.clip(x, self._lo, self._hi)), 0.0)


class _Callable:
    analytic_order = 0
    decay = "gaussian"

    def __init__(self, fn, support, scale=1.0):
        self._fn = fn
        self.support = support
        self.breakpoints = ()
        self.scale = scale

    def __call__(self, x):
        return np.asarray(self._fn(np.asarray(x, dtype=float)), dtype=float)


def as_function(f, spec=None):
    if isinstance(f, str):
        return funcexpr.parse(f)
    if isinstance(f, GridFunction):
        return _GridSpline(f)
    if hasattr(f, "support") and hasattr(f, "scale"):
        return f
    if callable(f):
        lo, hi = spec.domain.bounds if spec is not None else (-math.inf, math.inf)
        R = QuadSpec().radius(spec.measure if spec is not None else numerics.LEBESGUE)
        return _Callable(f, (max(lo, -R), min(hi, R)))
    raise TranslateError(f"cannot use {type(f).__name__} as a function")


# ----------------------------------------------------------- Nystrom rules

def _gauss_profile(spec, t):
    """(sigma, centre map) of the kernel as a function of y."""
    if spec.family == HERMITE:
        return math.sqrt(math.tanh(2 * t)), 1.0 / math.cosh(2 * t)
    if spec.family == GAUSS_WEIERSTRASS:
        return spec.b * math.sqrt(2 * t), 1.0
    return math.sqrt(math.tanh(t)), 1.0 / math.cosh(t)


def _gauss_rule(spec, f, t, x, n=GL_ORDER):
    sigma, c = _gauss_profile(spec, t)
    half = spec.family == LAGUERRE
    width = 12.0 * sigma
    lo, hi = f.support
    win_lo, win_hi = c * float(np.min(x)) - width, c * float(np.max(x)) + width
    lo, hi = max(lo, win_lo), min(hi, win_hi)
    if half:
        lo = max(lo, 0.0)
    if not lo < hi:
        return np.zeros(0), np.zeros(0)
    h = 0.75 * min(sigma, f.scale)
    extra = list(f.breakpoints)
    if half and lo == 0.0:
        first = min(h, hi)
        extra += [first * 2.0 ** -j for j in range(1, 13)]
    breaks = numerics.panel_breaks(lo, hi, h, extra)
    if len(breaks) > 40_000:
        raise TranslateError("quadrature rule too large; input scale too small for this t")
    return numerics.composite_legendre(breaks, n)


def _poisson_rule_compact(f, t, n=GL_ORDER):
    lo, hi = f.support
    h = min(t, 0.75 * f.scale)
    breaks = numerics.panel_breaks(lo, hi, h, f.breakpoints)
    return numerics.composite_legendre(breaks, n)


_POISSON_FIXED = np.arctan(np.concatenate([-(2.0 ** np.arange(30, -7, -1)), [0.0],
                                           2.0 ** np.arange(-6, 31)]))


def _poisson_theta_values(f, t, x, n=10):
    """T^t f(x) = 1/pi int f(x + t tan theta) dtheta, per-x panels in theta."""
    core = getattr(f, "core", None)
    if core is None:
        lo, hi = f.support
        core = (lo, hi) if math.isfinite(lo) and math.isfinite(hi) else None
    pts = list(f.breakpoints)
    if core is not None:
        step = 0.75 * min(f.scale, core[1] - core[0])
        m = int(math.ceil((core[1] - core[0]) / step))
        pts += np.linspace(core[0], core[1], m + 1).tolist()
    pts = np.asarray(sorted(set(pts)))
    gx, gw = numerics.gauss_legendre(n)
    out = np.empty(len(x))
    step = max(1, _CHUNK // ((len(_POISSON_FIXED) + len(pts) + 1) * n))
    for i in range(0, len(x), step):
        xi = x[i:i + step]
        mapped = np.arctan((pts[None, :] - xi[:, None]) / t) if len(pts) else np.zeros((len(xi), 0))
        ends = np.full((len(xi), 1), 0.5 * math.pi)
        br = np.sort(np.concatenate([-ends, np.broadcast_to(_POISSON_FIXED, (len(xi), len(_POISSON_FIXED))),
                                     mapped, ends], axis=1), axis=1)
        a, b = br[:, :-1], br[:, 1:]
        hh = 0.5 * (b - a)
        th = (0.5 * (a + b))[:, :, None] + hh[:, :, None] * gx[None, None, :]
        w = hh[:, :, None] * gw[None, None, :]
        y = xi[:, None, None] + t * np.tan(th)
        vals = f(y.ravel()).reshape(y.shape)
        vals = np.where(np.isfinite(y), vals, 0.0)
        out[i:i + step] = np.sum(vals * w, axis=(1, 2)) / math.pi
    return out


def _apply_matrix(kernel, x, y, wf):
    """sum_j K(x_i, y_j) wf_j in memory-bounded chunks of x."""
    out = np.empty(len(x))
    step = max(1, _CHUNK // max(len(y), 1))
    for i in range(0, len(x), step):
        out[i:i + step] = kernel(x[i:i + step, None], y[None, :]) @ wf
    return out


def _apply_banded(kernel, x, y, wf, c, width, block=64):
    """As _apply_matrix, keeping only y within ``width`` of c x (y sorted)."""
    out = np.empty(len(x))
    order = np.argsort(x, kind="stable")
    xs = x[order]
    for i in range(0, len(xs), block):
        xb = xs[i:i + block]
        j0 = np.searchsorted(y, c * xb[0] - width, "left")
        j1 = np.searchsorted(y, c * xb[-1] + width, "right")
        if j1 > j0:
            out[order[i:i + block]] = kernel(xb[:, None], y[None, j0:j1]) @ wf[j0:j1]
        else:
            out[order[i:i + block]] = 0.0
    return out


@lru_cache(maxsize=32)
def _gegenbauer_matrix(lam, r, theta_key, n_panels):
    theta = np.frombuffer(theta_key)
    s_breaks = np.linspace(0.0, 1.0, n_panels + 1)
    s, ws = numerics.composite_legendre(s_breaks, 10)
    phi = math.pi * s * s * (3 - 2 * s)
    wphi = ws * 6 * math.pi * s * (1 - s) * np.sin(phi) ** (2 * lam)
    K = _gegenbauer_kernel(lam, theta[:, None], phi[None, :], r)
    M = K * wphi[None, :]
    M.setflags(write=False)
    phi.setflags(write=False)
    return M, phi


def _gegenbauer_panels(r):
    return int(max(8, math.ceil(1.5 * math.pi / max(1 - r, 1e-3))))


def _jacobi_rule(a, b, n):
    if a == b:
        ur, wr = np.array([1.0]), np.array([1.0])
    else:
        ur, wr = numerics.gauss_jacobi_unit(n, a - b - 1, b)
        wr = wr / wr.sum()
    r = np.sqrt(ur)
    if b == -0.5:
        cpsi, wpsi = np.array([1.0, -1.0]), np.array([0.5, 0.5])
    else:
        v, wv = numerics.gauss_jacobi_unit(n, b - 0.5, b - 0.5)
        cpsi, wpsi = 2 * v - 1, wv / wv.sum()
    rr = np.repeat(r, len(cpsi))
    cc = np.tile(cpsi, len(r))
    ww = np.repeat(wr, len(cpsi)) * np.tile(wpsi, len(r))
    return rr, cc, ww


def jacobi_product_argument(x, t, r, cpsi):
    """z with cosh^2 z = |cosh x cosh t + r e^{i psi} sinh x sinh t|^2."""
    shx, chx = np.sinh(x), np.cosh(x)
    sht, cht = math.sinh(t), math.cosh(t)
    s2 = (shx ** 2 + sht ** 2 + shx ** 2 * sht ** 2 * (1 + r * r)
          + 2 * r * cpsi * shx * sht * chx * cht)
    return np.arcsinh(np.sqrt(np.clip(s2, 0, None)))


def _jacobi_values(spec, f, t, x, n=JACOBI_RULE):
    rr, cc, ww = _jacobi_rule(spec.alpha, spec.beta, n)
    out = np.empty(len(x))
    step = max(1, _CHUNK // len(ww))
    for i in range(0, len(x), step):
        xi = x[i:i + step, None]
        z = jacobi_product_argument(xi, t, rr[None, :], cc[None, :])
        out[i:i + step] = f(z.ravel()).reshape(z.shape) @ ww
    return out


def _jacobi_kernel_values(spec, f, t, x, n=64):
    """Kernel route: int over |x - t| < z < x + t with z = m + h cos(theta)."""
    gx, gw = numerics.gauss_legendre(n)
    th = 0.5 * math.pi * (gx + 1)
    wth = 0.5 * math.pi * gw
    m = 0.5 * ((x + t) + np.abs(x - t))
    h = 0.5 * ((x + t) - np.abs(x - t))
    z = m[:, None] + h[:, None] * np.cos(th)[None, :]
    jac = h[:, None] * np.sin(th)[None, :]
    K = _jacobi_kernel(spec.alpha, spec.beta, np.broadcast_to(x[:, None], z.shape), t, z)
    dens = spec.measure.density(z)
    val = np.sum(f(z.ravel()).reshape(z.shape) * K * dens * jac * wth[None, :], axis=1)
    # at x = 0 the support collapses to z = t
    return np.where(x == 0, f(np.full(len(x), t)), val)


# ---------------------------------------------------------- evaluation core

def _values(spec, f, t, x, method="auto"):
    fam = spec.family
    if fam == HERMITE and spec.d != 1:
        raise UnsupportedFamilyError("translate supports hermite-heat in dimension 1 only")
    if method == "series":
        coeffs = project(spec, f, t=t)
        return translate_series(coeffs, t, x).values
    if fam in (HERMITE, GAUSS_WEIERSTRASS, LAGUERRE):
        y, w = _gauss_rule(spec, f, t, x)
        if len(y) == 0:
            return np.zeros(len(x))
        wf = w * f(y)
        sigma, c = _gauss_profile(spec, t)
        return _apply_banded(lambda xx, yy: kernel_eval(spec, xx, yy, t), x, y, wf, c, 12.0 * sigma)
    if fam == POISSON:
        lo, hi = f.support
        if math.isfinite(lo) and math.isfinite(hi):
            y, w = _poisson_rule_compact(f, t)
            return _apply_matrix(lambda xx, yy: kernel_eval(spec, xx, yy, t), x, y, w * f(y))
        return _poisson_theta_values(f, t, x)
    if fam == GEGENBAUER:
        if spec.lam < 0.25 and method != "kernel":
            coeffs = project(spec, f, t=t)
            return translate_series(coeffs, t, x).values
        if spec.lam <= 0:
            raise UnsupportedFamilyError("the kernel integral diverges for lam <= 0; use the series")
        M, phi = _gegenbauer_matrix(spec.lam, t, np.ascontiguousarray(x, float).tobytes(),
                                    _gegenbauer_panels(t))
        return M @ f(phi)
    if method == "kernel":
        return _jacobi_kernel_values(spec, f, t, x)
    return _jacobi_values(spec, f, t, x)


def evaluate(spec, f, t, x, method="auto"):
    """Values of T^t f at the points x (no GridFunction wrapper)."""
    f = as_function(f, spec)
    t = _check_time(spec, t)
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    if t == spec.identity_time():
        return f(x).reshape(shape)
    if spec.family == JACOBI:
        x = np.abs(x)
    return _values(spec, f, t, x, method).reshape(shape)


def translate(spec, f, t, out_nodes, q=None, method="auto", estimate_error=True):
    """T^t f sampled on ``out_nodes`` as a GridFunction.

    ``meta['err_est']`` compares the rule with a coarser one on the same
    panels (an overestimate for the smooth families).
    """
    fn = as_function(f, spec)
    t = _check_time(spec, t)
    nodes = np.asarray(out_nodes, dtype=float)
    vals = evaluate(spec, fn, t, nodes, method)
    err = 0.0
    if estimate_error and t != spec.identity_time() and spec.family in PARABOLIC:
        y, w = _gauss_rule(spec, fn, t, nodes, n=12)
        if len(y):
            coarse = _apply_matrix(lambda xx, yy: kernel_eval(spec, xx, yy, t), nodes, y, w * fn(y))
            err = float(np.max(np.abs(coarse - vals)))
    meta = {"t": t, "family": spec.describe(), "method": method, "err_est": err}
    return GridFunction(nodes, vals, spec.domain if spec.d == 1 else DomainSpec(), spec.measure, meta)


class Translated:
    """Lazy T^t f, usable wherever a function is expected."""

    analytic_order = 0

    def __init__(self, spec, f, t, method="auto"):
        self.spec = spec
        self.f = as_function(f, spec)
        self.t = _check_time(spec, t)
        self.method = method
        self.domain_kind = spec.domain.kind
        self._geometry()

    def _geometry(self):
        spec, f, t = self.spec, self.f, self.t
        lo, hi = f.support
        self.scale = f.scale
        self.breakpoints = tuple(f.breakpoints)
        self.decay = f.decay
        self.core = getattr(f, "core", None)
        fam = spec.family
        if fam in (HERMITE, GAUSS_WEIERSTRASS, LAGUERRE):
            sigma, c = _gauss_profile(spec, t)
            w = 12.0 * sigma
            if math.isfinite(lo):
                lo = min(lo, c * lo) - w
            if math.isfinite(hi):
                hi = max(hi, c * hi) + w
            if fam == LAGUERRE:
                lo = max(lo, 0.0)
            self.decay = "gaussian" if f.decay != "none" else "none"
        elif fam == POISSON:
            if math.isfinite(lo) and math.isfinite(hi):
                self.core = (lo - 5 * t, hi + 5 * t)
            lo, hi = -math.inf, math.inf
            self.decay = "algebraic"
        elif fam == JACOBI:
            lo, hi = max(0.0, lo - t), hi + t
            bps = {abs(p + s * t) for p in f.breakpoints for s in (-1, 1)} | {t}
            self.breakpoints = tuple(sorted(p for p in bps if p > 0))
        self.support = (lo, hi)

    def __call__(self, x):
        return evaluate(self.spec, self.f, self.t, x, self.method)

    def __repr__(self):
        return f"Translated({self.spec.describe()}, {self.f}, t={self.t!r})"


def iterate_translate(spec, f, t, k, out_nodes, q=None, method="auto"):
    """(T^t)^k f by nesting; for the semigroup families this equals T^{kt} f."""
    k = int(k)
    if not 1 <= k <= MAX_ITERATE:
        raise TranslateError(f"iteration count must lie in [1, {MAX_ITERATE}]")
    g = as_function(f, spec)
    for _ in range(k - 1):
        g = Translated(spec, g, t, method)
    out = translate(spec, g, t, out_nodes, q, method)
    err = k * out.meta["err_est"]
    flag = err > 1e-4
    if flag:
        warnings.warn(f"compounded quadrature error estimate {err:.2e} exceeds 1e-4", stacklevel=2)
    return out.with_values(out.values, k=k, err_est=err, warning=flag)


# ------------------------------------------------------------------- series

@dataclass(frozen=True, eq=False)
class SeriesCoeffs:
    spec: TranslationSpec
    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self):
        if self.spec.family not in SERIES_FAMILIES or (self.spec.family == HERMITE and self.spec.d != 1):
            raise UnsupportedFamilyError(f"{self.spec.describe()} has no eigenbasis path")
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))

    @property
    def N(self):
        return len(self.coeffs) - 1


def eigen_multiplier(spec, k, t):
    k = np.asarray(k, dtype=float)
    if spec.family == HERMITE:
        return np.exp(-(2 * k + spec.d) * t)
    if spec.family == LAGUERRE:
        return np.exp(-(2 * k + spec.alpha + 1) * t)
    if spec.family == GEGENBAUER:
        return t ** k
    raise UnsupportedFamilyError(f"{spec.describe()} has no eigenbasis path")


def eigen_basis(spec, N, x):
    """Rows u_0..u_N evaluated at x."""
    x = np.asarray(x, dtype=float)
    if spec.family == HERMITE:
        return specfun.hermite_fn_all(N, x)
    if spec.family == LAGUERRE:
        return np.array([specfun.laguerre_fn(k, spec.alpha, np.abs(x)) for k in range(N + 1)])
    if spec.family == GEGENBAUER:
        c = np.clip(np.cos(x), -1, 1)
        return np.array([specfun.gegenbauer_poly(k, spec.lam, c) for k in range(N + 1)])
    raise UnsupportedFamilyError(f"{spec.describe()} has no eigenbasis path")


def project(spec, f, N=None, t=None, q=None):
    """Expansion coefficients a_0..a_N of f in the family's eigenbasis."""
    if spec.family not in SERIES_FAMILIES:
        raise UnsupportedFamilyError(f"{spec.describe()} has no eigenbasis path")
    f = as_function(f, spec)
    if N is None:
        N = _series_length(t) if (spec.family == GEGENBAUER and t is not None) else 60
    q = q or QuadSpec(abs_tol=1e-13, rel_tol=1e-11, max_subdivisions=20000)
    lo, hi = f.support
    dom = spec.domain
    if spec.family == GEGENBAUER:
        interval = (0.0, math.pi)
    else:
        dlo, dhi = dom.bounds
        interval = (max(lo, dlo), min(hi, dhi))
        if not (math.isfinite(interval[0]) and math.isfinite(interval[1])):
            R = 40.0
            interval = (max(interval[0], -R), min(interval[1], R))

    def integrand(x):
        return (eigen_basis(spec, N, x) * f(x)[None, :]).T

    val, _ = numerics.integrate(integrand, dom if spec.d == 1 else DomainSpec(), spec.measure, q,
                                interval=interval, breakpoints=f.breakpoints, batch=True)
    if spec.family == GEGENBAUER:
        val = val / np.array([specfun.gegenbauer_norm_sq(k, spec.lam) for k in range(N + 1)])
    return SeriesCoeffs(spec, val)


def translate_series(coeffs, t, out_nodes):
    spec = coeffs.spec
    t = _check_time(spec, t)
    nodes = np.asarray(out_nodes, dtype=float)
    ks = np.arange(coeffs.N + 1)
    m = eigen_multiplier(spec, ks, t)
    vals = (m * coeffs.coeffs) @ eigen_basis(spec, coeffs.N, nodes)
    return GridFunction(nodes, vals, spec.domain, spec.measure,
                        {"t": t, "family": spec.describe(), "method": "series", "N": coeffs.N})


# ---------------------------------------------------------------- generator

FD_STEP = 1e-3
MAX_GENERATOR_ORDER = 3


def _second_derivs(f, x, h):
    """(f, f', f'') at x: analytic when available, else a 5-point stencil."""
    if getattr(f, "analytic_order", 0) >= 2 and isinstance(f, funcexpr.FuncExpr):
        return f(x), f.deriv(x, 1), f.deriv(x, 2)
    offs = np.array([-2, -1, 0, 1, 2], dtype=float) * h
    pts = x[:, None] + offs[None, :]
    v = f(pts.ravel()).reshape(pts.shape)
    d1 = (v[:, 0] - 8 * v[:, 1] + 8 * v[:, 3] - v[:, 4]) / (12 * h)
    d2 = (-v[:, 0] + 16 * v[:, 1] - 30 * v[:, 2] + 16 * v[:, 3] - v[:, 4]) / (12 * h * h)
    return v[:, 2], d1, d2


class Generated:
    """Lazy D_(2) f for one family; nested instances give D^r."""

    analytic_order = 0

    def __init__(self, spec, f, h=FD_STEP):
        self.spec = spec
        self.f = as_function(f, spec)
        self.h = h
        self.support = self.f.support
        self.breakpoints = tuple(self.f.breakpoints)
        self.scale = self.f.scale
        self.decay = self.f.decay
        self.domain_kind = spec.domain.kind
        self.core = getattr(self.f, "core", None)

    def _derivs(self, x):
        return _second_derivs(self.f, x, self.h)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = x.ravel()
        v, d1, d2 = self._derivs(x)
        spec = self.spec
        fam = spec.family
        if fam == HERMITE:
            out = d2 - x * x * v
        elif fam == GAUSS_WEIERSTRASS:
            out = spec.b ** 2 * d2
        elif fam == POISSON:
            out = -d2
        elif fam == LAGUERRE:
            a = spec.alpha
            with np.errstate(divide="ignore", invalid="ignore"):
                pot = np.where(x != 0, x * x + (a * a - 0.25) / (x * x), 0.0)
            out = 0.5 * d2 - 0.5 * pot * v
        elif fam == GEGENBAUER:
            with np.errstate(divide="ignore", invalid="ignore"):
                cot = np.cos(x) / np.sin(x)
            out = -(d2 + 2 * spec.lam * cot * d1)
        else:
            out = d2 + specfun.jacobi_q(spec.alpha, spec.beta, np.maximum(np.abs(x), 1e-300)) * d1
        return out.reshape(shape)


def generator_function(spec, f, r=1, h=FD_STEP):
    """Lazy D^r f; the finite-difference step grows tenfold per nesting level."""
    r = int(r)
    if not 1 <= r <= MAX_GENERATOR_ORDER:
        raise TranslateError(f"generator order must lie in [1, {MAX_GENERATOR_ORDER}]")
    g = as_function(f, spec)
    for level in range(r):
        g = Generated(spec, g, h * 10 ** level)
    return g


def _grid_derivs(x, v):
    """First and second derivatives of samples on a uniform grid.

    Fourth-order central stencils inside, second-order one-sided at the ends.
    """
    h = x[1] - x[0]
    d1 = np.gradient(v, h, edge_order=2)
    d2 = np.gradient(d1, h, edge_order=2)
    d1[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    d2[2:-2] = (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2] + 16 * v[3:-1] - v[4:]) / (12 * h * h)
    return d1, d2


def apply_generator(spec, f, r, nodes, h=FD_STEP):
    """D^r f on ``nodes``.

    A GridFunction on a uniform grid is differentiated on its own nodes
    (``nodes`` must then be those nodes); anything else goes through
    :func:`generator_function` with step ``h``.
    """
    nodes = np.asarray(nodes, dtype=float)
    r = int(r)
    if isinstance(f, GridFunction):
        x = f.nodes
        if len(x) != len(nodes) or np.any(x != nodes):
            raise TranslateError("grid input: nodes must be the function's own nodes")
        step = np.diff(x)
        if len(x) < 5 or np.ptp(step) > 1e-9 * step[0]:
            raise TranslateError("grid input needs at least 5 uniformly spaced nodes")
        if not 1 <= r <= MAX_GENERATOR_ORDER:
            raise TranslateError(f"generator order must lie in [1, {MAX_GENERATOR_ORDER}]")
        v = np.asarray(f.values, dtype=float)
        for _ in range(r):
            d1, d2 = _grid_derivs(x, v)
            v = _OnGridGenerated(spec, v, d1, d2)(x)
        return GridFunction(nodes, v, spec.domain, spec.measure,
                            {"family": spec.describe(), "r": r, "fd_step": float(step[0])})
    g = generator_function(spec, f, r, h)
    return GridFunction(nodes, g(nodes), spec.domain, spec.measure,
                        {"family": spec.describe(), "r": r, "fd_step": h})


class _OnGridGenerated(Generated):
    def __init__(self, spec, v, d1, d2):
        self.spec = spec
        self._v = (v, d1, d2)

    def _derivs(self, x):
        return self._v


# ---------------------------------------------------------------- norm probe

def default_nodes(spec, funcs, t=0.0, n=2001):
    """An evaluation grid covering the supports of the inputs and their translates."""
    fam = spec.family
    if fam == GEGENBAUER:
        return np.linspace(0.0, math.pi, n)
    lo, hi = math.inf, -math.inf
    for f in funcs:
        flo, fhi = as_function(f, spec).support
        lo, hi = min(lo, flo), max(hi, fhi)
    if not math.isfinite(lo) or not math.isfinite(hi):
        lo, hi = -12.0, 12.0
    pad = {POISSON: 8.0, JACOBI: t + 0.5}.get(fam, 4.0 + 6 * math.sqrt(max(t, 0.0)) * max(spec.b, 1.0))
    if fam in (LAGUERRE, JACOBI):
        return np.linspace(0.0, hi + pad, n)
    return np.linspace(lo - pad, hi + pad, n)


def norm_probe(spec, p, family, t_grid, nodes=None):
    """max over members and times of ||T^t f||_p / ||f||_p on a grid.

    Returns (value, rows) where rows lists (member, t, ratio).
    """
    family = [as_function(f, spec) for f in family]
    if not family:
        raise TranslateError("norm_probe needs a nonempty family")
    rows = []
    for f in family:
        grid = default_nodes(spec, [f], max(t_grid)) if nodes is None else np.asarray(nodes, float)
        base = numerics.pnorm(GridFunction(grid, f(grid), spec.domain, spec.measure), p)
        if base == 0:
            raise TranslateError(f"member {f} has zero norm")
        for t in t_grid:
            g = translate(spec, f, t, grid, estimate_error=False)
            rows.append((str(f), float(t), numerics.pnorm(g, p) / base))
    return max(r[2] for r in rows), rows
