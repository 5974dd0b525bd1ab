"""Quadrature, grids and weighted p-norms on the operator domains.

``integrate`` is a globally adaptive Gauss-Kronrod (7/15) scheme evaluated in
batches: every refinement pass evaluates all new intervals with one call of
the integrand, and integrands may return a trailing batch axis so that many
related integrals share one interval list.  Fixed composite rules
(``composite_legendre``, ``gauss_jacobi_unit``) are provided for the Nystrom
discretisations in ``translate``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from . import specfun

REAL_LINE = "real"
HALF_LINE = "half"
ZERO_PI = "zero_pi"
UNIT_DISK = "disk"
_KINDS = (REAL_LINE, HALF_LINE, ZERO_PI, UNIT_DISK)

_LOG_2PI_HALF = 0.5 * math.log(2 * math.pi)


class NumericsError(ValueError):
    pass


class DomainError(NumericsError):
    pass


class QuadratureError(ArithmeticError):
    """Subdivision budget exhausted; ``value`` and ``err`` hold the partial result."""

    def __init__(self, message, value=None, err=None):
        super().__init__(message)
        self.value = value
        self.err = err


@dataclass(frozen=True)
class DomainSpec:
    kind: str = REAL_LINE
    dim: int = 1

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if self.dim not in (1, 2, 3):
            raise DomainError("dimension must be 1, 2 or 3")
        if self.dim > 1 and self.kind != REAL_LINE:
            raise DomainError("only the real line carries dimension > 1")

    @property
    def bounds(self):
        if self.kind == REAL_LINE:
            return (-math.inf, math.inf)
        if self.kind == HALF_LINE:
            return (0.0, math.inf)
        # the disk is parametrised by the angle; the radius is the time variable
        return (0.0, math.pi)

    def contains(self, x, slack=1e-12):
        lo, hi = self.bounds
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= lo - slack) & (x <= hi + slack)))


@dataclass(frozen=True)
class MeasureSpec:
    kind: str = "lebesgue"
    lam: float | None = None
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in ("lebesgue", "gegenbauer", "jacobi", "jacobi_dual"):
            raise NumericsError(f"unknown measure {self.kind!r}")
        if self.kind == "gegenbauer" and (self.lam is None or self.lam <= -0.5):
            raise NumericsError("Gegenbauer weight needs lam > -1/2")
        if self.kind in ("jacobi", "jacobi_dual"):
            a, b = self.alpha, self.beta
            if a is None or b is None or not (a >= b >= -0.5 and a > -0.5):
                raise NumericsError("Jacobi weight needs alpha >= beta >= -1/2, alpha > -1/2")

    @property
    def rho(self):
        return self.alpha + self.beta + 1.0

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "lebesgue":
            return np.ones_like(x)
        if self.kind == "gegenbauer":
            with np.errstate(divide="ignore"):
                return np.abs(np.sin(x)) ** (2 * self.lam)
        if self.kind == "jacobi":
            return np.exp(self.log_density(x))
        return specfun.jacobi_c_inv_sq(np.abs(x), self.alpha, self.beta) / math.sqrt(2 * math.pi)

    def log_density(self, x):
        """log of the hyperbolic Jacobi density, stable for large x."""
        if self.kind != "jacobi":
            return np.log(self.density(x))
        a, b = self.alpha, self.beta
        x = np.abs(np.asarray(x, dtype=float))
        # log sinh and log cosh without overflow
        log_sh = x + np.log(-np.expm1(-2 * x) / 2, where=x > 0, out=np.full_like(x, -np.inf))
        log_ch = x + np.log1p(np.exp(-2 * x)) - math.log(2)
        with np.errstate(invalid="ignore"):
            s = np.where(2 * a + 1 == 0, 0.0, (2 * a + 1) * log_sh)
        return 2 * self.rho * math.log(2) + s + (2 * b + 1) * log_ch - _LOG_2PI_HALF


LEBESGUE = MeasureSpec()


def gegenbauer_measure(lam):
    return MeasureSpec("gegenbauer", lam=lam)


def jacobi_measure(alpha, beta):
    return MeasureSpec("jacobi", alpha=alpha, beta=beta)


def jacobi_dual_measure(alpha, beta):
    return MeasureSpec("jacobi_dual", alpha=alpha, beta=beta)


@dataclass(frozen=True)
class QuadSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    truncation_radius: float | None = None
    max_subdivisions: int = 2000

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0 or self.max_subdivisions <= 0:
            raise NumericsError("quadrature tolerances and budget must be positive")
        if self.truncation_radius is not None and self.truncation_radius <= 0:
            raise NumericsError("truncation radius must be positive")

    def radius(self, measure=LEBESGUE):
        if self.truncation_radius is not None:
            return float(self.truncation_radius)
        if measure.kind == "jacobi":
            return 40.0 / measure.rho
        return 12.0


@dataclass(frozen=True, eq=False)
class GridFunction:
    nodes: np.ndarray
    values: np.ndarray
    domain: DomainSpec = DomainSpec()
    measure: MeasureSpec = LEBESGUE
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 2:
            raise NumericsError("a grid function needs at least two nodes")
        if np.any(np.diff(nodes) <= 0):
            raise NumericsError("grid nodes must be strictly increasing")
        if values.shape != nodes.shape:
            raise NumericsError("values and nodes differ in length")
        if not np.all(np.isfinite(values)):
            raise NumericsError("grid values must be finite")
        if not self.domain.contains(nodes):
            raise DomainError("grid nodes leave the domain")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    def with_values(self, values, **meta):
        return GridFunction(self.nodes, values, self.domain, self.measure, {**self.meta, **meta})


# Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_KX = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])
_EPS = np.finfo(float).eps


def _gk15(g, a, b):
    """Kronrod value and QUADPACK-style error per interval; g returns (n, m)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * _KX[None, :]
    fx = g(x.ravel()).reshape(len(a), 15, -1)
    hk = h[:, None]
    k = hk * np.einsum("imj,m->ij", fx, _KW)
    gs = hk * np.einsum("imj,m->ij", fx, _GW)
    mean = k / (2 * hk)
    resasc = hk * np.einsum("imj,m->ij", np.abs(fx - mean[:, None, :]), _KW)
    resabs = hk * np.einsum("imj,m->ij", np.abs(fx), _KW)
    err = np.abs(k - gs)
    with np.errstate(invalid="ignore", divide="ignore"):
        scaled = np.where(resasc > 0, resasc * np.minimum(1.0, (200 * err / resasc) ** 1.5), err)
    floor = 50 * _EPS * resabs
    return k, np.maximum(scaled, floor)


def _adaptive(g, breaks, q):
    """Adaptive GK15 over the panels given by ``breaks``; returns (value, err) arrays."""
    a = np.asarray(breaks[:-1], dtype=float)
    b = np.asarray(breaks[1:], dtype=float)
    keep = b > a
    a, b = a[keep], b[keep]
    if len(a) == 0:
        return None, None
    val, err = _gk15(g, a, b)
    done_val = np.zeros(val.shape[1])
    done_err = np.zeros(val.shape[1])
    used = 0
    while True:
        total = done_val + val.sum(axis=0)
        total_err = done_err + err.sum(axis=0)
        tol = np.maximum(q.abs_tol, q.rel_tol * np.abs(total))
        if np.all(total_err <= tol) or len(a) == 0:
            return total, total_err
        share = tol / max(len(a), 1)
        split = np.any(err > share[None, :], axis=1)
        if not np.any(split):
            split = np.any(err >= err.mean(axis=0)[None, :], axis=1)
        tiny = (b - a) <= 1e3 * _EPS * np.maximum(np.abs(a), np.abs(b))
        # intervals at roundoff width are frozen
        frozen = split & tiny
        if np.any(frozen):
            done_val += val[frozen].sum(axis=0)
            done_err += err[frozen].sum(axis=0)
            split &= ~tiny
            keep = ~frozen
            a, b, val, err = a[keep], b[keep], val[keep], err[keep]
            split = split[keep]
            if not np.any(split):
                continue
        used += int(split.sum())
        if used > q.max_subdivisions:
            raise QuadratureError("subdivision budget exhausted", total, total_err)
        m = 0.5 * (a[split] + b[split])
        na = np.concatenate([a[split], m])
        nb = np.concatenate([m, b[split]])
        nv, ne = _gk15(g, na, nb)
        a = np.concatenate([a[~split], na])
        b = np.concatenate([b[~split], nb])
        val = np.concatenate([val[~split], nv])
        err = np.concatenate([err[~split], ne])


def _as_batch(f, batch):
    def g(x):
        v = np.asarray(f(x), dtype=float)
        if batch:
            return v.reshape(len(x), -1)
        return v.reshape(len(x), 1)
    return g


def integrate(f, domain=DomainSpec(), measure=LEBESGUE, q=QuadSpec(), interval=None,
              breakpoints=(), batch=False):
    """Integrate f against ``measure`` over ``domain`` (or the sub-``interval``).

    Infinite ends are truncated at ``q.radius(measure)``; the size of the
    integrand at the cut is added to the error estimate as a tail bound for
    the Gaussian and exponential decay classes.  On the half line the
    substitution x = R s^2 removes square-root behaviour at the origin; for a
    Gegenbauer weight with lam < 0 the ends of [0, pi] are flattened by a
    power substitution.  With ``batch=True`` f returns shape (n, m) and m
    integrals are computed on a shared interval list.
    """
    lo, hi = domain.bounds if interval is None else (float(interval[0]), float(interval[1]))
    dlo, dhi = domain.bounds
    if lo < dlo - 1e-12 or hi > dhi + 1e-12 or not lo < hi:
        raise DomainError(f"interval [{lo}, {hi}] not inside the domain")
    R = q.radius(measure)
    cut_lo, cut_hi = math.isinf(lo), math.isinf(hi)
    if cut_lo:
        lo = -R
    if cut_hi:
        hi = max(R, lo + R) if lo >= 0 else R
    g = _as_batch(f, batch)
    dens = measure.density

    def weighted(x):
        return g(x) * dens(x)[:, None]

    bps = np.asarray(sorted(float(p) for p in breakpoints if lo < p < hi))
    if domain.kind == HALF_LINE and lo == 0.0:
        span = hi

        def integrand(s):
            x = span * s * s
            return weighted(x) * (2 * span * s)[:, None]

        sb = np.concatenate([[0.0], np.sqrt(bps / span), [1.0]])
        value, err = _adaptive(integrand, sb, q)
    elif measure.kind == "gegenbauer" and measure.lam < 0 and lo == 0.0 and hi == math.pi:
        k = 1.0 / (2 * measure.lam + 1)
        half = 0.5 * math.pi

        def left(s):
            x = half * s ** k
            jac = half * k * s ** (k - 1)
            return weighted(x) * jac[:, None]

        def right(s):
            x = math.pi - half * s ** k
            jac = half * k * s ** (k - 1)
            return weighted(x) * jac[:, None]

        lb = np.concatenate([[0.0], (bps[bps < half] / half) ** (1 / k), [1.0]])
        rb = np.concatenate([[0.0], ((math.pi - bps[bps > half])[::-1] / half) ** (1 / k), [1.0]])
        v1, e1 = _adaptive(left, np.unique(lb), q)
        v2, e2 = _adaptive(right, np.unique(rb), q)
        value, err = v1 + v2, e1 + e2
    else:
        value, err = _adaptive(weighted, np.concatenate([[lo], bps, [hi]]), q)
    if value is None:
        value, err = np.zeros(1), np.zeros(1)
    tail = np.zeros_like(value)
    if cut_lo:
        tail += np.abs(weighted(np.array([lo]))[0])
    if cut_hi:
        tail += np.abs(weighted(np.array([hi]))[0])
    err = err + tail
    if batch:
        return value, err
    return float(value[0]), float(err[0])


def _parse_p(p):
    if isinstance(p, str):
        p = math.inf if p.strip().lower() in ("inf", "infinity", "oo") else float(p)
    p = float(p)
    if not p >= 1:
        raise NumericsError(f"p must lie in [1, inf], got {p}")
    return p


def trapezoid_weights(nodes):
    nodes = np.asarray(nodes, dtype=float)
    w = np.zeros_like(nodes)
    d = np.diff(nodes)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def pnorm(f, p=2, measure=None, q=QuadSpec(), domain=None, interval=None, breakpoints=()):
    """(int |f|^p dmu)^(1/p).

    A GridFunction is integrated by the trapezoid rule on its own nodes and
    p = inf is the maximum over those nodes.  A callable goes through
    ``integrate``; for p = inf it is sampled on 4001 equispaced points of the
    (truncated) interval.
    """
    p = _parse_p(p)
    if isinstance(f, GridFunction):
        measure = f.measure if measure is None else measure
        v = np.abs(f.values)
        if math.isinf(p):
            return float(v.max())
        dens = measure.density(f.nodes)
        return float(np.sum(trapezoid_weights(f.nodes) * v ** p * dens) ** (1.0 / p))
    measure = LEBESGUE if measure is None else measure
    domain = DomainSpec() if domain is None else domain
    if math.isinf(p):
        lo, hi = domain.bounds if interval is None else interval
        R = q.radius(measure)
        lo, hi = max(lo, -R), min(hi, R)
        x = np.linspace(lo, hi, 4001)
        return float(np.max(np.abs(f(x))))
    val, _ = integrate(lambda x: np.abs(f(x)) ** p, domain, measure, q, interval, breakpoints)
    return max(val, 0.0) ** (1.0 / p)


def make_grid(domain, spec):
    """Parse "a:b:n" into n equispaced nodes from a to b inside the domain."""
    if isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) != 3:
            raise NumericsError(f"grid must be 'a:b:n', got {spec!r}")
        try:
            a, b = (_parse_float(s) for s in parts[:2])
            n = int(parts[2])
        except ValueError as exc:
            raise NumericsError(f"malformed grid {spec!r}") from exc
    else:
        a, b, n = spec
    if n < 2 or not a < b:
        raise NumericsError("grid needs n >= 2 and a < b")
    lo, hi = domain.bounds
    if a < lo - 1e-12 or b > hi + 1e-12:
        raise DomainError(f"grid [{a}, {b}] leaves the domain [{lo}, {hi}]")
    return np.linspace(a, b, int(n))


def _parse_float(s):
    s = s.strip().lower()
    for name, val in (("pi", math.pi),):
        if s in (name, "+" + name):
            return val
        if s == "-" + name:
            return -val
    return float(s)


@lru_cache(maxsize=64)
def gauss_legendre(n):
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_legendre(breaks, n=20):
    """Nodes and weights of n-point Gauss-Legendre on every panel of ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(n)
    a, b = breaks[:-1], breaks[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    h = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + h[:, None] * x[None, :]
    weights = h[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


@lru_cache(maxsize=64)
def gauss_jacobi_unit(n, a, b):
    """Nodes/weights on [0, 1] for the weight (1-u)^a u^b (unnormalised)."""
    s, w = roots_jacobi(n, a, b)
    u = 0.5 * (1 + s)
    w = w / 2 ** (a + b + 1)
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


def panel_breaks(lo, hi, width, extra=()):
    """Breakpoints covering [lo, hi] with panels no wider than ``width``."""
    pts = sorted({float(lo), float(hi), *(float(e) for e in extra if lo < e < hi)})
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        m = max(1, int(math.ceil((b - a) / width)))
        out.extend(np.linspace(a, b, m + 1)[1:].tolist())
    return np.asarray(out)
