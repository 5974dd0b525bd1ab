"""Fourier, cosine and Jacobi transforms as direct quadratures.

Normalisations::

    Fourier  F f(z) = int f(x) e^{-ixz} dx,        inverse 1/(2 pi) int F(z) e^{ixz} dz
    Cosine   C f(z) = 2 int_0^inf f(x) cos(xz) dx, inverse 1/pi int_0^inf C(z) cos(xz) dz
    Jacobi   J f(l) = int_0^inf f(x) phi_l(x) dmu(x), inverse int_0^inf J(l) phi_l(x) dnu(l)

with dmu = (2 pi)^{-1/2} w(x) dx and dnu = (2 pi)^{-1/2} |c(l)|^{-2} dl, which
makes J an isometry of L^2_mu onto L^2_nu.  The cosine transform acts on
even functions given on [0, inf) (or on R, using only x >= 0).

Forward transforms use a fixed composite Gauss-Legendre rule in x whose
panels resolve both the input and the highest requested frequency.
Spectral grids are caller supplied; ``spectral_rule`` builds Gauss nodes with
weights so that inverses and spectral norms are accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import numerics, specfun, translate as tr
from .numerics import GridFunction, QuadSpec

FOURIER = "fourier"
COSINE = "cosine"
JACOBI = "jacobi"

_ALGEBRAIC_CUTOFF = 1000.0
_MAX_PANELS = 40_000


class TransformError(ValueError):
    pass


class IncompatiblePairError(TransformError):
    pass


@dataclass(frozen=True)
class TransformSpec:
    kind: str
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in (FOURIER, COSINE, JACOBI):
            raise TransformError(f"unknown transform {self.kind!r}")
        if self.kind == JACOBI and not (self.alpha >= self.beta >= -0.5 and self.alpha > -0.5):
            raise TransformError("Jacobi transform needs alpha >= beta >= -1/2, alpha > -1/2")

    @property
    def measure(self):
        if self.kind == JACOBI:
            return numerics.jacobi_measure(self.alpha, self.beta)
        return numerics.LEBESGUE

    @property
    def dual_measure(self):
        if self.kind == JACOBI:
            return numerics.jacobi_dual_measure(self.alpha, self.beta)
        return numerics.LEBESGUE

    @property
    def half_line(self):
        return self.kind in (COSINE, JACOBI)


def fourier():
    return TransformSpec(FOURIER)


def cosine():
    return TransformSpec(COSINE)


def jacobi(alpha, beta):
    return TransformSpec(JACOBI, alpha, beta)


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    kind: str
    nodes: np.ndarray
    values: np.ndarray
    weights: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 1:
            raise TransformError("spectral grid needs at least one node")
        if len(nodes) > 1 and np.any(np.diff(nodes) <= 0):
            raise TransformError("spectral nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", np.asarray(self.values))
        if self.weights is not None:
            object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    def quad_weights(self):
        if self.weights is not None:
            return self.weights
        if len(self.nodes) < 2:
            raise TransformError("need weights or at least two nodes")
        return numerics.trapezoid_weights(self.nodes)


def spectral_rule(lo, hi, n_panels=64, n=20):
    """Composite Gauss-Legendre nodes and weights on [lo, hi]."""
    return numerics.composite_legendre(np.linspace(lo, hi, n_panels + 1), n)


def _check_nodes(ts, lam):
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if ts.half_line and np.any(lam < 0):
        raise TransformError(f"{ts.kind} transform is evaluated at nonnegative frequencies only")
    return lam


def _x_rule(ts, f, zmax, n=20):
    lo, hi = f.support
    if ts.half_line:
        lo = max(lo, 0.0)
    if not math.isfinite(hi) or not math.isfinite(lo):
        cut = _ALGEBRAIC_CUTOFF if getattr(f, "decay", "") in ("algebraic", "none") else 40.0
        lo = -cut if not math.isfinite(lo) else lo
        hi = cut if not math.isfinite(hi) else hi
    if not lo < hi:
        return np.zeros(0), np.zeros(0)
    width = 0.75 * f.scale if math.isfinite(f.scale) else hi - lo
    if zmax > 0:
        # one period of the fastest oscillation per 20-point panel
        width = min(width, 2 * math.pi / zmax)
    extra = list(f.breakpoints)
    core = getattr(f, "core", None)
    if core is not None:
        extra += [c for c in core if lo < c < hi]
    if (hi - lo) / width > _MAX_PANELS:
        raise TransformError("transform rule too large; reduce the frequency range")
    return numerics.composite_legendre(numerics.panel_breaks(lo, hi, width, extra), n)


@lru_cache(maxsize=16)
def _phi_matrix(alpha, beta, lam_key, x_key):
    lam = np.frombuffer(lam_key)
    x = np.frombuffer(x_key)
    m = specfun.jacobi_fn(lam[:, None], alpha, beta, x[None, :])
    m.setflags(write=False)
    return m


def jacobi_phi(alpha, beta, lam, x):
    """phi_lam(x) as a (len(lam), len(x)) matrix, cached."""
    lam = np.ascontiguousarray(lam, dtype=float)
    x = np.ascontiguousarray(x, dtype=float)
    return _phi_matrix(float(alpha), float(beta), lam.tobytes(), x.tobytes())


def _kernel_matrix(ts, lam, x):
    if ts.kind == FOURIER:
        return np.exp(-1j * lam[:, None] * x[None, :])
    if ts.kind == COSINE:
        return 2.0 * np.cos(lam[:, None] * x[None, :])
    return jacobi_phi(ts.alpha, ts.beta, lam, x)


def forward(ts, f, lam_nodes, q=None):
    """Transform of f at the given frequencies."""
    f = tr.as_function(f)
    lam = _check_nodes(ts, lam_nodes)
    zmax = float(np.max(np.abs(lam))) if len(lam) else 0.0
    x, w = _x_rule(ts, f, zmax)
    if len(x) == 0:
        vals = np.zeros(len(lam), dtype=complex if ts.kind == FOURIER else float)
    else:
        wf = w * f(x) * ts.measure.density(x)
        vals = _kernel_matrix(ts, lam, x) @ wf
    return SpectralGrid(ts.kind, lam, vals, meta={"x_nodes": len(x)})


def inverse(ts, F, x_nodes, q=None):
    """Inverse transform of spectral samples, integrated with their quadrature weights."""
    x = np.asarray(x_nodes, dtype=float)
    if ts.half_line and np.any(x < 0):
        x_eval = np.abs(x)
    else:
        x_eval = x
    lam = F.nodes
    w = F.quad_weights()
    vals = np.asarray(F.values)
    if ts.kind == FOURIER:
        out = (np.exp(1j * x_eval[:, None] * lam[None, :]) @ (w * vals)).real / (2 * math.pi)
    elif ts.kind == COSINE:
        out = np.cos(x_eval[:, None] * lam[None, :]) @ (w * vals.real) / math.pi
    else:
        dens = ts.dual_measure.density(lam)
        out = jacobi_phi(ts.alpha, ts.beta, lam, x_eval).T @ (w * dens * vals.real)
    domain = numerics.DomainSpec(numerics.HALF_LINE if (ts.half_line and np.all(x >= 0))
                                 else numerics.REAL_LINE)
    if len(x) >= 2 and np.all(np.diff(x) > 0):
        return GridFunction(x, out, domain, ts.measure, {"transform": ts.kind})
    return out


def spectral_norm(ts, F, p=2):
    """||F||_p with respect to the dual measure (dlambda or dnu)."""
    w = F.quad_weights()
    dens = ts.dual_measure.density(F.nodes)
    v = np.abs(F.values)
    if math.isinf(p):
        return float(v.max())
    return float(np.sum(w * dens * v ** p) ** (1.0 / p))


_PAIRS = {
    (tr.POISSON, COSINE): "exp(-z t)",
    (tr.GAUSS_WEIERSTRASS, FOURIER): "exp(-b^2 t z^2)",
    (tr.JACOBI, JACOBI): "phi_lambda(t)",
}


def multiplier(spec, ts, t, lam):
    key = (spec.family, ts.kind)
    if key not in _PAIRS:
        raise IncompatiblePairError(f"{spec.family} has no multiplier identity for the {ts.kind} transform")
    lam = np.asarray(lam, dtype=float)
    if key[0] == tr.POISSON:
        return np.exp(-lam * t)
    if key[0] == tr.GAUSS_WEIERSTRASS:
        return np.exp(-spec.b ** 2 * t * lam ** 2)
    if (spec.alpha, spec.beta) != (ts.alpha, ts.beta):
        raise IncompatiblePairError("translation and transform use different (alpha, beta)")
    return specfun.jacobi_fn(lam, ts.alpha, ts.beta, t)


def multiplier_residual(spec, ts, f, t, lam_nodes, q=None):
    """sup |I(T^t f) - m(t, lam) I(f)| over the nodes, plus both transforms."""
    lam = _check_nodes(ts, lam_nodes)
    m = multiplier(spec, ts, t, lam)
    f = tr.as_function(f, spec)
    base = forward(ts, f, lam, q)
    moved = forward(ts, tr.Translated(spec, f, t), lam, q)
    res = float(np.max(np.abs(moved.values - m * base.values)))
    return res, base, moved


def convolve(spec, f, g, t_nodes, q=None):
    """f * g on t_nodes.

    Gauss-Weierstrass and Poisson translations are defined by standard
    convolution, so for them f * g(t) = int f(y) g(t - y) dy.  For the other
    families f * g(t) = int T^t f(x) g(x) dmu(x).
    """
    f = tr.as_function(f, spec)
    g = tr.as_function(g, spec)
    t = np.asarray(t_nodes, dtype=float)
    if spec.family in (tr.GAUSS_WEIERSTRASS, tr.POISSON):
        lo, hi = f.support
        if not (math.isfinite(lo) and math.isfinite(hi)):
            f, g = g, f
            lo, hi = f.support
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise TransformError("standard convolution needs one factor of bounded support")
        h = 0.75 * min(f.scale, g.scale)
        y, w = numerics.composite_legendre(
            numerics.panel_breaks(lo, hi, h, list(f.breakpoints)), 20)
        out = np.array([np.sum(w * f(y) * g(ti - y)) for ti in t])
    else:
        lo, hi = g.support
        dlo, dhi = spec.domain.bounds
        lo, hi = max(lo, dlo), min(hi, dhi)
        h = 0.75 * g.scale
        x, w = numerics.composite_legendre(numerics.panel_breaks(lo, hi, h, list(g.breakpoints)), 20)
        wg = w * g(x) * spec.measure.density(x)
        out = np.array([tr.evaluate(spec, f, ti, x) @ wg for ti in t])
    if len(t) >= 2 and np.all(np.diff(t) > 0):
        return GridFunction(t, out, spec.domain, spec.measure, {"convolution": spec.describe()})
    return out


class _Product:
    """f * phi_eta on [0, inf); keeps f's geometry."""

    analytic_order = 0

    def __init__(self, f, eta, alpha, beta):
        self.f, self.eta, self.alpha, self.beta = f, eta, alpha, beta
        self.support = f.support
        self.breakpoints = tuple(f.breakpoints)
        self.scale = f.scale
        self.decay = f.decay

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.f(x) * specfun.jacobi_fn(self.eta, self.alpha, self.beta, np.abs(x))


def dual_translate(f, eta, lam_nodes, alpha, beta, q=None):
    """Dual translation of the Jacobi transform, T_d^eta f^ = J(f phi_eta)."""
    f = tr.as_function(f)
    lo, hi = f.support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise TransformError("dual translation needs a compactly supported input")
    ts = jacobi(alpha, beta)
    out = forward(ts, _Product(f, float(eta), alpha, beta), lam_nodes, q)
    return SpectralGrid(JACOBI, out.nodes, out.values, meta={"eta": float(eta)})
