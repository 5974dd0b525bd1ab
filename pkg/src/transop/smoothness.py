"""Moduli of smoothness and K-functional upper bounds for translation families.

Differences follow Delta_h^r f = (T^h - I)^r f = sum_k (-1)^{r-k} C(r,k) (T^h)^k f.
For the semigroup families (T^h)^k = T^{kh}; the Gegenbauer-Poisson family is
parametrised by the radius e^{-h}, which turns its multiplicative law
T^{r1} T^{r2} = T^{r1 r2} into a semigroup in h; Jacobi translations are
genuinely nested.

K-functional values are upper bounds: the infimum over g is replaced by a
minimum over explicit candidates (time averages of translates, a Fourier
cutoff for Gauss-Weierstrass, and f itself when it is smooth enough).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import numerics, transforms, translate as tr
from .numerics import GridFunction

H_GRID = 16
AVERAGE_POINTS = 8
MAX_ORDER = 3
Q_N_START = 12
Q_N_TOL = 1e-6
CANDIDATE_FACTORS = (0.5, 1.0, 2.0)

AVERAGED = "averaged-difference"
MOLLIFIED = "fourier-mollified"
IDENTITY = "identity"


class SmoothnessError(ValueError):
    pass


def _check(spec, r):
    r = int(r)
    if not 1 <= r <= MAX_ORDER:
        raise SmoothnessError(f"order r must lie in [1, {MAX_ORDER}]")
    if spec.d != 1:
        raise SmoothnessError("smoothness functionals are implemented for d = 1")
    return r


def _param(spec, h):
    """Translation parameter realising T^h."""
    if spec.family == tr.GEGENBAUER:
        return math.exp(-h)
    return h


class _Translates:
    """T^s f on fixed nodes, memoised by time."""

    def __init__(self, spec, f, nodes):
        self.spec = spec
        self.f = tr.as_function(f, spec)
        self.nodes = nodes
        self.cache = {}

    def __call__(self, s):
        s = float(s)
        if s not in self.cache:
            self.cache[s] = tr.evaluate(self.spec, self.f, _param(self.spec, s), self.nodes)
        return self.cache[s]

    def power(self, h, k):
        """(T^h)^k f."""
        if k == 0:
            return self.f(self.nodes)
        if self.spec.family != tr.JACOBI:
            return self(k * h)
        key = ("nest", float(h), k)
        if key not in self.cache:
            g = self.f
            for _ in range(k - 1):
                g = tr.Translated(self.spec, g, h)
            self.cache[key] = tr.evaluate(self.spec, g, h, self.nodes)
        return self.cache[key]

    def delta(self, h, r):
        out = np.zeros(len(self.nodes))
        for k in range(r + 1):
            out += (-1) ** (r - k) * math.comb(r, k) * self.power(h, k)
        return out


def _nodes(spec, f, t, nodes):
    if nodes is not None:
        return np.asarray(nodes, dtype=float)
    return tr.default_nodes(spec, [f], t)


def _norm(spec, nodes, values, p):
    return numerics.pnorm(GridFunction(nodes, values, spec.domain, spec.measure), p)


def delta_r(spec, f, t, r, nodes):
    """Delta_t^r f sampled on nodes."""
    r = _check(spec, r)
    nodes = np.asarray(nodes, dtype=float)
    vals = _Translates(spec, f, nodes).delta(float(t), r) if t > 0 else np.zeros(len(nodes))
    return GridFunction(nodes, vals, spec.domain, spec.measure, {"t": float(t), "r": r})


def h_grid(t, n=H_GRID):
    return [t * j / n for j in range(1, n + 1)]


def modulus_table(spec, f, t, r, p=2, nodes=None, n=H_GRID, _tr=None):
    """[(h, ||Delta_h^r f||_p)] over the h-grid t j / n, j = 1..n."""
    r = _check(spec, r)
    nodes = _nodes(spec, f, r * t, nodes)
    T = _tr or _Translates(spec, f, nodes)
    return [(h, _norm(spec, nodes, T.delta(h, r), p)) for h in h_grid(t, n)]


def modulus(spec, f, t, r, p=2, q=None, nodes=None, n=H_GRID):
    """omega_r(f, t)_p as the maximum over the h-grid (a lower bound of the true sup)."""
    if t <= 0:
        return 0.0
    return max(v for _, v in modulus_table(spec, f, t, r, p, nodes, n))


# ------------------------------------------------------------ candidates

def _simplex_rule(r, n=AVERAGE_POINTS):
    """Nodes S = z_1 + ... + z_r and weights of the tensor rule on (0, 1/r)^r, scaled by r^r."""
    x, w = numerics.gauss_legendre(n)
    z = (x + 1) / (2 * r)
    wz = w / (2 * r)
    S = np.zeros(1)
    W = np.ones(1)
    for _ in range(r):
        S = (S[:, None] + z[None, :]).ravel()
        W = (W[:, None] * wz[None, :]).ravel()
    S = np.round(S, 15)
    uniq, inv = np.unique(S, return_inverse=True)
    return uniq, np.bincount(inv, weights=W) * r ** r


def averaged_candidate(spec, f, t, r, nodes, _tr=None):
    """g_{r,t} = r^r int_{(0,1/r)^r} sum_k (-1)^{k+1} C(r,k) T^{k t S} f dz."""
    r = _check(spec, r)
    nodes = np.asarray(nodes, dtype=float)
    T = _tr or _Translates(spec, f, nodes)
    S, W = _simplex_rule(r)
    out = np.zeros(len(nodes))
    for s, w in zip(S, W):
        for k in range(1, r + 1):
            out += w * (-1) ** (k + 1) * math.comb(r, k) * T(k * t * s)
    return out


def averaged_generator(spec, f, t, r, nodes, _tr=None):
    """D^r g_{r,t} = (r/t)^r sum_k (-1)^{k+1} C(r,k) k^{-r} Delta_{kt/r}^r f."""
    r = _check(spec, r)
    nodes = np.asarray(nodes, dtype=float)
    T = _tr or _Translates(spec, f, nodes)
    out = np.zeros(len(nodes))
    for k in range(1, r + 1):
        out += (-1) ** (k + 1) * math.comb(r, k) * k ** (-r) * T.delta(k * t / r, r)
    return (r / t) ** r * out


def eta(s):
    """Cutoff: 1 on [0,1], 0 beyond 2, a C^2 quintic transition in between."""
    s = np.abs(np.asarray(s, dtype=float))
    u = np.clip(s - 1.0, 0.0, 1.0)
    return 1.0 - u ** 3 * (10 - 15 * u + 6 * u * u)


def mollified_candidate(spec, f, eps, r, nodes, panels=64):
    """g_eps = F^{-1}(eta(z/eps) f^) and D^r g_eps, both on nodes."""
    if spec.family != tr.GAUSS_WEIERSTRASS:
        raise SmoothnessError("the Fourier cutoff candidate is defined for gauss-weierstrass only")
    ts = transforms.fourier()
    z, w = transforms.spectral_rule(-2 * eps, 2 * eps, panels)
    F = transforms.forward(ts, f, z)
    cut = eta(z / eps) * F.values
    g = transforms.inverse(ts, transforms.SpectralGrid(ts.kind, z, cut, w), nodes)
    dmult = (-(spec.b ** 2) * z * z) ** r
    dg = transforms.inverse(ts, transforms.SpectralGrid(ts.kind, z, dmult * cut, w), nodes)
    return np.asarray(getattr(g, "values", g)), np.asarray(getattr(dg, "values", dg))


@dataclass
class KCandidate:
    kind: str
    param: float
    g: GridFunction
    dg: GridFunction
    distance: float
    gen_norm: float
    s: float
    warning: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def value(self):
        return self.distance + self.s * self.gen_norm


def _grid_generator(spec, nodes, values, r):
    g = GridFunction(nodes, values, spec.domain, spec.measure)
    return tr.apply_generator(spec, g, r, nodes).values


def k_candidates(spec, f, s, r, p=2, nodes=None, _tr=None):
    """All candidates used for the K-functional bound at s = t^r."""
    r = _check(spec, r)
    if spec.family not in (tr.HERMITE, tr.GAUSS_WEIERSTRASS):
        raise SmoothnessError("K-functional bounds are implemented for hermite-heat and gauss-weierstrass")
    f = tr.as_function(f, spec)
    t0 = s ** (1.0 / r)
    nodes = _nodes(spec, f, 2 * r * t0, nodes)
    fv = f(nodes)
    T = _tr or _Translates(spec, f, nodes)
    flag = r >= 3
    out = []

    def add(kind, param, gv, dgv, **meta):
        g = GridFunction(nodes, gv, spec.domain, spec.measure)
        dg = GridFunction(nodes, dgv, spec.domain, spec.measure)
        out.append(KCandidate(kind, float(param), g, dg, _norm(spec, nodes, fv - gv, p),
                              _norm(spec, nodes, dgv, p), s, flag, meta))

    for c in CANDIDATE_FACTORS:
        tp = c * t0
        gv = averaged_candidate(spec, f, tp, r, nodes, T)
        add(AVERAGED, tp, gv, _grid_generator(spec, nodes, gv, r))
        if spec.family == tr.GAUSS_WEIERSTRASS:
            eps = 1.0 / (spec.b * math.sqrt(tp))
            gv, dgv = mollified_candidate(spec, f, eps, r, nodes)
            add(MOLLIFIED, eps, gv, dgv)
    if getattr(f, "analytic_order", 0) >= 2 * r:
        add(IDENTITY, 0.0, fv, tr.apply_generator(spec, f, r, nodes).values)
    if flag:
        warnings.warn("third-order generator of a sampled candidate is sensitive to rounding",
                      stacklevel=2)
    return out


def kfunctional_upper(spec, f, s, r, p=2, q=None, nodes=None):
    """Upper bound for K_r(f, s)_p and the minimising candidate."""
    cands = k_candidates(spec, f, s, r, p, nodes)
    best = min(cands, key=lambda c: c.value)
    return best.value, best


def equivalence_report(spec, f, r, p, t_list, nodes=None):
    """Rows comparing omega_r(f,t) with the K bound at s = t^r.

    Each row also carries the two upper-proof quantities for g_{r,t}
    (distance and t^r ||D^r g||) and the lower-proof check over all candidates.
    """
    r = _check(spec, r)
    t_list = sorted(float(t) for t in t_list)
    f = tr.as_function(f, spec)
    nodes = _nodes(spec, f, 2 * r * max(t_list), nodes)
    T = _Translates(spec, f, nodes)
    rows = []
    for t in t_list:
        omega = max(v for _, v in modulus_table(spec, f, t, r, p, nodes, _tr=T))
        cands = k_candidates(spec, f, t ** r, r, p, nodes, T)
        best = min(cands, key=lambda c: c.value)
        own = next(c for c in cands if c.kind == AVERAGED and c.param == t)
        lower = max(omega - (2 ** r * c.distance + t ** r * c.gen_norm) for c in cands)
        rows.append({
            "t": t, "omega": omega, "k_upper": best.value,
            "ratio": best.value / omega if omega > 0 else math.nan,
            "witness": best.kind, "witness_param": best.param,
            "dist_g": own.distance, "gen_g": t ** r * own.gen_norm,
            "upper_dist_ok": own.distance <= (1 + 1e-3) * omega,
            "upper_gen_ok": t ** r * own.gen_norm <= (1 + 1e-3) * (2 * r) ** r * omega,
            "lower_excess": lower, "lower_ok": lower <= 1e-6,
        })
    return rows


# ------------------------------------------------------- series remainder

def q_n_coeffs(r, N):
    """Taylor coefficients a_k = C(k+r-1, r-1) of (1-x)^{-r} for k <= N."""
    return np.array([math.comb(k + r - 1, r - 1) for k in range(N + 1)], dtype=float)


def k_n(z, r, N):
    """(1 - eta(z)) ((1 - e^{-z^2})^{-r} - Q_N(e^{-z^2})), the truncation remainder."""
    z = np.asarray(z, dtype=float)
    x = np.exp(-z * z)
    a = q_n_coeffs(r, N)
    q = np.polynomial.polynomial.polyval(x, a)
    with np.errstate(divide="ignore", invalid="ignore"):
        full = np.where(z != 0, (-np.expm1(-z * z)) ** (-float(r)), np.inf)
    return np.where(np.abs(z) >= 2, 1.0, 1.0 - eta(z)) * np.where(np.abs(z) > 1, full - q, 0.0)


def q_n_tail(r, N, n=4001):
    """sup |k_N| over the cutoff support |z| >= 1.

    Beyond |z| = 2 the remainder is a positive series in e^{-z^2}, hence
    decreasing, so a grid on [1, 2] sees the supremum.
    """
    return float(np.max(np.abs(k_n(np.linspace(1.0, 2.0, n), r, N))))


def q_n_degree(r, tol=Q_N_TOL, start=Q_N_START):
    """Smallest N >= start with q_n_tail(r, N) <= tol."""
    N = start
    while q_n_tail(r, N) > tol:
        N += 1
    return N


def seam_ratio(u):
    """(1 - e^{-u^2}) / u^2, which lies in [1 - u^2, 1]."""
    u = np.asarray(u, dtype=float)
    return -np.expm1(-u * u) / (u * u)
