"""Probes for the Kolmogorov-Riesz criteria on finite function families.

A family is equivanishing when its tails outside B_R are uniformly small
(P_a), and equicontinuous in mean when t -> T^t f is uniformly continuous
(P_b1) or the local averages M_{a,R} f are uniformly continuous in space
(P_b2).  Only finite families are probed, so every report is a table of
sup values; pass/fail is against a caller threshold.  The Pego-type probes
transfer these properties between a family and its transforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import funcexpr, numerics, specfun, transforms, translate as tr
from .numerics import GridFunction, QuadSpec

PA = "Pa"
PB1 = "Pb1"
PB2 = "Pb2"
PEGO_FORWARD = "PegoForward"
PEGO_REVERSE = "PegoReverse"

MAX_MEMBERS = 64
AVERAGE_RULE = 16
LATTICE = 256


class CompactnessError(ValueError):
    pass


@dataclass
class FunctionFamily:
    members: list
    spec: tr.TranslationSpec | None = None

    def __post_init__(self):
        if not self.members:
            raise CompactnessError("a function family needs at least one member")
        if len(self.members) > MAX_MEMBERS:
            raise CompactnessError(f"at most {MAX_MEMBERS} members are supported")
        self.members = [tr.as_function(m, self.spec) for m in self.members]
        kinds = {getattr(m, "domain_kind", None) for m in self.members} - {None}
        if len(kinds) > 1 and not kinds <= {numerics.REAL_LINE, numerics.HALF_LINE}:
            raise CompactnessError(f"members mix domain classes {sorted(kinds)}")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def measure(self):
        return self.spec.measure if self.spec is not None else numerics.LEBESGUE

    @property
    def domain(self):
        return self.spec.domain if self.spec is not None else numerics.DomainSpec()


def as_family(family, spec=None):
    if isinstance(family, FunctionFamily):
        return family
    return FunctionFamily(list(family), spec)


@dataclass
class ProbeReport:
    criterion: str
    sup_value: float
    witness: dict
    passed: bool | None
    table: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.sup_value >= 0:
            raise CompactnessError("sup values are nonnegative")


def gw_kernel_family(s_values, b=1.0):
    """Gauss-Weierstrass kernels K_s(.) as FuncExprs."""
    out = []
    for s in s_values:
        sigma = b * math.sqrt(2 * s)
        out.append(funcexpr.Scaled(funcexpr.Gaussian(sigma), 1.0 / (sigma * math.sqrt(2 * math.pi))))
    return out


# ------------------------------------------------------------ averaging

def _ball_times(spec, a, p):
    """Quadrature over B_a in the time variable and the measure nu used there."""
    x, w = numerics.gauss_legendre(AVERAGE_RULE)
    if spec.family == tr.GEGENBAUER:
        # radii near the identity r = 1, Lebesgue dr
        lo, hi = max(0.0, 1.0 - a), 1.0
        return lo + (x + 1) * (hi - lo) / 2, w * (hi - lo) / 2, "dr on (1-a, 1)"
    t = (x + 1) * a / 2
    wt = w * a / 2
    if spec.family == tr.POISSON and p == 1:
        return t, wt * np.sqrt(t), "sqrt(t) dt on (0, a)"
    return t, wt, "dt on (0, a)"


def mar_average(spec, f, a, R, x_nodes, q=None, p=2):
    """M_{a,R} f = (1/A) int_{B_a} T^t f dnu(t) inside B_R, zero outside."""
    if not (a > 0 and R > 0):
        raise CompactnessError("a and R must be positive")
    x = np.asarray(x_nodes, dtype=float)
    f = tr.as_function(f, spec)
    t, w, nu = _ball_times(spec, a, p)
    inside = np.abs(x) < R
    out = np.zeros(len(x))
    if np.any(inside):
        xi = x[inside]
        acc = np.zeros(len(xi))
        for ti, wi in zip(t, w):
            acc += wi * tr.evaluate(spec, f, ti, xi)
        out[inside] = acc / np.sum(w)
    meta = {"a": a, "R": R, "nu": nu}
    if len(x) >= 2 and np.all(np.diff(x) > 0):
        return GridFunction(x, out, spec.domain, spec.measure, meta)
    return out


def mar_bound_constant(spec, a, p=2):
    """c(a) with |M_{a,R} f(x)| <= c ||f||_p for the Gauss-Weierstrass family.

    From |T^t f(x)| <= ||K_t||_{p'} ||f||_p with
    ||K_t||_{p'} = C t^{-1/(2p)}, C = (4 pi b^2)^{-1/(2p)} p'^{-1/(2p')},
    averaged exactly over t in (0, a).
    """
    if spec.family != tr.GAUSS_WEIERSTRASS:
        raise CompactnessError("explicit averaging constant implemented for gauss-weierstrass")
    e = 1.0 / (2 * p)
    C = (4 * math.pi * spec.b ** 2) ** (-e)
    if p > 1:
        pp = p / (p - 1)
        C *= pp ** (-1.0 / (2 * pp))
    return C * a ** (-e) / (1 - e)


# ------------------------------------------------------------ criteria

def _tail(f, R, p, domain, measure, q):
    lo, hi = domain.bounds
    fl, fh = f.support
    total = 0.0
    parts = [(max(R, lo), min(hi, fh))]
    if lo < 0:
        parts.append((max(lo, fl), min(-R, hi)))
    for a, b in parts:
        if a < b:
            bps = [c for c in f.breakpoints if a < c < b]
            v, _ = numerics.integrate(lambda x: np.abs(f(x)) ** p, domain, measure, q, (a, b), bps)
            total += max(v, 0.0)
    return total ** (1.0 / p)


def check_pa(family, R_list, p=2, measure=None, q=QuadSpec(), threshold=None, spec=None):
    """Tails (int_{I \\ B_R} |f|^p dmu)^{1/p}, maximised over members, for each R."""
    fam = as_family(family, spec)
    measure = fam.measure if measure is None else measure
    domain = fam.domain
    if math.isinf(p):
        raise CompactnessError("P_a is probed for finite p")
    table = []
    for R in R_list:
        vals = [_tail(m, R, p, domain, measure, q) for m in fam]
        k = int(np.argmax(vals))
        table.append({"R": float(R), "sup": float(vals[k]), "member": k})
    last = table[-1]
    passed = None if threshold is None else last["sup"] < threshold
    return ProbeReport(PA, last["sup"], {"member": last["member"], "R": last["R"]}, passed, table,
                       {"p": p})


def default_times(M0, n=5):
    return list(np.linspace(0.0, M0, n))


def _shift(spec, t, h):
    # Gegenbauer radii approach the identity from below
    if spec.family == tr.GEGENBAUER:
        return 1.0 - t, 1.0 - t - h
    return t, t + h


def check_pb1(spec, family, M0, h_list, p=2, q=None, t_grid=None, nodes=None, threshold=None):
    """sup over members and t in [0, M0] of ||T^{t+h} f - T^t f||_p, per h."""
    fam = as_family(family, spec)
    if any(h <= 0 for h in h_list) or list(h_list) != sorted(h_list, reverse=True):
        raise CompactnessError("h_list must be positive and decreasing")
    t_grid = default_times(M0) if t_grid is None else [float(t) for t in t_grid]
    table = []
    for h in h_list:
        best = (0.0, None, None)
        for k, f in enumerate(fam):
            grid = tr.default_nodes(spec, [f], M0 + h) if nodes is None else np.asarray(nodes, float)
            for t in t_grid:
                t0, t1 = _shift(spec, t, h)
                d = tr.evaluate(spec, f, t1, grid) - tr.evaluate(spec, f, t0, grid)
                v = numerics.pnorm(GridFunction(grid, d, spec.domain, spec.measure), p)
                if v > best[0] or best[1] is None:
                    best = (v, k, t)
        table.append({"h": float(h), "sup": float(best[0]), "member": best[1], "t": best[2]})
    sups = [r["sup"] for r in table]
    decreasing = all(b <= a for a, b in zip(sups, sups[1:]))
    passed = None if threshold is None else decreasing and sups[-1] < threshold
    w = max(table, key=lambda r: r["sup"])
    return ProbeReport(PB1, w["sup"], {"member": w["member"], "t": w["t"], "h": w["h"]}, passed,
                       table, {"p": p, "t_grid": t_grid, "decreasing": decreasing})


def lattice(spec, R, band):
    """B_R lattice with spacing R/256, excluding a band of width ``band`` at the boundary."""
    step = R / LATTICE
    lo = 0.0 if spec.domain.kind != numerics.REAL_LINE else -R
    if spec.family == tr.GEGENBAUER:
        lo, R = 0.0, min(R, math.pi)
    pts = np.arange(lo, R + step / 2, step)
    keep = (pts > lo + band - 1e-12 if lo < 0 else pts >= lo) & (pts < R - band - 1e-12)
    return pts[keep]


def check_pb2(spec, family, a, R, h_list, p=2, threshold=None):
    """sup |M_{a,R} f(x+h) - M_{a,R} f(x)| over members and the interior lattice, per h."""
    fam = as_family(family, spec)
    band = max(h_list) if len(h_list) else 0.0
    x = lattice(spec, R, band)
    table = []
    for h in h_list:
        best = (0.0, None, None)
        for k, f in enumerate(fam):
            if h == 0:
                continue
            m0 = mar_average(spec, f, a, R, x, p=p)
            m1 = mar_average(spec, f, a, R, x + h, p=p)
            d = np.abs(np.asarray(getattr(m1, "values", m1)) - np.asarray(getattr(m0, "values", m0)))
            i = int(np.argmax(d))
            if d[i] > best[0] or best[1] is None:
                best = (float(d[i]), k, float(x[i]))
        table.append({"h": float(h), "sup": best[0], "member": best[1], "x": best[2]})
    sups = [r["sup"] for r in table]
    passed = None if threshold is None else sups[-1] < threshold
    w = max(table, key=lambda r: r["sup"])
    return ProbeReport(PB2, w["sup"], {"member": w["member"], "x": w["x"], "h": w["h"]}, passed,
                       table, {"a": a, "R": R, "lattice_step": R / LATTICE, "band": band})


# --------------------------------------------------------------- Pego

def _dual_exponent(p):
    return math.inf if p == 1 else p / (p - 1)


def _spectral_members(ts, fam, Z, n_panels):
    """Transforms of the members on a symmetric (Fourier, cosine) or half (Jacobi) grid."""
    if ts.kind == transforms.JACOBI:
        z, w = transforms.spectral_rule(0.0, Z, n_panels)
    else:
        z, w = transforms.spectral_rule(-Z, Z, 2 * n_panels)
    out = []
    for f in fam:
        if ts.half_line:
            za, inv = np.unique(np.abs(z), return_inverse=True)
            out.append(np.asarray(transforms.forward(ts, f, za).values)[inv])
        else:
            out.append(np.asarray(transforms.forward(ts, f, z).values))
    return z, w, out


def pego_forward(family, ts, R_list, p=2, h_list=(0.1, 0.05, 0.025), spec=None, Z=40.0,
                 threshold=None, t_grid=(0.0, 0.5, 1.0)):
    """Tails of the family and equicontinuity of its transforms.

    The transformed members are translated by the structure that matches the
    transform: Gauss-Weierstrass (b=1) for Fourier, Poisson for cosine, and
    the dual translation for Jacobi.  For each h the table holds the sup over
    members and s in ``t_grid`` of ||T^{s+h} f^ - T^s f^||_{p'}.
    """
    fam = as_family(family, spec)
    if ts.kind == transforms.JACOBI:
        pairs = {tr.JACOBI}
    else:
        pairs = {None, tr.GAUSS_WEIERSTRASS, tr.POISSON, tr.HERMITE}
    if (fam.spec.family if fam.spec else None) not in pairs:
        raise CompactnessError(f"family domain does not match the {ts.kind} transform")
    pp = _dual_exponent(p)
    n_panels = 40
    z, w, F = _spectral_members(ts, fam, Z, n_panels)
    dens = ts.dual_measure.density(z)
    tails = []
    for R in R_list:
        vals = []
        for Fv in F:
            sel = np.abs(z) >= R
            if math.isinf(pp):
                vals.append(float(np.max(np.abs(Fv[sel]), initial=0.0)))
            else:
                vals.append(float(np.sum((w * dens * np.abs(Fv) ** pp)[sel]) ** (1 / pp)))
        tails.append({"R": float(R), "spectral_tail": max(vals)})
    pa = check_pa(fam, R_list, p if not math.isinf(p) else 2, spec=fam.spec)
    for row, prow in zip(tails, pa.table):
        row["tail"] = prow["sup"]

    if ts.kind == transforms.FOURIER:
        move = tr.gauss_weierstrass(1.0)
    elif ts.kind == transforms.COSINE:
        move = tr.poisson_halfplane()
    else:
        move = None
    def moved(f, Fv, s):
        if s == 0 and move is not None:
            return Fv
        if move is None:
            return np.asarray(transforms.dual_translate(f, s, z, ts.alpha, ts.beta).values)
        # translate real and imaginary parts of the sampled transform
        G = np.zeros(len(z), dtype=complex)
        for part, unit in ((Fv.real, 1.0), (Fv.imag, 1j)):
            if np.any(part):
                gf = GridFunction(z, part, numerics.DomainSpec(), numerics.LEBESGUE)
                G += unit * tr.evaluate(move, gf, s, z)
        return G

    sel = np.abs(z) <= 0.75 * Z  # stay clear of the truncated grid's edge
    cache = {}
    table = []
    for h in h_list:
        best = (0.0, None, None)
        for k, (f, Fv) in enumerate(zip(fam, F)):
            for s0 in t_grid:
                for s in (s0, s0 + h):
                    if (k, s) not in cache:
                        cache[k, s] = moved(f, Fv, s)
                d = np.abs(cache[k, s0 + h] - cache[k, s0])
                if math.isinf(pp):
                    v = float(np.max(d[sel]))
                else:
                    v = float(np.sum((w * dens * d ** pp)[sel]) ** (1 / pp))
                if v > best[0] or best[1] is None:
                    best = (v, k, s0)
        table.append({"h": float(h), "sup": best[0], "member": best[1], "t": best[2]})
    sups = [r["sup"] for r in table]
    passed = None if threshold is None else sups[-1] < threshold
    return ProbeReport(PEGO_FORWARD, sups[-1], {"h": table[-1]["h"], "member": table[-1]["member"],
                                                "t": table[-1]["t"]}, passed, table,
                       {"transform": ts.kind, "tails": tails, "Z": Z, "p": p,
                        "t_grid": list(t_grid)})


def multiplier_radius(spec, ts, t, lam_max=200.0):
    """Smallest R with |m(t, z)| <= 1/2 for all |z| >= R."""
    if (spec.family, ts.kind) == (tr.GAUSS_WEIERSTRASS, transforms.FOURIER):
        return math.sqrt(math.log(2) / (spec.b ** 2 * t))
    if (spec.family, ts.kind) == (tr.POISSON, transforms.COSINE):
        return math.log(2) / t
    if (spec.family, ts.kind) == (tr.JACOBI, transforms.JACOBI):
        lam = np.linspace(0.0, lam_max, 20001)
        m = np.abs(specfun.jacobi_fn(lam, ts.alpha, ts.beta, t))
        big = np.nonzero(m > 0.5)[0]
        if len(big) and big[-1] == len(lam) - 1:
            raise CompactnessError("multiplier stays above 1/2 on the grid")
        return float(lam[big[-1] + 1]) if len(big) else 0.0
    raise transforms.IncompatiblePairError(f"{spec.family} has no multiplier for {ts.kind}")


def pego_reverse(spec, family, ts, R=None, p=2, t_probe=0.1, Z=None):
    """tail(f^, R) <= 2 c ||f - T^t f||_p per member, c = (2 pi)^{1/p'}.

    R is raised to the multiplier radius when needed (recorded in meta).
    """
    fam = as_family(family, spec)
    pp = _dual_exponent(p)
    R0 = multiplier_radius(spec, ts, t_probe)
    enlarged = R is None or R < R0
    R = R0 if enlarged else float(R)
    if ts.kind == transforms.JACOBI:
        c = 1.0
    else:
        c = (2 * math.pi) ** (0.0 if math.isinf(pp) else 1.0 / pp)
    rows = []
    for k, f in enumerate(fam):
        zmax = Z if Z is not None else max(4 * R, R + 60.0 / min(f.scale, 10.0))
        z, w = transforms.spectral_rule(R, zmax, 64)
        if ts.kind == transforms.FOURIER:
            z = np.concatenate([-z[::-1], z])
            w = np.concatenate([w[::-1], w])
        F = np.abs(transforms.forward(ts, f, np.abs(z) if ts.half_line else z).values)
        dens = ts.dual_measure.density(np.abs(z))
        lhs = float(np.max(F)) if math.isinf(pp) else float(np.sum(w * dens * F ** pp) ** (1 / pp))
        grid = tr.default_nodes(spec, [f], t_probe, n=4001)
        d = f(grid) - tr.evaluate(spec, f, t_probe, grid)
        rhs = 2 * c * numerics.pnorm(GridFunction(grid, d, spec.domain, spec.measure), p)
        rows.append({"member": k, "lhs": lhs, "rhs": rhs, "slack": rhs - lhs})
    slack = min(r["slack"] for r in rows)
    k = min(rows, key=lambda r: r["slack"])["member"]
    return ProbeReport(PEGO_REVERSE, max(0.0, max(r["lhs"] for r in rows)), {"member": k},
                       slack >= 0, rows, {"R": R, "R_enlarged": enlarged, "t_probe": t_probe,
                                          "c": c, "min_slack": slack, "p": p})
