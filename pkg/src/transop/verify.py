"""Verification suites: one per checked identity or inequality.

Each suite returns rows ``(case, quantity, value, bound, relation, passed)``
where relation is "<=", ">=" or "record" (value reported, not judged).
Suites are deterministic: random samples come from a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import compactness as cp
from . import funcexpr as fe
from . import numerics, smoothness as sm, transforms as T, translate as tr
from .numerics import GridFunction, QuadSpec

SEED = 20240607

REAL_CORPUS = (
    "gaussian:1", "gaussian:0.5", "bump:-1,1", "bump:-2,0.5", "shift(gaussian:0.7;1.5)",
    "scale(bump:-1,2;2)", "hermite:2", "hermite:5", "sum(gaussian:1|bump:0,1)",
    "shift(bump:-0.5,0.5;-2)",
)
HALF_CORPUS = (
    "laguerre_fn:0,0.5", "laguerre_fn:2,0.5", "bump:0.5,2", "bump:1,3", "shift(gaussian:0.5;2)",
    "gaussian:1", "scale(bump:0,1.5;3)", "sum(bump:0.5,1.5|gaussian:0.7)", "bump:2,4",
    "shift(gaussian:0.3;1)",
)
ANGLE_CORPUS = (
    "gegenbauer:0,1", "gegenbauer:1,1", "gegenbauer:2,1", "gegenbauer:3,1", "bump:0.5,2.5",
    "bump:1,2", "shift(gaussian:0.3;1.5)", "bump:0,1", "gaussian:0.5", "sum(bump:0.2,1|bump:2,3)",
)
HYPERBOLIC_CORPUS = (
    "hyperbolic_bump:0,1", "hyperbolic_bump:0,2", "hyperbolic_bump:0.5,1", "hyperbolic_bump:1,1.5",
    "hyperbolic_bump:2,3", "hyperbolic_bump:0.3,0.8", "bump:0.5,2", "bump:1,3",
    "scale(hyperbolic_bump:0,1.5;2)", "sum(hyperbolic_bump:0,1|bump:1,2)",
)
PLANCHEREL_BUMPS = ((0.0, 2.0), (0.5, 2.0), (0.0, 1.5), (0.3, 2.0), (1.0, 2.0))


class SuiteError(ValueError):
    pass


@dataclass
class Options:
    spec: tr.TranslationSpec | None = None
    tol: float | None = None
    seed: int = SEED


@dataclass
class SuiteResult:
    suite: str
    rows: list = field(default_factory=list)

    def add(self, case, quantity, value, bound=math.nan, relation="<="):
        value = float(value)
        if relation == "<=":
            ok = value <= bound
        elif relation == ">=":
            ok = value >= bound
        else:
            ok = bool(np.isfinite(value))
        self.rows.append({"case": case, "quantity": quantity, "value": value,
                          "bound": float(bound), "relation": relation, "pass": bool(ok)})

    @property
    def passed(self):
        return all(r["pass"] for r in self.rows)


def _specs(opts, default):
    """The suite's specs, or the single user-selected one if it belongs to the suite."""
    if opts.spec is None:
        return list(default)
    fams = {s.family for s in default}
    if opts.spec.family not in fams:
        raise SuiteError(f"this suite does not cover {opts.spec.family}; choose from {sorted(fams)}")
    return [opts.spec]


def _tol(opts, default):
    return default if opts.tol is None else opts.tol


def _corpus(spec):
    if spec.family == tr.GEGENBAUER:
        return ANGLE_CORPUS
    if spec.family == tr.JACOBI:
        return HYPERBOLIC_CORPUS
    if spec.family == tr.LAGUERRE:
        return HALF_CORPUS
    return REAL_CORPUS


# ----------------------------------------------------------------- suites

def suite_mass(opts):
    """int K(x, 0, t) dx = 1 for Gauss-Weierstrass and Poisson kernels."""
    res = SuiteResult("mass")
    tol = _tol(opts, 1e-8)
    specs = _specs(opts, [tr.gauss_weierstrass(0.5), tr.gauss_weierstrass(1.0), tr.poisson_halfplane()])
    q = QuadSpec(abs_tol=1e-14, rel_tol=1e-13)
    for spec in specs:
        for t in (0.1, 1.0, 5.0):
            # x = u / (1 - u^2) maps (-1, 1) onto the line and tames algebraic tails
            def g(u, spec=spec, t=t):
                x = u / (1 - u * u)
                return tr.kernel_eval(spec, x, 0.0, t) * (1 + u * u) / (1 - u * u) ** 2
            val, _ = numerics.integrate(g, numerics.DomainSpec(), numerics.LEBESGUE, q, (-1.0, 1.0),
                                        (-0.5, 0.0, 0.5))
            res.add(f"{spec.describe()} t={t!r}", "|mass-1|", abs(val - 1.0), tol)
    return res


def suite_mehler_bound(opts):
    """0 < W_t(x,y) <= (2 pi t)^{-d/2} exp(-|x-y|^2/4t) on random samples."""
    res = SuiteResult("mehler-bound")
    slack = _tol(opts, 1e-12)
    rng = np.random.default_rng(opts.seed)
    for d in (1, 2):
        spec = tr.hermite_heat(d)
        n = 1000
        x = rng.uniform(-3, 3, (n, d))
        y = rng.uniform(-3, 3, (n, d))
        t = np.exp(rng.uniform(math.log(0.05), math.log(3.0), n))
        W = np.array([tr.kernel_eval(spec, x[i] if d > 1 else x[i, 0], y[i] if d > 1 else y[i, 0], t[i])
                      for i in range(n)])
        bound = (2 * math.pi * t) ** (-d / 2) * np.exp(-np.sum((x - y) ** 2, axis=1) / (4 * t))
        res.add(f"d={d}", "min W", W.min(), 0.0, ">=")
        res.add(f"d={d}", "count W<=0", int(np.sum(W <= 0)), 0)
        res.add(f"d={d}", "max(W-bound)", np.max(W - bound), slack)
    return res


def _rel_l2(a, b, w):
    return math.sqrt(np.sum(w * (a - b) ** 2) / np.sum(w * b ** 2))


def suite_eigen(opts):
    """T^t maps eigenfunctions to multiples of themselves."""
    res = SuiteResult("eigen")
    tol = _tol(opts, 1e-6)
    specs = _specs(opts, [tr.hermite_heat(), tr.laguerre_heat(-0.5), tr.laguerre_heat(0.0),
                          tr.laguerre_heat(1.5), tr.gegenbauer_poisson(0.5), tr.gegenbauer_poisson(1.0)])
    for spec in specs:
        if spec.family == tr.HERMITE:
            x = np.linspace(-10, 10, 2001)
            cases = [(fe.Hermite(k), k, t) for k in range(9) for t in (0.1, 0.5)]
        elif spec.family == tr.LAGUERRE:
            x = np.linspace(0, 8, 1601)
            cases = [(fe.LaguerreFn(k, spec.alpha), k, t) for k in range(6) for t in (0.1, 0.5)]
        elif spec.family == tr.GEGENBAUER:
            x = np.linspace(0, math.pi, 721)
            cases = [(fe.Gegenbauer(k, spec.lam), k, r) for k in range(6) for r in (0.3, 0.9)]
        else:
            continue
        w = numerics.trapezoid_weights(x) * spec.measure.density(x)
        for f, k, t in cases:
            got = tr.evaluate(spec, f, t, x)
            m = tr.eigen_multiplier(spec, k, t)
            res.add(f"{spec.describe()} k={k} t={t!r}", "rel L2 error", _rel_l2(got, m * f(x), w), tol)
    return res


def suite_semigroup(opts):
    """||T^{t1} T^{t2} f - T^{t1+t2} f||_2."""
    res = SuiteResult("semigroup")
    tol = _tol(opts, 1e-5)
    specs = _specs(opts, [tr.hermite_heat(), tr.gauss_weierstrass(1.0), tr.poisson_halfplane()])
    for spec in specs:
        x = np.linspace(-30, 30, 601) if spec.family == tr.POISSON else np.linspace(-12, 12, 2401)
        for fs in ("gaussian:1", "bump:-1,1"):
            f = fe.parse(fs)
            for t1, t2 in ((0.1, 0.2), (0.3, 0.3)):
                two = tr.evaluate(spec, tr.Translated(spec, f, t2), t1, x)
                one = tr.evaluate(spec, f, t1 + t2, x)
                err = numerics.pnorm(GridFunction(x, two - one, spec.domain, spec.measure), 2)
                res.add(f"{spec.describe()} f={fs} t=({t1!r},{t2!r})", "L2 defect", err, tol)
    return res


def _norm_specs():
    return [tr.hermite_heat(), tr.gauss_weierstrass(1.0), tr.poisson_halfplane(),
            tr.gegenbauer_poisson(1.0), tr.jacobi_hyperbolic(1.0, 0.0), tr.laguerre_heat(0.5)]


def suite_norm(opts):
    """max ||T^t f||_2 / ||f||_2 over a 10-member corpus."""
    res = SuiteResult("norm")
    tol = _tol(opts, 1e-6)
    for spec in _specs(opts, _norm_specs()):
        times = {tr.GEGENBAUER: (0.3, 0.6, 0.9), tr.JACOBI: (0.2, 0.5, 1.0)}.get(spec.family, (0.1, 0.5, 1.0))
        corpus = [fe.parse(s) for s in _corpus(spec)]
        value, _ = tr.norm_probe(spec, 2, corpus, times)
        if spec.family == tr.LAGUERRE:
            res.add(spec.describe(), "max norm ratio", value, relation="record")
        else:
            res.add(spec.describe(), "max norm ratio - 1", value - 1.0, tol)
    return res


def _smooth_corpus(spec):
    if spec.family == tr.LAGUERRE:
        return ("laguerre_fn:1," + repr(spec.alpha), "shift(gaussian:0.5;2.5)")
    return ("gaussian:1", "hermite:3", "shift(gaussian:0.7;1)")


def _parabolic_specs():
    return [tr.hermite_heat(), tr.gauss_weierstrass(1.0), tr.laguerre_heat(0.5), tr.laguerre_heat(1.5)]


def _smooth_nodes(spec):
    if spec.family == tr.LAGUERRE:
        return np.linspace(0.01, 8, 800)
    return np.linspace(-8, 8, 801)


def suite_commute(opts):
    """||D T^t g - T^t D g||_inf on smooth inputs."""
    res = SuiteResult("commute")
    tol = _tol(opts, 1e-4)
    for spec in _specs(opts, _parabolic_specs()):
        x = _smooth_nodes(spec)
        for gs in _smooth_corpus(spec):
            g = fe.parse(gs)
            for t in (0.1, 0.5):
                lhs = tr.apply_generator(spec, tr.Translated(spec, g, t), 1, x).values
                rhs = tr.evaluate(spec, tr.generator_function(spec, g, 1), t, x)
                res.add(f"{spec.describe()} g={gs} t={t!r}", "Linf residual", np.max(np.abs(lhs - rhs)), tol)
    return res


def suite_lipschitz(opts):
    """||T^{t+h} g - T^t g||_2 <= h ||D g||_2 (1 + 1e-3)."""
    res = SuiteResult("lipschitz")
    fac = 1.0 + _tol(opts, 1e-3)
    for spec in _specs(opts, _parabolic_specs()):
        x = _smooth_nodes(spec)
        for gs in _smooth_corpus(spec):
            g = fe.parse(gs)
            dg = numerics.pnorm(GridFunction(x, tr.generator_function(spec, g, 1)(x), spec.domain,
                                             spec.measure), 2)
            for t in (0.0, 0.2):
                for h in (0.05, 0.1):
                    d = tr.evaluate(spec, g, t + h, x) - tr.evaluate(spec, g, t, x)
                    lhs = numerics.pnorm(GridFunction(x, d, spec.domain, spec.measure), 2)
                    res.add(f"{spec.describe()} g={gs} t={t!r} h={h!r}", "lhs / (h ||Dg||)",
                            lhs / (h * dg), fac)
    return res


def suite_multiplier(opts):
    """sup_lambda |I(T^t f) - m(t, lambda) I(f)| for the three compatible pairs."""
    res = SuiteResult("multiplier")
    pairs = [
        (tr.poisson_halfplane(), T.cosine(), ("bump:-1,1", "gaussian:1"), 1e-5),
        (tr.gauss_weierstrass(1.0), T.fourier(), ("gaussian:1", "bump:-1,1"), 1e-5),
        (tr.gauss_weierstrass(0.5), T.fourier(), ("gaussian:1",), 1e-5),
        (tr.jacobi_hyperbolic(0.5, -0.5), T.jacobi(0.5, -0.5),
         ("hyperbolic_bump:0,1.5", "hyperbolic_bump:0.5,1"), 1e-3),
        (tr.jacobi_hyperbolic(1.0, 0.0), T.jacobi(1.0, 0.0),
         ("hyperbolic_bump:0,1.5", "hyperbolic_bump:0.5,1"), 1e-3),
    ]
    chosen = _specs(opts, [p[0] for p in pairs])
    lam = np.array([0.5, 1.0, 2.0])
    for spec, ts, funcs, tol in pairs:
        if spec not in chosen and not (opts.spec is not None and opts.spec == spec):
            continue
        for fs in funcs:
            for t in (0.1, 0.5):
                r, _, _ = T.multiplier_residual(spec, ts, fe.parse(fs), t, lam)
                res.add(f"{spec.describe()} {ts.kind} f={fs} t={t!r}", "sup residual", r, _tol(opts, tol))
    return res


def suite_plancherel(opts):
    """| ||J f||_{2,nu} - ||f||_{2,mu} | <= 1e-3 ||f||_{2,mu}."""
    res = SuiteResult("plancherel")
    tol = _tol(opts, 1e-3)
    specs = _specs(opts, [tr.jacobi_hyperbolic(0.5, -0.5), tr.jacobi_hyperbolic(1.0, 0.0)])
    lam, wl = T.spectral_rule(0.0, 40.0, 20)
    for spec in specs:
        ts = T.jacobi(spec.alpha, spec.beta)
        for a, b in PLANCHEREL_BUMPS:
            f = fe.HyperbolicBump(a, b)
            F = T.forward(ts, f, lam)
            Fn = T.spectral_norm(ts, T.SpectralGrid(ts.kind, lam, F.values, wl))
            lo, hi = f.support
            x, w = numerics.composite_legendre(np.linspace(max(lo, 0.0), hi, 201), 20)
            fn = math.sqrt(np.sum(w * f(x) ** 2 * ts.measure.density(x)))
            res.add(f"{spec.describe()} f={f.text()}", "relative norm defect", abs(Fn - fn) / fn, tol)
    return res


def suite_modulus_kfun(opts):
    """Proof-level sandwich between omega_r and the K-functional candidates."""
    res = SuiteResult("modulus-kfun")
    fac = 1.0 + _tol(opts, 1e-3)
    spec = _specs(opts, [tr.hermite_heat()])[0]
    for fs in ("bump:-1,1", "gaussian:1"):
        f = fe.parse(fs)
        for r in (1, 2):
            for row in sm.equivalence_report(spec, f, r, 2, (0.05, 0.1, 0.2)):
                case = f"{spec.describe()} f={fs} r={r} t={row['t']!r}"
                om = row["omega"]
                res.add(case, "||f-g||/omega", row["dist_g"] / om, fac)
                res.add(case, "t^r||D^r g||/((2r)^r omega)", row["gen_g"] / ((2 * r) ** r * om), fac)
                res.add(case, "omega - min_g(2^r||f-g|| + t^r||D^r g||)", row["lower_excess"], 1e-6)
                res.add(case, "K_upper/omega", row["k_upper"] / om, relation="record")
    return res


def suite_compactness_demo(opts):
    """Kernel family: P_a holds and P_b1 sups decrease; Hermite family: P_b1 fails."""
    res = SuiteResult("compactness-demo")
    gw = tr.gauss_weierstrass(1.0)
    fam = cp.gw_kernel_family(np.linspace(1.0, 2.0, 8))
    pa = cp.check_pa(fam, [5.0, 10.0, 20.0], 2, spec=gw)
    for row in pa.table:
        res.add(f"gw-kernels R={row['R']!r}", "Pa sup", row["sup"], relation="record")
    res.add("gw-kernels R=20.0", "Pa sup", pa.table[-1]["sup"], _tol(opts, 1e-4))
    hs = [0.1, 0.05, 0.025]
    pb = cp.check_pb1(gw, fam, 1.0, hs, 2)
    for prev, row in zip([None] + pb.table[:-1], pb.table):
        res.add(f"gw-kernels h={row['h']!r}", "Pb1 sup", row["sup"], relation="record")
        if prev is not None:
            res.add(f"gw-kernels h={row['h']!r}", "Pb1 sup increase", row["sup"] - prev["sup"], 0.0)
    H = tr.hermite_heat()
    hfam = [fe.Hermite(k) for k in range(11)]
    pah = cp.check_pa(hfam, [8.0], 2, spec=H)
    res.add("hermite k<=10 R=8.0", "Pa sup", pah.sup_value, 1e-6)
    pbh = cp.check_pb1(H, hfam, 1.0, [0.1], 2)
    res.add("hermite k<=10 h=0.1", "Pb1 sup", pbh.sup_value, 0.87, ">=")
    res.add("hermite k<=10 h=0.1", "witness 1-exp(-2.1)", 1 - math.exp(-2.1), relation="record")
    return res


def suite_pego(opts):
    """tail(f^, R) <= 2 c ||f - T^t f||_2 on the corpus (Gauss-Weierstrass, Fourier)."""
    res = SuiteResult("pego")
    spec = _specs(opts, [tr.gauss_weierstrass(1.0)])[0]
    corpus = [fe.parse(s) for s in REAL_CORPUS]
    rep = cp.pego_reverse(spec, corpus, T.fourier(), None, 2, 0.1)
    for row in rep.table:
        res.add(f"{spec.describe()} f={REAL_CORPUS[row['member']]}", "slack", row["slack"],
                _tol(opts, 0.0), ">=")
    return res


SUITES = {
    "mass": suite_mass,
    "mehler-bound": suite_mehler_bound,
    "eigen": suite_eigen,
    "semigroup": suite_semigroup,
    "norm": suite_norm,
    "commute": suite_commute,
    "lipschitz": suite_lipschitz,
    "multiplier": suite_multiplier,
    "plancherel": suite_plancherel,
    "modulus-kfun": suite_modulus_kfun,
    "compactness-demo": suite_compactness_demo,
    "pego": suite_pego,
}


def run_suite(name, opts=None):
    if name not in SUITES:
        raise SuiteError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](opts or Options())
