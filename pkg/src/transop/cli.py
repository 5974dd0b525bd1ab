"""Command-line front end.

Usage: transop <command> [flags], commands kernel, translate, transform,
modulus, kfun, compact and verify.  Every flag may also be given in a
``--config`` file of ``key = value`` lines (``#`` starts a comment); flags on
the command line win over the file, which wins over the defaults.

Output is CSV (or JSON with ``--format json``) with a leading block of
``# `` lines holding the command, argv and the resolved configuration, so a
file is enough to re-run the command that made it.  Exit status is 0 on
success, 1 when a verification suite fails and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import sys

import numpy as np

from . import __version__
from . import compactness as cp
from . import funcexpr as fe
from . import numerics, smoothness as sm, transforms as T, translate as tr, verify
from .numerics import QuadSpec


class UsageError(ValueError):
    pass


# ------------------------------------------------------------- converters

def _float(s):
    try:
        return numerics._parse_float(str(s))
    except ValueError:
        raise UsageError(f"not a number: {s!r}") from None


def _int(s):
    try:
        return int(str(s).strip())
    except ValueError:
        raise UsageError(f"not an integer: {s!r}") from None


def _positive(s):
    v = _float(s)
    if not v > 0:
        raise UsageError(f"expected a positive number, got {s!r}")
    return v


def _p(s):
    if str(s).strip().lower() in ("inf", "infinity"):
        return math.inf
    v = _float(s)
    if not v >= 1:
        raise UsageError(f"p must be >= 1 or inf, got {s!r}")
    return v


def _floats(s):
    return tuple(_float(v) for v in str(s).split(",") if v.strip())


def _choice(*names):
    def conv(s):
        s = str(s).strip()
        if s not in names:
            raise UsageError(f"expected one of {', '.join(names)}, got {s!r}")
        return s
    return conv


def _str(s):
    return str(s).strip()


_CRITERIA = {"pa": cp.PA, "pb1": cp.PB1, "pb2": cp.PB2, "pego-forward": cp.PEGO_FORWARD,
             "pego-reverse": cp.PEGO_REVERSE}

# key: (converter, default, help)
OPTIONS = {
    "spec": (_choice(*tr.FAMILIES), None, "translation family"),
    "d": (_int, 1, "dimension (hermite-heat)"),
    "b": (_positive, 1.0, "diffusion scale (gauss-weierstrass)"),
    "lambda": (_float, 1.0, "Gegenbauer parameter"),
    "alpha": (_float, 0.0, "Laguerre / Jacobi alpha"),
    "beta": (_float, 0.0, "Jacobi beta"),
    "t": (_float, None, "translation time (radius r for gegenbauer-poisson)"),
    "r": (_int, 1, "difference / generator order"),
    "p": (_p, 2.0, "Lebesgue exponent, number or inf"),
    "f": (_str, None, "function expression; compact takes several separated by ';'"),
    "grid": (_str, None, "evaluation grid a:b:n"),
    "out": (_str, None, "output path (default stdout)"),
    "tol": (_positive, None, "tolerance or threshold"),
    "format": (_choice("csv", "json"), "csv", "output format"),
    "abs_tol": (_positive, 1e-10, "quadrature absolute tolerance"),
    "rel_tol": (_positive, 1e-8, "quadrature relative tolerance"),
    "x": (_floats, None, "kernel point, comma separated for d > 1"),
    "y": (_floats, (0.0,), "kernel point, comma separated for d > 1"),
    "kind": (_choice(T.FOURIER, T.COSINE, T.JACOBI), None, "transform (default matches --spec)"),
    "criterion": (_choice(*_CRITERIA), None, "compactness probe"),
    "family": (_str, None, "named family: gw-kernels:s0:s1:n or hermite:kmax"),
    "R": (_floats, (5.0, 10.0, 20.0), "radii, comma separated"),
    "h": (_floats, (0.1, 0.05, 0.025), "steps, comma separated"),
    "a": (_positive, 0.5, "averaging radius"),
    "M0": (_positive, 1.0, "time horizon for the equicontinuity probe"),
    "suite": (_choice("all", *verify.SUITES), None, "verification suite"),
    "seed": (_int, verify.SEED, "random seed for sampled suites"),
}

_FAMILY = ("spec", "d", "b", "lambda", "alpha", "beta")
_IO = ("out", "format", "abs_tol", "rel_tol")
COMMANDS = {
    "kernel": ("evaluate the translation kernel K_t(x, y)", _FAMILY + _IO + ("t", "x", "y", "grid")),
    "translate": ("sample T^t f on a grid", _FAMILY + _IO + ("t", "f", "grid")),
    "transform": ("sample the transform of f (and of T^t f)", _FAMILY + _IO + ("t", "f", "grid", "kind")),
    "modulus": ("r-th differences of f on the h-grid and omega_r", _FAMILY + _IO + ("t", "f", "grid", "r", "p")),
    "kfun": ("K-functional candidates at time t", _FAMILY + _IO + ("t", "f", "grid", "r", "p")),
    "compact": ("compactness probes on a family", _FAMILY + _IO + (
        "t", "f", "family", "criterion", "kind", "R", "h", "a", "M0", "p", "tol")),
    "verify": ("run a verification suite", _FAMILY + ("out", "format", "suite", "tol", "seed")),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _flag(key):
    return "--" + ("lambda" if key == "lambda" else key.replace("_", "-"))


def build_parser():
    parser = _Parser(prog="transop", description="Generalized translations: experiments and checks.")
    parser.add_argument("--version", action="version", version=f"transop {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, (helptext, keys) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext, description=helptext)
        p.error = parser.error
        for key in keys:
            p.add_argument(_flag(key), dest=key, default=None, help=OPTIONS[key][2])
        p.add_argument("--config", default=None, help="key = value file")
    return parser


def read_config(path, allowed):
    """Parse a key = value file; keys outside ``allowed`` are rejected."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    out = {}
    for n, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in text.split("=", 1))
        key = key.replace("-", "_")
        if key not in allowed:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def resolve(command, cli, config_path=None):
    """Defaults < config file < command line, all through the same converters."""
    keys = COMMANDS[command][1]
    raw = read_config(config_path, keys) if config_path else {}
    raw.update({k: v for k, v in cli.items() if v is not None and k in keys})
    conf = {}
    for key in keys:
        conv, default, _ = OPTIONS[key]
        try:
            conf[key] = conv(raw[key]) if key in raw else default
        except UsageError as exc:
            raise UsageError(f"{_flag(key)}: {exc}") from None
    return conf


def _spec(conf, required=True):
    if conf["spec"] is None:
        if required:
            raise UsageError("--spec is required")
        return None
    return tr.TranslationSpec(conf["spec"], d=conf["d"], b=conf["b"], lam=conf["lambda"],
                              alpha=conf["alpha"], beta=conf["beta"])


def _need(conf, *keys):
    for k in keys:
        if conf.get(k) is None:
            raise UsageError(f"{_flag(k)} is required")


def _quad(conf):
    return QuadSpec(abs_tol=conf["abs_tol"], rel_tol=conf["rel_tol"])


def _nodes(conf, spec, funcs, t, n=201):
    if conf.get("grid"):
        return numerics.make_grid(spec.domain if spec.d == 1 else numerics.DomainSpec(), conf["grid"])
    return tr.default_nodes(spec, funcs, t, n)


def _func(conf):
    _need(conf, "f")
    return fe.parse(conf["f"])


# --------------------------------------------------------------- commands

def cmd_kernel(conf):
    spec = _spec(conf)
    _need(conf, "t")
    t, y = conf["t"], conf["y"]
    if conf["x"] is not None:
        xs = [conf["x"]]
    elif conf["grid"]:
        xs = [(v,) for v in numerics.make_grid(numerics.DomainSpec(numerics.REAL_LINE), conf["grid"])]
    else:
        raise UsageError("--x or --grid is required")
    if len(y) != spec.d or any(len(x) != spec.d for x in xs):
        raise UsageError(f"points need {spec.d} coordinate(s)")
    rows = []
    for x in xs:
        xa, ya = (np.array(x), np.array(y)) if spec.d > 1 else (x[0], y[0])
        v = float(tr.kernel_eval(spec, xa, ya, t))
        rows.append([" ".join(_fmt(c) for c in x), " ".join(_fmt(c) for c in y), t, v])
    return ["x", "y", "t", "value"], rows, {}


def cmd_translate(conf):
    spec = _spec(conf)
    _need(conf, "t")
    f = _func(conf)
    nodes = _nodes(conf, spec, [f], conf["t"])
    g = tr.translate(spec, f, conf["t"], nodes, q=_quad(conf))
    return ["x", "value"], [[x, v] for x, v in zip(g.nodes, g.values)], {"err_est": g.meta["err_est"]}


_DEFAULT_KIND = {tr.GAUSS_WEIERSTRASS: T.FOURIER, tr.HERMITE: T.FOURIER, tr.POISSON: T.COSINE,
                 tr.JACOBI: T.JACOBI}


def cmd_transform(conf):
    spec = _spec(conf)
    f = _func(conf)
    kind = conf["kind"] or _DEFAULT_KIND.get(spec.family)
    if kind is None:
        raise UsageError(f"{spec.family} has no default transform; pass --kind")
    ts = T.TransformSpec(kind, spec.alpha, spec.beta) if kind == T.JACOBI else T.TransformSpec(kind)
    grid = conf["grid"] or ("-10:10:201" if kind == T.FOURIER else "0:10:101")
    dom = numerics.DomainSpec(numerics.HALF_LINE if ts.half_line else numerics.REAL_LINE)
    z = numerics.make_grid(dom, grid)
    F = T.forward(ts, f, z, _quad(conf))
    cols = ["z", "re", "im"]
    cols_vals = [z, np.real(F.values), np.imag(F.values)]
    meta = {"transform": kind}
    if conf["t"] is not None:
        m = T.multiplier(spec, ts, conf["t"], z)
        G = T.forward(ts, tr.Translated(spec, f, conf["t"]), z, _quad(conf))
        cols += ["translated_re", "translated_im", "multiplier"]
        cols_vals += [np.real(G.values), np.imag(G.values), m]
        meta["multiplier_residual"] = float(np.max(np.abs(G.values - m * F.values)))
    return cols, [list(r) for r in zip(*cols_vals)], meta


def cmd_modulus(conf):
    spec = _spec(conf)
    _need(conf, "t")
    f = _func(conf)
    nodes = _nodes(conf, spec, [f], conf["t"], 801)
    table = sm.modulus_table(spec, f, conf["t"], conf["r"], conf["p"], nodes)
    omega = max(v for _, v in table)
    return ["h", "norm_delta"], [[h, v] for h, v in table], {"omega": omega}


def cmd_kfun(conf):
    spec = _spec(conf)
    _need(conf, "t")
    f = _func(conf)
    nodes = _nodes(conf, spec, [f], conf["t"], 801)
    cands = sm.k_candidates(spec, f, conf["t"], conf["r"], conf["p"], nodes)
    omega = sm.modulus(spec, f, conf["t"], conf["r"], conf["p"], nodes=nodes)
    rows = [[c.kind, c.param, c.distance, c.gen_norm, c.value] for c in cands]
    meta = {"omega": omega, "k_upper": min(c.value for c in cands)}
    warnings = sorted({c.warning for c in cands if c.warning})
    if warnings:
        meta["warning"] = "; ".join(warnings)
    return ["candidate", "param", "distance", "gen_norm", "value"], rows, meta


def _members(conf, spec):
    if conf["family"] and conf["f"]:
        raise UsageError("give either --family or --f, not both")
    if conf["family"]:
        name, *args = conf["family"].split(":")
        try:
            if name == "gw-kernels" and len(args) == 3:
                s = np.linspace(float(args[0]), float(args[1]), int(args[2]))
                return cp.gw_kernel_family(s, spec.b if spec.family == tr.GAUSS_WEIERSTRASS else 1.0)
            if name == "hermite" and len(args) == 1:
                return [fe.Hermite(k) for k in range(int(args[0]) + 1)]
        except ValueError:
            pass
        raise UsageError(f"unknown family {conf['family']!r}; use gw-kernels:s0:s1:n or hermite:kmax")
    _need(conf, "f")
    return [fe.parse(s) for s in fe._split_top(conf["f"], ";")]


def cmd_compact(conf):
    spec = _spec(conf)
    _need(conf, "criterion")
    members = _members(conf, spec)
    crit, p, thr = _CRITERIA[conf["criterion"]], conf["p"], conf["tol"]
    if crit == cp.PA:
        rep = cp.check_pa(members, conf["R"], p, threshold=thr, spec=spec)
    elif crit == cp.PB1:
        rep = cp.check_pb1(spec, members, conf["M0"], conf["h"], p, threshold=thr)
    elif crit == cp.PB2:
        rep = cp.check_pb2(spec, members, conf["a"], conf["R"][-1], conf["h"], p, threshold=thr)
    else:
        kind = conf["kind"] or _DEFAULT_KIND.get(spec.family)
        if kind is None:
            raise UsageError(f"{spec.family} has no default transform; pass --kind")
        ts = T.TransformSpec(kind, spec.alpha, spec.beta) if kind == T.JACOBI else T.TransformSpec(kind)
        if crit == cp.PEGO_FORWARD:
            rep = cp.pego_forward(members, ts, conf["R"], p, conf["h"], spec=spec, threshold=thr)
        else:
            t = 0.1 if conf["t"] is None else conf["t"]
            rep = cp.pego_reverse(spec, members, ts, None, p, t)
    cols = list(rep.table[0]) if rep.table else []
    rows = [[row[c] for c in cols] for row in rep.table]
    meta = {"criterion": rep.criterion, "sup": rep.sup_value,
            "passed": "n/a" if rep.passed is None else str(rep.passed).lower()}
    for k, v in sorted(rep.meta.items()):
        if isinstance(v, (int, float, str, bool)):
            meta[k] = v
    return cols, rows, meta


def cmd_verify(conf):
    _need(conf, "suite")
    spec = _spec(conf, required=False)
    opts = verify.Options(spec=spec, tol=conf["tol"], seed=conf["seed"])
    names = list(verify.SUITES) if conf["suite"] == "all" else [conf["suite"]]
    rows, ok = [], True
    for name in names:
        res = verify.run_suite(name, opts)
        ok &= res.passed
        print(f"{name}: {'PASS' if res.passed else 'FAIL'} ({len(res.rows)} rows)", file=sys.stderr)
        for r in res.rows:
            rows.append([name, r["case"], r["quantity"], r["value"], r["bound"], r["relation"],
                         "pass" if r["pass"] else "fail"])
    cols = ["suite", "case", "quantity", "value", "bound", "relation", "result"]
    return cols, rows, {"passed": str(ok).lower()}


HANDLERS = {"kernel": cmd_kernel, "translate": cmd_translate, "transform": cmd_transform,
            "modulus": cmd_modulus, "kfun": cmd_kfun, "compact": cmd_compact, "verify": cmd_verify}


# ----------------------------------------------------------------- output

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def _csv_cell(v):
    s = _fmt(v)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else _fmt(v)
    if isinstance(v, tuple):
        return [_json_value(x) for x in v]
    return v


def render(command, argv, conf, cols, rows, meta, fmt):
    config = {k: conf[k] for k in COMMANDS[command][1] if conf[k] is not None}
    if fmt == "json":
        doc = {"command": command, "argv": list(argv), "version": __version__,
               "config": {k: _json_value(v) for k, v in config.items()},
               "meta": {k: _json_value(v) for k, v in meta.items()},
               "columns": cols, "rows": [[_json_value(v) for v in r] for r in rows]}
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"
    lines = [f"# transop {__version__} {command}", "# argv: " + shlex.join(argv)]
    lines += [f"# config {k} = {_fmt(v)}" for k, v in sorted(config.items())]
    lines += [f"# {k}: {_fmt(v)}" for k, v in meta.items()]
    lines.append(",".join(cols))
    lines += [",".join(_csv_cell(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def _check_threads():
    raw = os.environ.get("TRANSOP_THREADS")
    if raw is None:
        return
    try:
        ok = int(raw) >= 1
    except ValueError:
        ok = False
    if not ok:
        raise UsageError(f"TRANSOP_THREADS must be a positive integer, got {raw!r}")


def _join_values(argv):
    """'--grid -6:6:241' -> '--grid=-6:6:241' so values may start with '-'."""
    flags = {_flag(k) for k in OPTIONS} | {"--config"}
    out, i = [], 0
    while i < len(argv):
        if argv[i] in flags and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _check_threads()
        ns = build_parser().parse_args(_join_values(argv))
        if ns.command is None:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        cli = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
        conf = resolve(ns.command, cli, ns.config)
        cols, rows, meta = HANDLERS[ns.command](conf)
        text = render(ns.command, argv, conf, cols, rows, meta, conf["format"])
        if conf["out"]:
            with open(conf["out"], "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (ValueError, ArithmeticError, OSError) as exc:
        msg = " ".join(str(exc).split()) or type(exc).__name__
        print(f"transop: error: {msg}", file=sys.stderr)
        return 2
    if ns.command == "verify" and meta["passed"] != "true":
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
