"""Closed vocabulary of analytic test functions.

Every expression is an immutable tree that knows its values, its exact
derivatives up to ``analytic_order`` and a little geometry used to build
quadrature rules: an effective support outside which it is negligible
(|f| < 1e-16 relative), breakpoints where it is not smooth, and a length
``scale`` on which it varies.

Text form::

    expr   := atom | "shift(" expr ";" num ")" | "scale(" expr ";" num ")"
            | "sum(" expr ("|" expr)* ")"
    atom   := name [":" num ("," num)*]
    name   := gaussian | bump | indicator | hermite | laguerre_fn
            | gegenbauer | hyperbolic_bump | constant

``parse(str(e)) == e`` for every expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import hermite_e

from . import specfun

INF = math.inf
_DERIV_CAP = 8


class FuncExprError(ValueError):
    pass


class UnknownFunctionError(FuncExprError):
    pass


class MalformedExpressionError(FuncExprError):
    pass


class ParameterRangeError(FuncExprError):
    pass


def _num(v):
    return repr(float(v))


class FuncExpr:
    """Base class; subclasses are frozen dataclasses."""

    analytic_order = 0
    decay = "compact"
    domain_kind = "real"

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))

    def eval(self, x):
        raise NotImplementedError

    def deriv(self, x, order=1):
        order = int(order)
        if order == 0:
            return self(x)
        if order < 0 or order > self.analytic_order:
            raise FuncExprError(f"{self} has no analytic derivative of order {order}")
        return self._deriv(np.asarray(x, dtype=float), order)

    def _deriv(self, x, order):
        raise NotImplementedError

    @property
    def support(self):
        return (-INF, INF)

    @property
    def breakpoints(self):
        return ()

    @property
    def scale(self):
        return 1.0

    def __str__(self):
        return self.text()


@dataclass(frozen=True)
class Gaussian(FuncExpr):
    sigma: float = 1.0
    analytic_order = _DERIV_CAP
    decay = "gaussian"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterRangeError("gaussian width must be positive")

    def eval(self, x):
        return np.exp(-0.5 * (x / self.sigma) ** 2)

    def _deriv(self, x, order):
        s = x / self.sigma
        coef = np.zeros(order + 1)
        coef[order] = 1.0
        return (-1.0 / self.sigma) ** order * hermite_e.hermeval(s, coef) * np.exp(-0.5 * s * s)

    @property
    def support(self):
        return (-9.0 * self.sigma, 9.0 * self.sigma)

    @property
    def scale(self):
        return self.sigma

    def text(self):
        return f"gaussian:{_num(self.sigma)}"


@dataclass(frozen=True)
class Bump(FuncExpr):
    """(1 - s^2)^3 with s the affine image of [a, b] onto [-1, 1]; C^2."""

    a: float = -1.0
    b: float = 1.0
    analytic_order = 2

    def __post_init__(self):
        if not self.a < self.b:
            raise ParameterRangeError("bump needs a < b")

    def _s(self, x):
        return (2 * x - self.a - self.b) / (self.b - self.a)

    def eval(self, x):
        s = self._s(x)
        return np.where(np.abs(s) < 1, (1 - s * s) ** 3, 0.0)

    def _deriv(self, x, order):
        s = self._s(x)
        ds = 2.0 / (self.b - self.a)
        u = 1 - s * s
        if order == 1:
            v = -6 * s * u * u * ds
        else:
            v = (-6 * u * u + 24 * s * s * u) * ds * ds
        return np.where(np.abs(s) < 1, v, 0.0)

    @property
    def support(self):
        return (self.a, self.b)

    @property
    def breakpoints(self):
        return (self.a, self.b)

    @property
    def scale(self):
        return 0.25 * (self.b - self.a)

    def text(self):
        return f"bump:{_num(self.a)},{_num(self.b)}"


@dataclass(frozen=True)
class Indicator(FuncExpr):
    a: float = -1.0
    b: float = 1.0

    def __post_init__(self):
        if not self.a < self.b:
            raise ParameterRangeError("indicator needs a < b")

    def eval(self, x):
        return np.where((x >= self.a) & (x <= self.b), 1.0, 0.0)

    @property
    def support(self):
        return (self.a, self.b)

    @property
    def breakpoints(self):
        return (self.a, self.b)

    @property
    def scale(self):
        return 0.25 * (self.b - self.a)

    def text(self):
        return f"indicator:{_num(self.a)},{_num(self.b)}"


def _hermite_ladder(coef):
    """Coefficients of d/dx sum c_j h_j in the h_j basis."""
    out = np.zeros(len(coef) + 1)
    for j, c in enumerate(coef):
        if j > 0:
            out[j - 1] += c * math.sqrt(j / 2)
        out[j + 1] -= c * math.sqrt((j + 1) / 2)
    return out


@dataclass(frozen=True)
class Hermite(FuncExpr):
    """Normalised Hermite function h_k."""

    k: int = 0
    analytic_order = _DERIV_CAP
    decay = "gaussian"

    def __post_init__(self):
        if int(self.k) != self.k or not 0 <= self.k <= specfun.MAX_ORDER:
            raise ParameterRangeError(f"hermite order must be an integer in [0, {specfun.MAX_ORDER}]")
        object.__setattr__(self, "k", int(self.k))

    def eval(self, x):
        return specfun.hermite_fn(self.k, x)

    def _deriv(self, x, order):
        coef = np.zeros(self.k + 1)
        coef[self.k] = 1.0
        for _ in range(order):
            coef = _hermite_ladder(coef)
        table = specfun.hermite_fn_all(len(coef) - 1, x)
        return np.tensordot(coef, table, axes=(0, 0))

    @property
    def support(self):
        r = math.sqrt(2 * self.k + 1) + 9.0
        return (-r, r)

    @property
    def scale(self):
        return 1.0 / math.sqrt(self.k + 1)

    def text(self):
        return f"hermite:{self.k}"


@dataclass(frozen=True)
class LaguerreFn(FuncExpr):
    """Laguerre function of Hermite type on (0, inf)."""

    n: int = 0
    alpha: float = 0.0
    analytic_order = 2
    decay = "gaussian"
    domain_kind = "half"

    def __post_init__(self):
        if int(self.n) != self.n or not 0 <= self.n <= specfun.MAX_ORDER:
            raise ParameterRangeError(f"laguerre order must be an integer in [0, {specfun.MAX_ORDER}]")
        if not self.alpha >= -0.5:
            raise ParameterRangeError("laguerre_fn needs alpha >= -1/2")
        object.__setattr__(self, "n", int(self.n))

    def eval(self, x):
        x = np.maximum(x, 0.0)
        return specfun.laguerre_fn(self.n, self.alpha, x)

    def _deriv(self, x, order):
        n, a = self.n, self.alpha
        x = np.maximum(x, 1e-300)
        c = math.sqrt(2.0) * math.exp(0.5 * (math.lgamma(n + 1) - math.lgamma(n + a + 1)))
        y = x * x
        P = specfun.laguerre_poly(n, a, y)
        L1 = -specfun.laguerre_poly(n - 1, a + 1, y) if n >= 1 else np.zeros_like(y)
        L2 = specfun.laguerre_poly(n - 2, a + 2, y) if n >= 2 else np.zeros_like(y)
        dP = 2 * x * L1
        d2P = 2 * L1 + 4 * y * L2
        # u = x^(a+1/2) e^{-x^2/2}
        m = a + 0.5
        u = x ** m * np.exp(-0.5 * y)
        g = m / x - x
        du = u * g
        if order == 1:
            return c * (du * P + u * dP)
        d2u = u * (g * g - m / y - 1.0)
        return c * (d2u * P + 2 * du * dP + u * d2P)

    @property
    def support(self):
        return (0.0, math.sqrt(4 * self.n + 2 * self.alpha + 2) + 9.0)

    @property
    def scale(self):
        return 1.0 / math.sqrt(self.n + 1)

    def text(self):
        return f"laguerre_fn:{self.n},{_num(self.alpha)}"


@dataclass(frozen=True)
class Gegenbauer(FuncExpr):
    """theta -> P_k^{(lam)}(cos theta) on [0, pi]."""

    k: int = 0
    lam: float = 1.0
    analytic_order = 2
    decay = "compact"
    domain_kind = "zero_pi"

    def __post_init__(self):
        if int(self.k) != self.k or not 0 <= self.k <= specfun.MAX_ORDER:
            raise ParameterRangeError("gegenbauer degree must be a nonnegative integer")
        if not self.lam > -0.5 or self.lam == 0:
            raise ParameterRangeError("gegenbauer needs lam > -1/2, lam != 0")
        object.__setattr__(self, "k", int(self.k))

    def _p(self, n, lam, c):
        if n < 0:
            return np.zeros_like(c)
        return specfun.gegenbauer_poly(n, lam, c)

    def eval(self, x):
        return specfun.gegenbauer_poly(self.k, self.lam, np.clip(np.cos(x), -1, 1))

    def _deriv(self, x, order):
        k, lam = self.k, self.lam
        c = np.clip(np.cos(x), -1, 1)
        s = np.sin(x)
        d1 = 2 * lam * self._p(k - 1, lam + 1, c)
        if order == 1:
            return -s * d1
        d2 = 4 * lam * (lam + 1) * self._p(k - 2, lam + 2, c)
        return -c * d1 + s * s * d2

    @property
    def support(self):
        return (0.0, math.pi)

    @property
    def scale(self):
        return 1.0 / (self.k + 1)

    def text(self):
        return f"gegenbauer:{self.k},{_num(self.lam)}"


@dataclass(frozen=True)
class HyperbolicBump(FuncExpr):
    """exp(1 - 1/(1 - s^2)) on [a, b] in x >= 0; even about 0 when a == 0."""

    a: float = 0.0
    b: float = 1.0
    analytic_order = 2
    domain_kind = "half"

    def __post_init__(self):
        if not 0 <= self.a < self.b:
            raise ParameterRangeError("hyperbolic_bump needs 0 <= a < b")

    def _s(self, x):
        if self.a == 0:
            return x / self.b, 1.0 / self.b
        return (2 * x - self.a - self.b) / (self.b - self.a), 2.0 / (self.b - self.a)

    def eval(self, x):
        s, _ = self._s(x)
        inside = np.abs(s) < 1
        u = np.where(inside, 1 - s * s, 1.0)
        return np.where(inside, np.exp(1 - 1 / u), 0.0)

    def _deriv(self, x, order):
        s, ds = self._s(x)
        inside = np.abs(s) < 1
        u = np.where(inside, 1 - s * s, 1.0)
        e = np.where(inside, np.exp(1 - 1 / u), 0.0)
        if order == 1:
            return e * (-2 * s / u ** 2) * ds
        v = 4 * s * s / u ** 4 - 2 / u ** 2 - 8 * s * s / u ** 3
        return e * v * ds * ds

    @property
    def support(self):
        return (self.a, self.b) if self.a > 0 else (0.0, self.b)

    @property
    def breakpoints(self):
        return (self.a, self.b) if self.a > 0 else (self.b,)

    @property
    def scale(self):
        return (self.b - self.a) / 8.0

    def text(self):
        return f"hyperbolic_bump:{_num(self.a)},{_num(self.b)}"


@dataclass(frozen=True)
class Constant(FuncExpr):
    c: float = 1.0
    analytic_order = _DERIV_CAP
    decay = "none"

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise ParameterRangeError("constant must be finite")

    def eval(self, x):
        return np.full(np.shape(x), float(self.c))

    def _deriv(self, x, order):
        return np.zeros(np.shape(x))

    @property
    def scale(self):
        return INF

    def text(self):
        return f"constant:{_num(self.c)}"


@dataclass(frozen=True)
class Shifted(FuncExpr):
    inner: FuncExpr
    s: float

    @property
    def analytic_order(self):
        return self.inner.analytic_order

    @property
    def decay(self):
        return self.inner.decay

    @property
    def domain_kind(self):
        return self.inner.domain_kind

    def eval(self, x):
        return self.inner(x - self.s)

    def _deriv(self, x, order):
        return self.inner.deriv(x - self.s, order)

    @property
    def support(self):
        lo, hi = self.inner.support
        return (lo + self.s, hi + self.s)

    @property
    def breakpoints(self):
        return tuple(p + self.s for p in self.inner.breakpoints)

    @property
    def scale(self):
        return self.inner.scale

    def text(self):
        return f"shift({self.inner.text()};{_num(self.s)})"


@dataclass(frozen=True)
class Scaled(FuncExpr):
    inner: FuncExpr
    c: float

    @property
    def analytic_order(self):
        return self.inner.analytic_order

    @property
    def decay(self):
        return self.inner.decay

    @property
    def domain_kind(self):
        return self.inner.domain_kind

    def eval(self, x):
        return self.c * self.inner(x)

    def _deriv(self, x, order):
        return self.c * self.inner.deriv(x, order)

    @property
    def support(self):
        return self.inner.support

    @property
    def breakpoints(self):
        return self.inner.breakpoints

    @property
    def scale(self):
        return self.inner.scale

    def text(self):
        return f"scale({self.inner.text()};{_num(self.c)})"


_DECAY_RANK = {"compact": 0, "gaussian": 1, "exponential": 2, "none": 3}


@dataclass(frozen=True)
class Sum(FuncExpr):
    terms: tuple

    def __post_init__(self):
        if len(self.terms) == 0:
            raise MalformedExpressionError("sum needs at least one term")
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def analytic_order(self):
        return min(t.analytic_order for t in self.terms)

    @property
    def decay(self):
        return max((t.decay for t in self.terms), key=_DECAY_RANK.__getitem__)

    @property
    def domain_kind(self):
        return self.terms[0].domain_kind

    def eval(self, x):
        return sum(t(x) for t in self.terms)

    def _deriv(self, x, order):
        return sum(t.deriv(x, order) for t in self.terms)

    @property
    def support(self):
        return (min(t.support[0] for t in self.terms), max(t.support[1] for t in self.terms))

    @property
    def breakpoints(self):
        return tuple(sorted({p for t in self.terms for p in t.breakpoints}))

    @property
    def scale(self):
        return min(t.scale for t in self.terms)

    def text(self):
        return "sum(" + "|".join(t.text() for t in self.terms) + ")"


# name -> (class, parameter count, integer parameter positions)
_ATOMS = {
    "gaussian": (Gaussian, (1,), ()),
    "bump": (Bump, (2,), ()),
    "indicator": (Indicator, (2,), ()),
    "hermite": (Hermite, (1,), (0,)),
    "laguerre_fn": (LaguerreFn, (1, 2), (0,)),
    "gegenbauer": (Gegenbauer, (2,), (0,)),
    "hyperbolic_bump": (HyperbolicBump, (2,), ()),
    "constant": (Constant, (1,), ()),
}


def _parse_number(text):
    try:
        v = float(text)
    except ValueError:
        raise MalformedExpressionError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise MalformedExpressionError(f"parameter must be finite: {text!r}")
    return v


def _split_top(text, sep):
    """Split on ``sep`` at parenthesis depth zero."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise MalformedExpressionError("unbalanced parentheses")
        elif ch == sep and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    if depth != 0:
        raise MalformedExpressionError("unbalanced parentheses")
    parts.append(text[start:])
    return parts


def parse(text):
    if not isinstance(text, str):
        raise MalformedExpressionError("expression must be a string")
    s = text.strip()
    if not s:
        raise MalformedExpressionError("empty expression")
    for comb in ("shift", "scale", "sum"):
        if s.startswith(comb + "("):
            if not s.endswith(")"):
                raise MalformedExpressionError(f"unterminated {comb}(...)")
            body = s[len(comb) + 1:-1]
            if comb == "sum":
                return Sum(tuple(parse(t) for t in _split_top(body, "|")))
            parts = _split_top(body, ";")
            if len(parts) != 2:
                raise MalformedExpressionError(f"{comb} takes 'expr;number'")
            inner, num = parse(parts[0]), _parse_number(parts[1])
            return Shifted(inner, num) if comb == "shift" else Scaled(inner, num)
    name, _, params = s.partition(":")
    name = name.strip()
    if name == "laguerre":
        name = "laguerre_fn"
    if name not in _ATOMS:
        if any(ch in name for ch in "();|,"):
            raise MalformedExpressionError(f"cannot parse {text!r}")
        raise UnknownFunctionError(f"unknown function {name!r}")
    cls, counts, ints = _ATOMS[name]
    values = [] if not params.strip() else [_parse_number(p) for p in params.split(",")]
    if values and len(values) not in counts:
        raise MalformedExpressionError(
            f"{name} takes {' or '.join(map(str, counts))} parameters, got {len(values)}")
    for i in ints:
        if i < len(values):
            if values[i] != int(values[i]):
                raise ParameterRangeError(f"{name} parameter {i + 1} must be an integer")
            values[i] = int(values[i])
    return cls(*values)


def as_funcexpr(f):
    return parse(f) if isinstance(f, str) else f
