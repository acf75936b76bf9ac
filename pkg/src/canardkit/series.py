"""Truncated power series in a perturbation parameter with rational-function
coefficients, and the order-by-order canard expansion.

At every order exactly one parameter coefficient is unknown.  It enters the
order's trajectory coefficient affinely; the value is fixed by demanding that
the coefficient stay finite at the fold abscissa.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from .errors import (
    DegreeTooHigh,
    NoCancellation,
    NonlinearUnknown,
    NoSolution,
    NotAffine,
    NotRational,
    SqrtPresent,
    ZeroLeadingCoefficient,
)
from .expr import Const, Expr, Power, Product, Sqrt, Sum, Var, collect, mul, power, substitute
from .poly import Poly, RatFunc, poly_lcm, to_ratfunc


class ParamSeries:
    """``sum(coeffs[k] * var**k for k in range(order + 1)) + O(var**(order+1))``."""

    __slots__ = ("coeffs", "var", "x")

    def __init__(self, coeffs: Sequence, var: str = "eps", x: str = "x"):
        self.coeffs = tuple(_as_ratfunc(c, x) for c in coeffs)
        if not self.coeffs:
            raise ValueError("a series needs at least one coefficient")
        self.var = var
        self.x = x

    @classmethod
    def constant(cls, c, order: int, var: str = "eps", x: str = "x") -> "ParamSeries":
        zero = RatFunc.const(0, x)
        return cls([_as_ratfunc(c, x)] + [zero] * order, var, x)

    @classmethod
    def parameter(cls, order: int, var: str = "eps", x: str = "x") -> "ParamSeries":
        cs = [RatFunc.const(0, x)] * (order + 1)
        if order >= 1:
            cs[1] = RatFunc.const(1, x)
        return cls(cs, var, x)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> RatFunc:
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, ParamSeries):
            return NotImplemented
        return self.coeffs == other.coeffs and self.var == other.var

    def __repr__(self):
        return f"ParamSeries({[str(c) for c in self.coeffs]}, {self.var!r})"

    def _coerce(self, other) -> "ParamSeries":
        if isinstance(other, ParamSeries):
            if other.var != self.var:
                raise ValueError(f"expansion variable mismatch: {self.var} vs {other.var}")
            return other
        return ParamSeries.constant(other, self.order, self.var, self.x)

    def truncate(self, order: int) -> "ParamSeries":
        return ParamSeries(self.coeffs[: order + 1], self.var, self.x)

    def __add__(self, other):
        o = self._coerce(other)
        n = min(len(self), len(o))
        return ParamSeries([a + b for a, b in zip(self.coeffs[:n], o.coeffs[:n])], self.var, self.x)

    __radd__ = __add__

    def __neg__(self):
        return ParamSeries([-a for a in self.coeffs], self.var, self.x)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        n = min(len(self), len(o))
        a, b = self.coeffs, o.coeffs
        out = []
        for k in range(n):
            acc = RatFunc.const(0, self.x)
            for i in range(k + 1):
                if not a[i].is_zero() and not b[k - i].is_zero():
                    acc = acc + a[i] * b[k - i]
            out.append(acc)
        return ParamSeries(out, self.var, self.x)

    __rmul__ = __mul__

    def reciprocal(self) -> "ParamSeries":
        a = self.coeffs
        if a[0].is_zero():
            raise ZeroLeadingCoefficient("reciprocal of a series with zero leading coefficient")
        inv0 = a[0].reciprocal()
        out = [inv0]
        for k in range(1, len(a)):
            acc = RatFunc.const(0, self.x)
            for i in range(1, k + 1):
                if not a[i].is_zero() and not out[k - i].is_zero():
                    acc = acc + a[i] * out[k - i]
            out.append(-(acc * inv0))
        return ParamSeries(out, self.var, self.x)

    def __truediv__(self, other):
        return self * self._coerce(other).reciprocal()

    def __pow__(self, n: int):
        if n < 0:
            return self.reciprocal() ** (-n)
        out = ParamSeries.constant(1, self.order, self.var, self.x)
        for _ in range(n):
            out = out * self
        return out

    def derivative(self) -> "ParamSeries":
        """Coefficient-wise derivative in the spatial variable."""
        return ParamSeries([c.derivative() for c in self.coeffs], self.var, self.x)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def to_records(self) -> list[dict]:
        """Exact serialization: integer coefficient lists (lowest degree
        first) for numerator and denominator of every order."""
        out = []
        for k, c in enumerate(self.coeffs):
            scale = lcm(*(q.denominator for q in c.num.coeffs + c.den.coeffs)) if not c.is_zero() else 1
            out.append({
                "power": k,
                "num": [str(int(q * scale)) for q in c.num.coeffs],
                "den": [str(int(q * scale)) for q in c.den.coeffs],
            })
        return out

    @classmethod
    def from_records(cls, records, var: str = "eps", x: str = "x") -> "ParamSeries":
        records = sorted(records, key=lambda r: r["power"])
        cs = []
        for r in records:
            cs.append(RatFunc(Poly([int(v) for v in r["num"]], x), Poly([int(v) for v in r["den"]], x)))
        return cls(cs, var, x)


def _as_ratfunc(c, x: str) -> RatFunc:
    if isinstance(c, RatFunc):
        return c
    if isinstance(c, Poly):
        return RatFunc(c)
    if isinstance(c, Expr):
        return to_ratfunc(c, x)
    return RatFunc.const(c, x)


def series_eval(e: Expr, bindings: Mapping[str, object], order: int, var: str = "eps", x: str = "x") -> ParamSeries:
    """Expand ``e`` in powers of ``var``.

    ``bindings`` maps symbols to series, rational functions or numbers; the
    spatial variable ``x`` is kept as the coefficient variable and ``var``
    itself becomes the series ``0 + 1*var``.
    """
    env: dict[str, ParamSeries] = {}
    for k, v in bindings.items():
        env[k] = v.truncate(order) if isinstance(v, ParamSeries) else ParamSeries.constant(v, order, var, x)
    if var not in env:
        env[var] = ParamSeries.parameter(order, var, x)
    memo: dict[Expr, ParamSeries] = {}

    def go(node: Expr) -> ParamSeries:
        try:
            return memo[node]
        except KeyError:
            pass
        if isinstance(node, Const):
            out = ParamSeries.constant(node.value, order, var, x)
        elif isinstance(node, Var):
            if node.name in env:
                out = env[node.name]
            elif node.name == x:
                out = ParamSeries.constant(RatFunc(Poly([0, 1], x)), order, var, x)
            else:
                raise NotRational(f"unbound symbol {node.name!r} in series expansion")
        elif isinstance(node, Sum):
            out = go(node.terms[0])
            for t in node.terms[1:]:
                out = out + go(t)
        elif isinstance(node, Product):
            out = go(node.factors[0])
            for f in node.factors[1:]:
                out = out * go(f)
        elif isinstance(node, Power):
            out = go(node.base) ** node.exp
        elif isinstance(node, Sqrt):
            raise SqrtPresent(f"radical {node} in series expansion")
        else:  # pragma: no cover
            raise TypeError(type(node))
        memo[node] = out
        return out

    return go(e)


# ---------------------------------------------------------------------------
# scalar (rational-coefficient) series helpers


def _smul(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    n = min(len(a), len(b))
    return [sum((a[i] * b[k - i] for i in range(k + 1)), Fraction(0)) for k in range(n)]


def root_series(rows: Sequence[Poly], x0, order: int) -> list[Fraction]:
    """Taylor coefficients of the root ``x(eps)`` of ``sum(rows[i](eps) * x**i)``
    that passes through the simple root ``x0`` at ``eps = 0``."""
    x0 = Fraction(x0)
    at0 = Poly([r.coeffs[0] if r.coeffs else 0 for r in rows])
    if at0(x0) != 0:
        raise NoCancellation(f"{x0} is not a root at eps = 0")
    slope = at0.derivative()(x0)
    if slope == 0:
        raise NoCancellation(f"{x0} is a multiple root at eps = 0")
    a = [x0] + [Fraction(0)] * order

    def residual(a):
        total = [Fraction(0)] * (order + 1)
        xp = [Fraction(1)] + [Fraction(0)] * order
        for r in rows:
            rc = list(r.coeffs[: order + 1]) + [Fraction(0)] * (order + 1 - len(r.coeffs[: order + 1]))
            term = _smul(rc, xp)
            total = [s + t for s, t in zip(total, term)]
            xp = _smul(xp, a)
        return total

    for m in range(1, order + 1):
        a[m] = -residual(a)[m] / slope
    return a


def series_compose(rows: Sequence[Poly], xs: Sequence[Fraction]) -> list[Fraction]:
    """``sum(rows[i](eps) * x(eps)**i)`` as a truncated scalar series."""
    order = len(xs) - 1
    total = [Fraction(0)] * (order + 1)
    xp = [Fraction(1)] + [Fraction(0)] * order
    for r in rows:
        rc = list(r.coeffs[: order + 1])
        rc += [Fraction(0)] * (order + 1 - len(rc))
        total = [s + t for s, t in zip(total, _smul(rc, xp))]
        xp = _smul(xp, xs)
    return total


def series_divide(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    if b[0] == 0:
        raise ZeroLeadingCoefficient("division by a series with zero constant term")
    out: list[Fraction] = []
    for k in range(min(len(a), len(b))):
        acc = a[k] - sum((b[i] * out[k - i] for i in range(1, k + 1)), Fraction(0))
        out.append(acc / b[0])
    return out


# ---------------------------------------------------------------------------
# unknown resolution


def resolve_linear_unknown(numerator_at_fold: Callable[[Fraction], object], probes=(0, 1), check: int = 2):
    """Zero of an affine map ``c -> N(c)`` from two probes, verified by a
    third.  Exact for rational-valued maps."""
    p0, p1 = (Fraction(p) for p in probes)
    n0, n1 = numerator_at_fold(p0), numerator_at_fold(p1)
    slope = (n1 - n0) / (p1 - p0)
    n2 = numerator_at_fold(Fraction(check))
    if n2 != n0 + slope * (check - p0):
        raise NotAffine(f"numerator is not affine in the unknown: N({check}) = {n2}")
    if slope == 0:
        raise NoSolution("the unknown does not enter the numerator")
    return p0 - n0 / slope


def resolve_linear_unknown_float(numerator_at_fold: Callable[[float], float], rtol: float = 1e-9,
                                 probes=(0.0, 1.0), check: float = 2.0) -> float:
    """Floating-point variant with a relative affinity tolerance."""
    n0, n1 = numerator_at_fold(probes[0]), numerator_at_fold(probes[1])
    slope = (n1 - n0) / (probes[1] - probes[0])
    n2 = numerator_at_fold(check)
    pred = n0 + slope * (check - probes[0])
    if abs(n2 - pred) > rtol * max(abs(n0), abs(n1), abs(n2), 1e-300):
        raise NotAffine(f"numerator is not affine in the unknown (N({check}) = {n2}, affine {pred})")
    if slope == 0:
        raise NoSolution("the unknown does not enter the numerator")
    return probes[0] - n0 / slope


@dataclass
class Cancellation:
    value: Fraction
    coefficient: RatFunc
    stripped: int


def cancel_pole(coefficient_for: Callable[[Fraction], RatFunc], fold_x) -> Cancellation:
    """Choose the unknown so that ``coefficient_for(unknown)`` is finite at
    ``fold_x``.

    Factors ``(x - fold_x)`` common to the denominator and to both the
    constant and linear parts of the numerator do not involve the unknown and
    are divided out before solving.
    """
    fold_x = Fraction(fold_x)
    r0, r1, r2 = (coefficient_for(Fraction(v)) for v in (0, 1, 2))
    if r2 - r1 != r1 - r0:
        raise NotAffine("order coefficient is not affine in the live unknown")
    den = poly_lcm(r0.den, r1.den)
    n0 = r0.num * (den // r0.den)
    dn = r1.num * (den // r1.den) - n0
    if den(fold_x) != 0:
        raise NoCancellation(f"no singularity at x = {fold_x} to cancel")
    lin = Poly([-fold_x, 1], den.var)
    stripped = 0
    while den(fold_x) == 0 and n0(fold_x) == 0 and dn(fold_x) == 0:
        den, n0, dn = den // lin, n0 // lin, dn // lin
        stripped += 1
    if den(fold_x) != 0:
        raise NoCancellation(f"singularity at x = {fold_x} cancels for every value of the unknown")
    try:
        value = resolve_linear_unknown(lambda c: n0(fold_x) + c * dn(fold_x))
    except NoSolution as exc:
        raise NoCancellation(str(exc)) from None
    coefficient = RatFunc(n0 + dn * value, den)
    if coefficient.den(fold_x) == 0:
        raise NoCancellation(f"pole at x = {fold_x} has order > 1 and one unknown cannot remove it")
    return Cancellation(value, coefficient, stripped)


# ---------------------------------------------------------------------------
# classical canard expansion


@dataclass
class CanardExpansion:
    """``c = sum(c[k] eps^k)`` and ``y = sum(y[k] eps^k)`` with every ``y[k]``
    finite at ``fold_x``."""

    c: list[Fraction]
    y: list[RatFunc]
    fold_x: Fraction
    var: str = "eps"
    x: str = "x"
    stripped: list[int] = field(default_factory=list)

    def c_series(self) -> list[Fraction]:
        return list(self.c)

    def y_series(self) -> ParamSeries:
        return ParamSeries(self.y, self.var, self.x)


def critical_manifold(f: Expr, x: str, y: str, c: str, eps: str) -> RatFunc:
    """The branch ``f(x, y0(x), c, 0) = 0`` solved for ``y0`` (linear case)."""
    f0 = substitute(f, {eps: 0})
    coeffs = collect(f0, y)
    if max(coeffs, default=0) > 1:
        raise DegreeTooHigh(f"critical manifold is degree {max(coeffs)} in {y}; only linear branches are expandable")
    if 1 not in coeffs:
        raise NoCancellation(f"f does not depend on {y}")
    y0 = mul(-1, coeffs.get(0, Const(0)), power(coeffs[1], -1))
    if y0.has(c):
        raise NonlinearUnknown(f"critical manifold depends on the parameter {c}")
    return to_ratfunc(y0, x)


def expansion_residual(f: Expr, g: Expr, ys: Sequence[RatFunc], cs: Sequence[Fraction], order: int,
                       x: str = "x", y: str = "y", c: str = "c", eps: str = "eps") -> ParamSeries:
    """``f * dy/dx - eps * g`` with the series substituted, to ``order``."""
    yser = ParamSeries(list(ys[: order + 1]) + [RatFunc.const(0, x)] * max(0, order + 1 - len(ys)), eps, x)
    cser = ParamSeries(list(cs[: order + 1]) + [0] * max(0, order + 1 - len(cs)), eps, x)
    fs = series_eval(f, {y: yser, c: cser}, order, eps, x)
    gs = series_eval(g, {y: yser, c: cser}, order, eps, x)
    return fs * yser.derivative() - ParamSeries.parameter(order, eps, x) * gs


def classical_canard_expansion(f: Expr, g: Expr, fold_x, order: int,
                               x: str = "x", y: str = "y", c: str = "c", eps: str = "eps") -> CanardExpansion:
    """Joint expansion of the canard trajectory and canard point for
    ``f * dy/dx = eps * g``.

    Returns ``c[0..order]`` and ``y[0..order+1]``; ``c[k-1]`` is fixed at
    order ``k`` by cancelling the pole of ``y[k]`` at ``fold_x``.
    """
    fold_x = Fraction(fold_x)
    y0 = critical_manifold(f, x, y, c, eps)
    ys: list[RatFunc] = [y0]
    cs: list[Fraction] = []
    stripped: list[int] = []
    zero = RatFunc.const(0, x)
    for k in range(1, order + 2):
        def coefficient_for(value, k=k):
            trial_c = cs + [value]
            e0 = expansion_residual(f, g, ys + [zero], trial_c, k, x, y, c, eps)[k]
            e1 = expansion_residual(f, g, ys + [RatFunc.const(1, x)], trial_c, k, x, y, c, eps)[k]
            lin = e1 - e0
            if lin.is_zero():
                raise NoCancellation(f"order {k} does not determine y_{k}")
            return -(e0 / lin)

        result = cancel_pole(coefficient_for, fold_x)
        cs.append(result.value)
        ys.append(result.coefficient)
        stripped.append(result.stripped)
        check = expansion_residual(f, g, ys, cs, k, x, y, c, eps)
        if not check.is_zero():
            raise NonlinearUnknown(f"fixing c_{k - 1} disturbed lower orders of the residual")
    return CanardExpansion(cs, ys, fold_x, eps, x, stripped)
