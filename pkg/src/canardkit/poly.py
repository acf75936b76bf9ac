"""Exact univariate polynomials and rational functions over Q.

Real roots are isolated with the Descartes rule of signs (Vincent-Collins-
Akritas bisection) on the square-free factors of a polynomial and refined by
exact bisection, so multiplicities come from the square-free decomposition
rather than from numerical clustering.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .errors import ComputationError, InexactDeflation, NotRational, PoleAtPoint
from .expr import Const, Expr, Power, Product, Sqrt, Sum, Var, add, as_rational, mul, power

DEFAULT_WIDTH = Fraction(1, 10**12)


class Poly:
    """Dense polynomial, ``coeffs[i]`` multiplies ``var**i``."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Iterable = (), var: str = "x"):
        cs = [as_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self.var = var

    @classmethod
    def const(cls, c, var: str = "x") -> "Poly":
        return cls([c], var)

    @classmethod
    def x(cls, var: str = "x") -> "Poly":
        return cls([0, 1], var)

    @classmethod
    def from_roots(cls, roots: Iterable, var: str = "x") -> "Poly":
        p = cls([1], var)
        for r in roots:
            p = p * cls([-as_rational(r), 1], var)
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs and (self.var == other.var or self.degree < 1)
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly([other]).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Poly({[str(c) for c in self.coeffs]}, {self.var!r})"

    def __str__(self):
        return str(self.to_expr())

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.var != self.var and other.degree > 0 and self.degree > 0:
                raise ValueError(f"variable mismatch: {self.var} vs {other.var}")
            return other
        return Poly([other], self.var)

    def _var_with(self, other: "Poly") -> str:
        return self.var if self.degree > 0 or other.degree <= 0 else other.var

    def __add__(self, other):
        o = self._coerce(other)
        n = max(len(self.coeffs), len(o.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = o.coeffs + (Fraction(0),) * (n - len(o.coeffs))
        return Poly([x + y for x, y in zip(a, b)], self._var_with(o))

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs], self.var)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if not self.coeffs or not o.coeffs:
            return Poly([], self.var)
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    out[i + j] += a * b
        return Poly(out, self._var_with(o))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Poly([1], self.var)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __divmod__(self, other):
        d = self._coerce(other)
        if d.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        if len(r) < len(d.coeffs):
            return Poly([], self.var), self
        q = [Fraction(0)] * (len(r) - len(d.coeffs) + 1)
        inv = 1 / d.lc
        for k in range(len(q) - 1, -1, -1):
            c = r[k + len(d.coeffs) - 1] * inv
            q[k] = c
            if c:
                for j, b in enumerate(d.coeffs):
                    r[k + j] -= c * b
        return Poly(q, self._var_with(d)), Poly(r[: len(d.coeffs) - 1], self.var)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other) -> "Poly":
        q, r = divmod(self, other)
        if r:
            raise ComputationError(f"{other} does not divide {self}")
        return q

    def __call__(self, value):
        acc = value * 0
        for c in reversed(self.coeffs):
            acc = acc * value + c
        return acc

    def eval_float(self, value: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * value + float(c)
        return acc

    def derivative(self) -> "Poly":
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:], self.var)

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        return Poly([c / self.lc for c in self.coeffs], self.var)

    def compose_linear(self, a, b) -> "Poly":
        """``p(a*x + b)``."""
        out = Poly([], self.var)
        lin = Poly([b, a], self.var)
        for c in reversed(self.coeffs):
            out = out * lin + c
        return out

    def reverse(self) -> "Poly":
        return Poly(reversed(self.coeffs), self.var)

    def float_coeffs(self) -> list[float]:
        return [float(c) for c in self.coeffs]

    def to_expr(self) -> Expr:
        x = Var(self.var)
        return add(*(mul(Const(c), power(x, i)) for i, c in enumerate(self.coeffs) if c))


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic greatest common divisor (zero if both are zero)."""
    while b:
        a, b = b, a % b
    return a.monic()


def poly_lcm(a: Poly, b: Poly) -> Poly:
    return (a * b // poly_gcd(a, b)).monic()


def square_free_decomposition(p: Poly) -> list[tuple[Poly, int]]:
    """Yun's algorithm: ``p = lc * prod(f_i ** i)`` with pairwise coprime,
    square-free, monic ``f_i``; constant factors are omitted."""
    if p.degree < 1:
        return []
    out = []
    dp = p.derivative()
    g = poly_gcd(p, dp)
    c = p // g
    d = dp // g - c.derivative()
    i = 1
    while c.degree > 0:
        a = poly_gcd(c, d)
        if a.degree > 0:
            out.append((a, i))
        c = c // a
        d = d // a - c.derivative()
        i += 1
    return out


def square_free_part(p: Poly) -> Poly:
    out = Poly([1], p.var)
    for f, _ in square_free_decomposition(p):
        out = out * f
    return out


# ---------------------------------------------------------------------------
# real roots


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _variations(coeffs: Sequence[Fraction]) -> int:
    signs = [_sign(c) for c in coeffs if c != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def _roots_in_open_interval_bound(p: Poly, a: Fraction, b: Fraction) -> int:
    # Descartes bound for roots in (a, b) via x = a + (b - a) / (1 + t)
    q = p.compose_linear(b - a, a).reverse().compose_linear(1, 1)
    return _variations(q.coeffs)


def cauchy_bound(p: Poly) -> Fraction:
    lc = abs(p.lc)
    return 1 + max((abs(c) / lc for c in p.coeffs[:-1]), default=Fraction(0))


@dataclass
class RealRoot:
    """A real root isolated in ``[lo, hi]`` (``exact`` set when rational)."""

    poly: Poly
    lo: Fraction
    hi: Fraction
    multiplicity: int = 1
    exact: Fraction | None = None

    @property
    def mid(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return float((self.lo + self.hi) / 2)

    @property
    def value(self) -> Fraction:
        """Exact root when rational, otherwise the interval midpoint."""
        return self.exact if self.exact is not None else (self.lo + self.hi) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def refine(self, width=DEFAULT_WIDTH) -> "RealRoot":
        if self.exact is not None:
            return self
        width = as_rational(width)
        p, lo, hi = self.poly, self.lo, self.hi
        s_lo = _sign(p(lo))
        while hi - lo > width:
            m = (lo + hi) / 2
            s = _sign(p(m))
            if s == 0:
                return RealRoot(p, m, m, self.multiplicity, m)
            if s_lo == 0 or p(hi) == 0:
                # a neighbouring root sits on an end; the Descartes count has the parity of the true count
                if _roots_in_open_interval_bound(p, lo, m) % 2:
                    hi = m
                else:
                    lo, s_lo = m, s
                continue
            if s == s_lo:
                lo = m
            else:
                hi = m
        return RealRoot(p, lo, hi, self.multiplicity, None)

    def __float__(self):
        return self.mid


def _try_rational(p: Poly, lo: Fraction, hi: Fraction) -> Fraction | None:
    mid = (lo + hi) / 2
    for bound in (10, 10**3, 10**6, 10**9):
        q = mid.limit_denominator(bound)
        if lo <= q <= hi and p(q) == 0:
            return q
    return None


def _isolate(p: Poly, lo: Fraction, hi: Fraction, multiplicity: int) -> list[RealRoot]:
    out: list[RealRoot] = []
    for end in (lo, hi):
        if p(end) == 0:
            out.append(RealRoot(p, end, end, multiplicity, end))
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        v = _roots_in_open_interval_bound(p, a, b)
        if v == 0:
            continue
        if v == 1:
            out.append(RealRoot(p, a, b, multiplicity))
            continue
        m = (a + b) / 2
        if p(m) == 0:
            out.append(RealRoot(p, m, m, multiplicity, m))
        stack.append((a, m))
        stack.append((m, b))
    return out


def real_roots(p: Poly, interval=None, width=DEFAULT_WIDTH) -> list[RealRoot]:
    """All real roots of ``p`` in the closed ``interval``, sorted, each
    isolated and refined to ``width``.  Rational roots are reported exactly
    whenever a small-denominator candidate checks out."""
    if p.is_zero():
        raise ValueError("the zero polynomial has no isolated roots")
    if interval is None:
        b = cauchy_bound(p)
        lo, hi = -b, b
    else:
        lo, hi = (as_rational(v) for v in interval)
    if lo > hi:
        raise ValueError("empty interval")
    roots: list[RealRoot] = []
    for f, m in square_free_decomposition(p):
        for r in _isolate(f, lo, hi, m):
            if r.exact is None:
                r = r.refine(width)
                q = _try_rational(f, r.lo, r.hi)
                if q is not None:
                    r = RealRoot(f, q, q, m, q)
            roots.append(r)
    roots.sort(key=lambda r: r.lo)
    return roots


# ---------------------------------------------------------------------------
# deflation


@dataclass
class Deflation:
    quotient: Poly
    remainder: Fraction
    residual: float
    exact: bool


def deflate_root(p: Poly, root, tol: float = 1e-9) -> Deflation:
    """Divide ``p`` by ``(x - root)``.

    Exact when ``root`` is a true rational root; otherwise the remainder is
    dropped and reported relative to the size of ``p`` near ``root``.
    """
    r = as_rational(root.value if isinstance(root, RealRoot) else root)
    q, rem = divmod(p, Poly([-r, 1], p.var))
    rem_v = rem(r) if rem else Fraction(0)
    scale = sum(abs(c) * abs(r) ** i for i, c in enumerate(p.coeffs)) or Fraction(1)
    residual = float(abs(rem_v) / scale)
    if residual > tol:
        raise InexactDeflation(f"x - {float(r)} does not divide {p} (relative residual {residual:.3g})")
    return Deflation(q, rem_v, residual, rem_v == 0)


# ---------------------------------------------------------------------------
# rational functions


class RatFunc:
    """Reduced quotient of polynomials with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, _reduced: bool = False):
        if den is None:
            den = Poly([1], num.var)
        if den.is_zero():
            raise PoleAtPoint("zero denominator")
        if not _reduced:
            if num.is_zero():
                den = Poly([1], den.var)
            else:
                g = poly_gcd(num, den)
                if g.degree > 0:
                    num, den = num // g, den // g
            lc = den.lc
            if lc != 1:
                num = Poly([c / lc for c in num.coeffs], num.var)
                den = den.monic()
        self.num = num
        self.den = den

    @property
    def var(self) -> str:
        return self.num.var if self.num.degree > 0 else self.den.var

    @classmethod
    def const(cls, c, var: str = "x") -> "RatFunc":
        return cls(Poly([c], var), Poly([1], var), _reduced=True)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.degree == 0

    def __eq__(self, other):
        if isinstance(other, RatFunc):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self.den.degree == 0 and self.num == other
        return NotImplemented

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"RatFunc({self})"

    def __str__(self):
        return str(self.to_expr())

    @staticmethod
    def _coerce(other, var) -> "RatFunc":
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, Poly):
            return RatFunc(other, _reduced=False)
        return RatFunc.const(other, var)

    def __add__(self, other):
        o = self._coerce(other, self.var)
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        g = poly_gcd(self.den, o.den)
        a, b = self.den // g, o.den // g
        return RatFunc(self.num * b + o.num * a, a * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        return self + (-self._coerce(other, self.var))

    def __rsub__(self, other):
        return self._coerce(other, self.var) - self

    def __mul__(self, other):
        o = self._coerce(other, self.var)
        g1 = poly_gcd(self.num, o.den) if self.num else Poly([1], self.var)
        g2 = poly_gcd(o.num, self.den) if o.num else Poly([1], self.var)
        n1 = self.num // g1 if g1.degree > 0 else self.num
        d2 = o.den // g1 if g1.degree > 0 else o.den
        n2 = o.num // g2 if g2.degree > 0 else o.num
        d1 = self.den // g2 if g2.degree > 0 else self.den
        return RatFunc(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def reciprocal(self) -> "RatFunc":
        if self.num.is_zero():
            raise PoleAtPoint("reciprocal of zero")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        return self * self._coerce(other, self.var).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other, self.var) * self.reciprocal()

    def __pow__(self, n: int):
        if n < 0:
            return self.reciprocal() ** (-n)
        return RatFunc(self.num ** n, self.den ** n, _reduced=True)

    def derivative(self) -> "RatFunc":
        n, d = self.num, self.den
        return RatFunc(n.derivative() * d - n * d.derivative(), d * d)

    def __call__(self, value):
        d = self.den(value)
        if d == 0:
            raise PoleAtPoint(f"pole at {value}")
        return self.num(value) / d

    def eval_float(self, value: float) -> float:
        d = self.den.eval_float(value)
        if d == 0.0:
            raise PoleAtPoint(f"pole at {value}")
        return self.num.eval_float(value) / d

    def to_expr(self) -> Expr:
        if self.den.degree == 0:
            return self.num.to_expr()
        return mul(self.num.to_expr(), power(self.den.to_expr(), -1))


def to_ratfunc(e: Expr, var: str, bindings=None) -> RatFunc:
    """Reduced rational function equal to ``e`` (a rational expression in
    the single variable ``var``).

    ``bindings`` may supply values (numbers or :class:`RatFunc`) for other
    symbols; they are substituted during the conversion.
    """
    memo: dict[Expr, RatFunc] = {}
    env = {}
    for k, v in (bindings or {}).items():
        env[k] = v if isinstance(v, RatFunc) else RatFunc(v) if isinstance(v, Poly) else RatFunc.const(v, var)

    def go(node: Expr) -> RatFunc:
        try:
            return memo[node]
        except KeyError:
            pass
        if isinstance(node, Const):
            out = RatFunc.const(node.value, var)
        elif isinstance(node, Var):
            if node.name in env:
                out = env[node.name]
            elif node.name != var:
                raise NotRational(f"free variable {node.name!r} besides {var!r}")
            else:
                out = RatFunc(Poly([0, 1], var), _reduced=True)
        elif isinstance(node, Sum):
            out = RatFunc.const(0, var)
            for t in node.terms:
                out = out + go(t)
        elif isinstance(node, Product):
            out = RatFunc.const(1, var)
            for f in node.factors:
                out = out * go(f)
        elif isinstance(node, Power):
            out = go(node.base) ** node.exp
        elif isinstance(node, Sqrt):
            raise NotRational(f"radical {node} is not rational")
        else:  # pragma: no cover
            raise TypeError(type(node))
        memo[node] = out
        return out

    return go(e)


def to_poly(e: Expr, var: str) -> Poly:
    rf = to_ratfunc(e, var)
    if rf.den.degree > 0:
        raise NotRational(f"{e} is not a polynomial in {var}")
    return rf.num * rf.den.coeffs[0] ** -1 if rf.den.coeffs[0] != 1 else rf.num


# ---------------------------------------------------------------------------
# multivariate polynomials (dicts) and resultants


def poly_dict(e: Expr, variables: Sequence[str]) -> dict[tuple[int, ...], Fraction]:
    """Exponent-tuple -> coefficient map of a polynomial expression."""
    index = {v: i for i, v in enumerate(variables)}
    n = len(variables)
    memo: dict[Expr, dict] = {}

    def mul_d(a, b):
        out: dict[tuple[int, ...], Fraction] = {}
        for ka, va in a.items():
            for kb, vb in b.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                out[k] = out.get(k, 0) + va * vb
        return {k: v for k, v in out.items() if v}

    def go(node: Expr):
        try:
            return memo[node]
        except KeyError:
            pass
        if isinstance(node, Const):
            out = {(0,) * n: node.value} if node.value else {}
        elif isinstance(node, Var):
            if node.name not in index:
                raise NotRational(f"unexpected variable {node.name!r}")
            k = [0] * n
            k[index[node.name]] = 1
            out = {tuple(k): Fraction(1)}
        elif isinstance(node, Sum):
            out = {}
            for t in node.terms:
                for k, v in go(t).items():
                    out[k] = out.get(k, 0) + v
            out = {k: v for k, v in out.items() if v}
        elif isinstance(node, Product):
            out = {(0,) * n: Fraction(1)}
            for f in node.factors:
                out = mul_d(out, go(f))
        elif isinstance(node, Power) and node.exp > 0:
            out = {(0,) * n: Fraction(1)}
            b = go(node.base)
            for _ in range(node.exp):
                out = mul_d(out, b)
        else:
            raise NotRational(f"{node} is not polynomial")
        memo[node] = out
        return out

    return go(e)


def bivariate(e: Expr, x: str, param: str) -> list[Poly]:
    """``e`` as a list over powers of ``x`` of polynomials in ``param``."""
    d = poly_dict(e, [x, param])
    deg = max((k[0] for k in d), default=-1)
    rows = [[Fraction(0)] * (1 + max((k[1] for k in d), default=0)) for _ in range(deg + 1)]
    for (i, j), v in d.items():
        rows[i][j] += v
    return [Poly(r, param) for r in rows]


def _det_bareiss(m: list[list[Poly]], var: str) -> Poly:
    n = len(m)
    if n == 0:
        return Poly([1], var)
    a = [row[:] for row in m]
    sign = 1
    prev = Poly([1], var)
    for k in range(n - 1):
        if a[k][k].is_zero():
            for i in range(k + 1, n):
                if not a[i][k].is_zero():
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return Poly([], var)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]).exact_div(prev)
        prev = a[k][k]
    return a[n - 1][n - 1] * sign


def resultant(f: Sequence[Poly], g: Sequence[Poly], var: str) -> Poly:
    """Sylvester resultant of two polynomials whose coefficients (lowest
    degree first) are polynomials in ``var``."""
    f = list(f)
    g = list(g)
    while f and f[-1].is_zero():
        f.pop()
    while g and g[-1].is_zero():
        g.pop()
    m, n = len(f) - 1, len(g) - 1
    if m < 0 or n < 0:
        return Poly([], var)
    size = m + n
    zero = Poly([], var)
    rows = []
    for i in range(n):
        row = [zero] * size
        for j, c in enumerate(reversed(f)):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for j, c in enumerate(reversed(g)):
            row[i + j] = c
        rows.append(row)
    if size == 0:
        return Poly([1], var)
    return _det_bareiss(rows, var)


@dataclass
class Collision:
    """Parameter value where the polynomial acquires a multiple root."""

    parameter: RealRoot
    abscissae: list[RealRoot]

    @property
    def value(self) -> Fraction | float:
        return self.parameter.exact if self.parameter.exact is not None else self.parameter.mid


def discriminant_vanishes(p, x: str = "x", param: str = "eps", interval=None) -> list[Collision]:
    """Real parameter values at which ``p(x; param)`` has a multiple root in
    ``x``, from the zeros of ``resultant(p, dp/dx)``.

    ``p`` is an :class:`Expr` polynomial in ``x`` and ``param`` or a list of
    coefficient polynomials in ``param`` (lowest ``x`` power first).
    """
    coeffs = bivariate(p, x, param) if isinstance(p, Expr) else list(p)
    dcoeffs = [c * i for i, c in enumerate(coeffs)][1:]
    res = resultant(coeffs, dcoeffs, param)
    if res.is_zero():
        raise ComputationError("multiple root for every parameter value")
    if res.degree < 1:
        return []
    out = []
    for root in real_roots(res, interval):
        xs: list[RealRoot] = []
        if root.exact is not None:
            px = Poly([c(root.exact) for c in coeffs], x)
            g = poly_gcd(px, px.derivative())
            if g.degree > 0:
                xs = real_roots(g)
        out.append(Collision(root, xs))
    return out
