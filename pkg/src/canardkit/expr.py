"""Canonical expression trees over exact rationals.

Nodes are immutable and built only through the canonicalizing constructors
:func:`add`, :func:`mul`, :func:`power` and :func:`sqrt` (or the operator
overloads on :class:`Expr`, which call them).  The canonical form is:

* ``Sum`` and ``Product`` are n-ary, flattened, with at least two children
  sorted by :attr:`Expr.key`; like terms and like bases are merged.
* A ``Product`` carries at most one ``Const`` child, in front.
* ``Power`` has a non-constant, non-product base and a nonzero integer
  exponent other than one.  Division is ``Power(b, -n)``.
* ``Sqrt(a) ** 2`` collapses to ``a``; ``sqrt`` of a perfect-square rational
  is folded.

Structural equality of canonical trees implies mathematical equality; the
converse only holds after :func:`expand` (and even then not for radicals).
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NegativeRadicand, PoleAtPoint, SqrtPresent

Rational = Fraction

_RANK_CONST, _RANK_VAR, _RANK_POWER, _RANK_SQRT, _RANK_PRODUCT, _RANK_SUM = range(6)


def as_rational(value) -> Fraction:
    """Exact conversion; floats keep their binary value."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a number")
    if isinstance(value, (int, float, str)):
        return Fraction(value)
    if isinstance(value, Const):
        return value.value
    raise TypeError(f"cannot convert {type(value).__name__} to Rational")


def as_expr(value) -> "Expr":
    if isinstance(value, Expr):
        return value
    return Const(as_rational(value))


class Expr:
    __slots__ = ("key", "_hash", "_free")
    rank = -1

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr) or self._hash != other._hash:
            return False
        return self.key == other.key

    def __hash__(self):
        return self._hash

    def __lt__(self, other: "Expr"):
        return self.key < other.key

    @property
    def args(self) -> tuple["Expr", ...]:
        return ()

    @property
    def free_symbols(self) -> frozenset[str]:
        try:
            return self._free
        except AttributeError:
            pass
        out: frozenset[str] = frozenset()
        for a in self.args:
            out |= a.free_symbols
        self._free = out
        return out

    def has(self, name: str) -> bool:
        return name in self.free_symbols

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer exponents are supported")
        return power(self, n)

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"Expr({to_string(self)!r})"


class Const(Expr):
    __slots__ = ("value",)
    rank = _RANK_CONST

    def __init__(self, value):
        self.value = as_rational(value)
        self.key = (_RANK_CONST, self.value)
        self._hash = hash(self.key)
        self._free = frozenset()


class Var(Expr):
    __slots__ = ("name",)
    rank = _RANK_VAR

    def __init__(self, name: str):
        self.name = name
        self.key = (_RANK_VAR, name)
        self._hash = hash(self.key)
        self._free = frozenset((name,))


class Sum(Expr):
    __slots__ = ("terms",)
    rank = _RANK_SUM

    def __init__(self, terms: tuple[Expr, ...]):
        self.terms = terms
        self.key = (_RANK_SUM, tuple(t.key for t in terms))
        self._hash = hash((_RANK_SUM,) + tuple(t._hash for t in terms))

    @property
    def args(self):
        return self.terms


class Product(Expr):
    __slots__ = ("factors",)
    rank = _RANK_PRODUCT

    def __init__(self, factors: tuple[Expr, ...]):
        self.factors = factors
        self.key = (_RANK_PRODUCT, tuple(f.key for f in factors))
        self._hash = hash((_RANK_PRODUCT,) + tuple(f._hash for f in factors))

    @property
    def args(self):
        return self.factors


class Power(Expr):
    __slots__ = ("base", "exp")
    rank = _RANK_POWER

    def __init__(self, base: Expr, exp: int):
        self.base = base
        self.exp = exp
        self.key = (_RANK_POWER, base.key, exp)
        self._hash = hash((_RANK_POWER, base._hash, exp))

    @property
    def args(self):
        return (self.base,)


class Sqrt(Expr):
    __slots__ = ("arg",)
    rank = _RANK_SQRT

    def __init__(self, arg: Expr):
        self.arg = arg
        self.key = (_RANK_SQRT, arg.key)
        self._hash = hash((_RANK_SQRT, arg._hash))

    @property
    def args(self):
        return (self.arg,)


ZERO = Const(0)
ONE = Const(1)


def var(name: str) -> Var:
    return Var(name)


def const(value) -> Const:
    return Const(value)


# ---------------------------------------------------------------------------
# canonicalizing constructors


def _split_coeff(e: Expr) -> tuple[Fraction, Expr]:
    if isinstance(e, Product) and isinstance(e.factors[0], Const):
        rest = e.factors[1:]
        return e.factors[0].value, rest[0] if len(rest) == 1 else Product(rest)
    return Fraction(1), e


def _scale(c: Fraction, rest: Expr) -> Expr:
    if c == 1:
        return rest
    if isinstance(rest, Const):
        return Const(c * rest.value)
    if isinstance(rest, Product):
        return Product((Const(c),) + rest.factors)
    return Product((Const(c), rest))


def add(*terms) -> Expr:
    constant = Fraction(0)
    collected: dict[Expr, Fraction] = {}
    stack = [as_expr(t) for t in reversed(terms)]
    while stack:
        t = stack.pop()
        if isinstance(t, Const):
            constant += t.value
        elif isinstance(t, Sum):
            stack.extend(reversed(t.terms))
        else:
            c, rest = _split_coeff(t)
            collected[rest] = collected.get(rest, 0) + c
    items = [_scale(c, rest) for rest, c in collected.items() if c != 0]
    if constant != 0:
        items.append(Const(constant))
    if not items:
        return ZERO
    if len(items) == 1:
        return items[0]
    items.sort(key=lambda e: e.key)
    return Sum(tuple(items))


def neg(e: Expr) -> Expr:
    return mul(Const(-1), e)


def _mul_queue(queue: list[tuple[Expr, int]]) -> Expr:
    coeff = Fraction(1)
    powers: dict[Expr, int] = {}
    while True:
        while queue:
            f, n = queue.pop()
            if n == 0:
                continue
            if isinstance(f, Const):
                if f.value == 0 and n < 0:
                    raise PoleAtPoint("division by zero constant")
                coeff *= f.value ** n
            elif isinstance(f, Product):
                queue.extend((g, n) for g in f.factors)
            elif isinstance(f, Power):
                queue.append((f.base, f.exp * n))
            else:
                powers[f] = powers.get(f, 0) + n
        # Sqrt(a)^n with |n| >= 2 releases a^(n // 2)
        for base, n in list(powers.items()):
            if isinstance(base, Sqrt) and (n >= 2 or n <= -2):
                q, s = divmod(n, 2)
                powers[base] = s
                queue.append((base.arg, q))
        if not queue:
            break
    if coeff == 0:
        return ZERO
    factors = sorted(
        (b if n == 1 else Power(b, n) for b, n in powers.items() if n != 0),
        key=lambda e: e.key,
    )
    if not factors:
        return Const(coeff)
    if coeff == 1 and len(factors) == 1:
        return factors[0]
    if coeff != 1:
        factors.insert(0, Const(coeff))
    return Product(tuple(factors))


def mul(*factors) -> Expr:
    return _mul_queue([(as_expr(f), 1) for f in factors])


def power(base, n: int) -> Expr:
    if n == 0:
        return ONE
    return _mul_queue([(as_expr(base), n)])


def _exact_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def sqrt(arg) -> Expr:
    arg = as_expr(arg)
    if isinstance(arg, Const):
        root = _exact_sqrt(arg.value)
        return Const(root) if root is not None else Sqrt(arg)
    c, rest = _split_coeff(arg)
    if c != 1:
        root = _exact_sqrt(c)
        if root is not None:
            return mul(Const(root), Sqrt(rest))
    return Sqrt(arg)


def canonicalize(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the canonical constructors."""
    return _rebuild(e, lambda node, args: None, {})


def _rebuild(e: Expr, leaf, memo: dict) -> Expr:
    # leaf(node, args) may return a replacement for Var/Const nodes
    try:
        return memo[e]
    except KeyError:
        pass
    if isinstance(e, (Const, Var)):
        out = leaf(e, ())
        out = e if out is None else out
    elif isinstance(e, Sum):
        out = add(*(_rebuild(t, leaf, memo) for t in e.terms))
    elif isinstance(e, Product):
        out = mul(*(_rebuild(f, leaf, memo) for f in e.factors))
    elif isinstance(e, Power):
        out = power(_rebuild(e.base, leaf, memo), e.exp)
    elif isinstance(e, Sqrt):
        out = sqrt(_rebuild(e.arg, leaf, memo))
    else:  # pragma: no cover
        raise TypeError(type(e))
    memo[e] = out
    return out


# ---------------------------------------------------------------------------
# calculus and substitution


def differentiate(e: Expr, name: str) -> Expr:
    memo: dict[Expr, Expr] = {}

    def d(node: Expr) -> Expr:
        if name not in node.free_symbols:
            return ZERO
        try:
            return memo[node]
        except KeyError:
            pass
        if isinstance(node, Var):
            out = ONE
        elif isinstance(node, Sum):
            out = add(*(d(t) for t in node.terms))
        elif isinstance(node, Product):
            fs = node.factors
            out = add(*(mul(d(f), *fs[:i], *fs[i + 1:]) for i, f in enumerate(fs)))
        elif isinstance(node, Power):
            out = mul(Const(node.exp), power(node.base, node.exp - 1), d(node.base))
        elif isinstance(node, Sqrt):
            out = mul(Const(Fraction(1, 2)), d(node.arg), power(node, -1))
        else:  # pragma: no cover
            raise TypeError(type(node))
        memo[node] = out
        return out

    return d(e)


def substitute(e: Expr, bindings: Mapping[str, object]) -> Expr:
    """Simultaneous substitution of variables by expressions or numbers."""
    if not bindings:
        return e
    repl = {k: as_expr(v) for k, v in bindings.items()}
    names = frozenset(repl)
    memo: dict[Expr, Expr] = {}

    def leaf(node, _):
        if isinstance(node, Var) and node.name in repl:
            return repl[node.name]
        return None

    def go(node: Expr) -> Expr:
        if not (node.free_symbols & names):
            return node
        try:
            return memo[node]
        except KeyError:
            pass
        if isinstance(node, Var):
            out = leaf(node, ())
        elif isinstance(node, Sum):
            out = add(*(go(t) for t in node.terms))
        elif isinstance(node, Product):
            out = mul(*(go(f) for f in node.factors))
        elif isinstance(node, Power):
            out = power(go(node.base), node.exp)
        else:
            out = sqrt(go(node.arg))
        memo[node] = out
        return out

    return go(e)


def expand(e: Expr) -> Expr:
    """Distribute products over sums and multiply out positive powers of sums.

    Negative powers and radicals are kept as atoms (their insides are
    expanded).
    """
    memo: dict[Expr, Expr] = {}

    def terms_of(x: Expr) -> tuple[Expr, ...]:
        return x.terms if isinstance(x, Sum) else (x,)

    def times(a: Expr, b: Expr) -> Expr:
        if not isinstance(a, Sum) and not isinstance(b, Sum):
            return mul(a, b)
        return add(*(mul(s, t) for s in terms_of(a) for t in terms_of(b)))

    def go(node: Expr) -> Expr:
        if isinstance(node, (Const, Var)):
            return node
        try:
            return memo[node]
        except KeyError:
            pass
        if isinstance(node, Sum):
            out = add(*(go(t) for t in node.terms))
        elif isinstance(node, Product):
            out = ONE
            for f in node.factors:
                out = times(out, go(f))
        elif isinstance(node, Power):
            b = go(node.base)
            if node.exp > 0 and isinstance(b, Sum):
                out = b
                for _ in range(node.exp - 1):
                    out = times(out, b)
            else:
                out = power(b, node.exp)
        else:
            out = sqrt(go(node.arg))
        memo[node] = out
        return out

    return go(e)


def collect(e: Expr, name: str) -> dict[int, Expr]:
    """Coefficients of ``e`` as a polynomial in the variable ``name``.

    Raises NotPolynomial when ``name`` occurs other than through
    nonnegative integer powers.
    """
    from .errors import NotPolynomial

    out: dict[int, list[Expr]] = {}
    for term in (lambda x: x.terms if isinstance(x, Sum) else (x,))(expand(e)):
        degree = 0
        rest = []
        for f in term.factors if isinstance(term, Product) else (term,):
            if isinstance(f, Var) and f.name == name:
                degree += 1
            elif isinstance(f, Power) and isinstance(f.base, Var) and f.base.name == name and f.exp > 0:
                degree += f.exp
            elif f.has(name):
                raise NotPolynomial(f"{name} occurs non-polynomially in {f}")
            else:
                rest.append(f)
        out.setdefault(degree, []).append(mul(*rest))
    return {k: add(*v) for k, v in out.items() if add(*v) != ZERO}


# ---------------------------------------------------------------------------
# evaluation


def eval_numeric(e: Expr, point: Mapping[str, float]) -> float:
    memo: dict[Expr, float] = {}

    def go(node: Expr) -> float:
        try:
            return memo[node]
        except KeyError:
            pass
        if isinstance(node, Const):
            out = float(node.value)
        elif isinstance(node, Var):
            try:
                out = float(point[node.name])
            except KeyError:
                raise KeyError(f"unbound variable {node.name!r}") from None
        elif isinstance(node, Sum):
            out = math.fsum(go(t) for t in node.terms)
        elif isinstance(node, Product):
            out = 1.0
            for f in node.factors:
                out *= go(f)
        elif isinstance(node, Power):
            b = go(node.base)
            if b == 0.0 and node.exp < 0:
                raise PoleAtPoint(f"pole of {node} at {dict(point)}")
            out = b ** node.exp
        else:
            a = go(node.arg)
            if a < 0:
                raise NegativeRadicand(f"negative radicand {a!r} in {node}")
            out = math.sqrt(a)
        memo[node] = out
        return out

    return go(e)


def eval_exact(e: Expr, point: Mapping[str, object]) -> Fraction:
    memo: dict[Expr, Fraction] = {}

    def go(node: Expr) -> Fraction:
        try:
            return memo[node]
        except KeyError:
            pass
        if isinstance(node, Const):
            out = node.value
        elif isinstance(node, Var):
            try:
                out = as_rational(point[node.name])
            except KeyError:
                raise KeyError(f"unbound variable {node.name!r}") from None
        elif isinstance(node, Sum):
            out = sum((go(t) for t in node.terms), Fraction(0))
        elif isinstance(node, Product):
            out = Fraction(1)
            for f in node.factors:
                out *= go(f)
        elif isinstance(node, Power):
            b = go(node.base)
            if b == 0 and node.exp < 0:
                raise PoleAtPoint(f"pole of {node} at {dict(point)}")
            out = b ** node.exp
        else:
            raise SqrtPresent(f"cannot evaluate {node} exactly")
        memo[node] = out
        return out

    return go(e)


def emit_code(exprs: Iterable[Expr], env: Mapping[str, str], prefix: str = "_t") -> tuple[list[str], list[str]]:
    """Straight-line Python statements computing ``exprs``.

    ``env`` maps variable names to source snippets.  Shared subtrees are
    computed once.  Radicals call ``sqrt`` which the caller must provide.
    """
    lines: list[str] = []
    names: dict[Expr, str] = {}

    def go(node: Expr) -> str:
        if node in names:
            return names[node]
        if isinstance(node, Const):
            return repr(float(node.value))
        if isinstance(node, Var):
            return env[node.name]
        if isinstance(node, Sum):
            src = " + ".join(go(t) for t in node.terms)
        elif isinstance(node, Product):
            src = " * ".join(go(f) for f in node.factors)
        elif isinstance(node, Power):
            b = go(node.base)
            if node.exp == 1:
                src = b
            elif node.exp > 0:
                src = " * ".join([b] * node.exp) if node.exp <= 3 else f"{b} ** {node.exp}"
            elif node.exp == -1:
                src = f"1.0 / {b}"
            else:
                src = f"1.0 / ({b} ** {-node.exp})"
        else:
            src = f"sqrt({go(node.arg)})"
        name = f"{prefix}{len(names)}"
        names[node] = name
        lines.append(f"{name} = {src}")
        return name

    outs = [go(e) for e in exprs]
    return lines, outs


def lambdify(e: Expr, argnames: Iterable[str]):
    """Compile ``e`` into a plain float function of positional arguments.

    Poles raise :class:`PoleAtPoint` and negative radicands raise
    :class:`NegativeRadicand`.
    """
    argnames = list(argnames)
    missing = e.free_symbols - set(argnames)
    if missing:
        raise KeyError(f"unbound variables {sorted(missing)}")
    env = {n: f"_a{i}" for i, n in enumerate(argnames)}
    lines, (out,) = emit_code([e], env)
    body = "\n    ".join(lines) or "pass"
    src = f"def _f({', '.join(env.values())}):\n    {body}\n    return float({out})\n"
    ns = {"sqrt": math.sqrt}
    exec(compile(src, "<lambdify>", "exec"), ns)
    raw = ns["_f"]

    def f(*args):
        try:
            return raw(*args)
        except ZeroDivisionError:
            raise PoleAtPoint(f"pole of {e} at {args}") from None
        except ValueError:
            raise NegativeRadicand(f"negative radicand in {e} at {args}") from None

    f.raw = raw
    return f


def node_count(e: Expr) -> int:
    """Number of distinct nodes in the expression DAG."""
    seen: set[Expr] = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        stack.extend(n.args)
    return len(seen)


# ---------------------------------------------------------------------------
# quotient normal form


@dataclass
class QuotientForm:
    """``e = numerator / denominator`` with a radical-free-where-possible
    denominator.

    ``factors`` is the denominator as a map from normalized base to
    multiplicity.  Every ``sqrt(a/b) -> sqrt(a*b)/b`` rewrite is listed in
    ``sqrt_rewrites`` as ``(a*b, b)``; the identity holds only where
    ``b > 0``.
    """

    numerator: Expr
    denominator: Expr
    factors: dict[Expr, int] = field(default_factory=dict)
    sqrt_rewrites: list[tuple[Expr, Expr]] = field(default_factory=list)

    def __iter__(self):
        yield self.numerator
        yield self.denominator


def _normalize_base(b: Expr) -> tuple[Fraction, Expr]:
    """Write ``b = c * b'`` with ``b'`` content-normalized (leading term
    coefficient one for sums)."""
    if isinstance(b, Sum):
        c, _ = _split_coeff(b.terms[0])
        if c != 1:
            return c, expand(mul(Const(1 / c), b))
    return Fraction(1), b


def _factorize(e: Expr) -> tuple[Fraction, dict[Expr, int]]:
    if isinstance(e, Const):
        return e.value, {}
    c, rest = _split_coeff(e)
    out: dict[Expr, int] = {}
    for f in rest.factors if isinstance(rest, Product) else (rest,):
        base, n = (f.base, f.exp) if isinstance(f, Power) else (f, 1)
        k, nb = _normalize_base(base)
        c *= k ** n
        out[nb] = out.get(nb, 0) + n
    return c, out


def _product(factors: Mapping[Expr, int]) -> Expr:
    return mul(*(power(b, n) for b, n in factors.items()))


def _cancel(num: Expr, den: dict[Expr, int]) -> tuple[Expr, dict[Expr, int]]:
    if not den or isinstance(num, Const):
        return num, den
    c, fac = _factorize(num)
    common = [b for b in fac if b in den and fac[b] > 0]
    if not common:
        return num, den
    den = dict(den)
    for b in common:
        k = min(fac[b], den[b])
        fac[b] -= k
        den[b] -= k
        if den[b] == 0:
            del den[b]
    return expand(mul(Const(c), _product(fac))), den


def quotient_normal_form(e: Expr) -> QuotientForm:
    rewrites: list[tuple[Expr, Expr]] = []
    memo: dict[Expr, tuple[Expr, dict[Expr, int]]] = {}

    def go(node: Expr) -> tuple[Expr, dict[Expr, int]]:
        if isinstance(node, (Const, Var)):
            return node, {}
        try:
            return memo[node]
        except KeyError:
            pass
        if isinstance(node, Sum):
            parts = [go(t) for t in node.terms]
            lcm: dict[Expr, int] = {}
            for _, d in parts:
                for b, n in d.items():
                    lcm[b] = max(lcm.get(b, 0), n)
            num = add(*(
                mul(n, _product({b: k - d.get(b, 0) for b, k in lcm.items()}))
                for n, d in parts
            ))
            out = _cancel(expand(num), lcm)
        elif isinstance(node, Product):
            parts = [go(f) for f in node.factors]
            den: dict[Expr, int] = {}
            for _, d in parts:
                for b, n in d.items():
                    den[b] = den.get(b, 0) + n
            out = _cancel(expand(mul(*(n for n, _ in parts))), den)
        elif isinstance(node, Power):
            nb, db = go(node.base)
            if node.exp > 0:
                out = (expand(power(nb, node.exp)), {b: n * node.exp for b, n in db.items()})
            else:
                m = -node.exp
                if nb == ZERO:
                    raise PoleAtPoint(f"{node} has a zero base")
                c, fac = _factorize(nb)
                num = expand(mul(Const(c) ** -m, _product({b: n * m for b, n in db.items()})))
                out = _cancel(num, {b: n * m for b, n in fac.items()})
        else:
            na, da = go(node.arg)
            if not da:
                out = (sqrt(na), {})
            else:
                d = _product(da)
                radicand = expand(mul(na, d))
                rewrites.append((radicand, d))
                out = (sqrt(radicand), dict(da))
        memo[node] = out
        return out

    num, den = go(e)
    return QuotientForm(num, _product(den), den, rewrites)


# ---------------------------------------------------------------------------
# printing (output re-parses under the expression grammar)


def _fmt_const(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def to_string(e: Expr) -> str:
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Sum):
        # constants last, otherwise canonical order
        terms = sorted(e.terms, key=lambda t: isinstance(t, Const))
        out = ""
        for i, t in enumerate(terms):
            c, rest = _split_coeff(t)
            if isinstance(t, Const):
                c, rest = t.value, ONE
            negative = c < 0
            body = _product_string(abs(c), rest)
            if i == 0:
                out = ("-" if negative else "") + body
            else:
                out += (" - " if negative else " + ") + body
        return out
    c, rest = _split_coeff(e)
    if isinstance(e, Product):
        return ("-" if c < 0 else "") + _product_string(abs(c), rest)
    return _product_string(Fraction(1), e)


def _atom_string(e: Expr) -> str:
    s = to_string(e)
    if isinstance(e, (Sum, Product)) or (isinstance(e, Const) and (e.value < 0 or e.value.denominator != 1)):
        return f"({s})"
    return s


def _product_string(c: Fraction, rest: Expr) -> str:
    if rest == ONE:
        return _fmt_const(c)
    num, den = [], []
    for f in rest.factors if isinstance(rest, Product) else (rest,):
        if isinstance(f, Power) and f.exp < 0:
            den.append(_atom_string(f.base) + (f"^{-f.exp}" if f.exp != -1 else ""))
        elif isinstance(f, Power):
            num.append(f"{_atom_string(f.base)}^{f.exp}")
        elif isinstance(f, Sqrt):
            num.append(f"sqrt({to_string(f.arg)})")
        else:
            num.append(_atom_string(f))
    if c.numerator != 1 or not num:
        num.insert(0, str(c.numerator))
    if c.denominator != 1:
        den.append(str(c.denominator))
    s = "*".join(num)
    for d in den:
        s += "/" + d
    return s
