"""Functional iteration for slow manifolds with parameter selection by
singularity cancellation.

Each step applies ``y_k = phi(x, y'_{k-1}, c)`` with ``c`` left symbolic,
locates the zeros of the resulting denominator inside a bracket and picks
``c`` so that the numerator vanishes there as well.  Rational iterates are
handled exactly (:class:`~canardkit.poly.RatFunc`); iterates carrying a
square root are handled numerically on their radicand.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    BranchInvalid,
    ComputationError,
    DegreeTooHigh,
    ExpressionBudgetExceeded,
    InexactDeflation,
    MultipleRootsAmbiguous,
    NoCancellation,
    NoCollision,
    NoSolution,
    NotAffine,
    NotPolynomial,
    NotRational,
    SeedDependsOnParameter,
    SqrtPresent,
)
from .expr import (
    Const,
    Expr,
    Product,
    Sqrt,
    Var,
    add,
    as_rational,
    collect,
    differentiate,
    expand,
    lambdify,
    mul,
    neg,
    node_count,
    power,
    quotient_normal_form,
    sqrt,
    substitute,
)
from .poly import (
    Collision,
    Poly,
    RatFunc,
    RealRoot,
    bivariate,
    deflate_root,
    discriminant_vanishes,
    poly_lcm,
    real_roots,
    to_ratfunc,
)
from .series import (
    ParamSeries,
    cancel_pole,
    resolve_linear_unknown,
    resolve_linear_unknown_float,
    root_series,
    series_compose,
    series_eval,
)

BRANCHES = ("linear", "quadratic-positive", "quadratic-negative")
EXACT_ROOT_WIDTH = Fraction(1, 2**200)
DEFAULT_BUDGET = 100_000


# ---------------------------------------------------------------------------
# building the map


def _solve(coeffs: dict[int, Expr], dep: str, branch: str) -> Expr:
    if branch not in BRANCHES:
        raise BranchInvalid(f"unknown branch {branch!r}; expected one of {', '.join(BRANCHES)}")
    deg = max(coeffs, default=0)
    if deg >= 3:
        raise DegreeTooHigh(f"{dep} appears at degree {deg}")
    if deg == 0:
        raise BranchInvalid(f"{dep} does not appear in the equation")
    c0 = coeffs.get(0, Const(0))
    if deg == 1:
        if branch != "linear":
            raise BranchInvalid(f"equation is linear in {dep}; branch {branch!r} does not apply")
        return expand(mul(neg(c0), power(coeffs[1], -1)))
    if branch == "linear":
        raise BranchInvalid(f"equation is quadratic in {dep}; choose a quadratic branch")
    a = coeffs[2]
    b = coeffs.get(1, Const(0))
    sign = 1 if branch == "quadratic-positive" else -1
    if b == Const(0):
        return mul(sign, sqrt(mul(neg(c0), power(a, -1))))
    disc = add(mul(b, b), mul(-4, a, c0))
    return mul(add(neg(b), mul(sign, sqrt(disc))), power(mul(2, a), -1))


def slope_symbol(*exprs: Expr, base: str = "p") -> str:
    """A slope name not clashing with any symbol of ``exprs``."""
    used = set().union(*(e.free_symbols for e in exprs))
    name = base
    while name in used:
        name += "_"
    return name


def solve_for_dependent(F: Expr, G: Expr, dep: str, branch: str = "linear", slope: str = "p") -> Expr:
    """``phi`` with ``dep = phi`` solving ``F * slope = G`` on ``branch``."""
    eq = add(mul(F, Var(slope)), neg(G))
    try:
        coeffs = collect(eq, dep)
    except NotPolynomial as exc:
        raise DegreeTooHigh(f"{dep} does not enter polynomially: {exc}") from None
    return _solve(coeffs, dep, branch)


def isocline_seed(F: Expr, dep: str, branch: str = "linear", param: str | None = None) -> Expr:
    """The infinity-isocline ``F = 0`` solved for ``dep``."""
    try:
        coeffs = collect(F, dep)
    except NotPolynomial as exc:
        raise DegreeTooHigh(f"{dep} does not enter polynomially: {exc}") from None
    seed = _solve(coeffs, dep, branch)
    if param is not None and seed.has(param):
        raise SeedDependsOnParameter(f"isocline {seed} depends on {param}")
    return seed


@dataclass
class IterationMap:
    indep: str
    dep: str
    param: str
    phi: Expr
    seed: Expr
    bracket: tuple[float, float]
    slope: str = "p"
    eps: str | None = None
    eps_value: Fraction | None = None
    fold: Fraction | None = None

    def __post_init__(self):
        allowed = {self.indep, self.slope, self.param} | ({self.eps} if self.eps else set())
        extra = self.phi.free_symbols - allowed
        if extra:
            raise ComputationError(f"phi references unexpected symbols {sorted(extra)}")
        if self.seed.free_symbols - {self.indep}:
            raise SeedDependsOnParameter(f"seed {self.seed} must depend on {self.indep} only")

    @classmethod
    def from_system(cls, F: Expr, G: Expr, indep: str, dep: str, param: str, bracket,
                    branch: str = "linear", eps: str | None = None, eps_value=None, fold=None) -> "IterationMap":
        slope = slope_symbol(F, G)
        phi = solve_for_dependent(F, G, dep, branch, slope)
        seed = isocline_seed(F, dep, branch, param)
        lo, hi = bracket
        return cls(indep, dep, param, phi, seed, (lo, hi), slope, eps,
                   None if eps_value is None else as_rational(eps_value),
                   None if fold is None else as_rational(fold))

    def pinned_phi(self) -> Expr:
        """``phi`` with the perturbation parameter set to ``eps_value``."""
        if self.eps and self.phi.has(self.eps):
            if self.eps_value is None:
                raise ComputationError(f"{self.eps} is symbolic; give eps_value to iterate numerically")
            return substitute(self.phi, {self.eps: self.eps_value})
        return self.phi

    def is_rational(self) -> bool:
        return not (_has_sqrt(self.phi) or _has_sqrt(self.seed))


def _has_sqrt(e: Expr) -> bool:
    stack, seen = [e], set()
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        if isinstance(n, Sqrt):
            return True
        stack.extend(n.args)
    return False


# ---------------------------------------------------------------------------
# iterates


@dataclass
class Certificate:
    """Evidence that the chosen parameter removes the singularity.

    Exact mode: ``divides`` says ``(x - x*)`` divides the numerator at the
    chosen parameter; ``residual`` is the relative remainder left when the
    denominator is deflated by the (possibly approximate) root.

    Numeric mode: ``bound`` is ``max |y|`` at ``x* +- delta`` with the chosen
    parameter and ``perturbed`` the same with the parameter shifted by
    ``+- shift``; ``ratio = perturbed / bound`` is compared with ``factor``.
    ``growth`` is how much the perturbed deviation grows when ``delta``
    shrinks tenfold (about 10 for a simple pole, about 3.2 for an inverse
    square root); ``blowup`` is set when it exceeds 2 while the canceled
    iterate stays put.
    """

    kind: str
    divides: bool | None = None
    residual: float = 0.0
    bound: float | None = None
    perturbed: float | None = None
    ratio: float | None = None
    factor: float = 1e3
    growth: float | None = None
    blowup: bool | None = None

    @property
    def passed(self) -> bool:
        if self.kind == "exact":
            return bool(self.divides)
        return self.ratio is not None and self.ratio > self.factor


@dataclass
class CanardIterate:
    k: int
    expr: Expr
    ratfunc: RatFunc | None = None
    raw: RatFunc | None = None
    denominator: Poly | Expr | None = None
    cofactor: Poly | None = None
    root: RealRoot | float | None = None
    root_error: float = 0.0
    param_value: Fraction | None = None
    param_error: float = 0.0
    exact: bool = False
    certificate: Certificate | None = None
    denominator_roots: list[float] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    parent: "CanardIterate | None" = field(default=None, repr=False)
    size: int = 0
    deviation: float | None = None

    @property
    def resolved(self) -> bool:
        return self.param_value is not None

    @property
    def x_star(self) -> float | None:
        if self.root is None:
            return None
        return float(self.root)

    @property
    def c(self) -> float | None:
        return None if self.param_value is None else float(self.param_value)


def _seed_iterate(m: IterationMap, exact: bool) -> CanardIterate:
    rf = to_ratfunc(m.seed, m.indep) if exact else None
    return CanardIterate(0, m.seed, rf, rf, exact=exact, size=node_count(m.seed))


def _bracket(m: IterationMap) -> tuple[Fraction, Fraction]:
    return as_rational(m.bracket[0]), as_rational(m.bracket[1])


def _step_exact(m: IterationMap, prev: CanardIterate, phi: Expr) -> list[CanardIterate]:
    x = m.indep
    yprev = prev.ratfunc if prev.ratfunc is not None else to_ratfunc(prev.expr, x)
    slope = yprev.derivative()

    def at(value) -> RatFunc:
        return to_ratfunc(phi, x, {m.slope: slope, m.param: Fraction(value)})

    r0, r1, r2 = at(0), at(1), at(2)
    den = poly_lcm(r0.den, r1.den)
    den = poly_lcm(den, r2.den)
    n0 = r0.num * (den // r0.den)
    n1 = r1.num * (den // r1.den)
    n2 = r2.num * (den // r2.den)
    dn = n1 - n0
    affine = n2 - n1 == dn
    k = prev.k + 1
    if den.degree < 1:
        it = CanardIterate(k, r0.to_expr() if dn.is_zero() else phi, r0 if dn.is_zero() else None,
                           denominator=den, exact=True, parent=prev, flags=["no-singularity"])
        it.size = node_count(it.expr)
        return [it]
    all_roots = [r.mid for r in real_roots(den)]
    lo, hi = _bracket(m)
    out: list[CanardIterate] = []
    for root in real_roots(den, (lo, hi)):
        flags: list[str] = []
        if root.exact is None:
            root = root.refine(EXACT_ROOT_WIDTH)
        xr = root.value
        a, b = n0(xr), dn(xr)
        if a == 0 and b == 0:
            continue  # removable for every parameter value
        if affine:
            try:
                c = resolve_linear_unknown(lambda v: n0(xr) + v * dn(xr))
            except NoSolution:
                flags.append("parameter-absent")
                out.append(CanardIterate(k, phi, denominator=den, root=root, flags=flags, parent=prev,
                                         denominator_roots=all_roots, exact=True))
                continue
        else:
            flags.append("secant")
            c = Fraction(_secant(lambda v: float(at(v).num(xr)), float(prev.param_value or 0)))
        numer = n0 + dn * c if affine else at(c).num * (den // at(c).den)
        raw = RatFunc(numer, den)
        divides = numer(xr) == 0
        residual = 0.0
        if root.exact is not None:
            y = raw
            cof = den // Poly([-xr, 1], den.var)
        else:
            dnum = deflate_root(numer, xr)
            dden = deflate_root(den, xr)
            y = RatFunc(dnum.quotient, dden.quotient)
            cof = dden.quotient
            residual = dden.residual
        if y.den(xr) == 0:
            flags.append("pole-persists")
        err = 0.0
        if root.exact is None and affine:
            span = []
            for end in (root.lo, root.hi):
                bv = dn(end)
                if bv != 0:
                    span.append(float(-n0(end) / bv))
            if len(span) == 2:
                err = abs(span[1] - span[0])
        e = y.to_expr()
        out.append(CanardIterate(
            k, e, y, raw, den, cof, root, float(root.width), c, err, root.exact is not None,
            Certificate("exact", divides=divides, residual=residual), all_roots, flags, prev, node_count(e),
        ))
    if not out:
        it = CanardIterate(k, phi, denominator=den, exact=True, parent=prev, denominator_roots=all_roots,
                           flags=["no-singularity"])
        it.size = node_count(phi)
        return [it]
    return out


def _secant(fn, guess: float, tol: float = 1e-12, maxiter: int = 100) -> float:
    a, b = guess, guess + 1e-3 * max(1.0, abs(guess))
    fa, fb = fn(a), fn(b)
    for _ in range(maxiter):
        if fb == fa:
            break
        a, b, fa = b, b - fb * (b - a) / (fb - fa), fb
        fb = fn(b)
        if abs(b - a) <= tol * max(1.0, abs(b)):
            return b
    if abs(fb) > tol:
        raise NoCancellation("secant iteration on the parameter did not converge")
    return b


def peel_radical(e: Expr) -> tuple[Expr, Fraction, bool]:
    """Split ``e = k * sqrt(radicand)``; returns ``(radicand, k, True)`` or
    ``(e, 1, False)`` when ``e`` is not a scaled radical."""
    if isinstance(e, Sqrt):
        return e.arg, Fraction(1), True
    if isinstance(e, Product) and len(e.factors) == 2:
        f0, f1 = e.factors
        if isinstance(f0, Const) and isinstance(f1, Sqrt):
            return f1.arg, f0.value, True
    return e, Fraction(1), False


def _scan(fn, lo: float, hi: float, panels: int, tol: float = 1e-12) -> list[float]:
    def val(t):
        try:
            v = fn(t)
        except (ZeroDivisionError, ValueError, OverflowError):
            return math.nan
        return v

    xs = [lo + (hi - lo) * i / panels for i in range(panels + 1)]
    vs = [val(t) for t in xs]
    roots = []
    for i in range(panels):
        a, b, fa, fb = xs[i], xs[i + 1], vs[i], vs[i + 1]
        if not (math.isfinite(fa) and math.isfinite(fb)):
            continue
        if fa == 0:
            roots.append(a)
            continue
        if fa * fb > 0:
            continue
        if fb == 0:
            continue  # picked up as the left end of the next panel
        while b - a > tol:
            mid = 0.5 * (a + b)
            fm = val(mid)
            if not math.isfinite(fm):
                break
            if fm == 0:
                a = b = mid
                break
            if (fm > 0) == (fa > 0):
                a, fa = mid, fm
            else:
                b = mid
        roots.append(0.5 * (a + b))
    if vs[-1] == 0:
        roots.append(hi)
    return roots


def numeric_certificate(y: Expr, x: str, param: str, x_star: float, c: float,
                        delta: float = 1e-6, shift: float = 1e-3, factor: float = 1e3) -> Certificate:
    """Blow-up test around ``x_star`` for ``y`` with the parameter free.

    Evaluations that are not real (negative radicand) are left out.
    """
    f = lambdify(y, [x, param]).raw

    def val(t, v):
        try:
            out = f(t, v)
        except (ZeroDivisionError, ValueError, OverflowError):
            return math.nan
        return out

    def biggest(vals):
        vals = [abs(v) for v in vals if math.isfinite(v)]
        return max(vals) if vals else math.nan

    sides = (x_star - delta, x_star + delta)
    bound = biggest(val(t, c) for t in sides)
    perturbed = biggest(val(t, c + s) for t in sides for s in (-shift, shift))
    ratio = perturbed / bound if bound > 0 else math.inf

    def dev(d):
        return biggest(val(x_star + s * d, c + sc) - val(x_star + s * d, c)
                       for s in (-1, 1) for sc in (-shift, shift))

    growth = dev(delta / 10) / dev(delta)
    steady = biggest(val(x_star + s * delta / 10, c) - val(x_star + s * delta, c) for s in (-1, 1))
    blowup = bool(growth > 2 and steady <= 1e-3 * bound)
    return Certificate("numeric", bound=bound, perturbed=perturbed, ratio=ratio, factor=factor,
                       growth=growth, blowup=blowup)


def _reduce_numeric(y: Expr, x: str, root: float) -> tuple[Expr, bool]:
    """Rational form of ``y`` with the canceled factor ``x - root`` divided
    out of numerator and denominator."""
    rf = to_ratfunc(y, x)
    r = Fraction(root)
    try:
        num = deflate_root(rf.num, r).quotient
        den = deflate_root(rf.den, r).quotient
    except InexactDeflation:
        return rf.to_expr(), False
    return RatFunc(num, den).to_expr(), True


def _step_numeric(m: IterationMap, prev: CanardIterate, phi: Expr, panels: int) -> list[CanardIterate]:
    x, k = m.indep, prev.k + 1
    d = differentiate(prev.expr, x)
    y = substitute(phi, {m.slope: d})
    target, _, radical = peel_radical(y)
    qf = quotient_normal_form(target)
    for fac in qf.factors:
        if fac.has(m.param):
            raise ComputationError(f"denominator factor {fac} depends on {m.param}")
    lo, hi = (float(v) for v in m.bracket)
    found: list[float] = []
    for fac in qf.factors:
        if isinstance(fac, Const) or not fac.has(x):
            continue
        g = lambdify(fac, [x]).raw
        for t in _scan(g, lo, hi, panels):
            if all(abs(t - s) > 1e-9 for s in found):
                found.append(t)
    found.sort()
    num = lambdify(qf.numerator, [x, m.param]).raw
    rad = lambdify(target, [x, m.param]).raw if radical else None
    out: list[CanardIterate] = []
    for t in found:
        flags: list[str] = []
        h = 1e-3 * (hi - lo)
        scale = max(abs(num(t + s, v)) for s in (-h, h) for v in (0.0, 1.0))
        if abs(num(t, 0.0)) <= 1e-9 * scale and abs(num(t, 1.0)) <= 1e-9 * scale:
            continue  # removable
        try:
            c = resolve_linear_unknown_float(lambda v: num(t, v))
        except NotAffine:
            flags.append("secant")
            c = _secant(lambda v: num(t, v), prev.c or 0.0)
        except NoSolution:
            flags.append("parameter-absent")
            out.append(CanardIterate(k, y, root=t, root_error=1e-12, flags=flags, parent=prev))
            continue
        cerr = 0.0
        try:
            ends = [resolve_linear_unknown_float(lambda v, s=s: num(s, v)) for s in (t - 1e-12, t + 1e-12)]
            cerr = abs(ends[1] - ends[0])
        except (NotAffine, NoSolution, ZeroDivisionError):
            pass
        cq = Fraction(c)
        yk = substitute(y, {m.param: cq})
        if not _has_sqrt(yk):
            yk, ok = _reduce_numeric(yk, x, t)
            if not ok:
                flags.append("not-deflated")
        if radical:
            for s in (-1e-6, 1e-6):
                try:
                    if rad(t + s, c) < 0:
                        flags.append("negative-radicand")
                        break
                except ZeroDivisionError:
                    pass
        for ab, b in qf.sqrt_rewrites:
            try:
                if lambdify(b, [x]).raw(t + 1e-6) < 0 or lambdify(b, [x]).raw(t - 1e-6) < 0:
                    flags.append("rewrite-sign")
                    break
            except (ZeroDivisionError, ValueError, KeyError):
                pass
        cert = numeric_certificate(y, x, m.param, t, c)
        out.append(CanardIterate(
            k, yk, denominator=qf.denominator, root=t, root_error=1e-12, param_value=cq, param_error=cerr,
            exact=False, certificate=cert, denominator_roots=list(found), flags=flags, parent=prev,
            size=node_count(yk),
        ))
    if not out:
        return [CanardIterate(k, y, denominator=qf.denominator, parent=prev, denominator_roots=found,
                              flags=["no-singularity"], size=node_count(y))]
    return out


def step(m: IterationMap, prev: CanardIterate, mode: str = "auto", policy: str = "all",
         panels: int = 4096) -> list[CanardIterate]:
    """One iteration from ``prev``: one iterate per cancelable root in the
    bracket, or a single unresolved iterate flagged ``no-singularity``."""
    phi = m.pinned_phi()
    if mode == "auto":
        mode = "exact" if not (_has_sqrt(phi) or _has_sqrt(prev.expr)) else "numeric"
    if mode == "exact":
        if _has_sqrt(phi) or _has_sqrt(prev.expr):
            raise SqrtPresent("exact mode needs a radical-free map and seed")
        out = _step_exact(m, prev, phi)
    elif mode == "numeric":
        out = _step_numeric(m, prev, phi, panels)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if policy == "unique" and sum(1 for it in out if it.resolved) > 1:
        raise MultipleRootsAmbiguous(f"{len(out)} cancelable roots in the bracket")
    return out


def run(m: IterationMap, k_max: int, mode: str = "auto", budget: int = DEFAULT_BUDGET,
        reference: float | None = None, panels: int = 4096) -> list[CanardIterate]:
    """Iterate up to ``k_max`` steps, following every candidate root.

    Stops early (returning what was found) once no singularity is left to
    cancel.  Raises :class:`ExpressionBudgetExceeded` carrying the iterates
    computed so far when an iterate grows past ``budget`` nodes.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if mode == "auto":
        mode = "exact" if not (_has_sqrt(m.pinned_phi()) or _has_sqrt(m.seed)) else "numeric"
    frontier = [_seed_iterate(m, mode == "exact")]
    out: list[CanardIterate] = []
    for _ in range(k_max):
        nxt: list[CanardIterate] = []
        for prev in frontier:
            for it in step(m, prev, mode, panels=panels):
                if reference is not None and it.resolved:
                    it.deviation = (float(it.param_value) - reference) / reference
                if it.size > budget:
                    raise ExpressionBudgetExceeded(
                        f"iterate {it.k} has {it.size} nodes (budget {budget})", last_good=out)
                out.append(it)
                if it.resolved and "pole-persists" not in it.flags:
                    nxt.append(it)
        frontier = nxt
        if not frontier:
            break
    return out


# ---------------------------------------------------------------------------
# asymptotics in eps


@dataclass
class AsymptoticIterate:
    k: int
    c: list[Fraction]
    y: ParamSeries
    method: str
    cross_check: list[Fraction] | None = None


def fold_point(m: IterationMap) -> Fraction:
    """Rational zero of the seed's slope inside the bracket."""
    if m.fold is not None:
        return m.fold
    d = to_ratfunc(differentiate(m.seed, m.indep), m.indep)
    roots = [r for r in real_roots(d.num, _bracket(m)) if r.exact is not None]
    if len(roots) != 1:
        raise NoCancellation("could not identify a unique rational fold point in the bracket")
    return roots[0].exact


def _require_eps(m: IterationMap):
    if not m.eps:
        raise ComputationError("the map has no perturbation parameter")
    if _has_sqrt(m.phi) or _has_sqrt(m.seed):
        raise SqrtPresent("asymptotic analysis needs a radical-free map")


def _generic_series(m: IterationMap, prev: ParamSeries, fold) -> tuple[list[Fraction], ParamSeries]:
    """Cancel the fold pole order by order.  With ``prev`` known through
    order ``L`` this fixes ``c_0..c_{L-1}`` and returns the new iterate
    through order ``L - 1`` (one order is spent on the unknown)."""
    x, eps = m.indep, m.eps
    top = prev.order
    dprev = prev.derivative()
    cs: list[Fraction] = []
    for n in range(1, top + 1):
        def coefficient_for(v, n=n):
            cser = ParamSeries(cs + [v] + [0] * (top - len(cs)), eps, x)
            return series_eval(m.phi, {m.slope: dprev, m.param: cser}, n, eps, x)[n]

        cs.append(cancel_pole(coefficient_for, fold).value)
    cser = ParamSeries(cs + [0], eps, x)
    y = series_eval(m.phi, {m.slope: dprev, m.param: cser}, top, eps, x)
    return cs, y.truncate(top - 1)


def _closed_form_iterate(m: IterationMap, c1: Fraction) -> Expr:
    """Iterate 2 with ``eps`` and the parameter symbolic, after pinning the
    first iterate's parameter to ``c1``."""
    y1 = substitute(m.phi, {m.slope: differentiate(m.seed, m.indep), m.param: c1})
    try:
        parts = collect(y1, m.eps)
    except NotPolynomial as exc:
        raise NotRational(f"first iterate is not polynomial in {m.eps}: {exc}") from None
    # reduce each eps-coefficient so removable factors do not resurface
    y1 = add(*(mul(power(Var(m.eps), i), to_ratfunc(e, m.indep).to_expr()) for i, e in parts.items()))
    return substitute(m.phi, {m.slope: differentiate(y1, m.indep)})


def _tracked_factor(m: IterationMap, qf, fold) -> list[Poly]:
    for fac in qf.factors:
        if not fac.has(m.indep):
            continue
        try:
            rows = bivariate(fac, m.indep, m.eps)
        except NotRational:
            continue
        at0 = Poly([r.coeffs[0] if r.coeffs else 0 for r in rows], m.indep)
        if at0(fold) == 0:
            return rows
    raise NoCancellation("no denominator factor passes through the fold point at eps = 0")


def _root_expansion(m: IterationMap, c1: Fraction, order: int, fold) -> list[Fraction]:
    y2 = _closed_form_iterate(m, c1)
    qf = quotient_normal_form(y2)
    rows = _tracked_factor(m, qf, fold)
    n = order + 2
    xs = root_series(rows, fold, n)
    num = qf.numerator
    a = series_compose(bivariate(substitute(num, {m.param: 0}), m.indep, m.eps), xs)
    b1 = series_compose(bivariate(substitute(num, {m.param: 1}), m.indep, m.eps), xs)
    b = [p - q for p, q in zip(b1, a)]
    while b and b[0] == 0:
        if a[0] != 0:
            raise NoCancellation("numerator does not vanish with the denominator")
        a, b = a[1:], b[1:]
    if not b:
        raise NoSolution("parameter does not enter the numerator")
    out = [Fraction(0)] * len(a)
    for i in range(len(a)):
        acc = -a[i] - sum((b[j] * out[i - j] for j in range(1, i + 1)), Fraction(0))
        out[i] = acc / b[0]
    if len(out) < order + 1:
        raise NoCancellation("series too short after removing common powers of eps")
    return out[: order + 1]


def iterative_asymptotics(m: IterationMap, k_max: int, order: int) -> list[AsymptoticIterate]:
    """Parameter series ``c_k(eps)`` of iterates ``1..k_max`` to ``order``.

    The first iterate only fixes the leading coefficient; its series is
    reported with that single term.  Iterate two follows the root of its
    denominator through the fold (cross-checked against order-by-order
    cancellation); later iterates use order-by-order cancellation.
    """
    _require_eps(m)
    x, eps = m.indep, m.eps
    fold = fold_point(m)
    prev = ParamSeries.constant(to_ratfunc(m.seed, x), order + 1 + k_max, eps, x)
    out: list[AsymptoticIterate] = []
    for k in range(1, k_max + 1):
        cs, y = _generic_series(m, prev, fold)
        if k == 1:
            out.append(AsymptoticIterate(1, cs[:1], y, "order-by-order", cross_check=cs[: order + 1]))
        elif k == 2 and all(v == 0 for v in out[0].cross_check[1:]):
            roots = _root_expansion(m, out[0].c[0], order, fold)
            if roots != cs[: order + 1]:
                raise ComputationError(f"root expansion {roots} disagrees with order-by-order {cs}")
            out.append(AsymptoticIterate(2, roots, y, "root-expansion", cross_check=cs[: order + 1]))
        else:
            out.append(AsymptoticIterate(k, cs[: order + 1], y, "order-by-order"))
        for coeff in y.coeffs:
            if coeff.den(fold) == 0:
                raise NoCancellation(f"iterate {k} keeps a pole at the fold")
        prev = y
    return out


@dataclass
class ExistenceBound:
    eps: Fraction | float
    abscissae: list[Fraction | float]
    collision: Collision


def collision_bound(p: Expr | Sequence[Poly], x: str = "x", eps: str = "eps") -> ExistenceBound:
    """Smallest positive parameter at which ``p`` acquires a multiple root."""
    try:
        cols = discriminant_vanishes(p, x, eps)
    except ComputationError as exc:
        raise NoCollision(str(exc)) from None
    pos = [c for c in cols if c.parameter.lo > 0 or (c.parameter.exact is not None and c.parameter.exact > 0)]
    if not pos:
        raise NoCollision("no positive real parameter value gives a multiple root")
    best = min(pos, key=lambda c: c.parameter.lo)
    xs = [r.exact if r.exact is not None else r.mid for r in best.abscissae]
    return ExistenceBound(best.value, xs, best)


def existence_bound(m: IterationMap, iterate: int = 2) -> ExistenceBound:
    """Critical ``eps`` at which the tracked iterate-2 denominator root
    collides with another one."""
    if iterate != 2:
        raise ValueError("only the second iterate has a closed-form denominator here")
    _require_eps(m)
    fold = fold_point(m)
    first = iterative_asymptotics(m, 1, 0)[0]
    qf = quotient_normal_form(_closed_form_iterate(m, first.c[0]))
    rows = _tracked_factor(m, qf, fold)
    return collision_bound(rows, m.indep, m.eps)
