from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canardkit.errors import InexactDeflation
from canardkit.parse import parse
from canardkit.poly import (Poly, RatFunc, deflate_root, discriminant_vanishes, poly_gcd, real_roots, resultant,
                            square_free_decomposition, to_ratfunc)


def test_arithmetic_and_division():
    p = Poly.from_roots([1, 2, F(-1, 3)])
    q, r = divmod(p, Poly([-2, 1]))
    assert r.is_zero() and q == Poly.from_roots([1, F(-1, 3)])
    assert p(2) == 0 and p.derivative().degree == 2


def test_gcd_is_monic_common_factor():
    a = Poly.from_roots([1, 1, 3])
    b = Poly.from_roots([1, 5])
    assert poly_gcd(a, b) == Poly.from_roots([1])


def test_square_free_decomposition():
    p = Poly.from_roots([2, 2, 2, -1, 4, 4])
    parts = {m: f for f, m in square_free_decomposition(p)}
    assert parts[3] == Poly.from_roots([2]) and parts[2] == Poly.from_roots([4]) and parts[1] == Poly.from_roots([-1])


def test_real_roots_exact_and_irrational():
    p = Poly([-2, 0, 1]) * Poly([-1, 1])  # (x^2 - 2)(x - 1)
    roots = real_roots(p)
    assert [r.exact for r in roots] == [None, 1, None]
    s2 = roots[2].refine(F(1, 2**80))
    assert s2.lo ** 2 <= 2 <= s2.hi ** 2 and s2.width <= F(1, 2**80)


def test_real_roots_in_interval_and_multiplicity():
    p = Poly.from_roots([F(1, 2), F(1, 2), 3])
    roots = real_roots(p, (0, 1))
    assert len(roots) == 1 and roots[0].exact == F(1, 2) and roots[0].multiplicity == 2


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=6, unique=True), st.integers(1, 9))
def test_real_roots_match_numpy(ints, scale):
    roots = [F(i, scale) for i in ints]
    p = Poly.from_roots(roots) * Poly([1, 0, 1])  # add a complex pair
    found = real_roots(p)
    assert sorted(r.value for r in found) == sorted(set(roots))
    assert np.allclose(sorted(float(r.value) for r in found),
                       sorted(z.real for z in np.roots(p.float_coeffs()[::-1]) if abs(z.imag) < 1e-9))


def test_deflation_exact_and_refuses_non_roots():
    p = Poly.from_roots([3, -1])
    d = deflate_root(p, 3)
    assert d.exact and d.quotient == Poly.from_roots([-1])
    with pytest.raises(InexactDeflation):
        deflate_root(p, 2)


def test_deflation_of_refined_irrational_root():
    p = Poly([-2, 0, 1]) * Poly([5, 1])
    root = real_roots(p, (0, 2))[0].refine(F(1, 2**200))
    d = deflate_root(p, root)
    assert not d.exact and d.residual < 1e-55
    assert np.allclose(d.quotient.float_coeffs(), (Poly([5, 1]) * Poly([2 ** 0.5, 1])).float_coeffs())


def test_ratfunc_normalises():
    r = RatFunc(Poly.from_roots([1, 2]), Poly.from_roots([1, 3]))
    assert r == RatFunc(Poly.from_roots([2]), Poly.from_roots([3]))
    assert r.den.lc == 1
    assert (r + 1 - r) == RatFunc.const(1)


def test_to_ratfunc_with_bindings():
    e = parse("(c - x)/(x^2 - 1) + p", {"x", "c", "p"})
    r = to_ratfunc(e, "x", {"c": F(1), "p": RatFunc(Poly([0, 1]), Poly([1]))})
    assert r == RatFunc(Poly([-1, 1, 1]), Poly([1, 1]))  # -1/(x+1) + x


def test_resultant_detects_common_root():
    f = [Poly([-1], "t"), Poly([0], "t"), Poly([1], "t")]  # x^2 - 1
    g = [Poly([0, -1], "t"), Poly([1], "t")]  # x - t
    res = resultant(f, g, "t")
    assert res(1) == 0 and res(-1) == 0 and res(2) != 0


def test_discriminant_vanishes_at_collision():
    p = parse("x^2 - 2*x + eps", {"x", "eps"})  # double root at eps = 1, x = 1
    cols = discriminant_vanishes(p)
    assert len(cols) == 1 and cols[0].value == 1 and cols[0].abscissae[0].exact == 1
