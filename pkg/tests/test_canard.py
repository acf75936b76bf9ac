from __future__ import annotations

from fractions import Fraction as F

import pytest

from canardkit.canard import (IterationMap, existence_bound, fold_point, isocline_seed, iterative_asymptotics,
                              _seed_iterate, peel_radical, run, solve_for_dependent, step)
from canardkit.errors import (BranchInvalid, DegreeTooHigh, ExpressionBudgetExceeded, MultipleRootsAmbiguous,
                              SeedDependsOnParameter)
from canardkit.expr import Var, add, eval_exact, eval_numeric, mul, sqrt
from canardkit.parse import parse
from canardkit.poly import Poly, RatFunc

V = {"x", "y", "c", "p", "eps"}


def test_solve_for_dependent_linear():
    phi = solve_for_dependent(parse("y - x^2", V), parse("c - x", V), "y")
    # y = x^2 + (c - x)/p
    assert eval_exact(phi, {"x": 2, "c": 3, "p": 4}) == 4 + F(1, 4)


def test_solve_for_dependent_quadratic_branches():
    F_ = parse("y^2 - x", V)
    plus = solve_for_dependent(F_, parse("0", V), "y", "quadratic-positive")
    minus = solve_for_dependent(F_, parse("0", V), "y", "quadratic-negative")
    assert eval_numeric(plus, {"x": 4.0, "p": 1.0}) == pytest.approx(2.0)
    assert eval_numeric(minus, {"x": 4.0, "p": 1.0}) == pytest.approx(-2.0)
    with pytest.raises(BranchInvalid):
        solve_for_dependent(F_, parse("0", V), "y", "linear")


def test_cubic_dependence_is_rejected():
    with pytest.raises(DegreeTooHigh):
        solve_for_dependent(parse("y^3 - x", V), parse("c", V), "y")


def test_seed_must_not_depend_on_parameter():
    with pytest.raises(SeedDependsOnParameter):
        isocline_seed(parse("y - c*x", V), "y", param="c")


def test_first_vdp_iterate_matches_closed_form(vdp_iterates):
    it = vdp_iterates[0]
    assert it.param_value == 1 and it.root.exact == 1
    expected = RatFunc(Poly([F(-1, 10), -1, -1, F(1, 3), F(1, 3)]), Poly([1, 1]))
    assert it.ratfunc == expected


def test_vdp_iterates_shrink_toward_reference(vdp_iterates):
    devs = [abs(it.deviation) for it in vdp_iterates]
    assert devs == sorted(devs, reverse=True)
    assert [it.denominator.degree for it in vdp_iterates] == [2, 4, 8]


def test_numeric_mode_agrees_with_exact_mode(vdp_map, vdp_iterates):
    num = run(vdp_map, 3, mode="numeric")
    assert [it.c for it in num] == pytest.approx([it.c for it in vdp_iterates], abs=1e-9)


def test_unique_policy_rejects_two_roots(templator):
    m = templator.iteration_map()
    with pytest.raises(MultipleRootsAmbiguous):
        step(m, _seed_iterate(m, False), policy="unique")


def test_budget_exceeded_keeps_last_good(vdp_map):
    with pytest.raises(ExpressionBudgetExceeded) as info:
        run(vdp_map, 3, budget=40)
    assert info.value.last_good and info.value.last_good[-1].k >= 1


def test_bracket_without_singularity_gives_flagged_iterate():
    m = IterationMap("x", "y", "c", solve_for_dependent(parse("y - x", V), parse("c - x", V), "y"),
                     parse("x", V), (0, 1))
    its = run(m, 1)
    assert its[-1].flags == ["no-singularity"] and not its[-1].resolved


def test_peel_radical():
    x = Var("x")
    rad, k, found = peel_radical(mul(3, sqrt(add(x, 1))))
    assert found and k == 3 and rad == add(x, 1)
    assert peel_radical(add(x, 1)) == (add(x, 1), 1, False)


def test_fold_point_and_asymptotics(vdp_symbolic_map, vdp_asymptotics):
    assert fold_point(vdp_symbolic_map) == 1
    assert [a.k for a in vdp_asymptotics] == [1, 2, 3]
    assert vdp_asymptotics[0].c == [1]
    assert vdp_asymptotics[1].cross_check


def test_asymptotics_need_symbolic_eps(vdp_map):
    from canardkit.errors import CanardError

    with pytest.raises(CanardError):
        iterative_asymptotics(vdp_map, 2, 2)


def test_existence_bound(vdp_symbolic_map):
    b = existence_bound(vdp_symbolic_map)
    assert b.eps == F(27, 16) and b.abscissae == [F(1, 2)]
