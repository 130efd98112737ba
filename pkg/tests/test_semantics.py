from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import linear, source
from gen import bool_expr, positive_value
from perpl import core as C
from perpl.errors import BudgetExceeded, CompileError
from perpl.semantics import (
    Tagged, compile_mspe, count_variables, enumerate_domain, index_of, render, size, value_of,
)
from perpl.solver import solve
from perpl.transform import eliminate_recursive_types


def compiled(src):
    return compile_mspe(eliminate_recursive_types(linear(src)).program)


def exact(src):
    return solve(compiled(src), exact=True).distribution


def test_bool_domain():
    assert enumerate_domain(C.BOOL) == [Tagged(1, ()), Tagged(2, ())]


def test_function_domain_size():
    assert len(enumerate_domain(C.TArrow(C.BOOL, C.BOOL))) == 4
    assert size(C.TArrow(C.TTensor((C.BOOL, C.BOOL)), C.BOOL)) == 8


def test_unit_domain():
    assert enumerate_domain(C.UNIT) == [()]


def test_sum_and_with_sizes():
    t = C.TSum((C.BOOL, C.UNIT, C.TTensor((C.BOOL, C.BOOL))))
    assert size(t) == 7
    assert size(C.TWith((C.BOOL, C.BOOL))) == 4


def test_mu_has_no_domain():
    mu = C.TMu("N", "N", "a", C.TSum((C.UNIT, C.TVar("a"))))
    with pytest.raises(CompileError):
        size(mu)


@pytest.mark.parametrize("t", [C.BOOL, C.TTensor((C.BOOL, C.UNIT, C.BOOL)), C.TArrow(C.BOOL, C.BOOL),
                               C.TSum((C.BOOL, C.TWith((C.UNIT, C.BOOL))))])
def test_index_round_trip(t):
    for i in range(size(t)):
        assert index_of(t, value_of(t, i)) == i


def test_render_forms():
    assert render(C.TTensor((C.BOOL, C.UNIT)), 1) == "(false, ())"
    assert render(C.TSum((C.UNIT, C.BOOL)), 2) == "in2(false)"
    assert render(C.TArrow(C.BOOL, C.BOOL), 1) == "(true -> false)"


def test_fail_has_zero_root():
    m = compiled("fail")
    assert m.nvars == 1 and m.roots == [("()", 0)]
    assert solve(m).distribution == {}


def test_pcfg_system_solves_to_half():
    assert abs(exact(source("pcfg_unit"))["()"] - Fraction(1, 2)) < 1e-9


def test_loop_is_linear():
    s = solve(compiled(source("loop")))
    assert s.report.newton_iterations == 0
    assert {e.cls for e in s.report.sccs} == {"linear"}


def test_higher_order_main_warns():
    m = compiled("\\x: Bool. x")
    assert m.warnings and "not first-order" in m.warnings[0]


def test_variable_budget():
    with pytest.raises(BudgetExceeded, match="budget of 100 variables"):
        compile_mspe(eliminate_recursive_types(linear(source("pda"))).program, max_vars=100)


def test_variable_count_matches_independent_count(corpus_name):
    tp = eliminate_recursive_types(linear(source(corpus_name))).program
    assert compile_mspe(tp).nvars == count_variables(tp)


def test_mspe_json_and_text():
    m = compiled(source("coin"))
    js = m.to_json()
    assert set(js) == {"vars", "eqs", "roots"}
    assert len(js["eqs"]) == m.nvars
    assert "z0 =" in m.to_text()


@settings(max_examples=60, deadline=None)
@given(positive_value())
def test_values_are_deterministic(tv):
    t, i, text = tv
    assert exact(text) == {render(t, i): 1}


@settings(max_examples=60, deadline=None)
@given(bool_expr(), bool_expr())
def test_amb_adds_branch_weights(a, b):
    both = exact(f"amb ({a}) ({b})")
    left, right = exact(a), exact(b)
    for v in ("true", "false"):
        assert both.get(v, 0) == left.get(v, 0) + right.get(v, 0)


@settings(max_examples=60, deadline=None)
@given(bool_expr(2), bool_expr(2), bool_expr(2))
def test_linear_substitution(arg, then, other):
    applied = exact(f"(\\x: Bool. if x then ({then}) else ({other})) ({arg})")
    substituted = exact(f"if ({arg}) then ({then}) else ({other})")
    assert applied == substituted
