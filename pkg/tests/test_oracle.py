from fractions import Fraction

from hypothesis import given, settings

from conftest import source, typed
from gen import bool_expr
from perpl import core as C
from perpl.oracle import explore, is_value, reduce_step
from perpl.pipeline import front
from perpl.semantics import compile_mspe
from perpl.solver import solve
from perpl.transform import eliminate_recursive_types, linearize


def run(src, steps, **kw):
    tp = typed(src)
    return explore(tp.program, steps, result_type=tp.types[tp.program.main], **kw)


def test_reduce_amb():
    p = front("amb true false")
    out = reduce_step(p, [(1, p.main)])
    assert [(w, C.show_expr(e)) for w, e in out] == [(1, "in1 ()"), (1, "in2 ()")]


def test_reduce_factor():
    p = front("factor 0.3 in true")
    (w, e), = reduce_step(p, [(1, p.main)])
    assert w == Fraction(3, 10) and is_value(e)


def test_reduce_fail():
    p = front("fail")
    assert reduce_step(p, [(1, p.main)]) == []


def test_reduce_leaves_values_alone():
    p = front("true")
    d = [(1, p.main)]
    assert reduce_step(p, d) == d


def test_coin():
    e = run(source("coin"), 4)
    assert e.distribution == {"true": Fraction(3, 10), "false": Fraction(7, 10)}
    assert e.residual == 0


def test_fail_program():
    e = run("fail", 10)
    assert e.distribution == {} and e.residual == 0


def test_loop_partial_sums():
    e = run(source("loop"), 1000)
    got = e.distribution["true"]
    assert got < Fraction(1, 2)
    # 0.24 * sum_{k<K} 0.52^k for the number K of finished retries
    partial, k = Fraction(0), 0
    while partial < got:
        partial += Fraction(24, 100) * Fraction(52, 100) ** k
        k += 1
    assert partial == got and k > 10
    assert float(got) > 0.5 - 1e-9


def test_lower_bound_is_monotone():
    prev = {}
    for steps in (20, 40, 80, 160):
        e = run(source("pcfg_unit"), steps)
        for v, w in prev.items():
            assert e.distribution.get(v, 0) >= w
        prev = e.distribution


def test_choice_bound_counts_cut_mass():
    e = run(source("loop"), 10**6, max_choices=2)
    assert e.pending == 0 and e.cut > 0
    assert e.distribution["true"] == Fraction(24, 100)


def test_json_shape():
    js = run(source("coin"), 4).to_json()
    assert js["support"] == [{"value": "true", "weight": "3/10"}, {"value": "false", "weight": "7/10"}]
    assert js["residual"] == 0


def test_oracle_below_solver(corpus_name):
    if corpus_name == "epda":
        budgets = (100, 130, 160)
    else:
        budgets = (50, 100, 200)
    src = source(corpus_name)
    el = eliminate_recursive_types(linearize(typed(src)))
    sol = solve(compile_mspe(el.program), exact=True).distribution
    prev = {}
    for b in budgets:
        e = run(src, b)
        for v, w in e.distribution.items():
            assert w <= sol.get(v, 0) + Fraction(1, 10**12)
            assert w >= prev.get(v, 0)
        prev = e.distribution


@settings(max_examples=80, deadline=None)
@given(bool_expr())
def test_oracle_equals_solver_on_finite_programs(src):
    """Two independent routes to the same exact weights."""
    tp = typed(src)
    e = explore(tp.program, 10**6, result_type=tp.types[tp.program.main])
    assert e.residual == 0
    el = eliminate_recursive_types(linearize(tp))
    sol = solve(compile_mspe(el.program), exact=True).distribution
    assert {v: w for v, w in e.distribution.items() if w} == sol


@settings(max_examples=60, deadline=None)
@given(bool_expr(effects=False))
def test_mass_conserved_without_amb_factor_or_fail(src):
    p = front(src)
    d = [(Fraction(1), p.main)]
    for _ in range(500):
        nxt = reduce_step(p, d)
        assert sum(w for w, _ in nxt) == 1
        if nxt == d:
            break
        d = nxt
    assert all(is_value(e) for _, e in d)


def test_amb_gives_each_branch_the_full_weight():
    p = front("amb true false")
    out = reduce_step(p, [(Fraction(1, 4), p.main)])
    assert [w for w, _ in out] == [Fraction(1, 4), Fraction(1, 4)]
