import pytest

from conftest import linear, source, typed
from perpl import core as C
from perpl.errors import TypeError_
from perpl.pipeline import front
from perpl.syntax import desugar, parse_program
from perpl.typecheck import AFFINE, LINEAR, elaborate, is_positive, typecheck

MU = C.TMu("Nat", "Nat", "a", C.TSum((C.UNIT, C.TVar("a"))))


@pytest.mark.parametrize("t, expected", [
    (C.BOOL, True),
    (C.UNIT, True),
    (C.TTensor((C.BOOL, C.BOOL)), True),
    (C.TArrow(C.BOOL, C.BOOL), False),
    (C.TWith((C.BOOL, C.BOOL)), False),
    (MU, False),
])
def test_is_positive(t, expected):
    assert is_positive(t) is expected


def test_local_function_used_twice():
    with pytest.raises(TypeError_, match="'f' is used more than once"):
        typed("let f = \\x: Bool. x in (f true, f true)")


def test_global_function_is_classical():
    tp = typed("define f = \\x: Bool. x\n(f true, f true)")
    assert tp.types[tp.program.main] == C.TTensor((C.BOOL, C.BOOL))


def test_unused_function_argument_affine_vs_linear():
    src = "\\k: Bool -> Bool. true"
    typed(src, AFFINE)
    with pytest.raises(TypeError_, match="'k' is never used"):
        typed(src, LINEAR)


def test_positive_locals_are_classical():
    tp = typed("let x = amb true false in (x, x)", LINEAR)
    assert tp.types[tp.program.main] == C.TTensor((C.BOOL, C.BOOL))


def test_unbound_variable():
    with pytest.raises(TypeError_, match="unbound variable 'y'"):
        typed("y")


def test_type_mismatch_message():
    with pytest.raises(TypeError_, match="expected Bool, got Unit"):
        typed("(\\x: Bool. x) ()")


def test_projection_out_of_range():
    with pytest.raises(TypeError_, match="out of range"):
        typed("<true, false>.3")


def test_additive_components_share_the_context():
    typed("\\f: Bool -> Bool. <f true, f false>", LINEAR)
    with pytest.raises(TypeError_):
        typed("\\f: Bool -> Bool. <f true, true>", LINEAR)


def test_cfg_pipeline_gets_two_string_tags():
    tp = typed(source("cfg_parse"))
    tags = {C.show_type(t) for t in tp.all_types() if isinstance(t, C.TMu)}
    assert tags == {"String[1]", "String[2]"}


def test_single_flow_gets_one_tag():
    tp = typed(source("counter"))
    tags = sorted({t.tag for t in tp.all_types() if isinstance(t, C.TMu)})
    assert tags == ["Nat", "String"]


def test_shared_variable_unifies_argument_tags():
    src = source("cfg_parse").rsplit("\n\n", 1)[0] + "\n\n\\x: String. equal x x\n"
    p = elaborate(desugar(parse_program(src)))
    eq = p.global_map()["equal"].ty
    assert eq.dom == eq.cod.dom


def test_recheck_is_idempotent(corpus_name):
    tp = typed(source(corpus_name))
    again = typecheck(tp.program, AFFINE)
    assert [C.show_type(tp.types[n]) for n in tp.nodes()] == [C.show_type(again.types[n]) for n in again.nodes()]


def test_corpus_checks_affine_then_linear_after_linearize(corpus_name):
    lt = linear(source(corpus_name))
    typecheck(lt.program, LINEAR)


def test_linear_contexts_split_exactly(corpus_name):
    """Contexts of multiplicative nodes partition among their children."""
    lt = linear(source(corpus_name))
    d = lt.delta
    for n in lt.nodes():
        if isinstance(n, (C.App, C.Tuple)):
            kids = [n.fn, n.arg] if isinstance(n, C.App) else list(n.items)
            union = set()
            for k in kids:
                assert not (union & d[k])
                union |= d[k]
            assert union == d[n]
        elif isinstance(n, C.LetTuple):
            assert d[n] == d[n.bound] | (d[n.body] - set(n.vars))
        elif isinstance(n, C.Unfold):
            assert d[n] == d[n.bound] | (d[n.body] - {n.var})


def test_main_type_reported():
    tp = typecheck(front(source("pcfg_unit")))
    assert tp.types[tp.program.main] == C.UNIT
