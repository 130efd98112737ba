import pytest

from conftest import CORPUS, source
from perpl import core as C
from perpl.errors import DesugarError, ParseError
from perpl.syntax import desugar, parse_program, show_surface
from perpl.typecheck import elaborate


def test_fail_program():
    p = parse_program("fail")
    assert p.data_decls == [] and p.defines == []
    assert isinstance(desugar(p).main, C.Fail)


def test_coin_parses_to_one_define_and_variable_main():
    p = parse_program("define flip = amb (factor 0.3 in true) (factor 0.7 in false)\nflip")
    assert [d.name for d in p.defines] == ["flip"]
    core = desugar(p)
    assert isinstance(core.main, C.Var) and core.main.name == "flip"


def test_missing_definition_name_is_a_parse_error():
    with pytest.raises(ParseError) as e:
        parse_program("define = 3")
    assert e.value.pos == (1, 8)
    assert e.value.render("x.ppl").startswith("x.ppl:1:8: error:")


def test_duplicate_definition():
    with pytest.raises(ParseError, match="duplicate"):
        parse_program("define a = ()\ndefine a = ()\na")


def test_if_becomes_case_with_unit_lets():
    core = desugar(parse_program("define c = true\ndefine a = ()\ndefine b = ()\nif c then a else b"))
    m = core.main
    assert isinstance(m, C.Case) and len(m.arms) == 2
    for (u, arm), name in zip(m.arms, "ab"):
        assert isinstance(arm, C.LetTuple) and arm.vars == ()
        assert isinstance(arm.bound, C.Var) and arm.bound.name == u
        assert isinstance(arm.body, C.Var) and arm.body.name == name


def test_true_is_first_injection_of_unit():
    core = desugar(parse_program("true"))
    assert isinstance(core.main, C.Inj) and core.main.index == 0
    assert core.main.expr.items == ()


def test_recursive_datatype_becomes_mu_of_sum():
    core = elaborate(desugar(parse_program("data Nat = Zero | Succ Nat\nSucc Zero")))
    outer = core.main
    assert isinstance(outer, C.Fold) and isinstance(outer.ty, C.TMu)
    assert isinstance(outer.expr, C.Inj) and outer.expr.index == 1
    inner = outer.expr.expr
    assert isinstance(inner, C.Fold) and isinstance(inner.expr, C.Inj) and inner.expr.index == 0


def test_nonrecursive_datatype_has_no_mu():
    core = desugar(parse_program("data T = A | B\nB"))
    assert isinstance(core.main, C.Inj) and core.main.index == 1


def test_unknown_constructor_in_case():
    with pytest.raises(DesugarError, match="unknown constructor 'C'"):
        desugar(parse_program("data T = A | B\ncase A of A => true | C => false"))


def test_case_missing_arm():
    with pytest.raises(DesugarError, match="missing"):
        desugar(parse_program("data T = A | B\ncase A of A => true"))


def test_equality_on_functions_rejected():
    with pytest.raises(DesugarError, match="=="):
        elaborate(desugar(parse_program("\\x: Bool -> Bool. x == x")))


def test_comments_and_positions():
    p = parse_program("(* hello (* nested *) *)\n  fail")
    assert desugar(p).main.pos == (2, 3)


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_round_trip(name):
    text = show_surface(parse_program(source(name)))
    assert show_surface(parse_program(text)) == text


def test_no_surface_nodes_after_desugar():
    core = desugar(parse_program(source("epda")))
    kinds = {type(n).__name__ for _, body in core.roots() for n in C.preorder(body)}
    assert kinds <= {"Var", "Lam", "App", "Amb", "Fail", "Factor", "Tuple", "AddTuple", "LetTuple",
                     "Proj", "Inj", "Case", "Fold", "Unfold", "Equal"}
