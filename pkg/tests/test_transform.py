import pytest

from conftest import linear, source, typed
from perpl import core as C
from perpl.errors import NoDRSequence, TransformError
from perpl.transform import (
    build_dr_graph, choose_step, d_phi, defunctionalize, discard_name, eliminate_recursive_types,
    fold_sites, lin_type, r_phi, refunctionalize, unfold_sites,
)
from perpl.typecheck import LINEAR, typecheck


def test_linearize_discards_unused_function():
    lt = linear("\\k: Bool -> Bool. true")
    assert C.show_expr(lt.program.main) == "<\\k: (Bool -> Bool) & Unit. let () = k.2 in in1 (), ()>"


def test_linearize_leaves_positive_programs_alone():
    lt = linear("(true, ())")
    assert C.show_expr(lt.program.main) == "(in1 (), ())"


def test_lin_type():
    t = C.TArrow(C.BOOL, C.TWith((C.BOOL, C.UNIT)))
    assert C.show_type(lin_type(t)) == "(Bool -> (Bool & Unit) & Unit) & Unit"
    assert lin_type(C.BOOL) == C.BOOL


def test_linearize_generates_discard_functions():
    lt = linear(source("pda"))
    names = [g.name for g in lt.program.globals]
    assert discard_name("Stack") in names
    g = lt.program.global_map()[discard_name("Stack")]
    assert isinstance(g.ty, C.TArrow) and g.ty.cod == C.UNIT


def test_linearize_output_rechecks_linear(corpus_name):
    lt = linear(source(corpus_name))
    assert lt.mode == LINEAR
    typecheck(lt.program, LINEAR)


def test_pda_dr_graph():
    g = build_dr_graph(linear(source("pda")))
    assert set(g.nodes) == {"String", "Stack"}
    assert sorted(g.edges) == [("Stack", "D", "Stack"), ("Stack", "R", "String"), ("String", "R", "Stack")]
    assert "digraph" in g.to_dot()


def test_no_mu_gives_empty_graph_and_sequence():
    lt = linear(source("coin"))
    assert build_dr_graph(lt).nodes == []
    el = eliminate_recursive_types(lt)
    assert el.sequence == [] and el.program is lt


def test_pda_sequence():
    el = eliminate_recursive_types(linear(source("pda")))
    assert el.sequence == [("String", "D"), ("Stack", "R")]
    assert el.trace().endswith("sequence: String:D, Stack:R")


def test_cfg_defunctionalizing_string1_fails():
    lt = linear(source("cfg_parse"))
    with pytest.raises(TransformError, match=r"String\[1\] cannot be defunctionalized.*free acc : String\[1\]"):
        defunctionalize(lt, "String[1]")


def test_cfg_refunctionalized_string1_type():
    lt = linear(source("cfg_parse"))
    sites = unfold_sites(lt, "String[1]")
    assert len(sites) == 2
    assert sites[0].free[0][1].tag == "String[2]"
    # after String[2] is defunctionalized: one function per unfold site, the
    # second being the generated discard, which returns Unit
    el = eliminate_recursive_types(lt)
    phi = r_phi(unfold_sites(el.stages[1], "String[1]"))
    assert C.show_type(phi) == "(Tuple(Unit + Unit + Unit + Unit) -> Bool) & (Unit -> Unit)"


def test_input_string_defunctionalization_has_four_sites():
    lt = linear(source("cfg_parse"))
    sites = fold_sites(lt, "String[2]")
    assert len(sites) == 4
    assert all(s.free == () for s in sites)
    phi = d_phi(sites)
    assert isinstance(phi, C.TSum) and len(phi.items) == 4


def test_counter_refunctionalizes_nat_into_functions():
    el = eliminate_recursive_types(linear(source("counter")))
    assert el.sequence == [("String", "D"), ("Nat", "R")]
    stage = el.stages[1]
    nat = [t for t in stage.all_types() if isinstance(t, C.TMu)]
    assert {t.tag for t in nat} == {"Nat"}
    assert not any(isinstance(t, C.TMu) for t in el.program.all_types())


def test_zero_fold_sites_gives_empty_sum():
    src = "data T = N | C T\ndefine d (x: T) : Unit = case x of N => () | C y => d y\nd"
    lt = linear(src)
    out = defunctionalize(lt, "T")
    u = out.program.global_map()["$u_T"].ty
    assert u.dom == C.TSum(())


def test_refunctionalize_self_loop_is_rejected():
    src = ("data T = N | C T\ndefine d (x: T) : Unit = case x of N => () | C y => d y\n"
           "define g (y: T) (x: T) : Unit = case x of N => d y | C z => let () = d z in d y\ng")
    with pytest.raises(TransformError, match="cannot be refunctionalized"):
        refunctionalize(linear(src), "T")


def test_stuck_graph_raises_no_dr_sequence():
    src = ("data T = N | C T\ndefine d (x: T) : Unit = case x of N => () | C y => d y\n"
           "define f (y: T) : Unit = d (C (let () = d y in N))\n"
           "define g (y: T) (x: T) : Unit = case x of N => d y | C z => let () = d z in d y\n(f, g)")
    lt = linear(src)
    assert choose_step(build_dr_graph(lt)) is None
    with pytest.raises(NoDRSequence) as e:
        eliminate_recursive_types(lt)
    assert e.value.graph.nodes == ["T"]


def test_every_stage_rechecks_and_result_is_mu_free(corpus_name):
    el = eliminate_recursive_types(linear(source(corpus_name)))
    for st in el.stages:
        typecheck(st.program, LINEAR)
    final = el.program
    assert not any(C.mus_in(t) for t in final.all_types())
    assert not any(isinstance(n, (C.Fold, C.Unfold)) for n in final.nodes())


def test_dead_globals_are_collected():
    el = eliminate_recursive_types(linear(source("pda")))
    names = [g.name for g in el.program.program.globals]
    assert discard_name("String") not in names
    assert len(names) == len(set(names))


def test_affine_program_sequence_matches_after_linearize():
    tp = typed(source("epda"))
    el = eliminate_recursive_types(linear(source("epda")))
    assert el.sequence == [("String", "D"), ("Stacks", "R"), ("Stack", "R")]
    assert tp.mode == "affine"
