"""Hypothesis strategies for small closed PERPL programs."""
from __future__ import annotations

from hypothesis import strategies as st

from perpl import core as C
from perpl.semantics import size, value_of

WEIGHTS = st.sampled_from(["0", "1", "0.5", "0.25", "2", "1/3", "3/4"])


def bool_expr(depth: int = 3, scope: tuple = (), effects: bool = True) -> st.SearchStrategy:
    """Source text of a closed Bool expression without recursion.

    Without effects there is no amb or fail and every factor is 1.
    """
    leaves = ["true", "false"] + (["fail"] if effects else []) + list(scope)
    leaf = st.sampled_from(leaves)
    if depth == 0:
        return leaf
    sub = bool_expr(depth - 1, scope, effects)
    x = f"x{depth}"
    inner = bool_expr(depth - 1, scope + (x,), effects)
    weights = WEIGHTS if effects else st.just("1")
    forms = [
        leaf,
        st.builds(lambda w, a: f"factor {w} in ({a})", weights, sub),
        st.builds(lambda a, b, c: f"if ({a}) then ({b}) else ({c})", sub, sub, sub),
        st.builds(lambda a, b: f"let {x} = {a} in ({b})", sub, inner),
        st.builds(lambda a, b: f"({a}) == ({b})", sub, sub),
        st.builds(lambda a, b: f"({a}) and ({b})", sub, sub),
    ]
    if effects:
        forms.append(st.builds(lambda a, b: f"amb ({a}) ({b})", sub, sub))
    return st.one_of(*forms)


def positive_type(depth: int = 2) -> st.SearchStrategy:
    base = st.sampled_from([C.UNIT, C.BOOL])
    if depth == 0:
        return base
    return st.one_of(base, st.lists(positive_type(depth - 1), min_size=2, max_size=3)
                     .map(lambda ts: C.TTensor(tuple(ts))))


def value_text(t: C.Type, v) -> str:
    if t == C.BOOL:
        return "true" if v.index == 1 else "false"
    if t == C.UNIT:
        return "()"
    return "(" + ", ".join(value_text(s, x) for s, x in zip(t.items, v)) + ")"


@st.composite
def positive_value(draw):
    t = draw(positive_type())
    i = draw(st.integers(0, size(t) - 1))
    return t, i, value_text(t, value_of(t, i))

