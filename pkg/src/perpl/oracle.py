"""Exhaustive small-step interpreter used as ground truth.

Programs are run call-by-value, always reducing the leftmost redex outside
any abstraction or additive tuple.  A distribution of expressions is
advanced breadth-first: every unfinished expression takes one step per
round.  Identical expressions reached with the same number of amb choices
are merged.  Weights of expressions that reach a value accumulate into a
lower bound on the program's distribution; whatever is still running when
the budget is exhausted is reported as residual mass.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from fractions import Fraction

from . import core as C
from .errors import PerplError


class StuckError(PerplError):
    stage = "oracle"


def is_value(e: C.Expr) -> bool:
    if isinstance(e, (C.Lam, C.AddTuple)):
        return True
    if isinstance(e, C.Tuple):
        return all(is_value(c) for c in e.items)
    if isinstance(e, (C.Inj, C.Fold)):
        return is_value(e.expr)
    return False


class Machine:
    def __init__(self, program: C.CoreProgram):
        self.globals = {g.name: g.body for g in program.globals}

    def step(self, e: C.Expr):
        """None if e is a value; otherwise [(weight, successor, is_choice)]."""
        if isinstance(e, C.Var):
            if e.name in self.globals:
                return [(1, self.globals[e.name], False)]
            raise StuckError(f"free variable '{e.name}' during evaluation", e.pos)
        if isinstance(e, (C.Lam, C.AddTuple)):
            return None
        if isinstance(e, C.Amb):
            return [(1, e.left, True), (1, e.right, True)]
        if isinstance(e, C.Fail):
            return []
        if isinstance(e, C.Factor):
            return [(e.weight, e.body, False)]
        if isinstance(e, C.App):
            r = self.step(e.fn)
            if r is not None:
                return [(w, C.App(x, e.arg), c) for w, x, c in r]
            r = self.step(e.arg)
            if r is not None:
                return [(w, C.App(e.fn, x), c) for w, x, c in r]
            if not isinstance(e.fn, C.Lam):
                raise StuckError("applying a value that is not an abstraction", e.pos)
            return [(1, _subst(e.fn.body, {e.fn.var: e.arg}), False)]
        if isinstance(e, C.Tuple):
            for i, c in enumerate(e.items):
                r = self.step(c)
                if r is not None:
                    return [(w, C.Tuple(e.items[:i] + (x,) + e.items[i + 1:]), ch) for w, x, ch in r]
            return None
        if isinstance(e, (C.Inj, C.Fold)):
            r = self.step(e.expr)
            if r is None:
                return None
            if isinstance(e, C.Inj):
                return [(w, C.Inj(e.index, e.ty, x), c) for w, x, c in r]
            return [(w, C.Fold(e.ty, x), c) for w, x, c in r]
        if isinstance(e, C.Proj):
            r = self.step(e.expr)
            if r is not None:
                return [(w, C.Proj(x, e.index), c) for w, x, c in r]
            if not isinstance(e.expr, C.AddTuple):
                raise StuckError("projection from a value that is not an additive tuple", e.pos)
            return [(1, e.expr.items[e.index], False)]
        if isinstance(e, C.LetTuple):
            r = self.step(e.bound)
            if r is not None:
                return [(w, C.LetTuple(e.vars, x, e.body), c) for w, x, c in r]
            if not isinstance(e.bound, C.Tuple) or len(e.bound.items) != len(e.vars):
                raise StuckError("let-tuple on a value of the wrong shape", e.pos)
            return [(1, _subst(e.body, dict(zip(e.vars, e.bound.items))), False)]
        if isinstance(e, C.Case):
            r = self.step(e.scrut)
            if r is not None:
                return [(w, C.Case(x, e.arms, ty=e.ty), c) for w, x, c in r]
            if not isinstance(e.scrut, C.Inj):
                raise StuckError("case on a value that is not an injection", e.pos)
            x, arm = e.arms[e.scrut.index]
            return [(1, _subst(arm, {x: e.scrut.expr}), False)]
        if isinstance(e, C.Unfold):
            r = self.step(e.bound)
            if r is not None:
                return [(w, C.Unfold(e.ty, e.var, x, e.body), c) for w, x, c in r]
            if not isinstance(e.bound, C.Fold):
                raise StuckError("unfold of a value that is not folded", e.pos)
            return [(1, _subst(e.body, {e.var: e.bound.expr}), False)]
        raise StuckError(f"cannot evaluate {type(e).__name__}", e.pos)


def reduce_step(program: C.CoreProgram, dist: list) -> list:
    """One reduction of the first non-value element of [(weight, expr), ...]."""
    m = Machine(program)
    out = list(dist)
    for k, (w, e) in enumerate(out):
        r = m.step(e)
        if r is None:
            continue
        return out[:k] + [(w * wi, x) for wi, x, _ in r] + out[k + 1:]
    return out


def render_value(v: C.Expr, t: C.Type | None) -> str:
    """Text of a value, matching the rendering of denotation values."""
    if t is not None and t == C.BOOL and isinstance(v, C.Inj):
        return "true" if v.index == 0 else "false"
    if isinstance(v, C.Tuple):
        ts = t.items if isinstance(t, C.TTensor) else [None] * len(v.items)
        parts = [render_value(c, s) for c, s in zip(v.items, ts)]
        if len(parts) == 1:
            return f"({parts[0]},)"
        return "(" + ", ".join(parts) + ")"
    if isinstance(v, C.Inj):
        s = t.items[v.index] if isinstance(t, C.TSum) else None
        return f"in{v.index + 1}({render_value(v.expr, s)})"
    if isinstance(v, C.Fold):
        s = C.unroll(t) if isinstance(t, C.TMu) else None
        return f"fold({render_value(v.expr, s)})"
    return C.show_expr(v)


@dataclass
class Exploration:
    distribution: dict                  # rendered value -> weight
    residual: object                    # weight still unfinished (including cut branches)
    steps: int                          # rounds taken
    cut: object = 0                     # weight of branches stopped by the choice bound
    pending: int = 0                    # unfinished expressions when the budget ran out
    history: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "support": [{"value": v, "weight": _num(w)} for v, w in self.distribution.items()],
            "residual": _num(self.residual),
            "steps": self.steps,
            "pending": self.pending,
        }


def _num(w):
    return str(w) if isinstance(w, Fraction) and w.denominator != 1 else (int(w) if w == int(w) else float(w))


class _Interner:
    """Numbers expressions up to structure; a node's number is cached on the node.

    Substitution below keeps untouched subtrees shared, so each round only
    numbers the few nodes that a step created.
    """

    def __init__(self):
        self.table: dict = {}

    def key(self, e: C.Expr) -> int:
        cached = e.__dict__.get("_okey")
        if cached is not None and cached[0] is self:
            return cached[1]
        parts = [type(e).__name__]
        for f in fields(e):
            if f.name == "pos":
                continue
            v = getattr(e, f.name)
            if isinstance(v, C.Expr):
                v = self.key(v)
            elif f.name in ("items",):
                v = tuple(self.key(c) for c in v)
            elif f.name == "arms":
                v = tuple((x, self.key(a)) for x, a in v)
            parts.append(v)
        k = self.table.setdefault(tuple(parts), len(self.table))
        e.__dict__["_okey"] = (self, k)
        return k


def _fv(e: C.Expr) -> frozenset:
    cached = e.__dict__.get("_ofv")
    if cached is not None:
        return cached
    if isinstance(e, C.Var):
        out = frozenset((e.name,))
    elif isinstance(e, C.Lam):
        out = _fv(e.body) - {e.var}
    elif isinstance(e, C.LetTuple):
        out = _fv(e.bound) | (_fv(e.body) - set(e.vars))
    elif isinstance(e, C.Case):
        out = _fv(e.scrut).union(*(_fv(a) - {x} for x, a in e.arms))
    elif isinstance(e, C.Unfold):
        out = _fv(e.bound) | (_fv(e.body) - {e.var})
    else:
        out = frozenset().union(*(_fv(c) for c in C.children(e)))
    e.__dict__["_ofv"] = out
    return out


def _subst(e: C.Expr, env: dict) -> C.Expr:
    """Substitute closed values, sharing every subtree the substitution misses."""
    names = _fv(e) & env.keys()
    if not names:
        return e
    if isinstance(e, C.Var):
        return env[e.name]
    sub = {x: env[x] for x in names}

    def under(bound, body):
        return _subst(body, {x: v for x, v in sub.items() if x not in bound})

    if isinstance(e, C.Lam):
        return C.Lam(e.var, e.ty, under({e.var}, e.body))
    if isinstance(e, C.LetTuple):
        return C.LetTuple(e.vars, _subst(e.bound, sub), under(set(e.vars), e.body))
    if isinstance(e, C.Case):
        return C.Case(_subst(e.scrut, sub), tuple((x, under({x}, a)) for x, a in e.arms), ty=e.ty)
    if isinstance(e, C.Unfold):
        return C.Unfold(e.ty, e.var, _subst(e.bound, sub), under({e.var}, e.body))
    if isinstance(e, (C.Tuple, C.AddTuple)):
        return type(e)(tuple(_subst(c, sub) for c in e.items))
    if isinstance(e, C.App):
        return C.App(_subst(e.fn, sub), _subst(e.arg, sub))
    if isinstance(e, C.Amb):
        return C.Amb(_subst(e.left, sub), _subst(e.right, sub))
    if isinstance(e, C.Factor):
        return C.Factor(e.weight, _subst(e.body, sub))
    if isinstance(e, C.Proj):
        return C.Proj(_subst(e.expr, sub), e.index)
    if isinstance(e, C.Inj):
        return C.Inj(e.index, e.ty, _subst(e.expr, sub))
    if isinstance(e, C.Fold):
        return C.Fold(e.ty, _subst(e.expr, sub))
    raise StuckError(f"cannot substitute into {type(e).__name__}", e.pos)


def explore(program: C.CoreProgram, max_steps: int, max_choices: int | None = None, exact: bool = True,
            result_type: C.Type | None = None) -> Exploration:
    """Breadth-first exhaustive reduction of `program` for at most `max_steps` rounds.

    With `max_choices`, branches that would make more amb choices than that
    are cut; the values reached then are exactly those of runs with at most
    that many choices.
    """
    m = Machine(program)
    keys = _Interner()
    one = Fraction(1) if exact else 1.0
    frontier = {(keys.key(program.main), 0): [one, program.main, 0]}
    dist: dict = {}
    cut = 0 * one
    rounds = 0
    while frontier and rounds < max_steps:
        rounds += 1
        nxt: dict = {}
        for w, e, k in frontier.values():
            r = m.step(e)
            if r is None:
                s = render_value(e, result_type)
                dist[s] = dist.get(s, 0 * one) + w
                continue
            for wi, x, choice in r:
                kk = k + choice
                ww = w * (Fraction(wi) if exact else float(wi))
                if max_choices is not None and kk > max_choices:
                    cut += ww
                    continue
                if ww == 0:
                    continue
                key = (keys.key(x), kk)
                slot = nxt.get(key)
                if slot is None:
                    nxt[key] = [ww, x, kk]
                else:
                    slot[0] += ww
        frontier = nxt
    # values sitting in the frontier after the last round still count
    pending = 0
    residual = cut
    for w, e, k in frontier.values():
        if is_value(e):
            s = render_value(e, result_type)
            dist[s] = dist.get(s, 0 * one) + w
        else:
            pending += 1
            residual += w
    return Exploration(dist, residual, rounds, cut, pending)

