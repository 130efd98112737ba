"""Elimination of recursive types by defunctionalization and refunctionalization.

Defunctionalizing a recursive type replaces each of its values by the index
of the fold that built it together with that fold's free variables; a new
global `$u_<tag>` finishes the postponed work when the value is unfolded.
Refunctionalizing replaces each value by an additive tuple of functions,
one per unfold site; a new global `$f_<tag>` builds that tuple at folds.

Both are possible only when the replacement type mentions no recursive
type.  The order is chosen greedily from the DR-graph.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .. import core as C
from ..errors import NoDRSequence, TransformError
from ..typecheck import LINEAR, TypedProgram, typecheck

D, R = "D", "R"


@dataclass
class Site:
    node: C.Expr          # the Fold or Unfold
    scope: C.Expr         # fold body, or unfold scope with its binder renamed
    free: tuple           # ((name, type), ...) nonglobal free variables in first-occurrence order
    scope_type: C.Type = None


def _first_occurrence_env(tp: TypedProgram, e: C.Expr, exclude=()) -> tuple:
    env = dict(tp.env[e])
    return tuple((x, env[x]) for x in C.free_vars(e) if x in env and x not in exclude)


def fold_sites(tp: TypedProgram, tag) -> list[Site]:
    out = []
    for n in tp.nodes():
        if isinstance(n, C.Fold) and n.ty.tag == tag:
            out.append(Site(n, n.expr, _first_occurrence_env(tp, n.expr)))
    return out


def unfold_sites(tp: TypedProgram, tag) -> list[Site]:
    out = []
    for n in tp.nodes():
        if isinstance(n, C.Unfold) and n.ty.tag == tag:
            free = _first_occurrence_env(tp, n.body, exclude=(n.var,))
            out.append(Site(n, n.body, free, tp.types[n.body]))
    return out


def d_phi(sites: list[Site]) -> C.Type:
    return C.TSum(tuple(C.TTensor(tuple(t for _, t in s.free)) for s in sites))


def r_phi(sites: list[Site]) -> C.Type:
    return C.TWith(tuple(C.TArrow(C.TTensor(tuple(t for _, t in s.free)), s.scope_type) for s in sites))


# ---------------------------------------------------------------------------
# DR-graph


@dataclass
class DRGraph:
    nodes: list                                   # tags in order of first appearance
    mus: dict                                     # tag -> a μ-type with that tag
    edges: list = field(default_factory=list)     # (source, label, target)

    def out(self, tag, label) -> list:
        return [t for s, l, t in self.edges if s == tag and l == label]

    def to_dot(self) -> str:
        lines = ["digraph DR {"]
        for n in self.nodes:
            lines.append(f'  "{n}";')
        for s, l, t in self.edges:
            lines.append(f'  "{s}" -> "{t}" [label="{l}"];')
        lines.append("}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {"nodes": [str(n) for n in self.nodes],
                "edges": [{"from": str(s), "label": l, "to": str(t)} for s, l, t in self.edges]}


def program_mus(tp: TypedProgram) -> dict:
    acc: dict = {}
    for t in tp.all_types():
        C.mus_in(t, acc)
    return acc


def build_dr_graph(tp: TypedProgram) -> DRGraph:
    mus = program_mus(tp)
    g = DRGraph(list(mus), mus)
    for tag in mus:
        for label, phi in ((D, d_phi(fold_sites(tp, tag))), (R, r_phi(unfold_sites(tp, tag)))):
            for target in C.mus_in(phi):
                g.edges.append((tag, label, target))
    return g


# ---------------------------------------------------------------------------
# the two transformations


def _check_phi(tag, sites, phi_of, what):
    for i, s in enumerate(sites):
        bad = C.mus_in(phi_of([s]))
        if bad:
            names = ", ".join(str(t) for t in bad)
            vars_ = ", ".join(f"{x} : {C.show_type(t)}" for x, t in s.free if C.mus_in(t))
            detail = f"free {vars_}" if vars_ else "its result type"
            raise TransformError(
                f"{tag} cannot be {what}: {'fold' if what == 'defunctionalized' else 'unfold'} "
                f"site {i + 1} has {detail} mentioning recursive type {names}", s.node.pos)


class _Rewriter:
    """Shared machinery: rebuild every node, rewriting types and the sites."""

    def __init__(self, tp: TypedProgram, tag, phi: C.Type):
        self.tp = tp
        self.tag = tag
        self.phi = phi

    def ty(self, t):
        return None if t is None else C.replace_mu(t, self.tag, self.phi)

    def site(self, n, ren):
        return None

    def go(self, e: C.Expr, ren=None) -> C.Expr:
        """Rebuild `e`; `ren` renames free variables (binders shadow it)."""
        ren = ren or {}
        r = self.site(e, ren)
        if r is not None:
            return r
        go, ty = self.go, self.ty

        def under(names):
            return {k: v for k, v in ren.items() if k not in names} if ren else ren

        if isinstance(e, C.Var):
            return C.Var(ren.get(e.name, e.name), pos=e.pos)
        if isinstance(e, C.Lam):
            return C.Lam(e.var, ty(e.ty), go(e.body, under({e.var})), pos=e.pos)
        if isinstance(e, C.App):
            return C.App(go(e.fn, ren), go(e.arg, ren), pos=e.pos)
        if isinstance(e, C.Amb):
            return C.Amb(go(e.left, ren), go(e.right, ren), pos=e.pos)
        if isinstance(e, C.Fail):
            return C.Fail(ty(e.ty), pos=e.pos)
        if isinstance(e, C.Factor):
            return C.Factor(e.weight, go(e.body, ren), pos=e.pos)
        if isinstance(e, C.Tuple):
            return C.Tuple(tuple(go(c, ren) for c in e.items), pos=e.pos)
        if isinstance(e, C.AddTuple):
            return C.AddTuple(tuple(go(c, ren) for c in e.items), pos=e.pos)
        if isinstance(e, C.LetTuple):
            return C.LetTuple(e.vars, go(e.bound, ren), go(e.body, under(set(e.vars))), pos=e.pos)
        if isinstance(e, C.Proj):
            return C.Proj(go(e.expr, ren), e.index, pos=e.pos)
        if isinstance(e, C.Inj):
            return C.Inj(e.index, ty(e.ty), go(e.expr, ren), pos=e.pos)
        if isinstance(e, C.Case):
            return C.Case(go(e.scrut, ren), tuple((x, go(a, under({x}))) for x, a in e.arms),
                          ty=ty(e.ty), pos=e.pos)
        if isinstance(e, C.Fold):
            return C.Fold(ty(e.ty), go(e.expr, ren), pos=e.pos)
        if isinstance(e, C.Unfold):
            return C.Unfold(ty(e.ty), e.var, go(e.bound, ren), go(e.body, under({e.var})), pos=e.pos)
        raise TypeError(f"unexpected expression {type(e).__name__}")

    def program(self, extra: C.Global) -> C.CoreProgram:
        p = self.tp.program
        gl = [C.Global(g.name, self.go(g.body), self.ty(g.ty), g.pos) for g in p.globals]
        gl.append(extra)
        return C.CoreProgram(gl, self.go(p.main))


def _tuple_of(free, ren) -> C.Tuple:
    return C.Tuple(tuple(C.Var(ren.get(x, x)) for x, _ in free))


def apply_name(tag) -> str:
    return f"$u_{tag}"


def build_name(tag) -> str:
    return f"$f_{tag}"


def canonical_name(tag) -> str:
    """The one binder shared by every unfold site of `tag` inside its build function."""
    return f"$r_{tag}"


class _Defunc(_Rewriter):
    def __init__(self, tp, tag, sites, phi, mu):
        super().__init__(tp, tag, phi)
        self.index = {id(s.node): i for i, s in enumerate(sites)}
        self.sites = sites
        self.mu = mu

    def site(self, n, ren):
        if isinstance(n, C.Fold) and n.ty.tag == self.tag:
            i = self.index[id(n)]
            if isinstance(n.expr, C.Fail):
                return C.Fail(self.phi, pos=n.pos)
            return C.Inj(i, self.phi, _tuple_of(self.sites[i].free, ren), pos=n.pos)
        if isinstance(n, C.Unfold) and n.ty.tag == self.tag:
            opened = self.ty(C.unroll(n.ty))
            call = C.App(C.Var(apply_name(self.tag)), self.go(n.bound, ren), pos=n.pos)
            inner = {k: v for k, v in ren.items() if k != n.var}
            return C.App(C.Lam(n.var, opened, self.go(n.body, inner), pos=n.pos), call, pos=n.pos)
        return None

    def apply_global(self) -> C.Global:
        opened = self.ty(C.unroll(self.mu))
        x = "$d"
        if not self.sites:
            body = C.Lam(x, self.phi, C.Fail(opened))
        else:
            arms = []
            for i, s in enumerate(self.sites):
                t = f"$t{i + 1}"
                arms.append((t, C.LetTuple(tuple(v for v, _ in s.free), C.Var(t), self.go(s.scope))))
            body = C.Lam(x, self.phi, C.Case(C.Var(x), tuple(arms), ty=self.phi))
        return C.Global(apply_name(self.tag), body, C.TArrow(self.phi, opened))


class _Refunc(_Rewriter):
    def __init__(self, tp, tag, sites, phi, mu):
        super().__init__(tp, tag, phi)
        self.index = {id(s.node): i for i, s in enumerate(sites)}
        self.sites = sites
        self.mu = mu

    def site(self, n, ren):
        if isinstance(n, C.Fold) and n.ty.tag == self.tag:
            return C.App(C.Var(build_name(self.tag)), self.go(n.expr, ren), pos=n.pos)
        if isinstance(n, C.Unfold) and n.ty.tag == self.tag:
            i = self.index[id(n)]
            if isinstance(n.body, C.Fail):
                return C.Fail(self.ty(self.sites[i].scope_type), pos=n.pos)
            return C.App(C.Proj(self.go(n.bound, ren), i, pos=n.pos), _tuple_of(self.sites[i].free, ren),
                         pos=n.pos)
        return None

    def build_global(self) -> C.Global:
        opened = self.ty(C.unroll(self.mu))
        r = canonical_name(self.tag)
        comps = []
        for i, s in enumerate(self.sites):
            t = f"$t{i + 1}"
            body = C.LetTuple(tuple(v for v, _ in s.free), C.Var(t), self.go(s.scope, {s.node.var: r}))
            comps.append(C.Lam(t, C.TTensor(tuple(ty for _, ty in s.free)), body))
        body = C.Lam(r, opened, C.AddTuple(tuple(comps)))
        return C.Global(build_name(self.tag), body, C.TArrow(opened, self.phi))


def _the_mu(tp: TypedProgram, tag) -> C.TMu:
    mus = program_mus(tp)
    if tag not in mus:
        raise TransformError(f"no recursive type {tag} in the program")
    return mus[tag]


def _finish(p: C.CoreProgram) -> TypedProgram:
    return typecheck(C.reachable_globals(p), LINEAR)


def defunctionalize(tp: TypedProgram, tag) -> TypedProgram:
    """Eliminate the recursive type `tag` by defunctionalization."""
    mu = _the_mu(tp, tag)
    sites = fold_sites(tp, tag)
    _check_phi(tag, sites, d_phi, "defunctionalized")
    phi = d_phi(sites)
    rw = _Defunc(tp, tag, sites, phi, mu)
    return _finish(rw.program(rw.apply_global()))


def refunctionalize(tp: TypedProgram, tag) -> TypedProgram:
    """Eliminate the recursive type `tag` by refunctionalization."""
    mu = _the_mu(tp, tag)
    sites = unfold_sites(tp, tag)
    _check_phi(tag, sites, r_phi, "refunctionalized")
    phi = r_phi(sites)
    rw = _Refunc(tp, tag, sites, phi, mu)
    return _finish(rw.program(rw.build_global()))


# ---------------------------------------------------------------------------
# greedy elimination


@dataclass
class Elimination:
    program: TypedProgram
    sequence: list          # [(tag, "D" | "R"), ...]
    graphs: list            # DR-graph before each step
    stages: list            # typed program before each step, then the result

    def trace(self) -> str:
        parts = [g.to_dot() for g in self.graphs[:1]]
        parts.append("sequence: " + ", ".join(f"{t}:{l}" for t, l in self.sequence))
        return "\n".join(parts)


def choose_step(g: DRGraph):
    """D before R, and within a label the first tag in program order."""
    for tag in g.nodes:
        if not g.out(tag, D):
            return tag, D
    for tag in g.nodes:
        if not g.out(tag, R):
            return tag, R
    return None


def eliminate_recursive_types(tp: TypedProgram) -> Elimination:
    seq, graphs, stages = [], [], [tp]
    while True:
        g = build_dr_graph(tp)
        if not g.nodes:
            return Elimination(tp, seq, graphs, stages)
        graphs.append(g)
        step = choose_step(g)
        if step is None:
            raise NoDRSequence("no successful sequence of transformations eliminates the recursive types "
                               + ", ".join(str(t) for t in g.nodes) + "\n" + g.to_dot(), g)
        tag, label = step
        tp = defunctionalize(tp, tag) if label == D else refunctionalize(tp, tag)
        seq.append((tag, label))
        stages.append(tp)
