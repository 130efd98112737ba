"""The compiler driver: run a source program through as many stages as asked.

Stages are parse, desugar, tag inference, type checking, linearization,
elimination of recursive types, compilation to an equation system and
solving.  The oracle branches off after type checking.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from . import core as C
from .errors import BudgetExceeded, NoDRSequence, PerplError
from .oracle import Exploration, explore
from .semantics import DEFAULT_MAX_VARS, compile_mspe
from .solver import MSPE, Solution, solve
from .solver import extreal as X
from .syntax import desugar, parse_program
from .transform import Elimination, eliminate_recursive_types, linearize
from .typecheck import AFFINE, LINEAR, TypedProgram, elaborate, typecheck

MODES = ("check", "transform", "mspe", "solve", "oracle")

OK, DIAGNOSTIC, NO_DR_SEQUENCE, BUDGET = 0, 1, 2, 3


@dataclass
class PipelineConfig:
    mode: str = "solve"
    linear: bool = False          # require strict linearity instead of affine use
    exact: bool = False           # rational arithmetic in the solver
    tol: float = 1e-12
    max_iters: int = 200
    steps: int = 1000             # oracle rounds
    max_choices: int | None = None
    json: bool = False
    max_vars: int = DEFAULT_MAX_VARS
    emit_transformed: bool = False
    emit_mspe: bool = False
    trace_dr: bool = False

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class Artifacts:
    typed: TypedProgram | None = None
    linear: TypedProgram | None = None
    elimination: Elimination | None = None
    mspe: MSPE | None = None
    solution: Solution | None = None
    exploration: Exploration | None = None


@dataclass
class Outcome:
    status: int
    stdout: str = ""
    stderr: str = ""
    artifacts: Artifacts = field(default_factory=Artifacts)


def front(source: str) -> C.CoreProgram:
    """Parse, desugar and infer tags."""
    return elaborate(desugar(parse_program(source)))


def analyse(source: str, cfg: PipelineConfig, upto: str) -> Artifacts:
    """Run the stages needed for `upto`; diagnostics propagate as exceptions."""
    a = Artifacts()
    a.typed = typecheck(front(source), LINEAR if cfg.linear else AFFINE)
    if upto == "check":
        return a
    if upto == "oracle":
        t = a.typed
        a.exploration = explore(t.program, cfg.steps, max_choices=cfg.max_choices, exact=cfg.exact,
                                result_type=t.types[t.program.main])
        return a
    # a strictly linear program needs no linearization
    a.linear = a.typed if cfg.linear else linearize(a.typed)
    a.elimination = eliminate_recursive_types(a.linear)
    if upto == "transform":
        return a
    a.mspe = compile_mspe(a.elimination.program, cfg.max_vars)
    if upto == "mspe":
        return a
    a.solution = solve(a.mspe, exact=cfg.exact, tol=cfg.tol, max_iters=cfg.max_iters)
    return a


def _types_report(tp: TypedProgram) -> dict:
    out = {g: C.show_type(t) for g, t in tp.global_types.items()}
    out["main"] = C.show_type(tp.types[tp.program.main])
    return out


def _support(dist: dict, exact: bool) -> list:
    out = []
    for v, w in dist.items():
        item = {"value": v, "weight": X.render(w)}
        if exact:
            item["exact"] = X.render_exact(w)
        out.append(item)
    return out


def _dist_text(dist: dict, exact: bool) -> list[str]:
    fmt = X.render_exact if exact else (lambda w: repr(float(w)) if w != X.INF else "inf")
    return [f"{v}\t{fmt(w)}" for v, w in dist.items()]


def _sequence_json(el: Elimination) -> list:
    return [{"type": str(t), "op": op} for t, op in el.sequence]


def render(cfg: PipelineConfig, a: Artifacts) -> str:
    """The artifact of the requested stage, as text or JSON."""
    mode = cfg.mode
    if mode == "check":
        types = _types_report(a.typed)
        if cfg.json:
            return json.dumps({"ok": True, "usage": a.typed.mode, "types": types}, indent=2)
        return "\n".join([f"ok ({a.typed.mode})"] + [f"{k} : {v}" for k, v in types.items()])
    if mode == "oracle":
        e = a.exploration
        if cfg.json:
            return json.dumps(e.to_json(), indent=2)
        fmt = X.render_exact if cfg.exact else (lambda w: repr(float(w)))
        lines = [f"{v}\t{fmt(w)}" for v, w in e.distribution.items()]
        lines.append(f"residual\t{fmt(e.residual)}")
        lines.append(f"steps\t{e.steps}")
        return "\n".join(lines)

    el = a.elimination
    if mode == "transform":
        if cfg.json:
            return json.dumps({"sequence": _sequence_json(el),
                               "graphs": [g.to_json() for g in el.graphs],
                               "program": C.show_program(el.program.program)}, indent=2)
        parts = [el.trace()] if cfg.trace_dr else []
        parts.append(C.show_program(el.program.program).rstrip("\n"))
        return "\n".join(parts)
    if mode == "mspe":
        if cfg.json:
            out = a.mspe.to_json()
            out["warnings"] = list(a.mspe.warnings)
            return json.dumps(out, indent=2)
        return a.mspe.to_text()

    s = a.solution
    if cfg.json:
        out = {"support": _support(s.distribution, cfg.exact), "report": s.report.to_json(),
               "variables": a.mspe.nvars, "warnings": list(a.mspe.warnings)}
        if cfg.trace_dr:
            out["sequence"] = _sequence_json(el)
        if cfg.emit_transformed:
            out["transformed"] = C.show_program(el.program.program)
        if cfg.emit_mspe:
            out["mspe"] = a.mspe.to_json()
        return json.dumps(out, indent=2)
    parts = []
    if cfg.trace_dr:
        parts.append(el.trace())
    if cfg.emit_transformed:
        parts.append(C.show_program(el.program.program).rstrip("\n"))
    if cfg.emit_mspe:
        parts.append(a.mspe.to_text())
    parts.extend(_dist_text(s.distribution, cfg.exact))
    return "\n".join(parts)


def run(cfg: PipelineConfig, source: str, filename: str = "<input>") -> Outcome:
    if cfg.mode not in MODES:
        raise ValueError(f"unknown mode {cfg.mode!r}")
    try:
        a = analyse(source, cfg, cfg.mode)
    except PerplError as err:
        msg = json.dumps({"diagnostics": [err.to_json(filename)]}, indent=2) if cfg.json else err.render(filename)
        if isinstance(err, NoDRSequence):
            status = NO_DR_SEQUENCE
        elif isinstance(err, BudgetExceeded):
            status = BUDGET
        else:
            status = DIAGNOSTIC
        return Outcome(status, stderr=msg)
    warnings = []
    if a.mspe is not None:
        warnings += [f"{filename}: warning: {w}" for w in a.mspe.warnings]
    status = OK
    if a.solution is not None and not a.solution.report.converged:
        status = BUDGET
        warnings.append(f"{filename}: error: solver did not converge within {cfg.max_iters} iterations")
    return Outcome(status, render(cfg, a), "\n".join(warnings), a)


# ---------------------------------------------------------------------------
# the bundled corpus


def corpus_dir() -> Path:
    return Path(str(resources.files("perpl") / "corpus"))


def resolve_path(path: str) -> Path:
    """`path` itself if it exists, else the corpus program with the same file name."""
    p = Path(path)
    if p.exists():
        return p
    q = corpus_dir() / p.name
    if q.exists():
        return q
    raise FileNotFoundError(path)


def corpus_manifest() -> list[dict]:
    """The corpus entries with their expectations and where the numbers come from."""
    entries = json.loads((corpus_dir() / "manifest.json").read_text())
    for e in entries:
        e["path"] = str(corpus_dir() / e["file"])
    return entries


_ABC_INPUT = "(Cons A (Cons A (Cons A Nil)))"


def _with_input(template: str, n: int) -> str:
    src = (corpus_dir() / template).read_text()
    if _ABC_INPUT not in src:
        raise ValueError(f"{template} has no input string to replace")
    word = "Nil"
    for _ in range(n):
        word = f"(Cons A {word})"
    return src.replace(_ABC_INPUT, word)


def cky_source(n: int) -> str:
    """The string-comparison CFG program with input a^n."""
    return _with_input("cfg_parse.ppl", n)


def epda_source(n: int) -> str:
    """The embedded pushdown automaton with input a^n."""
    return _with_input("epda.ppl", n)


def check_entry(entry: dict, budgets=(100, 200, 400)) -> list[str]:
    """Problems with one corpus entry; empty when it passes."""
    src = Path(entry["path"]).read_text()
    cfg = PipelineConfig(exact=entry.get("exact", False))
    problems = []
    try:
        a = analyse(src, cfg, "solve")
    except PerplError as err:
        return [err.render(entry["file"])]
    got = a.solution.distribution
    if "sequence" in entry:
        seq = [[str(t), op] for t, op in a.elimination.sequence]
        if seq != entry["sequence"]:
            problems.append(f"sequence {seq} != {entry['sequence']}")
    tol = entry.get("tol", 1e-9)
    for v, w in entry.get("distribution", {}).items():
        have = float(got.get(v, 0))
        if not abs(have - float(w)) <= tol:
            problems.append(f"weight({v}) = {have!r}, expected {w} within {tol}")
    if entry.get("oracle"):
        problems += _oracle_bounds(a, got, entry.get("oracle_budgets", budgets))
    return problems


def _oracle_bounds(a: Artifacts, got: dict, budgets) -> list[str]:
    """Oracle lower bounds at growing budgets must grow and stay below the solution.

    The residual bounds what is still missing only for programs whose
    expressions never denote more than their weight, as holds when every
    amb splits between factors summing to at most one.
    """
    t = a.typed
    prev: dict = {}
    problems = []
    for b in budgets:
        e = explore(t.program, b, exact=True, result_type=t.types[t.program.main])
        for v, w in e.distribution.items():
            if w < prev.get(v, 0):
                problems.append(f"oracle bound for {v} decreased at budget {b}")
            if float(w) > float(got.get(v, 0)) + 1e-12:
                problems.append(f"oracle bound {float(w)} for {v} exceeds solution {float(got.get(v, 0))}")
        for v in got:
            if float(got[v]) - float(e.distribution.get(v, 0)) > float(e.residual) + 1e-9:
                problems.append(f"solution for {v} exceeds oracle bound plus residual at budget {b}")
        prev = e.distribution
    return problems
