"""Command-line driver: `perplc <command> <file> [options]`."""
from __future__ import annotations

import argparse
import json
import sys

from .pipeline import DIAGNOSTIC, MODES, OK, PipelineConfig, check_entry, corpus_manifest, resolve_path, run
from .semantics import DEFAULT_MAX_VARS


_HELP = {
    "check": "parse and type-check, then print the inferred types",
    "transform": "linearize and eliminate recursive types",
    "mspe": "compile to a system of polynomial equations",
    "solve": "compute the distribution of the program's result",
    "oracle": "lower bounds by exhaustive reduction",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="perplc", description="Compile PERPL programs and compute their exact distributions.")
    sub = ap.add_subparsers(dest="command", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, help=_HELP[mode])
        p.add_argument("file", help="source file, or the name of a bundled corpus program")
        p.add_argument("--linear", action="store_true", help="require every variable to be used exactly once")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if mode in ("mspe", "solve"):
            p.add_argument("--max-vars", type=int, default=DEFAULT_MAX_VARS,
                           help="give up (exit 3) beyond this many equation variables")
        if mode in ("transform", "solve"):
            p.add_argument("--trace-dr", action="store_true", help="show the DR-graph and the chosen sequence")
        if mode == "solve":
            p.add_argument("--exact", action="store_true", help="rational arithmetic")
            p.add_argument("--tol", type=float, default=1e-12, help="Newton stopping tolerance")
            p.add_argument("--max-iters", type=int, default=200,
                           help="Newton iterations per component before giving up (exit 3)")
            p.add_argument("--emit-transformed", action="store_true", help="print the μ-free program")
            p.add_argument("--emit-mspe", action="store_true", help="print the equation system")
        if mode == "oracle":
            p.add_argument("--steps", type=int, default=1000, help="rounds of breadth-first reduction")
            p.add_argument("--max-choices", type=int, default=None,
                           help="cut branches that make more amb choices than this")
            p.add_argument("--exact", action="store_true", help="accepted for symmetry; the oracle is always exact")
    t = sub.add_parser("test-corpus", help="check every bundled program against its manifest entry")
    t.add_argument("--json", action="store_true", help="machine-readable output")
    return ap


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig(mode=args.command)
    for name in ("linear", "exact", "tol", "max_iters", "steps", "max_choices", "json", "max_vars",
                 "emit_transformed", "emit_mspe", "trace_dr"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if cfg.mode == "oracle":
        cfg.exact = True
    return cfg


def _test_corpus(as_json: bool) -> int:
    results = []
    for entry in corpus_manifest():
        problems = check_entry(entry)
        results.append({"name": entry["name"], "pass": not problems, "problems": problems,
                        "provenance": entry["provenance"]})
        if not as_json:
            status = "PASS" if not problems else "FAIL"
            print(f"{status} {entry['name']}" + "".join(f"\n  {p}" for p in problems), flush=True)
    if as_json:
        print(json.dumps({"results": results}, indent=2))
    return OK if all(r["pass"] for r in results) else DIAGNOSTIC


def main(argv=None) -> int:
    sys.setrecursionlimit(100_000)
    args = build_parser().parse_args(argv)
    if args.command == "test-corpus":
        return _test_corpus(args.json)
    try:
        path = resolve_path(args.file)
    except FileNotFoundError:
        print(f"{args.file}: error: no such file", file=sys.stderr)
        return DIAGNOSTIC
    out = run(_config(args), path.read_text(), args.file)
    if out.stdout:
        print(out.stdout)
    if out.stderr:
        print(out.stderr, file=sys.stderr)
    return out.status


if __name__ == "__main__":
    sys.exit(main())
