"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on the same inputs under both backends; the script checks
that the outputs agree and prints the best wall time of each.
"""
from __future__ import annotations

import argparse
import importlib
import sys
import time

import numpy as np

from perpl.pipeline import PipelineConfig, analyse, epda_source
from perpl.semantics import compile_mspe
from perpl.solver import kernels, solve

# modules that bind the backend at import time
USERS = [importlib.import_module(f"perpl.solver.{m}") for m in ("solve", "newton", "poly")]


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def with_backend(mod, fn):
    saved = [u.backend for u in USERS]
    for u in USERS:
        u.backend = mod
    try:
        return fn()
    finally:
        for u, b in zip(USERS, saved):
            u.backend = b


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n", type=int, default=3, help="EPDA input length")
    args = ap.parse_args(argv)
    if kernels.COMPILED is None:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
        return 1
    sys.setrecursionlimit(100_000)
    rng = np.random.default_rng(0)

    a = analyse(epda_source(args.n), PipelineConfig(), "transform")
    m = compile_mspe(a.elimination.program)
    mat = rng.uniform(0, 0.9 / 120, size=(120, 120))
    vec = rng.uniform(0, 1, size=120)

    cases = [
        (f"solve EPDA n={args.n} ({m.nvars} vars)",
         lambda k: with_backend(k, lambda: solve(m).distribution)),
        ("matrix_star 120x120", lambda k: np.asarray(k.matrix_star(mat.copy()))),
        ("matvec 120x120", lambda k: np.asarray(k.matvec(mat, vec))),
    ]
    print(f"{'kernel':40s} {'compiled':>10s} {'python':>10s} {'speedup':>8s}")
    for name, run in cases:
        tc, oc = best_of(lambda: run(kernels.COMPILED), args.repeat)
        tp, op = best_of(lambda: run(kernels.FALLBACK), args.repeat)
        if isinstance(oc, dict):
            agree = oc.keys() == op.keys() and all(abs(oc[k] - op[k]) <= 1e-12 for k in oc)
        else:
            agree = np.allclose(oc, op, rtol=1e-12, atol=0)
        flag = "" if agree else "  MISMATCH"
        print(f"{name:40s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}x{flag}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
