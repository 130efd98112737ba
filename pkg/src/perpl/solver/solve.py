"""Least solution of an MSPE, one strongly connected component at a time.

Zero variables are found first (a Boolean least fixed point) so that every
remaining monomial is strictly positive.  Components are then visited
dependencies first: acyclic singletons are evaluated, components that are
linear in their own variables are solved with a matrix closure, and the
rest go to Newton's method.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import extreal as X
from .kernels import backend
from .newton import newton_solve
from .poly import PolySystem, evaluate, solve_linear
from .system import MSPE


@dataclass
class SCCReport:
    size: int
    cls: str
    iterations: int
    residual: object
    converged: bool = True
    inf_iteration: int | None = None

    def to_json(self) -> dict:
        out = {"size": self.size, "class": self.cls, "iterations": self.iterations,
               "residual": X.render(self.residual)}
        if not self.converged:
            out["converged"] = False
        if self.inf_iteration is not None:
            out["inf_iteration"] = self.inf_iteration
        return out


@dataclass
class SolverReport:
    sccs: list = field(default_factory=list)  # nontrivial components only
    constant_sccs: int = 0
    pruned_zero: int = 0
    exact: bool = False

    @property
    def converged(self) -> bool:
        return all(s.converged for s in self.sccs)

    @property
    def newton_iterations(self) -> int:
        return sum(s.iterations for s in self.sccs if s.cls == "nonlinear")

    def to_json(self) -> dict:
        counts = {"constant": self.constant_sccs, "linear": 0, "nonlinear": 0}
        for s in self.sccs:
            counts[s.cls] += 1
        return {
            "exact": self.exact,
            "converged": self.converged,
            "pruned_zero_vars": self.pruned_zero,
            "scc_counts": counts,
            "sccs": [s.to_json() for s in self.sccs],
        }


@dataclass
class Solution:
    distribution: dict
    report: SolverReport
    values: list

    def to_json(self) -> dict:
        return {"support": [{"value": v, "weight": X.render(w)} for v, w in self.distribution.items()]}


def _csr(nvars: int, keys: np.ndarray, vals: np.ndarray):
    order = np.argsort(keys, kind="stable")
    counts = np.bincount(keys, minlength=nvars)
    ptr = np.zeros(nvars + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr, vals[order].astype(np.int64)


def _prune(m: MSPE, coef_pos: np.ndarray) -> np.ndarray:
    deg = m.ptr[1:] - m.ptr[:-1]
    mono_of_fac = np.repeat(np.arange(m.nmonomials, dtype=np.int64), deg)
    occ_ptr, occ_mono = _csr(m.nvars, m.fac, mono_of_fac)
    return backend.prune_zeros(m.nvars, m.lhs, coef_pos.astype(np.uint8), m.ptr, m.fac,
                               occ_ptr, occ_mono).astype(bool)


def solve(m: MSPE, exact: bool = False, tol=1e-12, max_iters: int = 200) -> Solution:
    n = m.nvars
    report = SolverReport(exact=exact)
    table_pos = np.array([c > 0 for c in m.coef_table], dtype=bool)
    coef_pos = table_pos[m.coef_idx] if m.nmonomials else np.zeros(0, dtype=bool)
    nonzero = _prune(m, coef_pos) if n else np.zeros(0, dtype=bool)
    report.pruned_zero = int(n - nonzero.sum())

    # keep monomials that are strictly positive at the least solution
    deg = m.ptr[1:] - m.ptr[:-1]
    mono_of_fac = np.repeat(np.arange(m.nmonomials, dtype=np.int64), deg)
    bad_per_mono = np.bincount(mono_of_fac[~nonzero[m.fac]], minlength=m.nmonomials)
    keep = coef_pos & (bad_per_mono == 0)
    kept = np.nonzero(keep)[0]
    order_m = kept[np.argsort(m.lhs[kept], kind="stable")]
    lhs = m.lhs[order_m]
    kdeg = deg[order_m]
    kptr = np.zeros(len(order_m) + 1, dtype=np.int64)
    np.cumsum(kdeg, out=kptr[1:])
    if len(order_m):
        starts = m.ptr[order_m]
        idx = np.repeat(starts - kptr[:-1], kdeg) + np.arange(kptr[-1])
        kfac = m.fac[idx]
    else:
        kfac = np.zeros(0, dtype=np.int64)
    kcidx = m.coef_idx[order_m]
    var_mono_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(lhs, minlength=n), out=var_mono_ptr[1:])

    # dependency graph lhs -> factor and its condensation
    edge_src = np.repeat(lhs, kdeg)
    adj_ptr, adj = _csr(n, edge_src, kfac)
    comp, ncomp = backend.scc(n, adj_ptr, adj)
    comp = np.asarray(comp, dtype=np.int64)
    order = np.argsort(comp, kind="stable").astype(np.int64)
    comp_ptr = np.zeros(ncomp + 1, dtype=np.int64)
    np.cumsum(np.bincount(comp, minlength=ncomp), out=comp_ptr[1:])
    sizes = comp_ptr[1:] - comp_ptr[:-1]
    self_loop = np.zeros(n, dtype=bool)
    self_loop[edge_src[edge_src == kfac]] = True
    trivial = (sizes == 1) & ~self_loop[order[comp_ptr[:-1]]] if ncomp else np.zeros(0, dtype=bool)

    if exact:
        coefs = [X.convert(c, True) for c in m.coef_table]
        values = [X.zero(True)] * n
    else:
        coefs = [float(c) for c in m.coef_table]
        values = np.zeros(n)
    kcoef_f = np.array(coefs, dtype=np.float64)[kcidx] if not exact and len(coefs) else np.zeros(len(kcidx))
    kcidx_l = kcidx.tolist()
    kptr_l = kptr.tolist()
    kfac_l = kfac.tolist()
    vmp = var_mono_ptr.tolist()
    order_l = order.tolist()
    cptr = comp_ptr.tolist()
    trivial_u8 = trivial.astype(np.uint8)

    c = 0
    while c < ncomp:
        if trivial[c]:
            if exact:
                while c < ncomp and trivial[c]:
                    v = order_l[cptr[c]]
                    total = X.zero(True)
                    for mm in range(vmp[v], vmp[v + 1]):
                        p = coefs[kcidx_l[mm]]
                        for k in range(kptr_l[mm], kptr_l[mm + 1]):
                            p = X.mul(p, values[kfac_l[k]])
                        total = X.add(total, p)
                    values[v] = total
                    report.constant_sccs += 1
                    c += 1
            else:
                nxt = backend.eval_trivial(values, c, comp_ptr, order, trivial_u8, var_mono_ptr,
                                           kcoef_f, kptr, kfac)
                report.constant_sccs += nxt - c
                c = nxt
            continue
        members = order_l[cptr[c]:cptr[c + 1]]
        entry = _solve_component(members, values, coefs, kcidx_l, kptr_l, kfac_l, vmp,
                                 exact, tol, max_iters)
        report.sccs.append(entry)
        c += 1

    vals = values if exact else values.tolist()
    dist = {}
    for v, i in m.roots:
        w = vals[i]
        if w != 0:
            dist[v] = X.add(dist.get(v, X.zero(exact)), w)
    return Solution(dist, report, vals)


def _solve_component(members, values, coefs, kcidx, kptr, kfac, vmp, exact, tol, max_iters):
    local = {v: i for i, v in enumerate(members)}
    # equations over local variables after substituting solved predecessors
    eqs: list[list] = []
    for v in members:
        eq = []
        for mm in range(vmp[v], vmp[v + 1]):
            coef = coefs[kcidx[mm]]
            fs = []
            for k in range(kptr[mm], kptr[mm + 1]):
                f = kfac[k]
                if f in local:
                    fs.append(local[f])
                else:
                    coef = X.mul(coef, values[f])
            if coef != 0:
                eq.append((coef, tuple(fs)))
        eqs.append(eq)

    # inline z_i = c·z_j (j in the same component)
    alias: dict[int, tuple] = {}

    def resolve(i):
        c = X.one(exact)
        seen = set()
        while i in alias:
            if i in seen:
                return None
            seen.add(i)
            a, i = alias[i]
            c = X.mul(c, a)
        return c, i

    for i, eq in enumerate(eqs):
        if len(eq) == 1 and len(eq[0][1]) == 1:
            coef, (j,) = eq[0]
            r = resolve(j)
            if r is not None and r[1] != i:
                alias[i] = (coef, j)
    rest = [i for i in range(len(eqs)) if i not in alias]
    pos = {i: k for k, i in enumerate(rest)}
    sysm = PolySystem(len(rest))
    for i in rest:
        for coef, fs in eqs[i]:
            nf = []
            for f in fs:
                a, r = resolve(f)
                coef = X.mul(coef, a)
                nf.append(pos[r])
            sysm.add(pos[i], coef, nf)

    if sysm.degree() <= 1:
        sol = solve_linear(sysm, exact)
        residual = _residual(sysm, sol)
        entry = SCCReport(len(members), "linear", 0, residual,
                          inf_iteration=None)
    else:
        res = newton_solve(sysm, max_iters=max_iters, tol=tol, exact=exact, record=False)
        sol = res.values
        entry = SCCReport(len(members), "nonlinear", res.iterations, res.residual, res.converged,
                          res.inf_iteration)
    for i, v in enumerate(members):
        if i in alias:
            a, r = resolve(i)
            values[v] = X.mul(a, sol[pos[r]])
        else:
            values[v] = sol[pos[i]]
    return entry


def _residual(sysm: PolySystem, sol) -> object:
    pz = evaluate(sysm, list(sol))
    return max((X.sub(a, b) for a, b in zip(pz, sol)), default=0)
