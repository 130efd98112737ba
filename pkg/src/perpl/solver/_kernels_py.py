"""Pure-Python/numpy versions of the compiled solver kernels.

Same signatures and results as `_kernels.pyx`; selected when the extension
is not built or when PERPL_PURE_PYTHON is set.
"""
from __future__ import annotations

import numpy as np

INF = np.inf


def _smul(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def prune_zeros(nvars, lhs, positive, ptr, fac, occ_ptr, occ_mono):
    nmono = len(lhs)
    count = (ptr[1:] - ptr[:-1]).tolist()
    nonzero = [False] * nvars
    lhs_l = lhs.tolist()
    pos_l = positive.tolist()
    occ_ptr_l = occ_ptr.tolist()
    occ_mono_l = occ_mono.tolist()
    queue = []
    for m in range(nmono):
        if count[m] == 0 and pos_l[m] and not nonzero[lhs_l[m]]:
            nonzero[lhs_l[m]] = True
            queue.append(lhs_l[m])
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        for k in range(occ_ptr_l[v], occ_ptr_l[v + 1]):
            m = occ_mono_l[k]
            count[m] -= 1
            if count[m] == 0 and pos_l[m]:
                w = lhs_l[m]
                if not nonzero[w]:
                    nonzero[w] = True
                    queue.append(w)
    return np.array(nonzero, dtype=np.uint8)


def scc(nvars, adj_ptr, adj):
    adj_ptr_l = adj_ptr.tolist()
    adj_l = adj.tolist()
    index = [-1] * nvars
    low = [0] * nvars
    comp = [-1] * nvars
    onstack = [False] * nvars
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(nvars):
        if index[root] != -1:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        onstack[root] = True
        call = [[root, adj_ptr_l[root]]]
        while call:
            frame = call[-1]
            v, e = frame
            if e < adj_ptr_l[v + 1]:
                frame[1] = e + 1
                w = adj_l[e]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack[w] = True
                    call.append([w, adj_ptr_l[w]])
                elif onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            else:
                call.pop()
                if low[v] == index[v]:
                    while True:
                        x = stack.pop()
                        onstack[x] = False
                        comp[x] = ncomp
                        if x == v:
                            break
                    ncomp += 1
                if call:
                    u = call[-1][0]
                    if low[v] < low[u]:
                        low[u] = low[v]
    return np.array(comp, dtype=np.int64), ncomp


def eval_trivial(values, start, comp_ptr, order, trivial, var_mono_ptr, coef, ptr, fac):
    ncomp = len(comp_ptr) - 1
    c = start
    while c < ncomp and trivial[c]:
        v = order[comp_ptr[c]]
        total = 0.0
        for m in range(var_mono_ptr[v], var_mono_ptr[v + 1]):
            prod = coef[m]
            for k in range(ptr[m], ptr[m + 1]):
                prod = _smul(prod, values[fac[k]])
                if prod == 0.0:
                    break
            total += prod
        values[v] = total
        c += 1
    return c


def _sat_prod(vals):
    """Row-wise product with 0·∞ = 0 for a 2-D array."""
    with np.errstate(invalid="ignore"):
        out = np.prod(vals, axis=1)
    zero = np.any(vals == 0.0, axis=1)
    out[zero] = 0.0
    return out


def _monomial_values(coef, ptr, fac, z, skip=None):
    deg = ptr[1:] - ptr[:-1]
    out = coef.astype(np.float64).copy()
    for d in np.unique(deg):
        if d == 0:
            continue
        sel = np.nonzero(deg == d)[0]
        idx = ptr[sel][:, None] + np.arange(d)[None, :]
        vals = np.column_stack([out[sel], z[fac[idx]]])
        out[sel] = _sat_prod(vals)
    return out


def poly_eval(n, lhs, coef, ptr, fac, z):
    z = np.asarray(z, dtype=np.float64)
    vals = _monomial_values(coef, ptr, fac, z)
    out = np.zeros(n)
    np.add.at(out, lhs, vals)
    return out


def poly_jacobian(n, lhs, coef, ptr, fac, z):
    z = np.asarray(z, dtype=np.float64)
    jac = np.zeros((n, n))
    deg = ptr[1:] - ptr[:-1]
    for d in np.unique(deg):
        if d == 0:
            continue
        sel = np.nonzero(deg == d)[0]
        idx = ptr[sel][:, None] + np.arange(d)[None, :]
        fz = z[fac[idx]]
        for k in range(d):
            others = np.delete(fz, k, axis=1)
            vals = _sat_prod(np.column_stack([coef[sel], others]))
            np.add.at(jac, (lhs[sel], fac[idx[:, k]]), vals)
    return jac


def matrix_star(a):
    m = np.array(a, dtype=np.float64, copy=True)
    n = m.shape[0]
    for k in range(n):
        c = INF if m[k, k] >= 1.0 else 1.0 / (1.0 - m[k, k])
        col = m[:, k].copy()
        row = np.where(m[k, :] == 0.0, 0.0, c * np.where(m[k, :] == 0.0, 1.0, m[k, :]))
        with np.errstate(invalid="ignore"):
            upd = np.outer(col, row)
        upd[(col == 0.0)[:, None] | (row == 0.0)[None, :]] = 0.0
        m += upd
    m[np.diag_indices(n)] += 1.0
    return m


def matvec(a, x):
    with np.errstate(invalid="ignore"):
        prod = a * x[None, :]
    prod[(a == 0.0) | (x == 0.0)[None, :]] = 0.0
    return prod.sum(axis=1)
