# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops of the solver (double precision only).

Every product goes through `smul` so that 0·∞ = 0.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY

ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8


cdef inline double smul(double a, double b) nogil:
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


cdef inline double sstar(double a) nogil:
    if a < 1.0:
        return 1.0 / (1.0 - a)
    return INFINITY


def prune_zeros(i64 nvars, i64[:] lhs, u8[:] positive, i64[:] ptr, i64[:] fac,
                i64[:] occ_ptr, i64[:] occ_mono):
    """Least Boolean solution: which variables can be nonzero."""
    cdef i64 nmono = lhs.shape[0]
    cdef i64[:] count = np.empty(nmono, dtype=np.int64)
    cdef u8[:] nonzero = np.zeros(nvars, dtype=np.uint8)
    cdef i64[:] queue = np.empty(nvars, dtype=np.int64)
    cdef i64 head = 0, tail = 0, m, v, k, w
    with nogil:
        for m in range(nmono):
            count[m] = ptr[m + 1] - ptr[m]
        for m in range(nmono):
            if count[m] == 0 and positive[m]:
                w = lhs[m]
                if not nonzero[w]:
                    nonzero[w] = 1
                    queue[tail] = w
                    tail += 1
        while head < tail:
            v = queue[head]
            head += 1
            for k in range(occ_ptr[v], occ_ptr[v + 1]):
                m = occ_mono[k]
                count[m] -= 1
                if count[m] == 0 and positive[m]:
                    w = lhs[m]
                    if not nonzero[w]:
                        nonzero[w] = 1
                        queue[tail] = w
                        tail += 1
    return np.asarray(nonzero)


def scc(i64 nvars, i64[:] adj_ptr, i64[:] adj):
    """Iterative Tarjan.  Components are numbered in completion order, so a
    component only points at components with smaller numbers."""
    cdef i64[:] index = np.full(nvars, -1, dtype=np.int64)
    cdef i64[:] low = np.zeros(nvars, dtype=np.int64)
    cdef i64[:] comp = np.full(nvars, -1, dtype=np.int64)
    cdef u8[:] onstack = np.zeros(nvars, dtype=np.uint8)
    cdef i64[:] stack = np.empty(nvars, dtype=np.int64)
    cdef i64[:] cstack = np.empty(nvars, dtype=np.int64)
    cdef i64[:] cedge = np.empty(nvars, dtype=np.int64)
    cdef i64 sp = 0, csp = 0, counter = 0, ncomp = 0
    cdef i64 root, v, w, e, x
    with nogil:
        for root in range(nvars):
            if index[root] != -1:
                continue
            cstack[0] = root
            cedge[0] = adj_ptr[root]
            csp = 1
            index[root] = counter
            low[root] = counter
            counter += 1
            stack[sp] = root
            sp += 1
            onstack[root] = 1
            while csp > 0:
                v = cstack[csp - 1]
                e = cedge[csp - 1]
                if e < adj_ptr[v + 1]:
                    cedge[csp - 1] = e + 1
                    w = adj[e]
                    if index[w] == -1:
                        index[w] = counter
                        low[w] = counter
                        counter += 1
                        stack[sp] = w
                        sp += 1
                        onstack[w] = 1
                        cstack[csp] = w
                        cedge[csp] = adj_ptr[w]
                        csp += 1
                    elif onstack[w]:
                        if index[w] < low[v]:
                            low[v] = index[w]
                else:
                    csp -= 1
                    if low[v] == index[v]:
                        while True:
                            sp -= 1
                            x = stack[sp]
                            onstack[x] = 0
                            comp[x] = ncomp
                            if x == v:
                                break
                        ncomp += 1
                    if csp > 0:
                        x = cstack[csp - 1]
                        if low[v] < low[x]:
                            low[x] = low[v]
    return np.asarray(comp), ncomp


def eval_trivial(double[:] values, i64 start, i64[:] comp_ptr, i64[:] order, u8[:] trivial,
                 i64[:] var_mono_ptr, double[:] coef, i64[:] ptr, i64[:] fac):
    """Evaluate consecutive acyclic singleton components starting at `start`;
    return the index of the first component that needs a real solver."""
    cdef i64 ncomp = comp_ptr.shape[0] - 1
    cdef i64 c = start, v, m, k
    cdef double total, prod
    with nogil:
        while c < ncomp and trivial[c]:
            v = order[comp_ptr[c]]
            total = 0.0
            for m in range(var_mono_ptr[v], var_mono_ptr[v + 1]):
                prod = coef[m]
                for k in range(ptr[m], ptr[m + 1]):
                    prod = smul(prod, values[fac[k]])
                    if prod == 0.0:
                        break
                total += prod
            values[v] = total
            c += 1
    return c


def poly_eval(i64 n, i64[:] lhs, double[:] coef, i64[:] ptr, i64[:] fac, double[:] z):
    cdef double[:] out = np.zeros(n, dtype=np.float64)
    cdef i64 m, k
    cdef double prod
    with nogil:
        for m in range(lhs.shape[0]):
            prod = coef[m]
            for k in range(ptr[m], ptr[m + 1]):
                prod = smul(prod, z[fac[k]])
            out[lhs[m]] += prod
    return np.asarray(out)


def poly_jacobian(i64 n, i64[:] lhs, double[:] coef, i64[:] ptr, i64[:] fac, double[:] z):
    cdef double[:, :] jac = np.zeros((n, n), dtype=np.float64)
    cdef i64 m, k, q
    cdef double prod
    with nogil:
        for m in range(lhs.shape[0]):
            for k in range(ptr[m], ptr[m + 1]):
                prod = coef[m]
                for q in range(ptr[m], ptr[m + 1]):
                    if q != k:
                        prod = smul(prod, z[fac[q]])
                jac[lhs[m], fac[k]] += prod
    return np.asarray(jac)


def matrix_star(double[:, :] a):
    """Lehmann's closure A* = I + A + A² + ... with ∞ saturation."""
    cdef i64 n = a.shape[0]
    cdef double[:, :] m = np.array(a, dtype=np.float64, copy=True)
    cdef double[:] col = np.empty(n, dtype=np.float64)
    cdef double[:] row = np.empty(n, dtype=np.float64)
    cdef i64 i, j, k
    cdef double c, ci
    with nogil:
        for k in range(n):
            c = sstar(m[k, k])
            for i in range(n):
                col[i] = m[i, k]
                row[i] = smul(c, m[k, i])
            for i in range(n):
                ci = col[i]
                if ci == 0.0:
                    continue
                for j in range(n):
                    if row[j] != 0.0:
                        m[i, j] += smul(ci, row[j])
        for i in range(n):
            m[i, i] += 1.0
    return np.asarray(m)


def matvec(double[:, :] a, double[:] x):
    cdef i64 n = a.shape[0], p = a.shape[1], i, j
    cdef double[:] out = np.zeros(n, dtype=np.float64)
    with nogil:
        for i in range(n):
            for j in range(p):
                out[i] += smul(a[i, j], x[j])
    return np.asarray(out)
