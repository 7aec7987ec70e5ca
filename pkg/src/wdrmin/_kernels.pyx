# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_kernels_py``.

Operation order mirrors the numpy versions so the exhaustive scans agree
bitwise across backends.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY, NAN

cnp.import_array()

BACKEND = "cython"


cdef inline long long _expand(long long c, int i) nogil:
    return ((c >> i) << (i + 1)) | (c & ((1LL << i) - 1))


cdef void _marginals(const double[::1] table, int d, int i, double[::1] m,
                     long long[::1] base) noexcept nogil:
    cdef long long n = 1LL << (d - 1)
    cdef long long c, full
    cdef long long bit = 1LL << i
    for c in range(n):
        full = _expand(c, i)
        base[c] = full
        m[c] = table[full | bit] - table[full]


cdef void _transform(double[::1] vals, long long[::1] args, int nbits,
                     bint superset, bint use_max) noexcept nogil:
    cdef long long n = 1LL << nbits
    cdef long long c, other, bit
    cdef int b
    cdef double cand, cur
    cdef bint better
    for c in range(n):
        args[c] = c
    for b in range(nbits):
        bit = 1LL << b
        for c in range(n):
            if superset:
                if c & bit:
                    continue
                other = c | bit
            else:
                if not (c & bit):
                    continue
                other = c ^ bit
            cand = vals[other]
            cur = vals[c]
            if use_max:
                better = cand > cur
            else:
                better = cand < cur
            if better:
                vals[c] = cand
                args[c] = args[other]


def ratio_scan(table, int d, bint beta_mode, bint nonincreasing, double tol):
    cdef const double[::1] tab = np.ascontiguousarray(table, dtype=np.float64)
    cdef long long n = 1LL << (d - 1)
    cdef double[::1] m = np.empty(n)
    cdef double[::1] p = np.empty(n)
    cdef long long[::1] base = np.empty(n, dtype=np.int64)
    cdef long long[::1] arg = np.empty(n, dtype=np.int64)
    cdef bint use_max = nonincreasing
    cdef double best = -INFINITY if use_max else INFINITY
    cdef double r, x
    cdef int i, bi = -1
    cdef long long ba = -1, bb = -1, c
    cdef long long npos = 0
    cdef bint better
    with nogil:
        for i in range(d):
            _marginals(tab, d, i, m, base)
            for c in range(n):
                x = -m[c] if nonincreasing else m[c]
                if fabs(x) <= tol:
                    x = 0.0
                p[c] = x
            # keep raw p in m for the denominators
            for c in range(n):
                m[c] = p[c]
            _transform(p, arg, d - 1, beta_mode, use_max)
            for c in range(n):
                if m[c] > 0.0:
                    npos += 1
                    r = p[c] / m[c]
                    if use_max:
                        better = r > best
                    else:
                        better = r < best
                    if better:
                        best = r
                        bi = i
                        if beta_mode:
                            ba = base[c]
                            bb = base[arg[c]]
                        else:
                            ba = base[arg[c]]
                            bb = base[c]
    if bi < 0:
        return float("nan"), -1, -1, -1, 0
    return float(best), bi, int(ba), int(bb), int(npos)


def violation_scan(table, int d, double alpha, bint strict):
    cdef const double[::1] tab = np.ascontiguousarray(table, dtype=np.float64)
    cdef long long n = 1LL << (d - 1)
    cdef double[::1] m = np.empty(n)
    cdef double[::1] sub = np.empty(n)
    cdef double[::1] ssub = np.empty(n)
    cdef long long[::1] base = np.empty(n, dtype=np.int64)
    cdef long long[::1] arg = np.empty(n, dtype=np.int64)
    cdef long long[::1] sarg = np.empty(n, dtype=np.int64)
    cdef double best = INFINITY
    cdef double v, cand
    cdef int i, j, bi = -1
    cdef long long ba = -1, bb = -1, c, src
    with nogil:
        for i in range(d):
            _marginals(tab, d, i, m, base)
            for c in range(n):
                sub[c] = m[c]
            _transform(sub, arg, d - 1, False, False)
            if strict:
                for c in range(n):
                    ssub[c] = INFINITY
                    sarg[c] = -1
                for j in range(d - 1):
                    for c in range(n):
                        if (c >> j) & 1:
                            src = c ^ (1LL << j)
                            cand = sub[src]
                            if cand < ssub[c]:
                                ssub[c] = cand
                                sarg[c] = arg[src]
                for c in range(1, n):
                    v = ssub[c] - alpha * m[c]
                    if v < best:
                        best = v
                        bi = i
                        ba = base[sarg[c]]
                        bb = base[c]
            else:
                for c in range(n):
                    v = sub[c] - alpha * m[c]
                    if v < best:
                        best = v
                        bi = i
                        ba = base[arg[c]]
                        bb = base[c]
    return float(best), bi, int(ba), int(bb)


def marginal_extremes(table, int d):
    cdef const double[::1] tab = np.ascontiguousarray(table, dtype=np.float64)
    cdef long long n = 1LL << (d - 1)
    cdef double[::1] m = np.empty(n)
    cdef long long[::1] base = np.empty(n, dtype=np.int64)
    cdef double lo = INFINITY, hi = -INFINITY
    cdef int i, li = -1, hi_i = -1
    cdef long long la = -1, ha = -1, c
    with nogil:
        for i in range(d):
            _marginals(tab, d, i, m, base)
            for c in range(n):
                if m[c] < lo:
                    lo = m[c]
                    li = i
                    la = base[c]
                if m[c] > hi:
                    hi = m[c]
                    hi_i = i
                    ha = base[c]
    return float(lo), li, int(la), float(hi), hi_i, int(ha)


cdef inline int _popcount(long long x) nogil:
    cdef int k = 0
    while x:
        x &= x - 1
        k += 1
    return k


def popcounts(long long n):
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] o = out
    cdef long long c
    for c in range(n):
        o[c] = _popcount(c)
    return out


def table_argmin(table, int d):
    cdef const double[::1] tab = np.ascontiguousarray(table, dtype=np.float64)
    cdef long long n = tab.shape[0]
    cdef long long c, best = 0
    cdef int card, bcard
    cdef double v, bv
    bv = tab[0]
    bcard = 0
    with nogil:
        for c in range(1, n):
            v = tab[c]
            if v < bv:
                bv = v
                best = c
                bcard = _popcount(c)
            elif v == bv:
                card = _popcount(c)
                if card < bcard:
                    best = c
                    bcard = card
    return int(best), float(bv)


def cut_chain(W, unary, perm):
    cdef const double[:, ::1] w = np.ascontiguousarray(W, dtype=np.float64)
    cdef const double[::1] u = np.ascontiguousarray(unary, dtype=np.float64)
    cdef const long long[::1] pm = np.ascontiguousarray(perm, dtype=np.int64)
    cdef int d = w.shape[0]
    out = np.zeros(d + 1)
    cdef double[::1] o = out
    cdef unsigned char[::1] inside = np.zeros(d, dtype=np.uint8)
    cdef int k, v, j
    cdef double val = 0.0, delta, plus, minus
    with nogil:
        for k in range(d):
            v = <int>pm[k]
            delta = u[v]
            plus = 0.0
            minus = 0.0
            for j in range(d):
                if j == v:
                    continue
                if inside[j]:
                    minus += w[j, v]
                else:
                    plus += w[v, j]
            delta += plus
            delta -= minus
            val += delta
            inside[v] = 1
            o[k + 1] = val
    return out


def chol_chain_gain(M, B, perm, double rel_tol, bint skip_dependent):
    cdef const double[:, ::1] mm = np.ascontiguousarray(M, dtype=np.float64)
    Bm = np.asarray(B, dtype=np.float64)
    if Bm.ndim == 1:
        Bm = Bm[:, None]
    cdef const double[:, ::1] bm = np.ascontiguousarray(Bm)
    cdef const long long[::1] pm = np.ascontiguousarray(perm, dtype=np.int64)
    cdef int d = mm.shape[0]
    cdef int q = bm.shape[1]
    cdef double[:, ::1] L = np.zeros((d, d))
    cdef double[:, ::1] Z = np.zeros((d, q))
    cdef double[::1] w = np.zeros(d)
    cdef long long[::1] active = np.zeros(d, dtype=np.int64)
    gains = np.zeros(d + 1)
    cdef double[::1] g = gains
    cdef int k, i, r = 0, a, b, col
    cdef double s, acc, lii, zz, total = 0.0
    cdef int status = 0
    with nogil:
        for k in range(d):
            i = <int>pm[k]
            s = mm[i, i]
            for a in range(r):
                acc = mm[active[a], i]
                for b in range(a):
                    acc -= L[a, b] * w[b]
                w[a] = acc / L[a, a]
            acc = 0.0
            for a in range(r):
                acc += w[a] * w[a]
            s = mm[i, i] - acc
            if s <= rel_tol * fabs(mm[i, i]) or s <= 0.0:
                if skip_dependent:
                    g[k + 1] = total
                    continue
                for a in range(k + 1, d + 1):
                    g[a] = total
                status = k + 1
                break
            lii = sqrt(s)
            for a in range(r):
                L[r, a] = w[a]
            L[r, r] = lii
            zz = 0.0
            for col in range(q):
                acc = bm[i, col]
                for a in range(r):
                    acc -= w[a] * Z[a, col]
                acc = acc / lii
                Z[r, col] = acc
                zz += acc * acc
            total += zz
            active[r] = i
            r += 1
            g[k + 1] = total
    return gains, status


def jacobi_eigenvalues(M, double rel_tol, int max_sweeps):
    A_np = np.array(M, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] A = A_np
    cdef int n = A.shape[0]
    cdef int p, q, k, sweeps = 0, sweep
    cdef double fro = 0.0, off, target, apq, theta, t, c, s, x, y
    for p in range(n):
        for q in range(n):
            fro += A[p, q] * A[p, q]
    fro = sqrt(fro)
    target = rel_tol * fro
    with nogil:
        for sweep in range(1, max_sweeps + 1):
            off = 0.0
            for p in range(n):
                for q in range(n):
                    if p != q:
                        off += A[p, q] * A[p, q]
            off = sqrt(off)
            if off <= target:
                break
            sweeps = sweep
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    if apq == 0.0:
                        continue
                    theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                    if theta == 0.0:
                        t = 1.0
                    elif fabs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                        if theta < 0.0:
                            t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        x = A[p, k]
                        y = A[q, k]
                        A[p, k] = c * x - s * y
                        A[q, k] = s * x + c * y
                    for k in range(n):
                        x = A[k, p]
                        y = A[k, q]
                        A[k, p] = c * x - s * y
                        A[k, q] = s * x + c * y
                    A[p, q] = 0.0
                    A[q, p] = 0.0
    return np.diag(A_np).copy(), sweeps
