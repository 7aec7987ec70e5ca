"""Pure-Python (numpy) implementations of the hot kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature
and the same order of floating-point operations, so the exhaustive scans
return bitwise-identical results on either backend.  The linear-algebra
kernels (chain gains, Jacobi) agree to round-off only, since numpy reduces
dot products in a different order.
"""

import numpy as np

BACKEND = "python"

_INF = np.inf


def _expand_masks(d, i):
    """Full d-bit masks for every subset of V minus {i}, in compressed order."""
    c = np.arange(1 << (d - 1), dtype=np.int64)
    low = c & ((1 << i) - 1)
    return ((c >> i) << (i + 1)) | low


def _marginals(table, d, i):
    base = _expand_masks(d, i)
    return table[base | (1 << i)] - table[base], base


def _snap(p, tol):
    p = p.copy()
    p[np.abs(p) <= tol] = 0.0
    return p


def _transform(vals, nbits, superset, use_max):
    """Subset (or superset) extremum transform with argument tracking.

    Bits are processed in ascending order; a candidate replaces the current
    entry only on strict improvement.
    """
    vals = vals.copy()
    args = np.arange(vals.shape[0], dtype=np.int64)
    for b in range(nbits):
        v = vals.reshape(-1, 2, 1 << b)
        a = args.reshape(-1, 2, 1 << b)
        if superset:
            tgt, src = 0, 1
        else:
            tgt, src = 1, 0
        cur = v[:, tgt, :]
        cand = v[:, src, :]
        better = cand > cur if use_max else cand < cur
        cur[better] = cand[better]
        a[:, tgt, :][better] = a[:, src, :][better]
    return vals, args


def ratio_scan(table, d, beta_mode, nonincreasing, tol):
    """Extremal weak-DR ratio over all (i, A subset-of B subset-of V-i).

    beta_mode False -> alpha: ratio p(i|A)/p(i|B) over pairs with p(i|B) > 0.
    beta_mode True  -> beta:  ratio p(i|B)/p(i|A) over pairs with p(i|A) > 0.
    For non-increasing functions p is the negated marginal and the extremum
    is a max instead of a min.

    Returns (ratio, i, A, B, n_positive); ratio is nan when no pair counts.
    """
    table = np.ascontiguousarray(table, dtype=np.float64)
    use_max = bool(nonincreasing)
    best = -_INF if use_max else _INF
    bi, ba, bb = -1, -1, -1
    npos = 0
    for i in range(d):
        m, base = _marginals(table, d, i)
        p = -m if nonincreasing else m
        p = _snap(p, tol)
        ext, arg = _transform(p, d - 1, beta_mode, use_max)
        valid = p > 0.0
        npos += int(valid.sum())
        if not valid.any():
            continue
        ratio = np.where(valid, ext / np.where(valid, p, 1.0), -_INF if use_max else _INF)
        k = int(np.argmax(ratio) if use_max else np.argmin(ratio))
        r = ratio[k]
        if (r > best) if use_max else (r < best):
            best = r
            bi = i
            if beta_mode:
                ba, bb = int(base[k]), int(base[arg[k]])
            else:
                ba, bb = int(base[arg[k]]), int(base[k])
    if bi < 0:
        return float("nan"), -1, -1, -1, 0
    return float(best), bi, ba, bb, npos


def violation_scan(table, d, alpha, strict):
    """min over i and A subset-of B (proper subset if ``strict``) of
    H(i|A) - alpha * H(i|B).  Returns (value, i, A, B)."""
    table = np.ascontiguousarray(table, dtype=np.float64)
    best = _INF
    bi, ba, bb = -1, -1, -1
    n = 1 << (d - 1)
    for i in range(d):
        m, base = _marginals(table, d, i)
        sub, arg = _transform(m, d - 1, False, False)
        if strict:
            ssub = np.full(n, _INF)
            sarg = np.full(n, -1, dtype=np.int64)
            c = np.arange(n, dtype=np.int64)
            for j in range(d - 1):
                has = (c >> j) & 1 == 1
                src = c[has] ^ (1 << j)
                cand = sub[src]
                cur = ssub[has]
                better = cand < cur
                idx = np.nonzero(has)[0][better]
                ssub[idx] = cand[better]
                sarg[idx] = arg[src[better]]
            sub, arg = ssub, sarg
        val = sub - alpha * m
        if strict:
            val[0] = _INF
        k = int(np.argmin(val))
        if val[k] < best:
            best = val[k]
            bi, ba, bb = i, int(base[arg[k]]), int(base[k])
    return float(best), bi, ba, bb


def marginal_extremes(table, d):
    """(min marginal, i, A, max marginal, i, A) over all single-element gains."""
    table = np.ascontiguousarray(table, dtype=np.float64)
    lo, li, la = _INF, -1, -1
    hi, hi_i, ha = -_INF, -1, -1
    for i in range(d):
        m, base = _marginals(table, d, i)
        k = int(np.argmin(m))
        if m[k] < lo:
            lo, li, la = m[k], i, int(base[k])
        k = int(np.argmax(m))
        if m[k] > hi:
            hi, hi_i, ha = m[k], i, int(base[k])
    return float(lo), li, la, float(hi), hi_i, ha


def popcounts(n):
    c = np.arange(n, dtype=np.int64)
    out = np.zeros(n, dtype=np.int64)
    while c.any():
        out += c & 1
        c >>= 1
    return out


def table_argmin(table, d):
    """Global minimiser of a value table; ties -> smallest cardinality, then mask."""
    table = np.ascontiguousarray(table, dtype=np.float64)
    order = np.lexsort((np.arange(table.shape[0]), popcounts(table.shape[0]), table))
    k = int(order[0])
    return k, float(table[k])


def cut_chain(W, unary, perm):
    """Cut values along the chain of prefixes of ``perm``.

    ``W[u, v]`` is the weight counted when u is inside and v outside.
    """
    W = np.asarray(W, dtype=np.float64)
    d = W.shape[0]
    inside = np.zeros(d, dtype=bool)
    out = np.zeros(d + 1)
    val = 0.0
    for k in range(d):
        v = perm[k]
        outside = ~inside
        outside[v] = False
        delta = unary[v]
        delta += W[v, outside].sum()
        delta -= W[inside, v].sum()
        val += delta
        inside[v] = True
        out[k + 1] = val
    return out


def chol_chain_gain(M, B, perm, rel_tol, skip_dependent):
    """Cumulative sum of squared whitened responses along a chain.

    For prefix S_k of ``perm`` returns sum_j ||L_k^{-1} B[S_k, j]||^2 where
    L_k L_k^T = M[S_k, S_k], grown by bordered Cholesky.  With
    ``skip_dependent`` an element whose Schur complement falls below
    rel_tol * M[i, i] is left out of the factor and contributes zero
    (pseudo-inverse semantics).  Otherwise returns status = k+1 of the
    failing step (1-based) with partial output.

    Returns (gains array of length d+1, status) with status 0 on success.
    """
    M = np.asarray(M, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if B.ndim == 1:
        B = B[:, None]
    d = M.shape[0]
    L = np.zeros((d, d))
    Z = np.zeros((d, B.shape[1]))
    active = []
    gains = np.zeros(d + 1)
    total = 0.0
    for k in range(d):
        i = perm[k]
        r = len(active)
        if r:
            border = M[active, i]
            w = _forward(L, r, border)
            s = M[i, i] - np.dot(w, w)
        else:
            w = None
            s = M[i, i]
        if s <= rel_tol * abs(M[i, i]) or s <= 0.0:
            if skip_dependent:
                gains[k + 1] = total
                continue
            gains[k + 1:] = total
            return gains, k + 1
        lii = np.sqrt(s)
        if r:
            L[r, :r] = w
        L[r, r] = lii
        if r:
            z = (B[i] - w @ Z[:r]) / lii
        else:
            z = B[i] / lii
        Z[r] = z
        total += float(np.dot(z, z))
        active.append(i)
        gains[k + 1] = total
    return gains, 0


def _forward(L, r, b):
    w = np.empty(r)
    for a in range(r):
        w[a] = (b[a] - np.dot(L[a, :a], w[:a])) / L[a, a]
    return w


def jacobi_eigenvalues(M, rel_tol, max_sweeps):
    """Cyclic Jacobi eigenvalues of a symmetric matrix.

    Stops when the off-diagonal Frobenius norm is <= rel_tol * ||M||_F.
    Returns (eigenvalues in diagonal order, sweeps used).
    """
    A = np.array(M, dtype=np.float64, copy=True)
    n = A.shape[0]
    fro = np.sqrt(np.sum(A * A))
    target = rel_tol * fro
    sweeps = 0
    offdiag = ~np.eye(n, dtype=bool)
    for sweep in range(1, max_sweeps + 1):
        # summing the off-diagonal squares directly; |A|^2 - |diag|^2 can cancel below zero
        off = np.sqrt(np.sum(A[offdiag] ** 2))
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
                elif abs(theta) > 1e150:
                    t = 0.5 / theta          # theta^2 would overflow
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp = A[:, p].copy()
                cq = A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                A[p, q] = 0.0
                A[q, p] = 0.0
    return np.diag(A).copy(), sweeps
