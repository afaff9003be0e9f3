"""Compiled DTW kernels.

All kernels release the GIL so callers can spread independent rows of a
distance matrix over threads. ``band < 0`` means no Sakoe-Chiba constraint.
"""
import numba as nb
import numpy as np


@nb.njit(cache=True, nogil=True)
def _local(x, y, squared):
    d = x - y
    if squared:
        return d * d
    return abs(d)


@nb.njit(cache=True, nogil=True)
def dtw_cost(a, b, band, squared):
    n = a.shape[0]
    m = b.shape[0]
    prev = np.full(m + 1, np.inf)
    cur = np.full(m + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        for j in range(m + 1):
            cur[j] = np.inf
        lo = 1
        hi = m
        if band >= 0:
            lo = max(1, i - band)
            hi = min(m, i + band)
        for j in range(lo, hi + 1):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = _local(a[i - 1], b[j - 1], squared) + best
        tmp = prev
        prev = cur
        cur = tmp
    return prev[m]


@nb.njit(cache=True, nogil=True)
def dtw_path(a, b, squared):
    """Optimal warping path as two index arrays. Ties prefer diagonal moves."""
    n = a.shape[0]
    m = b.shape[0]
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            best = acc[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = _local(a[i - 1], b[j - 1], squared) + best
    pi = np.empty(n + m, np.int64)
    pj = np.empty(n + m, np.int64)
    i = n
    j = m
    k = 0
    while True:
        pi[k] = i - 1
        pj[k] = j - 1
        k += 1
        if i == 1 and j == 1:
            break
        diag = acc[i - 1, j - 1]
        up = acc[i - 1, j]
        left = acc[i, j - 1]
        if diag <= up and diag <= left:
            i -= 1
            j -= 1
        elif up <= left:
            i -= 1
        else:
            j -= 1
    return pi[:k][::-1].copy(), pj[:k][::-1].copy(), acc[n, m]


@nb.njit(cache=True, nogil=True)
def pairwise_rows(X, Y, row_lo, row_hi, band, squared, out):
    for i in range(row_lo, row_hi):
        for j in range(Y.shape[0]):
            out[i, j] = dtw_cost(X[i], Y[j], band, squared)


@nb.njit(cache=True, nogil=True)
def symmetric_rows(X, row_lo, row_hi, band, squared, out):
    # fills the upper triangle only; caller mirrors it
    for i in range(row_lo, row_hi):
        out[i, i] = 0.0
        for j in range(i + 1, X.shape[0]):
            out[i, j] = dtw_cost(X[i], X[j], band, squared)


@nb.njit(cache=True, nogil=True)
def total_cost(center, members, squared):
    s = 0.0
    for r in range(members.shape[0]):
        s += dtw_cost(center, members[r], -1, squared)
    return s


@nb.njit(cache=True, nogil=True)
def barycenter_step(center, members, squared):
    """One DBA update: align every member to ``center`` and pool the aligned values.

    Each centre position takes the median (L1 cost) or mean (squared cost)
    of the member values aligned to it; for a fixed alignment that choice
    minimises the summed local cost.
    """
    w = center.shape[0]
    total = members.shape[0] * (w + members.shape[1])
    pos = np.empty(total, np.int64)
    val = np.empty(total, np.float64)
    k = 0
    for r in range(members.shape[0]):
        pi, pj, _ = dtw_path(center, members[r], squared)
        for t in range(pi.shape[0]):
            pos[k] = pi[t]
            val[k] = members[r, pj[t]]
            k += 1
    pos = pos[:k]
    val = val[:k]
    order = np.argsort(pos, kind="mergesort")
    pos = pos[order]
    val = val[order]
    new = np.empty(w, np.float64)
    lo = 0
    for p in range(w):
        hi = lo
        while hi < k and pos[hi] == p:
            hi += 1
        chunk = np.sort(val[lo:hi])
        if squared:
            new[p] = chunk.mean()
        else:
            c = chunk.shape[0]
            if c % 2 == 1:
                new[p] = chunk[c // 2]
            else:
                new[p] = 0.5 * (chunk[c // 2 - 1] + chunk[c // 2])
        lo = hi
    return new


@nb.njit(cache=True, nogil=True)
def refine_barycenter(init, members, n_iter, squared):
    center = init.copy()
    cost = total_cost(center, members, squared)
    for _ in range(n_iter):
        cand = barycenter_step(center, members, squared)
        cand_cost = total_cost(cand, members, squared)
        if cand_cost < cost:
            center = cand
            cost = cand_cost
        else:
            break
    return center, cost


@nb.njit(cache=True, nogil=True)
def medoid_index(members, squared):
    n = members.shape[0]
    sums = np.zeros(n)
    for i in range(n):
        for j in range(i + 1, n):
            d = dtw_cost(members[i], members[j], -1, squared)
            sums[i] += d
            sums[j] += d
    return np.argmin(sums)
