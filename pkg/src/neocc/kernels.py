"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``objective_m_terms``, ``objective_rcm_terms``,
``greedy_select``) dispatch to the numba versions unless
``NEOCC_DISABLE_NUMBA`` is set. Both flavours are always importable as
``*_nb`` / ``*_np`` so tests and benchmarks can compare them directly.

Stored entries are walked through ``(indptr, indices, data)``; row and
column memberships through ragged ``(ptr, ids)`` pairs as produced by
:meth:`neocc.core.AssignmentMatrix.ragged`.
"""
from __future__ import annotations

import numpy as np

from ._accel import NUMBA_AVAILABLE, USE_NUMBA

# Reductions are split into this many row chunks regardless of the thread
# count, so results do not depend on how many threads ran them.
_N_CHUNKS = 64


# ----------------------------------------------------------------------------
# numpy flavour
# ----------------------------------------------------------------------------

def _ragged_take(starts, counts):
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.cumsum(counts) - counts
    return np.repeat(starts - offsets, counts) + np.arange(total, dtype=np.int64)


def expand_entries(indptr, indices, data, rptr, rids, cptr, cids):
    """Expand every stored entry into one record per (row cluster, col cluster).

    Returns ``(x, s, t, i, j)`` arrays: value, row, column, row cluster and
    column cluster for each membership combination.
    """
    n = indptr.size - 1
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    rcnt = np.diff(rptr)[rows]
    e1 = np.repeat(np.arange(data.size, dtype=np.int64), rcnt)
    ri = rids[_ragged_take(rptr[rows], rcnt)]
    c1 = indices[e1]
    ccnt = np.diff(cptr)[c1]
    e2 = np.repeat(np.arange(e1.size, dtype=np.int64), ccnt)
    cj = cids[_ragged_take(cptr[c1], ccnt)]
    entry = e1[e2]
    return data[entry], rows[entry], indices[entry], ri[e2], cj


def objective_m_terms_np(indptr, indices, data, rptr, rids, cptr, cids, mu):
    k, l = mu.shape
    x, _, _, i, j = expand_entries(indptr, indices, data, rptr, rids, cptr, cids)
    flat = i * l + j
    r = x - mu.ravel()[flat]
    acc = np.bincount(flat, weights=r * r, minlength=k * l).reshape(k, l)
    cnt = np.bincount(flat, minlength=k * l).reshape(k, l).astype(np.int64)
    return acc, cnt


def objective_rcm_terms_np(indptr, indices, data, rptr, rids, cptr, cids, rmean, cmean, mu):
    k, l = mu.shape
    x, s, t, i, j = expand_entries(indptr, indices, data, rptr, rids, cptr, cids)
    flat = i * l + j
    h = x - rmean[i, t] - cmean[s, j] + mu.ravel()[flat]
    return np.bincount(flat, weights=x * h, minlength=k * l).reshape(k, l)


def greedy_select_np(D, n1, n2):
    """Two-pass greedy pick over a distance table.

    Pass one takes the ``n1`` points with the smallest distance to their
    closest cluster (ties: lower point index, then lower cluster index).
    Pass two takes the ``n2`` globally smallest remaining (point, cluster)
    entries, ties broken the same way.
    """
    n, k = D.shape
    best = np.argmin(D, axis=1)
    dmin = D[np.arange(n), best]
    order = np.argsort(dmin, kind="stable")[:n1]
    pts = [order]
    cls = [best[order]]
    if n2 > 0:
        taken = np.zeros(n * k, dtype=np.bool_)
        taken[order * k + best[order]] = True
        flat = np.argsort(D.ravel(), kind="stable")
        flat = flat[~taken[flat]][:n2]
        pts.append(flat // k)
        cls.append(flat % k)
    return np.concatenate(pts).astype(np.int64), np.concatenate(cls).astype(np.int64)


# ----------------------------------------------------------------------------
# numba flavour
# ----------------------------------------------------------------------------

if NUMBA_AVAILABLE:
    from numba import njit, prange

    @njit(cache=True, parallel=True)
    def objective_m_terms_nb(indptr, indices, data, rptr, rids, cptr, cids, mu):
        n = indptr.size - 1
        k, l = mu.shape
        nch = min(_N_CHUNKS, n)
        part = np.zeros((nch, k, l))
        pcnt = np.zeros((nch, k, l), dtype=np.int64)
        for ch in prange(nch):
            lo = ch * n // nch
            hi = (ch + 1) * n // nch
            for s in range(lo, hi):
                r0, r1 = rptr[s], rptr[s + 1]
                if r0 == r1:
                    continue
                for e in range(indptr[s], indptr[s + 1]):
                    t = indices[e]
                    x = data[e]
                    for a in range(r0, r1):
                        i = rids[a]
                        for b in range(cptr[t], cptr[t + 1]):
                            j = cids[b]
                            d = x - mu[i, j]
                            part[ch, i, j] += d * d
                            pcnt[ch, i, j] += 1
        acc = np.zeros((k, l))
        cnt = np.zeros((k, l), dtype=np.int64)
        for ch in range(nch):
            acc += part[ch]
            cnt += pcnt[ch]
        return acc, cnt

    @njit(cache=True, parallel=True)
    def objective_rcm_terms_nb(indptr, indices, data, rptr, rids, cptr, cids, rmean, cmean, mu):
        n = indptr.size - 1
        k, l = mu.shape
        nch = min(_N_CHUNKS, n)
        part = np.zeros((nch, k, l))
        for ch in prange(nch):
            lo = ch * n // nch
            hi = (ch + 1) * n // nch
            for s in range(lo, hi):
                r0, r1 = rptr[s], rptr[s + 1]
                if r0 == r1:
                    continue
                for e in range(indptr[s], indptr[s + 1]):
                    t = indices[e]
                    x = data[e]
                    for a in range(r0, r1):
                        i = rids[a]
                        for b in range(cptr[t], cptr[t + 1]):
                            j = cids[b]
                            h = x - rmean[i, t] - cmean[s, j] + mu[i, j]
                            part[ch, i, j] += x * h
        acc = np.zeros((k, l))
        for ch in range(nch):
            acc += part[ch]
        return acc

    @njit(cache=True)
    def greedy_select_nb(D, n1, n2):
        n, k = D.shape
        best = np.empty(n, dtype=np.int64)
        dmin = np.empty(n)
        for p in range(n):
            b = 0
            v = D[p, 0]
            for q in range(1, k):
                if D[p, q] < v:
                    v = D[p, q]
                    b = q
            best[p] = b
            dmin[p] = v
        order = np.argsort(dmin, kind="mergesort")
        pts = np.empty(n1 + n2, dtype=np.int64)
        cls = np.empty(n1 + n2, dtype=np.int64)
        taken = np.zeros(n * k, dtype=np.bool_)
        for w in range(n1):
            p = order[w]
            pts[w] = p
            cls[w] = best[p]
            taken[p * k + best[p]] = True
        if n2 > 0:
            flat = np.argsort(D.ravel(), kind="mergesort")
            w = n1
            for f in flat:
                if w == n1 + n2:
                    break
                if not taken[f]:
                    pts[w] = f // k
                    cls[w] = f % k
                    w += 1
        return pts, cls

else:  # pragma: no cover
    objective_m_terms_nb = objective_m_terms_np
    objective_rcm_terms_nb = objective_rcm_terms_np
    greedy_select_nb = greedy_select_np


if USE_NUMBA:
    objective_m_terms = objective_m_terms_nb
    objective_rcm_terms = objective_rcm_terms_nb
    greedy_select = greedy_select_nb
else:
    objective_m_terms = objective_m_terms_np
    objective_rcm_terms = objective_rcm_terms_np
    greedy_select = greedy_select_np
