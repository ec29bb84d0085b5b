"""Pure-numpy kernels.

Same signatures and results as :mod:`codicil._accel.jit`. Floating point
reductions accumulate sequentially in ascending index order so that both
backends round identically.
"""
from __future__ import annotations

import math

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U64_MAX = np.iinfo(np.uint64).max

_PAIR_CHUNK = 1 << 15


def mix64(z):
    """splitmix64 finalizer; a bijection on 64-bit words."""
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def minhash_rows(indptr, indices, mult, add):
    n = indptr.shape[0] - 1
    h = mult.shape[0]
    out = np.full((n, h), _U64_MAX, dtype=np.uint64)
    lengths = np.diff(indptr)
    rows = np.flatnonzero(lengths)
    if rows.size == 0:
        return out
    y = mix64(indices.astype(np.uint64))
    hashed = y[:, None] * mult[None, :] + add[None, :]
    out[rows] = np.minimum.reduceat(hashed, indptr[rows], axis=0)
    return out


def _projection_signs(terms, seed_key, bits):
    key = mix64(terms.astype(np.uint64) * GOLDEN + np.uint64(seed_key))
    offs = np.arange(bits, dtype=np.uint64) * _M2
    z = mix64(key[:, None] + offs[None, :])
    return np.where((z >> np.uint64(63)) == 0, 1.0, -1.0)


def simhash_rows(indptr, indices, data, seed_key, bits):
    n = indptr.shape[0] - 1
    out = np.ones((n, bits), dtype=np.uint8)
    for i in range(n):
        lo, hi = indptr[i], indptr[i + 1]
        if lo == hi:
            continue
        signed = _projection_signs(indices[lo:hi], seed_key, bits) * data[lo:hi, None]
        # cumsum runs sequentially down the rows
        dots = np.cumsum(signed, axis=0)[-1]
        out[i] = dots >= 0.0
    return out


def _merge_pairs(indptr, indices, data, u, v):
    """Matched (pair, weight_u * weight_v) entries in ascending term order."""
    lu = indptr[u + 1] - indptr[u]
    lv = indptr[v + 1] - indptr[v]
    pid = np.concatenate([np.repeat(np.arange(u.size), lu), np.repeat(np.arange(v.size), lv)])
    pos = np.concatenate([_ranges(indptr[u], lu), _ranges(indptr[v], lv)])
    term = indices[pos]
    order = np.lexsort((term, pid))
    pid, pos, term = pid[order], pos[order], term[order]
    hit = np.flatnonzero((pid[1:] == pid[:-1]) & (term[1:] == term[:-1]))
    return pid[hit], data[pos[hit]] * data[pos[hit + 1]], lu, lv


def _ranges(starts, lengths):
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    ends = np.cumsum(lengths)
    base = np.repeat(starts - (ends - lengths), lengths)
    return base + np.arange(total)


def pair_cosine(indptr, indices, data, norms, u, v):
    out = np.zeros(u.size, dtype=np.float64)
    for lo in range(0, u.size, _PAIR_CHUNK):
        cu, cv = u[lo:lo + _PAIR_CHUNK], v[lo:lo + _PAIR_CHUNK]
        pid, prod, _, _ = _merge_pairs(indptr, indices, data, cu, cv)
        dot = np.bincount(pid, weights=prod, minlength=cu.size)
        denom = norms[cu] * norms[cv]
        ok = denom > 0.0
        out[lo:lo + cu.size][ok] = dot[ok] / denom[ok]
    return out


def pair_jaccard(indptr, indices, u, v):
    out = np.zeros(u.size, dtype=np.float64)
    ones = np.ones(indices.size)
    for lo in range(0, u.size, _PAIR_CHUNK):
        cu, cv = u[lo:lo + _PAIR_CHUNK], v[lo:lo + _PAIR_CHUNK]
        pid, _, lu, lv = _merge_pairs(indptr, indices, ones, cu, cv)
        inter = np.bincount(pid, minlength=cu.size)
        union = lu + lv - inter
        ok = union > 0
        out[lo:lo + cu.size][ok] = inter[ok] / union[ok]
    return out


def pair_agreement(sig, valid, u, v):
    out = np.zeros(u.size, dtype=np.float64)
    width = sig.shape[1]
    for lo in range(0, u.size, _PAIR_CHUNK):
        cu, cv = u[lo:lo + _PAIR_CHUNK], v[lo:lo + _PAIR_CHUNK]
        same = (sig[cu] == sig[cv]).sum(axis=1)
        ok = valid[cu] & valid[cv]
        out[lo:lo + cu.size][ok] = same[ok] / width
    return out


def topk_cosine(indptr, indices, data, norms, post_ptr, post_rows, post_data,
                k, cand_ptr, cand_idx, restrict):
    n = indptr.shape[0] - 1
    nbrs = np.full((n, k), -1, dtype=np.int64)
    scores = np.zeros((n, k), dtype=np.float64)
    allowed = np.zeros(n, dtype=bool)
    for q in range(n):
        lo, hi = indptr[q], indptr[q + 1]
        if lo == hi or norms[q] == 0.0:
            continue
        terms = indices[lo:hi]
        counts = post_ptr[terms + 1] - post_ptr[terms]
        pos = _ranges(post_ptr[terms], counts)
        contrib = np.repeat(data[lo:hi], counts) * post_data[pos]
        acc = np.bincount(post_rows[pos], weights=contrib, minlength=n)
        cand = np.flatnonzero(acc > 0.0)
        cand = cand[cand != q]
        if restrict:
            allowed[cand_idx[cand_ptr[q]:cand_ptr[q + 1]]] = True
            cand = cand[allowed[cand]]
            allowed[cand_idx[cand_ptr[q]:cand_ptr[q + 1]]] = False
        if cand.size == 0:
            continue
        sc = acc[cand] / (norms[q] * norms[cand])
        keep = sc > 0.0
        cand, sc = cand[keep], sc[keep]
        order = np.argsort(-sc, kind="stable")[:k]
        nbrs[q, :order.size] = cand[order]
        scores[q, :order.size] = sc[order]
    return nbrs, scores


def _normalize(x, kind):
    m = x.size
    mn, mx = x.min(), x.max()
    if kind == 0:
        if mx == mn:
            return np.full(m, 0.5)
        return (x - mn) / (mx - mn)
    if mx == mn:
        return np.zeros(m)
    mu = np.cumsum(x)[-1] / m
    d = x - mu
    sigma = math.sqrt(np.cumsum(d * d)[-1] / (m - 1))
    if sigma == 0.0:
        return np.zeros(m)
    return d / sigma


def select_edges(gptr, gidx, simt, simc, weight, alpha, norm_kind, keep):
    n = gptr.shape[0] - 1
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    out_ptr[1:] = np.cumsum(keep)
    out = np.empty(out_ptr[-1], dtype=np.int64)
    for i in range(n):
        lo, hi = gptr[i], gptr[i + 1]
        if lo == hi:
            continue
        nt = _normalize(simt[lo:hi], norm_kind)
        nc = _normalize(simc[lo:hi], norm_kind)
        blended = (alpha * nt + (1.0 - alpha) * nc) * weight[lo:hi]
        order = np.argsort(-blended, kind="stable")[:keep[i]]
        out[out_ptr[i]:out_ptr[i + 1]] = gidx[lo:hi][order]
    return out_ptr, out


def label_propagation(indptr, indices, weights, order, max_sweeps):
    n = indptr.shape[0] - 1
    labels = np.arange(n, dtype=np.int64)
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        changed = False
        for v in order:
            lo, hi = indptr[v], indptr[v + 1]
            if lo == hi:
                continue
            nl = labels[indices[lo:hi]]
            uniq, inv = np.unique(nl, return_inverse=True)
            tally = np.zeros(uniq.size)
            for j in range(inv.size):
                tally[inv[j]] += weights[lo + j]
            best = uniq[int(np.argmax(tally))]
            if best != labels[v]:
                labels[v] = best
                changed = True
        if not changed:
            break
    return labels, sweeps


def row_sqnorms(indptr, data):
    # walk rows column-position by column-position so each row sums sequentially
    n = indptr.shape[0] - 1
    lengths = np.diff(indptr)
    out = np.zeros(n)
    sq = data * data
    for j in range(int(lengths.max()) if n else 0):
        rows = np.flatnonzero(lengths > j)
        out[rows] += sq[indptr[rows] + j]
    return out
