"""numba kernels. Results are bit-identical to :mod:`codicil._accel.numpy_impl`."""
from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S63 = np.uint64(63)
_U64_MAX = np.uint64(0xFFFFFFFFFFFFFFFF)

# per-block scratch arrays are O(n); blocks amortize them over many queries
_BLOCK = 256


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def mix64(z):
    out = np.empty(z.shape[0], dtype=np.uint64)
    for i in range(z.shape[0]):
        out[i] = _mix64(np.uint64(z[i]))
    return out


@njit(cache=True, parallel=True)
def minhash_rows(indptr, indices, mult, add):
    n = indptr.shape[0] - 1
    h = mult.shape[0]
    out = np.empty((n, h), dtype=np.uint64)
    for i in prange(n):
        for t in range(h):
            out[i, t] = _U64_MAX
        for p in range(indptr[i], indptr[i + 1]):
            y = _mix64(np.uint64(indices[p]))
            for t in range(h):
                v = y * mult[t] + add[t]
                if v < out[i, t]:
                    out[i, t] = v
    return out


@njit(cache=True, parallel=True)
def simhash_rows(indptr, indices, data, seed_key, bits):
    n = indptr.shape[0] - 1
    out = np.ones((n, bits), dtype=np.uint8)
    seed = np.uint64(seed_key)
    for i in prange(n):
        lo = indptr[i]
        hi = indptr[i + 1]
        if lo == hi:
            continue
        dots = np.zeros(bits)
        for p in range(lo, hi):
            key = _mix64(np.uint64(indices[p]) * GOLDEN + seed)
            w = data[p]
            for b in range(bits):
                z = _mix64(key + np.uint64(b) * _M2)
                if (z >> _S63) == 0:
                    dots[b] += w * 1.0
                else:
                    dots[b] += w * -1.0
        for b in range(bits):
            out[i, b] = 1 if dots[b] >= 0.0 else 0
    return out


@njit(cache=True, parallel=True)
def pair_cosine(indptr, indices, data, norms, u, v):
    m = u.shape[0]
    out = np.zeros(m)
    for e in prange(m):
        a = u[e]
        b = v[e]
        denom = norms[a] * norms[b]
        if denom <= 0.0:
            continue
        p, pe = indptr[a], indptr[a + 1]
        q, qe = indptr[b], indptr[b + 1]
        dot = 0.0
        while p < pe and q < qe:
            ta = indices[p]
            tb = indices[q]
            if ta == tb:
                dot += data[p] * data[q]
                p += 1
                q += 1
            elif ta < tb:
                p += 1
            else:
                q += 1
        out[e] = dot / denom
    return out


@njit(cache=True, parallel=True)
def pair_jaccard(indptr, indices, u, v):
    m = u.shape[0]
    out = np.zeros(m)
    for e in prange(m):
        a = u[e]
        b = v[e]
        p, pe = indptr[a], indptr[a + 1]
        q, qe = indptr[b], indptr[b + 1]
        inter = 0
        while p < pe and q < qe:
            ta = indices[p]
            tb = indices[q]
            if ta == tb:
                inter += 1
                p += 1
                q += 1
            elif ta < tb:
                p += 1
            else:
                q += 1
        union = (pe - indptr[a]) + (qe - indptr[b]) - inter
        if union > 0:
            out[e] = inter / union
    return out


@njit(cache=True, parallel=True)
def pair_agreement(sig, valid, u, v):
    m = u.shape[0]
    width = sig.shape[1]
    out = np.zeros(m)
    for e in prange(m):
        a = u[e]
        b = v[e]
        if not (valid[a] and valid[b]):
            continue
        same = 0
        for t in range(width):
            if sig[a, t] == sig[b, t]:
                same += 1
        out[e] = same / width
    return out


@njit(cache=True, parallel=True)
def topk_cosine(indptr, indices, data, norms, post_ptr, post_rows, post_data,
                k, cand_ptr, cand_idx, restrict):
    n = indptr.shape[0] - 1
    nbrs = np.full((n, k), -1, dtype=np.int64)
    scores = np.zeros((n, k))
    nblocks = (n + _BLOCK - 1) // _BLOCK
    for blk in prange(nblocks):
        acc = np.zeros(n)
        allowed = np.zeros(n, dtype=np.bool_)
        touched = np.empty(n, dtype=np.int64)
        for q in range(blk * _BLOCK, min(n, (blk + 1) * _BLOCK)):
            lo, hi = indptr[q], indptr[q + 1]
            if lo == hi or norms[q] == 0.0:
                continue
            nt = 0
            for p in range(lo, hi):
                wq = data[p]
                c = indices[p]
                for r in range(post_ptr[c], post_ptr[c + 1]):
                    j = post_rows[r]
                    if acc[j] == 0.0:
                        touched[nt] = j
                        nt += 1
                    acc[j] += wq * post_data[r]
            if restrict:
                for r in range(cand_ptr[q], cand_ptr[q + 1]):
                    allowed[cand_idx[r]] = True
            ids = np.sort(touched[:nt])
            cnt = 0
            for t in range(nt):
                j = ids[t]
                if j != q and acc[j] > 0.0 and (allowed[j] or not restrict):
                    ids[cnt] = j
                    cnt += 1
            ids = ids[:cnt]
            sc = np.empty(cnt)
            for t in range(cnt):
                sc[t] = acc[ids[t]] / (norms[q] * norms[ids[t]])
            sel = 0
            if cnt > 0:
                order = np.argsort(-sc, kind="mergesort")
                for t in range(cnt):
                    if sel == k:
                        break
                    s = sc[order[t]]
                    if s > 0.0:
                        nbrs[q, sel] = ids[order[t]]
                        scores[q, sel] = s
                        sel += 1
            for t in range(nt):
                acc[touched[t]] = 0.0
            if restrict:
                for r in range(cand_ptr[q], cand_ptr[q + 1]):
                    allowed[cand_idx[r]] = False
    return nbrs, scores


@njit(cache=True)
def _normalize(x, kind):
    m = x.shape[0]
    mn = x[0]
    mx = x[0]
    for t in range(1, m):
        if x[t] < mn:
            mn = x[t]
        if x[t] > mx:
            mx = x[t]
    out = np.empty(m)
    if kind == 0:
        if mx == mn:
            out[:] = 0.5
            return out
        for t in range(m):
            out[t] = (x[t] - mn) / (mx - mn)
        return out
    if mx == mn:
        out[:] = 0.0
        return out
    s = 0.0
    for t in range(m):
        s += x[t]
    mu = s / m
    ss = 0.0
    for t in range(m):
        d = x[t] - mu
        ss += d * d
    sigma = math.sqrt(ss / (m - 1))
    if sigma == 0.0:
        # spread below what squared deviations can resolve
        out[:] = 0.0
        return out
    for t in range(m):
        out[t] = (x[t] - mu) / sigma
    return out


@njit(cache=True, parallel=True)
def select_edges(gptr, gidx, simt, simc, weight, alpha, norm_kind, keep):
    n = gptr.shape[0] - 1
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        out_ptr[i + 1] = out_ptr[i] + keep[i]
    out = np.empty(out_ptr[n], dtype=np.int64)
    for i in prange(n):
        lo, hi = gptr[i], gptr[i + 1]
        if lo == hi:
            continue
        nt = _normalize(simt[lo:hi], norm_kind)
        nc = _normalize(simc[lo:hi], norm_kind)
        blended = np.empty(hi - lo)
        for t in range(hi - lo):
            blended[t] = (alpha * nt[t] + (1.0 - alpha) * nc[t]) * weight[lo + t]
        order = np.argsort(-blended, kind="mergesort")
        base = out_ptr[i]
        for t in range(keep[i]):
            out[base + t] = gidx[lo + order[t]]
    return out_ptr, out


@njit(cache=True)
def label_propagation(indptr, indices, weights, order, max_sweeps):
    n = indptr.shape[0] - 1
    labels = np.arange(n)
    tally = np.zeros(n)
    seen = np.empty(n, dtype=np.int64)
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        changed = False
        for v in order:
            lo, hi = indptr[v], indptr[v + 1]
            if lo == hi:
                continue
            ns = 0
            for p in range(lo, hi):
                lab = labels[indices[p]]
                if tally[lab] == 0.0:
                    seen[ns] = lab
                    ns += 1
                tally[lab] += weights[p]
            best = -1
            best_w = -1.0
            for t in range(ns):
                lab = seen[t]
                w = tally[lab]
                if w > best_w or (w == best_w and lab < best):
                    best = lab
                    best_w = w
                tally[lab] = 0.0
            if best != labels[v]:
                labels[v] = best
                changed = True
        if not changed:
            break
    return labels, sweeps


@njit(cache=True, parallel=True)
def row_sqnorms(indptr, data):
    n = indptr.shape[0] - 1
    out = np.zeros(n)
    for i in prange(n):
        s = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            s += data[p] * data[p]
        out[i] = s
    return out
