"""Straight-line reference for content-aware edge sampling.

Deliberately naive: dicts and sets, one vertex at a time, quadratic scans.
Floating point sums run left to right in ascending term order with plain
loops, matching the accumulation order the library guarantees, so results
compare exactly rather than approximately.
"""
from __future__ import annotations

import math


def _sum(xs):
    total = 0.0
    for x in xs:
        total += x
    return total


def tfidf(vectors):
    """vectors: list of {term: count}. Returns list of {term: weight}."""
    n = len(vectors)
    totals = {}
    for vec in vectors:
        for c, tf in vec.items():
            totals[c] = totals.get(c, 0.0) + tf
    out = []
    for vec in vectors:
        out.append({c: math.sqrt(tf) * math.log(1.0 + n / totals[c]) for c, tf in vec.items() if tf > 0})
    return out


def truncate(vec, m):
    if m is None or len(vec) <= m:
        return dict(vec)
    ranked = sorted(vec.items(), key=lambda kv: (-kv[1], kv[0]))[:m]
    return dict(ranked)


def norm(vec):
    return math.sqrt(_sum(vec[c] * vec[c] for c in sorted(vec)))


def cosine(x, y):
    nx, ny = norm(x), norm(y)
    if nx == 0.0 or ny == 0.0:
        return 0.0
    shared = sorted(set(x) & set(y))
    return _sum(x[c] * y[c] for c in shared) / (nx * ny)


def jaccard(a, b):
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def adjacency(n, edges):
    adj = {v: set() for v in range(n)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def content_edges(vectors, k, m=None, scope="full", topo_edges=()):
    """Top-k cosine neighbors per vertex by full pairwise scan."""
    n = len(vectors)
    weighted = [truncate(v, m) for v in tfidf(vectors)]
    adj = adjacency(n, topo_edges)
    edges = set()
    for i in range(n):
        if scope == "1-hop":
            pool = adj[i]
        elif scope == "2-hop":
            pool = set(adj[i])
            for j in adj[i]:
                pool |= adj[j]
        else:
            pool = set(range(n))
        scored = []
        for j in sorted(pool):
            if j == i:
                continue
            s = cosine(weighted[i], weighted[j])
            if s > 0.0:
                scored.append((-s, j))
        scored.sort()
        for _, j in scored[:k]:
            edges.add((min(i, j), max(i, j)))
    return edges


def zero_one(xs):
    lo, hi = min(xs), max(xs)
    if lo == hi:
        return [0.5] * len(xs)
    return [(x - lo) / (hi - lo) for x in xs]


def z_norm(xs):
    lo, hi = min(xs), max(xs)
    if lo == hi:
        return [0.0] * len(xs)
    mu = _sum(xs) / len(xs)
    d = [x - mu for x in xs]
    sd = math.sqrt(_sum(t * t for t in d) / (len(xs) - 1))
    if sd == 0.0:
        return [0.0] * len(xs)
    return [t / sd for t in d]


def sample(n, topo_edges, vectors, content, *, alpha=0.5, similarity="cosine-exact",
           normalizer="zero-one", neighborhood="closed", retention="union", weights=None):
    """Algorithm walk: union, per-vertex scoring, top ceil(sqrt(|Gamma|)) retention.

    ``weights`` maps canonical topological edges to weights; content-only
    edges count as weight 1. Returns the sampled edge set.
    """
    topo = adjacency(n, topo_edges)
    union = {(min(u, v), max(u, v)) for u, v in topo_edges} | set(content)
    gamma = adjacency(n, union)
    weighted = tfidf(vectors)
    struct = {v: (topo[v] | {v}) if neighborhood == "closed" else set(topo[v]) for v in range(n)}
    norm_fn = zero_one if normalizer == "zero-one" else z_norm

    def sim_t(a, b):
        if similarity == "cosine-exact":
            x = {u: 1.0 for u in struct[a]}
            y = {u: 1.0 for u in struct[b]}
            return cosine(x, y)
        return jaccard(struct[a], struct[b])

    def sim_c(a, b):
        if similarity == "cosine-exact":
            return cosine(weighted[a], weighted[b])
        return jaccard({c for c, tf in vectors[a].items() if tf > 0}, {c for c, tf in vectors[b].items() if tf > 0})

    picks = {}
    for i in range(n):
        nbrs = sorted(gamma[i])
        if not nbrs:
            continue
        st = norm_fn([sim_t(i, j) for j in nbrs])
        sc = norm_fn([sim_c(i, j) for j in nbrs])
        scores = []
        for idx, j in enumerate(nbrs):
            s = alpha * st[idx] + (1.0 - alpha) * sc[idx]
            w = 1.0
            if weights is not None:
                w = weights.get((min(i, j), max(i, j)), 1.0)
            scores.append((-(s * w), j))
        scores.sort()
        keep = math.isqrt(len(nbrs))
        if keep * keep < len(nbrs):
            keep += 1
        for _, j in scores[:keep]:
            e = (min(i, j), max(i, j))
            picks[e] = picks.get(e, 0) + 1
    if retention == "mutual":
        return {e for e, c in picks.items() if c == 2}
    return set(picks)
