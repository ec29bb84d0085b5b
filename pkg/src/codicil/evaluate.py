"""Size-weighted best-match F-score against (possibly overlapping) ground truth."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .cluster import Clustering


def fscore_pair(p, g) -> float:
    """Harmonic mean of precision |p&g|/|p| and recall |p&g|/|g|."""
    p = np.unique(np.asarray(p, dtype=np.int64))
    g = np.unique(np.asarray(g, dtype=np.int64))
    if p.size == 0 or g.size == 0:
        raise ValueError("F-score needs nonempty clusters")
    return _f_from_counts(np.intersect1d(p, g, assume_unique=True).size, p.size, g.size)


def _f_from_counts(inter: int, np_: int, ng: int) -> float:
    if inter == 0:
        return 0.0
    prec = inter / np_
    rec = inter / ng
    return 2.0 * prec * rec / (prec + rec)


def fscore_best(p, truth: Clustering) -> tuple[float, int]:
    """Best F of ``p`` over all ground-truth clusters and the winning id (ties: smallest id)."""
    if len(truth) == 0:
        raise ValueError("ground truth has no clusters")
    best, best_id = -1.0, -1
    for gid, g in enumerate(truth.clusters):
        f = fscore_pair(p, g)
        if f > best:
            best, best_id = f, gid
    return best, best_id


@dataclass
class ClusterScore:
    cluster: int
    size: int
    fscore: float
    matched: int


@dataclass
class EvalReport:
    aggregate: float
    universe_size: int
    per_cluster: list[ClusterScore] = field(default_factory=list)
    size_histogram: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "fscore": self.aggregate,
            "universe_size": self.universe_size,
            "clusters": len(self.per_cluster),
            "size_histogram": {str(k): v for k, v in sorted(self.size_histogram.items())},
            "per_cluster": [vars(c) for c in self.per_cluster],
        }

    def format(self, details: bool = False) -> str:
        lines = [
            f"fscore: {self.aggregate:.6f}",
            f"universe_size: {self.universe_size}",
            f"predicted_clusters: {len(self.per_cluster)}",
            "size_histogram: " + json.dumps({str(k): v for k, v in sorted(self.size_histogram.items())}),
        ]
        if details:
            lines += [f"cluster {c.cluster}: size={c.size} fscore={c.fscore:.6f} matched={c.matched}"
                      for c in self.per_cluster]
        return "\n".join(lines)


def fscore_clustering(pred: Clustering, truth: Clustering, universe_size: int | None = None) -> EvalReport:
    """F(P, G) = sum over predicted p of |p|/|V| * max_g F(p, g).

    Intersections are tallied through a vertex -> ground-truth membership
    table; clusters with an empty intersection score 0, exactly as a full
    pairwise scan would.
    """
    n = pred.vertex_count if universe_size is None else universe_size
    if len(truth) == 0:
        raise ValueError("ground truth has no clusters")
    sizes = pred.sizes()
    if int(sizes.sum()) != n:
        raise ValueError(f"predicted cluster sizes sum to {int(sizes.sum())}, universe has {n} vertices")
    if pred.labels is None:
        raise ValueError("predicted clustering must be disjoint")

    members: dict[int, list[int]] = {}
    for gid, g in enumerate(truth.clusters):
        for v in g.tolist():
            members.setdefault(v, []).append(gid)
    gsizes = truth.sizes().tolist()

    per = []
    total = 0.0
    for pid, p in enumerate(pred.clusters):
        hits = Counter()
        for v in p.tolist():
            for gid in members.get(v, ()):
                hits[gid] += 1
        best, best_id = 0.0, 0
        for gid in sorted(hits):
            f = _f_from_counts(hits[gid], p.size, gsizes[gid])
            if f > best:
                best, best_id = f, gid
        per.append(ClusterScore(pid, int(p.size), best, best_id))
        total += p.size * best
    hist = Counter(int(s) for s in sizes.tolist())
    return EvalReport(total / n if n else 0.0, n, per, dict(hist))
