"""Content-aware edge sampling.

The pipeline: content edges from top-k TF-IDF cosine neighbors, union with
the topological edges, then every vertex keeps its ceil(sqrt(degree))
best-scoring union edges, where an edge's score blends normalized structural
similarity (overlap of topological neighbor sets) with normalized content
similarity.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from . import _accel
from .graph import Graph, canonical_edges
from .similarity import (DEFAULT_BITS, DEFAULT_HASHES, NORMALIZERS, minhash_matrix,
                         normalize, simhash_matrix)
from .textindex import FULL, CosineIndex, TermVectorStore, build_content_edges, parse_scope, tfidf_matrix

logger = logging.getLogger(__name__)

COSINE = "cosine-exact"
COSINE_SIMHASH = "cosine-simhash"
JACCARD = "jaccard-exact"
JACCARD_MINHASH = "jaccard-minhash"
SIMILARITY_KINDS = (COSINE, COSINE_SIMHASH, JACCARD, JACCARD_MINHASH)
_SIM_ALIASES = {"cos": COSINE, "cos-lsh": COSINE_SIMHASH, "jac": JACCARD, "jac-mh": JACCARD_MINHASH}
_NORM_ALIASES = {"zo": "zero-one", "z": "z-norm"}

# sub-seed streams fanned out from the run seed
STREAM_MINHASH_TOPO = 1
STREAM_MINHASH_CONTENT = 2
STREAM_SIMHASH_TOPO = 3
STREAM_SIMHASH_CONTENT = 4
STREAM_CLUSTERER = 5


def derive_seed(seed: int, stream: int) -> int:
    """Deterministic 64-bit sub-seed for one randomness consumer."""
    words = np.random.SeedSequence(int(seed), spawn_key=(int(stream),)).generate_state(2, np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


@dataclass(frozen=True)
class SamplerConfig:
    k: int = 50
    alpha: float = 0.5
    similarity: str = COSINE
    normalizer: str = "zero-one"
    scope: str = FULL
    m: int | None = None
    hashes: int = DEFAULT_HASHES
    bits: int = DEFAULT_BITS
    seed: int = 0
    structural_neighborhood: str = "closed"
    retention: str = "union"

    def __post_init__(self):
        object.__setattr__(self, "similarity", _SIM_ALIASES.get(self.similarity, self.similarity))
        object.__setattr__(self, "normalizer", _NORM_ALIASES.get(self.normalizer, self.normalizer))
        object.__setattr__(self, "scope", parse_scope(self.scope))
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.hashes < 1 or self.bits < 1:
            raise ValueError("hashes and bits must be >= 1")
        if self.m is not None and self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.similarity not in SIMILARITY_KINDS:
            raise ValueError(f"unknown similarity {self.similarity!r}")
        if self.normalizer not in NORMALIZERS:
            raise ValueError(f"unknown normalizer {self.normalizer!r}")
        if self.structural_neighborhood not in ("open", "closed"):
            raise ValueError("structural_neighborhood must be 'open' or 'closed'")
        if self.retention not in ("union", "mutual"):
            raise ValueError("retention must be 'union' or 'mutual'")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return asdict(self)


def build_edge_union(topo, content) -> np.ndarray:
    """Canonical union of two undirected edge sets (Graphs or ``(m, 2)`` arrays)."""
    a = topo.edges if isinstance(topo, Graph) else np.asarray(topo, dtype=np.int64).reshape(-1, 2)
    b = content.edges if isinstance(content, Graph) else np.asarray(content, dtype=np.int64).reshape(-1, 2)
    edges, _, _, _ = canonical_edges(np.concatenate([a, b]))
    return edges


def retention_count(degree: int) -> int:
    """ceil(sqrt(degree)), the number of union edges a vertex keeps."""
    if degree < 1:
        raise ValueError("retention is undefined for degree 0")
    r = math.isqrt(degree)
    return r if r * r == degree else r + 1


def retention_counts(degrees: np.ndarray) -> np.ndarray:
    d = np.asarray(degrees, dtype=np.int64)
    r = np.floor(np.sqrt(d)).astype(np.int64)
    r -= r * r > d
    r += (r + 1) * (r + 1) <= d
    return r + (r * r < d)


class SimilarityContext:
    """Per-run precomputation: structural sets, content vectors, and signatures.

    Signatures are computed once per vertex, so an estimated pair costs
    O(hashes) or O(bits).
    """

    def __init__(self, topo: Graph, store: TermVectorStore, cfg: SamplerConfig):
        if store.corpus_size != topo.vertex_count:
            raise ValueError(f"term store has {store.corpus_size} vectors for {topo.vertex_count} vertices")
        self.cfg = cfg
        n = topo.vertex_count
        A = topo.adjacency(weighted=False)
        if cfg.structural_neighborhood == "closed":
            A = (A + sp.identity(n, format="csr")).tocsr()
        A.sort_indices()
        self.topo_ptr = A.indptr.astype(np.int64)
        self.topo_idx = A.indices.astype(np.int64)
        self.topo_data = np.ones(self.topo_idx.size)
        self.content_ptr = store.counts.indptr.astype(np.int64)
        self.content_idx = store.counts.indices.astype(np.int64)
        kind = cfg.similarity
        if kind == COSINE:
            tfidf = tfidf_matrix(store)
            self.content_data = tfidf.data
            self.topo_norms = np.sqrt(_accel.row_sqnorms(self.topo_ptr, self.topo_data))
            self.content_norms = np.sqrt(_accel.row_sqnorms(self.content_ptr, self.content_data))
        elif kind == COSINE_SIMHASH:
            tfidf = tfidf_matrix(store)
            self.topo_sig = simhash_matrix(self.topo_ptr, self.topo_idx, self.topo_data, cfg.bits,
                                           derive_seed(cfg.seed, STREAM_SIMHASH_TOPO))
            self.content_sig = simhash_matrix(self.content_ptr, self.content_idx, tfidf.data, cfg.bits,
                                              derive_seed(cfg.seed, STREAM_SIMHASH_CONTENT))
        elif kind == JACCARD_MINHASH:
            self.topo_sig = minhash_matrix(self.topo_ptr, self.topo_idx, cfg.hashes,
                                           derive_seed(cfg.seed, STREAM_MINHASH_TOPO))
            self.content_sig = minhash_matrix(self.content_ptr, self.content_idx, cfg.hashes,
                                              derive_seed(cfg.seed, STREAM_MINHASH_CONTENT))

    def structural(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        kind = self.cfg.similarity
        if kind == COSINE:
            return _accel.pair_cosine(self.topo_ptr, self.topo_idx, self.topo_data, self.topo_norms, u, v)
        if kind == JACCARD:
            return _accel.pair_jaccard(self.topo_ptr, self.topo_idx, u, v)
        return self._estimated(self.topo_sig, u, v)

    def content(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        kind = self.cfg.similarity
        if kind == COSINE:
            return _accel.pair_cosine(self.content_ptr, self.content_idx, self.content_data,
                                      self.content_norms, u, v)
        if kind == JACCARD:
            return _accel.pair_jaccard(self.content_ptr, self.content_idx, u, v)
        return self._estimated(self.content_sig, u, v)

    def _estimated(self, signed, u, v):
        sig, valid = signed
        agree = _accel.pair_agreement(sig, valid, u, v)
        if self.cfg.similarity == JACCARD_MINHASH:
            return agree
        ok = valid[u] & valid[v]
        return np.where(ok, np.cos(np.pi * (1.0 - agree)), 0.0)


@dataclass(frozen=True)
class ScoredNeighborhood:
    owner: int
    neighbors: np.ndarray
    structural: np.ndarray
    content: np.ndarray
    structural_norm: np.ndarray
    content_norm: np.ndarray
    blended: np.ndarray


def score_neighborhood(g_topo: Graph, term_store: TermVectorStore, cfg: SamplerConfig, v: int,
                       gamma, context: SimilarityContext | None = None) -> ScoredNeighborhood:
    """Structural, content and blended scores of ``v`` against each vertex in ``gamma``."""
    gamma = np.asarray(gamma, dtype=np.int64)
    if gamma.size == 0:
        raise ValueError("gamma must be nonempty")
    ctx = context or SimilarityContext(g_topo, term_store, cfg)
    owner = np.full(gamma.size, v, dtype=np.int64)
    st = ctx.structural(owner, gamma)
    sc = ctx.content(owner, gamma)
    nt = normalize(st, cfg.normalizer)
    nc = normalize(sc, cfg.normalizer)
    return ScoredNeighborhood(v, gamma, st, sc, nt, nc, cfg.alpha * nt + (1.0 - cfg.alpha) * nc)


@dataclass(frozen=True, eq=False)
class Selection:
    """Per-vertex retention decisions over the edge union.

    ``chosen[chosen_ptr[i]:chosen_ptr[i+1]]`` are the neighbors vertex ``i``
    selected, best first.
    """

    union: Graph
    chosen_ptr: np.ndarray
    chosen: np.ndarray

    def selected_count(self) -> np.ndarray:
        return np.diff(self.chosen_ptr)

    def pairs(self) -> np.ndarray:
        owners = np.repeat(np.arange(self.union.vertex_count, dtype=np.int64), self.selected_count())
        return np.stack([owners, self.chosen], axis=1)


def select_edges(g_topo: Graph, content_edges, term_store: TermVectorStore, cfg: SamplerConfig,
                 *, weighted: bool = False, context: SimilarityContext | None = None) -> Selection:
    n = g_topo.vertex_count
    union_edges = build_edge_union(g_topo, content_edges)
    if union_edges.size and union_edges.max() >= n:
        raise ValueError("content edge endpoint outside the graph's vertex range")
    union = Graph(n, union_edges, _union_weights(g_topo, union_edges) if weighted else None)
    ctx = context or SimilarityContext(g_topo, term_store, cfg)
    gptr, gidx = union.indptr, union.indices
    owners = np.repeat(np.arange(n, dtype=np.int64), np.diff(gptr))
    simt = ctx.structural(owners, gidx)
    simc = ctx.content(owners, gidx)
    w = union.csr_weights if weighted else np.ones(gidx.size)
    degrees = np.diff(gptr)
    keep = np.where(degrees > 0, retention_counts(np.maximum(degrees, 1)), 0)
    chosen_ptr, chosen = _accel.select_edges(gptr, gidx, simt, simc, w, float(cfg.alpha),
                                             NORMALIZERS[cfg.normalizer], keep)
    return Selection(union, chosen_ptr, chosen)


def _union_weights(g_topo: Graph, union_edges: np.ndarray) -> np.ndarray:
    """Topological weight for union edges present in E_t, 1 for content-only edges."""
    n = max(g_topo.vertex_count, 1)
    w = np.ones(union_edges.shape[0])
    if g_topo.edge_count:
        keys = union_edges[:, 0] * n + union_edges[:, 1]
        tkeys = g_topo.edges[:, 0] * n + g_topo.edges[:, 1]
        pos = np.searchsorted(tkeys, keys)
        pos = np.minimum(pos, tkeys.size - 1)
        hit = tkeys[pos] == keys
        w[hit] = g_topo.edge_weights()[pos[hit]]
    return w


def _selection_graph(sel: Selection, cfg: SamplerConfig, weighted: bool) -> Graph:
    pairs = sel.pairs()
    edges, counts, _, _ = canonical_edges(pairs, np.ones(pairs.shape[0]))
    if cfg.retention == "mutual":
        edges = edges[counts >= 2]
    w = None
    if weighted:
        u = sel.union
        keys = u.edges[:, 0] * u.vertex_count + u.edges[:, 1]
        pos = np.searchsorted(keys, edges[:, 0] * u.vertex_count + edges[:, 1])
        w = u.weights[pos]
    return Graph(sel.union.vertex_count, edges, w)


def sample_edges(g_topo: Graph, content_edges, term_store: TermVectorStore, cfg: SamplerConfig,
                 *, context: SimilarityContext | None = None) -> Graph:
    """The sampled graph: every vertex's top ceil(sqrt(|Gamma|)) union edges.

    Ranking is by descending blended score, ties to the smaller neighbor id.
    With ``retention="union"`` an edge survives if either endpoint picks it.
    """
    sel = select_edges(g_topo, content_edges, term_store, cfg, context=context)
    return _selection_graph(sel, cfg, weighted=False)


def sample_edges_weighted(g_topo: Graph, content_edges, term_store: TermVectorStore, cfg: SamplerConfig,
                          *, context: SimilarityContext | None = None) -> Graph:
    """As :func:`sample_edges`, but each blended score is multiplied by the edge weight.

    Content-only edges weigh 1. The sampled graph keeps these weights.
    """
    sel = select_edges(g_topo, content_edges, term_store, cfg, weighted=True, context=context)
    return _selection_graph(sel, cfg, weighted=True)


@dataclass
class CodicilResult:
    clustering: "object"
    content_edges: np.ndarray
    union_edge_count: int
    sample: Graph
    timings_ms: dict[str, float] = field(default_factory=dict)

    @property
    def counts(self) -> dict[str, int]:
        return {
            "content": int(self.content_edges.shape[0]),
            "union": self.union_edge_count,
            "sample": self.sample.edge_count,
        }


def align(g_topo: Graph, store: TermVectorStore | None) -> tuple[Graph, TermVectorStore]:
    """Pad the graph or the store so both cover the same vertex universe."""
    if store is None:
        return g_topo, TermVectorStore.empty(g_topo.vertex_count)
    n = max(g_topo.vertex_count, store.corpus_size)
    if g_topo.vertex_count < n:
        g_topo = Graph(n, g_topo.edges, g_topo.weights)
    return g_topo, store.resized(n)


def content_stage(g_topo: Graph, store: TermVectorStore, cfg: SamplerConfig) -> np.ndarray:
    if store.num_terms == 0:
        return np.zeros((0, 2), dtype=np.int64)
    index = CosineIndex(store, cfg.m)
    return build_content_edges(store, cfg.k, cfg.scope, g_topo, index=index)


def sampling_stage(g_topo: Graph, content_edges, store: TermVectorStore, cfg: SamplerConfig,
                   weighted: bool | None = None) -> Graph:
    if weighted is None:
        weighted = g_topo.is_weighted
    fn = sample_edges_weighted if weighted else sample_edges
    return fn(g_topo, content_edges, store, cfg)


def codicil(g_topo: Graph, term_store: TermVectorStore | None, cfg: SamplerConfig, l: int,
            clusterer: str | Callable = "mcl", **clusterer_options) -> CodicilResult:
    """Content edges, edge union, biased sampling, then a content-blind clusterer."""
    from .cluster import get_clusterer

    if l < 1:
        raise ValueError("l must be positive")
    cluster_fn = get_clusterer(clusterer, **clusterer_options) if isinstance(clusterer, str) else clusterer
    g_topo, store = align(g_topo, term_store)
    timings = {}

    t0 = time.perf_counter()
    content = content_stage(g_topo, store, cfg)
    t1 = time.perf_counter()
    union_count = build_edge_union(g_topo, content).shape[0]
    t2 = time.perf_counter()
    sample = sampling_stage(g_topo, content, store, cfg)
    t3 = time.perf_counter()
    clustering = cluster_fn(sample, l, derive_seed(cfg.seed, STREAM_CLUSTERER))
    t4 = time.perf_counter()

    timings["content_edges"] = (t1 - t0) * 1e3
    timings["union"] = (t2 - t1) * 1e3
    timings["sampling"] = (t3 - t2) * 1e3
    timings["clustering"] = (t4 - t3) * 1e3
    logger.info("content=%d union=%d sample=%d", content.shape[0], union_count, sample.edge_count)
    return CodicilResult(clustering, content, int(union_count), sample, timings)
