"""Term vectors, TF-IDF weighting, truncation and top-k content neighbors."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import _accel
from ._io import FormatError, Source, open_sink, open_text, source_name
from .graph import Graph, canonical_edges

logger = logging.getLogger(__name__)

FULL = "full"
ONE_HOP = "1-hop"
TWO_HOP = "2-hop"
_SCOPE_ALIASES = {"full": FULL, "1-hop": ONE_HOP, "1hop": ONE_HOP, "2-hop": TWO_HOP, "2hop": TWO_HOP}


def parse_scope(scope: str) -> str:
    try:
        return _SCOPE_ALIASES[scope]
    except KeyError:
        raise ValueError(f"unknown scope {scope!r}; expected full, 1-hop or 2-hop") from None


class TermVectorStore:
    """Raw term counts for every vertex, held as an ``n x vocabulary`` CSR matrix."""

    def __init__(self, counts, vocabulary: dict[int, str] | None = None):
        counts = sp.csr_matrix(counts, dtype=np.float64)
        counts.sum_duplicates()
        counts.eliminate_zeros()
        counts.sort_indices()
        if counts.nnz and counts.data.min() < 0:
            raise ValueError("term counts must be non-negative")
        self.counts = counts
        self.vocabulary = vocabulary or {}

    @classmethod
    def from_dicts(cls, vectors, num_terms: int | None = None) -> "TermVectorStore":
        rows, cols, vals = [], [], []
        for i, vec in enumerate(vectors):
            for c, tf in vec.items():
                if tf:
                    rows.append(i)
                    cols.append(int(c))
                    vals.append(float(tf))
        width = max([num_terms or 0, max(cols) + 1 if cols else 0])
        m = sp.csr_matrix((vals, (rows, cols)), shape=(len(vectors), width))
        return cls(m)

    @classmethod
    def empty(cls, n: int) -> "TermVectorStore":
        return cls(sp.csr_matrix((n, 0)))

    @property
    def corpus_size(self) -> int:
        return self.counts.shape[0]

    @property
    def num_terms(self) -> int:
        return self.counts.shape[1]

    @cached_property
    def doc_freq(self) -> np.ndarray:
        return np.bincount(self.counts.indices, minlength=self.num_terms)

    @cached_property
    def term_totals(self) -> np.ndarray:
        """Corpus-wide raw count of each term."""
        return np.bincount(self.counts.indices, weights=self.counts.data, minlength=self.num_terms)

    def vector(self, i: int) -> dict[int, float]:
        lo, hi = self.counts.indptr[i], self.counts.indptr[i + 1]
        return dict(zip(self.counts.indices[lo:hi].tolist(), self.counts.data[lo:hi].tolist()))

    def terms(self, i: int) -> np.ndarray:
        return self.counts.indices[self.counts.indptr[i]:self.counts.indptr[i + 1]]

    def resized(self, n: int) -> "TermVectorStore":
        """Pad with empty vectors up to ``n`` rows."""
        if n < self.corpus_size:
            raise ValueError(f"cannot shrink a store of {self.corpus_size} vectors to {n}")
        if n == self.corpus_size:
            return self
        pad = sp.csr_matrix((n - self.corpus_size, self.num_terms))
        return TermVectorStore(sp.vstack([self.counts, pad], format="csr"), self.vocabulary)

    def __len__(self):
        return self.corpus_size


@dataclass(frozen=True, eq=False)
class WeightedVector:
    """Sparse non-negative vector; ``terms`` ascending, no zero weights."""

    terms: np.ndarray
    weights: np.ndarray

    @cached_property
    def norm(self) -> float:
        return math.sqrt(float(_accel.row_sqnorms(np.array([0, self.weights.size]), self.weights)[0]))

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.terms.tolist(), self.weights.tolist()))

    def __len__(self):
        return int(self.terms.size)


def idf_weights(store: TermVectorStore) -> np.ndarray:
    """log(1 + |T| / total count of c), natural log; 0 for unused terms."""
    n = store.corpus_size
    return np.array([math.log(1.0 + n / t) if t > 0 else 0.0 for t in store.term_totals.tolist()])


def tfidf_weight(store: TermVectorStore, vertex: int, idf: np.ndarray | None = None) -> WeightedVector:
    if idf is None:
        idf = idf_weights(store)
    lo, hi = store.counts.indptr[vertex], store.counts.indptr[vertex + 1]
    terms = store.counts.indices[lo:hi].astype(np.int64)
    return WeightedVector(terms, np.sqrt(store.counts.data[lo:hi]) * idf[terms])


def truncate_top_m(v: WeightedVector, m: int) -> WeightedVector:
    """Keep the ``m`` heaviest entries; ties go to the smaller term id."""
    if m < 1:
        raise ValueError("m must be positive")
    if len(v) <= m:
        return v
    keep = np.sort(np.lexsort((v.terms, -v.weights))[:m])
    return WeightedVector(v.terms[keep], v.weights[keep])


def tfidf_matrix(store: TermVectorStore, m: int | None = None) -> sp.csr_matrix:
    """TF-IDF weights for every vertex, optionally truncated to ``m`` per row."""
    counts = store.counts
    idf = idf_weights(store)
    data = np.sqrt(counts.data) * idf[counts.indices]
    rows = np.repeat(np.arange(counts.shape[0]), np.diff(counts.indptr))
    cols = counts.indices.astype(np.int64)
    if m is not None:
        if m < 1:
            raise ValueError("m must be positive")
        order = np.lexsort((cols, -data, rows))
        starts = counts.indptr[:-1][rows[order]]
        rank = np.arange(order.size) - starts
        keep = np.sort(order[rank < m])
        rows, cols, data = rows[keep], cols[keep], data[keep]
    out = sp.csr_matrix((data, (rows, cols)), shape=counts.shape)
    out.sort_indices()
    return out


def row_norms(mat: sp.csr_matrix) -> np.ndarray:
    return np.sqrt(_accel.row_sqnorms(mat.indptr.astype(np.int64), mat.data))


def scope_candidates(base_graph: Graph, scope: str) -> tuple[np.ndarray, np.ndarray]:
    """CSR of allowed content neighbors for the 1-hop / 2-hop scopes (self excluded)."""
    scope = parse_scope(scope)
    if scope == ONE_HOP:
        return base_graph.indptr, base_graph.indices
    if scope == TWO_HOP:
        A = base_graph.adjacency(weighted=False)
        reach = (A + A @ A).tocsr()
        reach.setdiag(0)
        reach.eliminate_zeros()
        reach.sort_indices()
        return reach.indptr.astype(np.int64), reach.indices.astype(np.int64)
    raise ValueError("full scope has no candidate restriction")


class CosineIndex:
    """Inverted index over (optionally truncated) TF-IDF vectors.

    Scores are exact cosines of the truncated vectors, accumulated
    term-at-a-time over the posting lists.
    """

    def __init__(self, store: TermVectorStore, m: int | None = None):
        self.m = m
        self.matrix = tfidf_matrix(store, m)
        self.norms = row_norms(self.matrix)
        csc = self.matrix.tocsc()
        csc.sort_indices()
        self.post_ptr = csc.indptr.astype(np.int64)
        self.post_rows = csc.indices.astype(np.int64)
        self.post_data = csc.data

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def topk(self, k: int, scope: str = FULL, base_graph: Graph | None = None):
        """Ranked neighbors ``(n, k)`` padded with -1, and their cosine scores."""
        if k < 1:
            raise ValueError("k must be positive")
        scope = parse_scope(scope)
        restrict = scope != FULL
        if restrict:
            if base_graph is None:
                raise ValueError(f"scope {scope} requires a base graph")
            if base_graph.vertex_count != self.size:
                raise ValueError("base graph and term store disagree on vertex count")
            cand_ptr, cand_idx = scope_candidates(base_graph, scope)
        else:
            cand_ptr = np.zeros(self.size + 1, dtype=np.int64)
            cand_idx = np.zeros(0, dtype=np.int64)
        return _accel.topk_cosine(
            self.matrix.indptr.astype(np.int64), self.matrix.indices.astype(np.int64),
            self.matrix.data, self.norms, self.post_ptr, self.post_rows, self.post_data,
            int(k), cand_ptr, cand_idx, restrict,
        )


def topk_content_neighbors(store: TermVectorStore, vertex: int, k: int, scope: str = FULL,
                           base_graph: Graph | None = None, m: int | None = None,
                           index: CosineIndex | None = None) -> np.ndarray:
    """Up to ``k`` most cosine-similar vertices, best first, ties by ascending id.

    Vertices with zero similarity are never returned. Pass a prebuilt
    ``index`` to avoid rebuilding it per query.
    """
    if index is None:
        index = CosineIndex(store, m)
    nbrs, _ = index.topk(k, scope, base_graph)
    row = nbrs[vertex]
    return row[row >= 0]


def build_content_edges(store: TermVectorStore, k: int, scope: str = FULL,
                        base_graph: Graph | None = None, m: int | None = None,
                        index: CosineIndex | None = None) -> np.ndarray:
    """Canonical undirected content edges from every vertex to its top-k neighbors."""
    if index is None:
        index = CosineIndex(store, m)
    nbrs, _ = index.topk(k, scope, base_graph)
    src = np.repeat(np.arange(index.size, dtype=np.int64), k)
    dst = nbrs.reshape(-1)
    ok = dst >= 0
    edges, _, _, _ = canonical_edges(np.stack([src[ok], dst[ok]], axis=1))
    return edges


def suggest_k(topo: Graph) -> int:
    """Smallest k with n*k >= |E_t|, so that |E_c| lands near |E_t|."""
    if topo.vertex_count == 0:
        return 1
    return max(1, math.ceil(topo.edge_count / topo.vertex_count))


# -- file formats ------------------------------------------------------------

def read_term_vectors(source: Source, vertex_count: int | None = None) -> TermVectorStore:
    """Parse ``vertex_id term_id:count ...`` lines; vertices without a line are empty."""
    name = source_name(source)
    rows, cols, vals = [], [], []
    seen = set()
    max_v = -1
    with open_text(source) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            head, *items = line.split()
            try:
                v = int(head)
            except ValueError:
                raise FormatError(f"non-integer vertex id {head!r}", lineno, name) from None
            if v < 0:
                raise FormatError(f"negative vertex id {v}", lineno, name)
            if v in seen:
                raise FormatError(f"duplicate line for vertex {v}", lineno, name)
            seen.add(v)
            max_v = max(max_v, v)
            for item in items:
                term, sep, count = item.partition(":")
                try:
                    c, tf = int(term), float(count)
                except ValueError:
                    raise FormatError(f"bad term entry {item!r}", lineno, name) from None
                if not sep or c < 0 or not tf > 0:
                    raise FormatError(f"bad term entry {item!r}", lineno, name)
                rows.append(v)
                cols.append(c)
                vals.append(tf)
    n = max(max_v + 1, vertex_count or 0)
    if vertex_count is not None and max_v >= vertex_count:
        raise FormatError(f"vertex id {max_v} exceeds vertex_count {vertex_count}", None, name)
    width = max(cols) + 1 if cols else 0
    return TermVectorStore(sp.csr_matrix((vals, (rows, cols)), shape=(n, width)))


def _fmt_count(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def write_term_vectors(store: TermVectorStore, sink: Source) -> None:
    c = store.counts
    with open_sink(sink) as fh:
        for i in range(store.corpus_size):
            lo, hi = c.indptr[i], c.indptr[i + 1]
            items = " ".join(f"{t}:{_fmt_count(x)}" for t, x in zip(c.indices[lo:hi].tolist(), c.data[lo:hi].tolist()))
            fh.write(f"{i} {items}\n" if items else f"{i}\n")


def read_vocabulary(source: Source) -> dict[int, str]:
    """``term_id<whitespace>string`` per line."""
    name = source_name(source)
    vocab = {}
    with open_text(source) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            tid, _, word = line.strip().partition("\t") if "\t" in line else line.strip().partition(" ")
            try:
                vocab[int(tid)] = word.strip()
            except ValueError:
                raise FormatError(f"non-integer term id {tid!r}", lineno, name) from None
    return vocab


def write_vocabulary(vocab: dict[int, str], sink: Source) -> None:
    with open_sink(sink) as fh:
        for tid in sorted(vocab):
            fh.write(f"{tid}\t{vocab[tid]}\n")
