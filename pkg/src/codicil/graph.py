"""Undirected graph container, edge-list and binary snapshot I/O, diagnostics."""
from __future__ import annotations

import logging
import re
import struct
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ._io import FormatError, Source, open_sink, open_text, source_name

logger = logging.getLogger(__name__)

SNAPSHOT_MAGIC = b"CODICILG"
SNAPSHOT_VERSION = 1
SPECTRUM_CAP = 20_000
ZERO_TOL = 1e-8

_VERTICES_RE = re.compile(r"#\s*vertices\s+(\d+)\s*$")
_WEIGHTED_RE = re.compile(r"#\s*weighted\s*$")


def canonical_edges(pairs, weights=None, *, drop_loops: bool = True):
    """Canonicalize undirected pairs: u < v, lexsorted, duplicates merged.

    Returns ``(edges, weights, n_loops, n_merged)``; merged weights are summed.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    w = None if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    loops = lo == hi
    n_loops = int(loops.sum())
    if n_loops and drop_loops:
        lo, hi = lo[~loops], hi[~loops]
        if w is not None:
            w = w[~loops]
    order = np.lexsort((hi, lo))
    lo, hi = lo[order], hi[order]
    if w is not None:
        w = w[order]
    if lo.size:
        first = np.ones(lo.size, dtype=bool)
        first[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
    else:
        first = np.ones(0, dtype=bool)
    n_merged = int(lo.size - first.sum())
    edges = np.stack([lo[first], hi[first]], axis=1) if lo.size else np.zeros((0, 2), dtype=np.int64)
    if w is not None:
        if n_merged:
            group = np.cumsum(first) - 1
            w = np.bincount(group, weights=w, minlength=int(first.sum()))
        else:
            w = w.copy()
    return edges, w, n_loops, n_merged


@dataclass(frozen=True)
class LoadStats:
    lines: int = 0
    self_loops: int = 0
    merged: int = 0


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph on vertices ``0 .. vertex_count-1``.

    ``edges`` is an ``(m, 2)`` int64 array with ``u < v`` in every row, sorted
    lexicographically. ``weights`` is ``None`` for unweighted graphs.
    """

    vertex_count: int
    edges: np.ndarray
    weights: np.ndarray | None = None
    load_stats: LoadStats | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        e = np.ascontiguousarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "edges", e)
        if self.vertex_count < 0:
            raise ValueError("vertex_count must be non-negative")
        if e.size:
            if e.min() < 0 or e.max() >= self.vertex_count:
                raise ValueError("edge endpoint out of range")
            if np.any(e[:, 0] >= e[:, 1]):
                raise ValueError("edges must be canonical (u < v, no self-loops)")
            key = e[:, 0] * self.vertex_count + e[:, 1]
            if np.any(key[1:] <= key[:-1]):
                raise ValueError("edges must be sorted and free of duplicates")
        if self.weights is not None:
            w = np.ascontiguousarray(self.weights, dtype=np.float64).reshape(-1)
            if w.size != e.shape[0]:
                raise ValueError("weights length must match edge count")
            if np.any(~(w > 0)):
                raise ValueError("edge weights must be positive")
            object.__setattr__(self, "weights", w)
        e.setflags(write=False)
        if self.weights is not None:
            self.weights.setflags(write=False)

    @classmethod
    def from_edges(cls, vertex_count, pairs, weights=None) -> "Graph":
        edges, w, _, _ = canonical_edges(pairs, weights)
        return cls(int(vertex_count), edges, w)

    @classmethod
    def empty(cls, vertex_count: int) -> "Graph":
        return cls(int(vertex_count), np.zeros((0, 2), dtype=np.int64))

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    @property
    def is_weighted(self) -> bool:
        return self.weights is not None

    def edge_weights(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(self.edge_count)
        return self.weights

    @cached_property
    def _csr(self):
        n = self.vertex_count
        u, v = self.edges[:, 0], self.edges[:, 1]
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        w = np.concatenate([self.edge_weights()] * 2)
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        out = indptr, dst[order].copy(), w[order].copy()
        for a in out:
            a.setflags(write=False)
        return out

    @property
    def indptr(self) -> np.ndarray:
        return self._csr[0]

    @property
    def indices(self) -> np.ndarray:
        return self._csr[1]

    @property
    def csr_weights(self) -> np.ndarray:
        return self._csr[2]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return neighbors(self, v)

    def adjacency(self, weighted: bool = True) -> sp.csr_matrix:
        n = self.vertex_count
        data = self.csr_weights if weighted else np.ones(self.indices.size)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(n, n))

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.indices[self.indptr[u]:self.indptr[u + 1]]
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        if self.vertex_count != other.vertex_count or not np.array_equal(self.edges, other.edges):
            return False
        if (self.weights is None) != (other.weights is None):
            return False
        return self.weights is None or np.array_equal(self.weights, other.weights)

    __hash__ = None

    def __repr__(self):
        kind = "weighted " if self.is_weighted else ""
        return f"<{kind}Graph n={self.vertex_count} m={self.edge_count}>"


class IdMap:
    """Dense remapping of arbitrary external vertex labels, in first-seen order."""

    def __init__(self):
        self._to_dense: dict[str, int] = {}
        self.labels: list[str] = []

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, label: str) -> int:
        return self._to_dense[label]

    def get(self, label: str) -> int:
        idx = self._to_dense.get(label)
        if idx is None:
            idx = self._to_dense[label] = len(self.labels)
            self.labels.append(label)
        return idx

    def external(self, dense: int) -> str:
        return self.labels[dense]


def load_edge_list(source: Source, *, vertex_count: int | None = None,
                   comment: str = "#", id_map: IdMap | None = None) -> Graph:
    """Read ``u v [w]`` lines into a Graph.

    Self-loops are dropped and duplicate edges merged with summed weights; the
    counts are kept in ``graph.load_stats``. A ``# vertices N`` comment fixes
    the vertex count (so trailing isolated vertices survive a round trip) and
    ``# weighted`` marks the graph weighted even when it has no edges.
    With ``id_map``, tokens are arbitrary labels remapped to dense ids.
    """
    name = source_name(source)
    us, vs, ws = [], [], []
    weighted = False
    declared = None
    nlines = 0
    with open_text(source) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith(comment):
                m = _VERTICES_RE.match(line)
                if m:
                    declared = int(m.group(1))
                elif _WEIGHTED_RE.match(line):
                    weighted = True
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise FormatError(f"expected 'u v [w]', got {len(parts)} fields", lineno, name)
            if id_map is not None:
                u, v = id_map.get(parts[0]), id_map.get(parts[1])
            else:
                try:
                    u, v = int(parts[0]), int(parts[1])
                except ValueError:
                    raise FormatError(f"non-integer vertex id in {line!r}", lineno, name) from None
                if u < 0 or v < 0:
                    raise FormatError(f"negative vertex id in {line!r}", lineno, name)
            w = 1.0
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise FormatError(f"non-numeric weight {parts[2]!r}", lineno, name) from None
                if not w > 0 or not np.isfinite(w):
                    raise FormatError(f"weight must be positive, got {parts[2]}", lineno, name)
                weighted = True
            us.append(u)
            vs.append(v)
            ws.append(w)
            nlines += 1
    pairs = np.array([us, vs], dtype=np.int64).T.reshape(-1, 2)
    edges, w, n_loops, n_merged = canonical_edges(pairs, np.array(ws) if weighted else None)
    n = max(int(pairs.max()) + 1 if pairs.size else 0, declared or 0, vertex_count or 0)
    if id_map is not None:
        n = max(n, len(id_map))
    if vertex_count is not None and pairs.size and pairs.max() >= vertex_count:
        raise FormatError(f"vertex id {int(pairs.max())} exceeds vertex_count {vertex_count}", None, name)
    if n_loops or n_merged:
        logger.info("%s: dropped %d self-loops, merged %d duplicate edges", name or "<stream>", n_loops, n_merged)
    return Graph(n, edges, w, LoadStats(nlines, n_loops, n_merged))


def write_edge_list(g: Graph, sink: Source) -> None:
    with open_sink(sink) as fh:
        fh.write(f"# vertices {g.vertex_count}\n")
        if g.weights is not None:
            fh.write("# weighted\n")
        if g.weights is None:
            fh.writelines(f"{u} {v}\n" for u, v in g.edges.tolist())
        else:
            fh.writelines(f"{u} {v} {w!r}\n" for (u, v), w in zip(g.edges.tolist(), g.weights.tolist()))


def save_snapshot(g: Graph, path) -> None:
    """Binary CSR snapshot: magic, version, flags, n, nnz, offsets, neighbors[, weights]."""
    flags = 1 if g.is_weighted else 0
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<IIQQ", SNAPSHOT_VERSION, flags, g.vertex_count, g.indices.size))
        fh.write(g.indptr.astype("<i8").tobytes())
        fh.write(g.indices.astype("<i8").tobytes())
        if flags & 1:
            fh.write(g.csr_weights.astype("<f8").tobytes())


def load_snapshot(path) -> Graph:
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:8] != SNAPSHOT_MAGIC:
        raise FormatError("not a graph snapshot (bad magic)", None, str(path))
    version, flags, n, nnz = struct.unpack_from("<IIQQ", buf, 8)
    if version != SNAPSHOT_VERSION:
        raise FormatError(f"unsupported snapshot version {version}", None, str(path))
    off = 8 + struct.calcsize("<IIQQ")
    need = off + 8 * (n + 1) + 8 * nnz * (2 if flags & 1 else 1)
    if len(buf) != need:
        raise FormatError(f"snapshot truncated: {len(buf)} bytes, expected {need}", None, str(path))
    indptr = np.frombuffer(buf, "<i8", n + 1, off).astype(np.int64)
    off += 8 * (n + 1)
    indices = np.frombuffer(buf, "<i8", nnz, off).astype(np.int64)
    off += 8 * nnz
    weights = np.frombuffer(buf, "<f8", nnz, off).astype(np.float64) if flags & 1 else None
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    upper = src < indices
    pairs = np.stack([src[upper], indices[upper]], axis=1)
    return Graph.from_edges(n, pairs, None if weights is None else weights[upper])


def read_graph(path, **kwargs) -> Graph:
    """Load either a binary snapshot or an edge-list file, by sniffing the magic."""
    with open(path, "rb") as fh:
        head = fh.read(len(SNAPSHOT_MAGIC))
    if head == SNAPSHOT_MAGIC:
        return load_snapshot(path)
    return load_edge_list(path, **kwargs)


def neighbors(g: Graph, v: int) -> np.ndarray:
    """Sorted open neighborhood of ``v``."""
    if not 0 <= v < g.vertex_count:
        raise IndexError(f"vertex {v} out of range for graph with {g.vertex_count} vertices")
    return g.indices[g.indptr[v]:g.indptr[v + 1]]


def component_labels(g: Graph) -> tuple[int, np.ndarray]:
    if g.vertex_count == 0:
        return 0, np.zeros(0, dtype=np.int64)
    ncomp, labels = connected_components(g.adjacency(weighted=False), directed=False)
    return int(ncomp), labels.astype(np.int64)


def count_components(g: Graph) -> int:
    """Number of connected components; isolated vertices count as components."""
    return component_labels(g)[0]


def largest_component_size(g: Graph) -> int:
    ncomp, labels = component_labels(g)
    return int(np.bincount(labels).max()) if ncomp else 0


def laplacian_spectrum(g: Graph, num_values: int, *, cap: int = SPECTRUM_CAP,
                       dense_limit: int = 2500, tol: float = ZERO_TOL) -> np.ndarray:
    """Smallest ``num_values`` eigenvalues of the combinatorial Laplacian D - A, ascending.

    Unweighted. Dense ``eigvalsh`` up to ``dense_limit`` vertices, shift-invert
    Lanczos above it; graphs over ``cap`` vertices are refused. Values within
    ``tol`` below zero are clamped to 0.
    """
    n = g.vertex_count
    if n > cap:
        raise ValueError(f"graph has {n} vertices; spectrum cap is {cap}")
    if not 1 <= num_values <= n:
        raise ValueError(f"num_values must be in [1, {n}], got {num_values}")
    A = g.adjacency(weighted=False)
    L = sp.diags(np.asarray(A.sum(axis=1)).ravel()) - A
    if n <= dense_limit or num_values >= n - 1:
        vals = np.linalg.eigvalsh(L.toarray())[:num_values]
    else:
        from scipy.sparse.linalg import eigsh

        vals = np.sort(eigsh(L.tocsc(), k=num_values, sigma=-1e-3, which="LM",
                             return_eigenvectors=False))
    vals = np.where((vals < 0) & (vals > -tol), 0.0, vals)
    return vals


def zero_multiplicity(values, tol: float = ZERO_TOL) -> int:
    return int(np.sum(np.abs(np.asarray(values)) <= tol))
