"""Content-insensitive clustering backends and clustering file formats."""
from __future__ import annotations

import logging
import os
import shlex
import subprocess
import tempfile
from typing import Callable, Iterable, Iterator

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import _accel
from ._io import FormatError, Source, open_sink, open_text, source_name
from .graph import Graph

logger = logging.getLogger(__name__)

PARTITIONER_ENV = "CODICIL_PARTITIONER"
DEFAULT_PARTITIONER = "gpmetis {graph} {l}"
DEFAULT_PARTITION_OUTPUT = "{graph}.part.{l}"


class Clustering:
    """A disjoint assignment (``labels`` set) or an overlapping cover (``labels`` None).

    Cluster ids are dense from 0. For disjoint clusterings built from labels,
    ids follow the order in which clusters first appear in vertex order.
    """

    def __init__(self, clusters: list[np.ndarray], vertex_count: int, labels: np.ndarray | None = None):
        self.clusters = clusters
        self.vertex_count = vertex_count
        self.labels = labels

    @classmethod
    def from_labels(cls, labels) -> "Clustering":
        labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(first.size)
        dense = rank[inv]
        order = np.argsort(dense, kind="stable")
        bounds = np.cumsum(np.bincount(dense, minlength=first.size))[:-1]
        clusters = np.split(order, bounds) if labels.size else []
        return cls(clusters, labels.size, dense)

    @classmethod
    def from_clusters(cls, clusters: Iterable[Iterable[int]], vertex_count: int | None = None) -> "Clustering":
        """Build from member lists; empty clusters are dropped, overlap allowed."""
        arrs = [np.unique(np.asarray(list(c), dtype=np.int64)) for c in clusters]
        arrs = [a for a in arrs if a.size]
        top = max((int(a[-1]) + 1 for a in arrs), default=0)
        n = top if vertex_count is None else vertex_count
        if top > n:
            raise ValueError(f"cluster member {top - 1} outside universe of size {n}")
        labels = None
        total = sum(a.size for a in arrs)
        if total == n:
            lab = np.full(n, -1, dtype=np.int64)
            for cid, a in enumerate(arrs):
                lab[a] = cid
            if (lab >= 0).all():
                labels = lab
        return cls(arrs, n, labels)

    @property
    def is_disjoint(self) -> bool:
        return self.labels is not None

    def sizes(self) -> np.ndarray:
        return np.array([c.size for c in self.clusters], dtype=np.int64)

    def __len__(self):
        return len(self.clusters)

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.clusters)

    def __repr__(self):
        kind = "disjoint" if self.is_disjoint else "overlapping"
        return f"<Clustering {kind} n={self.vertex_count} clusters={len(self)}>"


# -- Markov clustering -------------------------------------------------------

def _normalize_columns(M: sp.csc_matrix) -> sp.csc_matrix:
    sums = np.asarray(M.sum(axis=0)).ravel()
    return (M @ sp.diags(1.0 / sums)).tocsc()


def _prune(M: sp.csc_matrix, threshold: float) -> sp.csc_matrix:
    colmax = M.max(axis=0).toarray().ravel()
    cols = np.repeat(np.arange(M.shape[1]), np.diff(M.indptr))
    keep = M.data >= np.minimum(threshold, colmax)[cols]
    out = sp.csc_matrix((M.data[keep], M.indices[keep], np.concatenate([[0], np.cumsum(
        np.bincount(cols[keep], minlength=M.shape[1]))])), shape=M.shape)
    return out


def mcl_iterations(g: Graph, inflation: float = 2.0, max_iter: int = 100, tol: float = 1e-6,
                   self_loop: float = 1.0, prune: float = 1e-5):
    """Yield ``(iteration, M, max_change)`` after each expansion + inflation step."""
    n = g.vertex_count
    A = g.adjacency(weighted=True).tocsc() + self_loop * sp.identity(n, format="csc")
    M = _normalize_columns(A.tocsc())
    for it in range(1, max_iter + 1):
        prev = M
        M = (M @ M).tocsc()
        M = M.power(inflation).tocsc()
        M = _prune(M, prune)
        M = _normalize_columns(M)
        change = abs(M - prev).max() if n else 0.0
        yield it, M, float(change)
        if change < tol:
            return


def mcl_cluster(g: Graph, inflation: float = 2.0, max_iter: int = 100, tol: float = 1e-6,
                self_loop: float = 1.0, prune: float = 1e-5) -> Clustering:
    """Markov clustering by alternating expansion (squaring) and inflation.

    Clusters are the connected components of the converged flow matrix's
    nonzero pattern, so they never span input components.
    """
    if inflation <= 1.0:
        raise ValueError("inflation must exceed 1")
    n = g.vertex_count
    if n == 0:
        return Clustering([], 0, np.zeros(0, dtype=np.int64))
    M = None
    it = 0
    for it, M, _ in mcl_iterations(g, inflation, max_iter, tol, self_loop, prune):
        pass
    logger.debug("mcl stopped after %d iterations", it)
    _, labels = connected_components(M, directed=False)
    return Clustering.from_labels(labels)


# -- label propagation -------------------------------------------------------

def label_propagation(g: Graph, seed: int = 0, max_sweeps: int = 100) -> Clustering:
    """Asynchronous label propagation in a seeded random vertex order.

    Each vertex takes the label with the largest (weighted) count among its
    neighbors, ties to the smallest label.
    """
    order = np.random.default_rng(seed).permutation(g.vertex_count).astype(np.int64)
    labels, sweeps = _accel.label_propagation(g.indptr, g.indices, g.csr_weights, order, int(max_sweeps))
    logger.debug("label propagation: %d sweeps", sweeps)
    return Clustering.from_labels(labels)


# -- partitioner bridge ------------------------------------------------------

def export_partitioner_graph(g: Graph, sink: Source) -> None:
    """Adjacency-list interchange format: ``n m`` header, then 1-indexed neighbor lines."""
    ptr, idx = g.indptr, g.indices + 1
    with open_sink(sink) as fh:
        fh.write(f"{g.vertex_count} {g.edge_count}\n")
        for v in range(g.vertex_count):
            fh.write(" ".join(map(str, idx[ptr[v]:ptr[v + 1]].tolist())) + "\n")


def import_partition(source: Source, vertex_count: int) -> Clustering:
    """Read one integer label per line, exactly ``vertex_count`` lines."""
    name = source_name(source)
    labels = []
    with open_text(source) as fh:
        for lineno, raw in enumerate(fh, 1):
            tok = raw.strip()
            if not tok:
                raise FormatError("blank line in partition file", lineno, name)
            try:
                labels.append(int(tok))
            except ValueError:
                raise FormatError(f"non-integer label {tok!r}", lineno, name) from None
    if len(labels) != vertex_count:
        raise FormatError(f"expected {vertex_count} labels, found {len(labels)}", None, name)
    return Clustering.from_labels(labels)


class ExternalPartitioner:
    """Run an external partitioner through the interchange format.

    ``command`` is a template with ``{graph}`` (path to the exported graph)
    and ``{l}`` (requested parts); ``output`` names the labels file it writes.
    Defaults follow the multilevel partitioner convention and can be
    overridden with the ``CODICIL_PARTITIONER`` environment variable.
    """

    def __init__(self, command: str | None = None, output: str = DEFAULT_PARTITION_OUTPUT,
                 timeout: float | None = None):
        self.command = command or os.environ.get(PARTITIONER_ENV) or DEFAULT_PARTITIONER
        self.output = output
        self.timeout = timeout

    def __call__(self, g: Graph, l: int, seed: int = 0) -> Clustering:
        with tempfile.TemporaryDirectory(prefix="codicil-part-") as tmp:
            graph_path = os.path.join(tmp, "graph.txt")
            export_partitioner_graph(g, graph_path)
            fields = {"graph": graph_path, "l": l, "seed": seed % 2**31}
            argv = [a.format(**fields) for a in shlex.split(self.command)]
            try:
                proc = subprocess.run(argv, cwd=tmp, capture_output=True, text=True, timeout=self.timeout)
            except FileNotFoundError:
                raise RuntimeError(f"partitioner not found: {argv[0]!r} (set {PARTITIONER_ENV})") from None
            if proc.returncode != 0:
                raise RuntimeError(f"partitioner failed ({proc.returncode}): {proc.stderr.strip()[:500]}")
            return import_partition(self.output.format(**fields), g.vertex_count)


def get_clusterer(name: str, **options) -> Callable[[Graph, int, int], Clustering]:
    """Backend by name: ``mcl``, ``lp`` or ``external``; returns ``fn(graph, l, seed)``."""
    if name == "mcl":
        return lambda g, l, seed: mcl_cluster(g, **options)
    if name == "lp":
        return lambda g, l, seed: label_propagation(g, seed=seed, **options)
    if name == "external":
        return ExternalPartitioner(**options)
    raise ValueError(f"unknown clusterer {name!r}; expected mcl, lp or external")


# -- clustering files --------------------------------------------------------

def write_clustering(c: Clustering, sink: Source) -> None:
    """``vertex_id cluster_id`` per vertex."""
    if not c.is_disjoint:
        raise ValueError("only disjoint clusterings have a per-vertex format")
    with open_sink(sink) as fh:
        fh.writelines(f"{v} {lab}\n" for v, lab in enumerate(c.labels.tolist()))


def read_clustering(source: Source, vertex_count: int | None = None) -> Clustering:
    name = source_name(source)
    assign: dict[int, int] = {}
    with open_text(source) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise FormatError("expected 'vertex_id cluster_id'", lineno, name)
            try:
                v, lab = int(parts[0]), int(parts[1])
            except ValueError:
                raise FormatError(f"non-integer field in {line!r}", lineno, name) from None
            if v in assign:
                raise FormatError(f"vertex {v} assigned twice", lineno, name)
            assign[v] = lab
    n = vertex_count if vertex_count is not None else (max(assign) + 1 if assign else 0)
    missing = n - sum(1 for v in assign if 0 <= v < n)
    if missing or len(assign) != n:
        raise FormatError(f"clustering must assign each of {n} vertices exactly once", None, name)
    return Clustering.from_labels([assign[v] for v in range(n)])


def read_ground_truth(source: Source, vertex_count: int | None = None) -> Clustering:
    """One cluster per line, whitespace-separated vertex ids; clusters may overlap."""
    name = source_name(source)
    clusters = []
    with open_text(source) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                members = [int(t) for t in line.split()]
            except ValueError:
                raise FormatError(f"non-integer vertex id in {line!r}", lineno, name) from None
            if min(members) < 0:
                raise FormatError("negative vertex id", lineno, name)
            clusters.append(members)
    if vertex_count is not None:
        dropped = sum(1 for c in clusters for v in c if v >= vertex_count)
        if dropped:
            logger.info("%s: ignoring %d ground-truth memberships outside %d vertices",
                        name or "<stream>", dropped, vertex_count)
        clusters = [[v for v in c if v < vertex_count] for c in clusters]
    return Clustering.from_clusters(clusters, vertex_count)


def write_ground_truth(c: Clustering, sink: Source) -> None:
    with open_sink(sink) as fh:
        fh.writelines(" ".join(map(str, cl.tolist())) + "\n" for cl in c.clusters)
