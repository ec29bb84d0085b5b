"""Synthetic benchmark graphs and the CiteSeer citation dataset loader."""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .cluster import Clustering
from .graph import Graph, IdMap
from .textindex import TermVectorStore

CITESEER_ENV = "CODICIL_CITESEER"


@dataclass
class Dataset:
    graph: Graph
    terms: TermVectorStore
    truth: Clustering
    ids: IdMap | None = None


def planted_partition(seed: int, sizes=(50, 50), p_in: float = 0.3, p_out: float = 0.02,
                      block_terms: int = 40, doc_length: int = 20, noise: float = 0.1) -> Dataset:
    """Stochastic block model with topic-aligned term vectors.

    Every vertex draws ``doc_length`` tokens; each comes from its own
    community's block of ``block_terms`` terms, or with probability ``noise``
    from a uniformly chosen other block.
    """
    rng = np.random.default_rng(seed)
    sizes = list(sizes)
    comm = np.repeat(np.arange(len(sizes)), sizes)
    n = comm.size
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(comm[iu] == comm[ju], p_in, p_out)
    hit = rng.random(iu.size) < prob
    graph = Graph.from_edges(n, np.stack([iu[hit], ju[hit]], axis=1))

    nblocks = len(sizes)
    block = np.repeat(comm[:, None], doc_length, axis=1)
    flip = rng.random(block.shape) < noise
    if nblocks > 1:
        shift = rng.integers(1, nblocks, size=block.shape)
        block = np.where(flip, (block + shift) % nblocks, block)
    term = block * block_terms + rng.integers(0, block_terms, size=block.shape)
    rows = np.repeat(np.arange(n), doc_length)
    counts = sp.csr_matrix((np.ones(rows.size), (rows, term.reshape(-1))), shape=(n, nblocks * block_terms))
    truth = Clustering.from_labels(comm)
    return Dataset(graph, TermVectorStore(counts), truth)


def find_citeseer(root=None) -> Path | None:
    """Directory holding ``citeseer.content`` and ``citeseer.cites``, if available."""
    candidates = [root, os.environ.get(CITESEER_ENV), "data/citeseer", "citeseer"]
    for c in candidates:
        if c and (Path(c) / "citeseer.content").is_file() and (Path(c) / "citeseer.cites").is_file():
            return Path(c)
    return None


def load_citeseer(root) -> Dataset:
    """Load the LINQS CiteSeer release.

    ``citeseer.content`` lines are ``paper_id word_0 .. word_d label`` with
    binary word indicators; ``citeseer.cites`` lines are ``cited citing``.
    Citations touching papers without content are dropped, edges are made
    undirected and deduplicated, self-citations removed.
    """
    root = Path(root)
    ids = IdMap()
    rows, cols, labels = [], [], []
    with open(root / "citeseer.content", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            v = ids.get(parts[0])
            labels.append(parts[-1])
            words = np.flatnonzero(np.asarray(parts[1:-1], dtype=np.float64))
            rows.extend([v] * words.size)
            cols.extend(words.tolist())
            width = len(parts) - 2
    n = len(ids)
    counts = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, width))
    pairs = []
    with open(root / "citeseer.cites", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if len(parts) != 2:
                continue
            try:
                pairs.append((ids[parts[0]], ids[parts[1]]))
            except KeyError:
                continue
    graph = Graph.from_edges(n, np.array(pairs, dtype=np.int64).reshape(-1, 2))
    classes = {lab: i for i, lab in enumerate(sorted(set(labels)))}
    truth = Clustering.from_labels([classes[lab] for lab in labels])
    return Dataset(graph, TermVectorStore(counts), truth, ids)
