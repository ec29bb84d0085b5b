"""Content-aware graph simplification and community detection."""
from __future__ import annotations

__version__ = "0.1.0"

from ._accel import BACKEND as KERNEL_BACKEND
from ._io import FormatError
from .cluster import (Clustering, ExternalPartitioner, export_partitioner_graph, get_clusterer, import_partition,
                      label_propagation, mcl_cluster)
from .evaluate import EvalReport, fscore_best, fscore_clustering, fscore_pair
from .graph import Graph, count_components, laplacian_spectrum, load_edge_list, neighbors, write_edge_list
from .sampler import (CodicilResult, SamplerConfig, build_edge_union, codicil, retention_count, sample_edges,
                      sample_edges_weighted, score_neighborhood)
from .similarity import (cosine, estimate_cosine, estimate_jaccard, jaccard, minhash_signature, simhash_signature,
                         z_normalize, zero_one_normalize)
from .textindex import (CosineIndex, TermVectorStore, WeightedVector, build_content_edges, tfidf_weight,
                        topk_content_neighbors, truncate_top_m)

__all__ = [
    "KERNEL_BACKEND", "FormatError",
    "Clustering", "ExternalPartitioner", "export_partitioner_graph", "get_clusterer", "import_partition",
    "label_propagation", "mcl_cluster",
    "EvalReport", "fscore_best", "fscore_clustering", "fscore_pair",
    "Graph", "count_components", "laplacian_spectrum", "load_edge_list", "neighbors", "write_edge_list",
    "CodicilResult", "SamplerConfig", "build_edge_union", "codicil", "retention_count", "sample_edges",
    "sample_edges_weighted", "score_neighborhood",
    "cosine", "estimate_cosine", "estimate_jaccard", "jaccard", "minhash_signature", "simhash_signature",
    "z_normalize", "zero_one_normalize",
    "CosineIndex", "TermVectorStore", "WeightedVector", "build_content_edges", "tfidf_weight",
    "topk_content_neighbors", "truncate_top_m",
]
