"""Command-line entry point: the full pipeline and its individual stages."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, _accel
from ._io import FormatError
from .cluster import get_clusterer, read_clustering, read_ground_truth, write_clustering, write_ground_truth
from .evaluate import fscore_clustering
from .graph import (Graph, count_components, largest_component_size, laplacian_spectrum, load_edge_list,
                    read_graph, write_edge_list, zero_multiplicity)
from .sampler import (STREAM_CLUSTERER, SamplerConfig, align, build_edge_union, content_stage, derive_seed,
                      sampling_stage)
from .textindex import TermVectorStore, read_term_vectors, write_term_vectors

logger = logging.getLogger("codicil")

SCOPES = {"full": "full", "1hop": "1-hop", "2hop": "2-hop"}
SIMS = {"cos": "cosine-exact", "cos-lsh": "cosine-simhash", "jac": "jaccard-exact", "jac-mh": "jaccard-minhash"}
NORMS = {"zo": "zero-one", "z": "z-norm"}

SAMPLE_FILE = "sample.tsv"
CONTENT_FILE = "content_edges.tsv"
CLUSTERS_FILE = "clusters.txt"
MANIFEST_FILE = "manifest.json"


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(message)


def _unit_interval(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {x}")
    return x


def _positive_int(text: str) -> int:
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if x < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {x}")
    return x


def _seed(text: str) -> int:
    x = int(text, 0)
    if not 0 <= x < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return x


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=_seed, default=0, help="single 64-bit seed for all randomness")
    p.add_argument("--threads", type=_positive_int, default=1, help="worker threads for parallel kernels")


def _add_sampler(p: argparse.ArgumentParser, content: bool = True, sample: bool = True) -> None:
    if content:
        p.add_argument("--k", type=_positive_int, default=50, help="content neighbors per vertex")
        p.add_argument("--m", type=_positive_int, default=None, help="keep only the m heaviest TF-IDF terms")
        p.add_argument("--scope", choices=sorted(SCOPES), default="full")
    if sample:
        p.add_argument("--alpha", type=_unit_interval, default=0.5, help="weight of structural similarity")
        p.add_argument("--sim", choices=sorted(SIMS), default="cos")
        p.add_argument("--norm", choices=sorted(NORMS), default="zo")
        p.add_argument("--hashes", type=_positive_int, default=30, help="minwise hash count")
        p.add_argument("--bits", type=_positive_int, default=512, help="random projection bits")
        p.add_argument("--neighborhood", choices=["closed", "open"], default="closed")
        p.add_argument("--retention", choices=["union", "mutual"], default="union")


def _add_cluster(p: argparse.ArgumentParser) -> None:
    p.add_argument("--l", type=_positive_int, default=6, help="desired cluster count")
    p.add_argument("--backend", choices=["mcl", "lp", "external"], default="mcl")
    p.add_argument("--inflation", type=float, default=2.0, help="MCL inflation")
    p.add_argument("--max-sweeps", type=_positive_int, default=100, help="label propagation sweep cap")
    p.add_argument("--partitioner-cmd", default=None,
                   help="external partitioner command template with {graph} and {l}")
    p.add_argument("--partitioner-output", default="{graph}.part.{l}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codicil", description="Content-aware graph simplification and clustering.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pipeline", help="content edges, union, sampling and clustering in one run")
    p.add_argument("--graph", required=True)
    p.add_argument("--terms", required=True)
    p.add_argument("--truth", default=None)
    p.add_argument("--out-dir", default=".")
    _add_sampler(p)
    _add_cluster(p)
    _add_common(p)

    p = sub.add_parser("rerun", help="repeat a pipeline run from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("content-edges", help="top-k content neighbor edges")
    p.add_argument("--graph", required=True, help="topological graph (for vertex count and hop scopes)")
    p.add_argument("--terms", required=True)
    p.add_argument("--out", required=True)
    _add_sampler(p, sample=False)
    _add_common(p)

    p = sub.add_parser("sample", help="biased sampling of the topological + content edge union")
    p.add_argument("--graph", required=True)
    p.add_argument("--terms", default=None, help="term vectors; omit for topology-only sampling")
    p.add_argument("--content-edges", default=None, help="content edge list; omit for none")
    p.add_argument("--out", required=True)
    _add_sampler(p, content=False)
    _add_common(p)

    p = sub.add_parser("cluster", help="cluster a (sampled) graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    _add_cluster(p)
    _add_common(p)

    p = sub.add_parser("evaluate", help="F-score of a clustering against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--details", action="store_true")
    p.add_argument("--json", action="store_true", help="print a machine-readable report")

    p = sub.add_parser("diagnose", help="structural statistics of a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--spectrum", type=_positive_int, default=None,
                   help="print this many smallest Laplacian eigenvalues")

    p = sub.add_parser("prepare-citeseer", help="convert the LINQS CiteSeer release to codicil files")
    p.add_argument("--dir", required=True)
    p.add_argument("--out-dir", required=True)
    return parser


def _config(args, content: bool = True, sample: bool = True) -> SamplerConfig:
    kw = {"seed": args.seed}
    if content:
        kw.update(k=args.k, m=args.m, scope=SCOPES[args.scope])
    if sample:
        kw.update(alpha=args.alpha, similarity=SIMS[args.sim], normalizer=NORMS[args.norm],
                  hashes=args.hashes, bits=args.bits, structural_neighborhood=args.neighborhood,
                  retention=args.retention)
    return SamplerConfig(**kw)


def _clusterer(args):
    if args.backend == "mcl":
        return get_clusterer("mcl", inflation=args.inflation)
    if args.backend == "lp":
        return get_clusterer("lp", max_sweeps=args.max_sweeps)
    return get_clusterer("external", command=args.partitioner_cmd, output=args.partitioner_output)


def _stage(name):
    def wrap(fn):
        def inner(*a, **kw):
            try:
                return fn(*a, **kw)
            except (OSError, FormatError, ValueError, RuntimeError) as exc:
                raise StageError(name, str(exc)) from exc
        return inner
    return wrap


@_stage("load")
def _load_inputs(graph_path, terms_path):
    g = read_graph(graph_path)
    store = read_term_vectors(terms_path) if terms_path else None
    return align(g, store)


def run_pipeline(args) -> dict:
    cfg = _config(args)
    cluster_fn = _clusterer(args)
    threads = _accel.set_threads(args.threads)
    out = Path(args.out_dir)
    g, store = _load_inputs(args.graph, args.terms)
    truth = _stage("load")(read_ground_truth)(args.truth, g.vertex_count) if args.truth else None

    timings = {}
    t0 = time.perf_counter()
    content = _stage("content-edges")(content_stage)(g, store, cfg)
    t1 = time.perf_counter()
    union = build_edge_union(g, content)
    t2 = time.perf_counter()
    sample = _stage("sample")(sampling_stage)(g, content, store, cfg)
    t3 = time.perf_counter()
    clustering = _stage("cluster")(cluster_fn)(sample, args.l, derive_seed(cfg.seed, STREAM_CLUSTERER))
    t4 = time.perf_counter()
    timings.update(content_edges=(t1 - t0) * 1e3, union=(t2 - t1) * 1e3,
                   sampling=(t3 - t2) * 1e3, clustering=(t4 - t3) * 1e3)
    report = None
    if truth is not None:
        report = _stage("evaluate")(fscore_clustering)(clustering, truth, g.vertex_count)
        timings["eval"] = (time.perf_counter() - t4) * 1e3

    @_stage("write")
    def write():
        out.mkdir(parents=True, exist_ok=True)
        write_edge_list(Graph(g.vertex_count, content), out / CONTENT_FILE)
        write_edge_list(sample, out / SAMPLE_FILE)
        write_clustering(clustering, out / CLUSTERS_FILE)
        if report is not None:
            (out / "report.txt").write_text(report.format(details=True) + "\n")

    write()
    manifest = {
        "codicil_version": __version__,
        "inputs": {"graph": os.path.abspath(args.graph), "terms": os.path.abspath(args.terms),
                   "truth": os.path.abspath(args.truth) if args.truth else None},
        "config": cfg.to_dict(),
        "clusterer": {"backend": args.backend, "l": args.l, "inflation": args.inflation,
                      "max_sweeps": args.max_sweeps, "partitioner_cmd": args.partitioner_cmd,
                      "partitioner_output": args.partitioner_output},
        "kernel_backend": _accel.BACKEND,
        "threads": threads,
        "timings_ms": timings,
        "edges": {"topological": g.edge_count, "content": int(content.shape[0]),
                  "union": int(union.shape[0]), "sample": sample.edge_count},
        "clusters": {"requested": args.l, "realized": len(clustering)},
        "fscore": report.aggregate if report is not None else None,
    }
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"edges: topological={g.edge_count} content={content.shape[0]} "
          f"union={union.shape[0]} sample={sample.edge_count}")
    print(f"clusters: requested={args.l} realized={len(clustering)}")
    if report is not None:
        print(f"fscore: {report.aggregate:.6f}")
    return manifest


def _args_from_manifest(path: str, out_dir: str) -> argparse.Namespace:
    m = json.loads(Path(path).read_text())
    cfg, cl, inputs = m["config"], m["clusterer"], m["inputs"]
    inv = lambda table, v: next(k for k, val in table.items() if val == v)  # noqa: E731
    return argparse.Namespace(
        graph=inputs["graph"], terms=inputs["terms"], truth=inputs["truth"], out_dir=out_dir,
        k=cfg["k"], m=cfg["m"], scope=inv(SCOPES, cfg["scope"]), alpha=cfg["alpha"],
        sim=inv(SIMS, cfg["similarity"]), norm=inv(NORMS, cfg["normalizer"]), hashes=cfg["hashes"],
        bits=cfg["bits"], neighborhood=cfg["structural_neighborhood"], retention=cfg["retention"],
        seed=cfg["seed"], threads=m.get("threads", 1), l=cl["l"], backend=cl["backend"],
        inflation=cl["inflation"], max_sweeps=cl["max_sweeps"], partitioner_cmd=cl["partitioner_cmd"],
        partitioner_output=cl["partitioner_output"],
    )


def cmd_content_edges(args) -> None:
    cfg = _config(args, sample=False)
    _accel.set_threads(args.threads)
    g, store = _load_inputs(args.graph, args.terms)
    content = _stage("content-edges")(content_stage)(g, store, cfg)
    _stage("write")(write_edge_list)(Graph(g.vertex_count, content), args.out)
    print(f"content edges: {content.shape[0]}")


def cmd_sample(args) -> None:
    cfg = _config(args, content=False)
    _accel.set_threads(args.threads)
    g, store = _load_inputs(args.graph, args.terms)
    content = np.zeros((0, 2), dtype=np.int64)
    if args.content_edges:
        ce = _stage("load")(load_edge_list)(args.content_edges)
        if ce.vertex_count > g.vertex_count:
            raise StageError("load", f"content edges reference {ce.vertex_count} vertices, graph has {g.vertex_count}")
        content = ce.edges
    sample = _stage("sample")(sampling_stage)(g, content, store, cfg)
    _stage("write")(write_edge_list)(sample, args.out)
    print(f"sampled edges: {sample.edge_count} of {build_edge_union(g, content).shape[0]}")


def cmd_cluster(args) -> None:
    _accel.set_threads(args.threads)
    g = _stage("load")(read_graph)(args.graph)
    clustering = _stage("cluster")(_clusterer(args))(g, args.l, derive_seed(args.seed, STREAM_CLUSTERER))
    _stage("write")(write_clustering)(clustering, args.out)
    print(f"clusters: requested={args.l} realized={len(clustering)}")


def cmd_evaluate(args) -> None:
    pred = _stage("load")(read_clustering)(args.pred)
    truth = _stage("load")(read_ground_truth)(args.truth, pred.vertex_count)
    report = _stage("evaluate")(fscore_clustering)(pred, truth, pred.vertex_count)
    print(json.dumps(report.to_dict()) if args.json else report.format(details=args.details))


def cmd_diagnose(args) -> None:
    g = _stage("load")(read_graph)(args.graph)
    print(f"vertices: {g.vertex_count}")
    print(f"edges: {g.edge_count}")
    print(f"components: {count_components(g)}")
    print(f"largest_component: {largest_component_size(g)}")
    if args.spectrum:
        vals = _stage("diagnose")(laplacian_spectrum)(g, min(args.spectrum, g.vertex_count))
        print(f"zero_eigenvalues: {zero_multiplicity(vals)}")
        print("spectrum: " + " ".join(f"{x:.10g}" for x in vals))


def cmd_prepare_citeseer(args) -> None:
    from .datasets import load_citeseer

    ds = _stage("load")(load_citeseer)(args.dir)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_edge_list(ds.graph, out / "graph.tsv")
    write_term_vectors(ds.terms, out / "terms.tsv")
    write_ground_truth(ds.truth, out / "truth.txt")
    (out / "ids.txt").write_text("".join(f"{i}\t{lab}\n" for i, lab in enumerate(ds.ids.labels)))
    print(f"vertices: {ds.graph.vertex_count} edges: {ds.graph.edge_count} classes: {len(ds.truth)}")


def _configure_logging() -> None:
    level = os.environ.get("CODICIL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s: %(message)s")


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "pipeline":
            try:
                _config(args)
            except ValueError as exc:
                parser.error(str(exc))
            run_pipeline(args)
        elif args.command == "rerun":
            run_pipeline(_args_from_manifest(args.manifest, args.out_dir))
        elif args.command == "content-edges":
            cmd_content_edges(args)
        elif args.command == "sample":
            cmd_sample(args)
        elif args.command == "cluster":
            cmd_cluster(args)
        elif args.command == "evaluate":
            cmd_evaluate(args)
        elif args.command == "diagnose":
            cmd_diagnose(args)
        elif args.command == "prepare-citeseer":
            cmd_prepare_citeseer(args)
    except StageError as exc:
        print(f"codicil: error [{exc.stage}]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
