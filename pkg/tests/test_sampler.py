import numpy as np
import pytest

from codicil import (Graph, SamplerConfig, TermVectorStore, build_content_edges, build_edge_union, codicil,
                     fscore_clustering, retention_count, sample_edges, sample_edges_weighted, score_neighborhood)
from codicil.cluster import Clustering, mcl_cluster
from codicil.sampler import derive_seed, retention_counts, select_edges

import naive_codicil as naive
from instances import edge_set, random_instance


def _cfg(**kw):
    return SamplerConfig(**kw)


# edge union

def test_union_examples():
    t = np.array([[0, 1], [1, 2], [2, 3]])
    assert build_edge_union(t, np.zeros((0, 2))).tolist() == t.tolist()
    assert build_edge_union(t, t[:, ::-1]).tolist() == t.tolist()
    c = np.array([[4, 5], [5, 6], [0, 6], [3, 4]])
    assert build_edge_union(t, c).shape[0] == 7


# retention

@pytest.mark.parametrize("d,r", [(1, 1), (2, 2), (4, 2), (9, 3), (10, 4), (16, 4), (17, 5)])
def test_retention_count(d, r):
    assert retention_count(d) == r


def test_retention_count_rejects_zero():
    with pytest.raises(ValueError):
        retention_count(0)


def test_retention_counts_vectorized_agrees():
    d = np.arange(1, 5000)
    assert retention_counts(d).tolist() == [retention_count(int(x)) for x in d]
    big = np.array([2**52 - 1, 2**52, 2**52 + 1, (2**26 + 1) ** 2])
    assert retention_counts(big).tolist() == [retention_count(int(x)) for x in big]


# scoring

def _hand_fixture():
    g = Graph.from_edges(4, [(0, 1), (0, 2), (1, 2), (2, 3)])
    # a=0, b=1, c=2
    store = TermVectorStore.from_dicts([{0: 1, 1: 1}, {0: 1}, {1: 1, 2: 1}, {2: 1}])
    return g, store


def test_score_neighborhood_hand_values():
    g, store = _hand_fixture()
    cfg = _cfg(alpha=0.5, similarity="jaccard-exact", normalizer="zero-one")
    s = score_neighborhood(g, store, cfg, 2, [0, 1, 3])
    assert s.structural.tolist() == pytest.approx([3 / 4, 3 / 4, 2 / 4])
    assert s.content.tolist() == pytest.approx([1 / 3, 0.0, 1 / 2])
    assert s.structural_norm.tolist() == pytest.approx([1.0, 1.0, 0.0])
    assert s.content_norm.tolist() == pytest.approx([2 / 3, 0.0, 1.0])
    assert s.blended.tolist() == pytest.approx([5 / 6, 0.5, 0.5])


def test_score_neighborhood_open_variant():
    g, store = _hand_fixture()
    cfg = _cfg(similarity="jaccard-exact", structural_neighborhood="open")
    s = score_neighborhood(g, store, cfg, 2, [0, 1, 3])
    # N(2)={0,1,3}; N(0)={1,2}; N(1)={0,2}; N(3)={2}
    assert s.structural.tolist() == pytest.approx([1 / 4, 1 / 4, 0.0])


@pytest.mark.parametrize("sim", ["cosine-exact", "jaccard-exact"])
def test_alpha_extremes(sim):
    g, vecs, store = random_instance(7, n_max=30)
    gamma = g.neighbors(int(np.argmax(g.degrees())))
    v = int(np.argmax(g.degrees()))
    s1 = score_neighborhood(g, store, _cfg(alpha=1.0, similarity=sim), v, gamma)
    s0 = score_neighborhood(g, store, _cfg(alpha=0.0, similarity=sim), v, gamma)
    assert s1.blended.tolist() == s1.structural_norm.tolist()
    assert s0.blended.tolist() == s0.content_norm.tolist()


def test_score_neighborhood_rejects_empty_gamma():
    g, store = _hand_fixture()
    with pytest.raises(ValueError):
        score_neighborhood(g, store, _cfg(), 0, [])


# sampling

def test_star_keeps_every_leaf_edge():
    g = Graph.from_edges(5, [(0, i) for i in range(1, 5)])
    store = TermVectorStore.empty(5)
    sel = select_edges(g, np.zeros((0, 2)), store, _cfg(alpha=1.0))
    assert sel.selected_count().tolist() == [2, 1, 1, 1, 1]
    assert sample_edges(g, np.zeros((0, 2)), store, _cfg(alpha=1.0)).edge_count == 4


def test_topology_only_reduction_matches_oracle():
    for seed in range(10):
        g, vecs, store = random_instance(seed, n_max=40)
        got = sample_edges(g, np.zeros((0, 2)), store, _cfg(alpha=1.0))
        ref = naive.sample(g.vertex_count, [tuple(e) for e in g.edges.tolist()], vecs, set(), alpha=1.0)
        assert edge_set(got) == ref


@pytest.mark.parametrize("seed", range(12))
def test_matches_oracle(seed):
    g, vecs, store = random_instance(500 + seed, n_max=40)
    sim = ("cosine-exact", "jaccard-exact")[seed % 2]
    norm = ("zero-one", "z-norm")[(seed // 2) % 2]
    nbhd = ("closed", "open")[(seed // 4) % 2]
    retention = ("union", "mutual")[(seed // 3) % 2]
    ce = build_content_edges(store, 3)
    cfg = _cfg(k=3, alpha=0.3, similarity=sim, normalizer=norm, structural_neighborhood=nbhd, retention=retention)
    ref = naive.sample(g.vertex_count, [tuple(e) for e in g.edges.tolist()], vecs,
                       {tuple(e) for e in ce.tolist()}, alpha=0.3, similarity=sim, normalizer=norm,
                       neighborhood=nbhd, retention=retention)
    assert edge_set(sample_edges(g, ce, store, cfg)) == ref


def test_sample_size_bounds_and_no_new_singletons():
    for seed in range(20):
        g, vecs, store = random_instance(seed)
        ce = build_content_edges(store, 4)
        cfg = _cfg(k=4)
        sel = select_edges(g, ce, store, cfg)
        s = sample_edges(g, ce, store, cfg)
        u = sel.union
        assert s.edge_count <= int(sel.selected_count().sum())
        assert s.edge_count <= u.edge_count
        assert np.all((u.degrees() > 0) <= (s.degrees() > 0))
        assert edge_set(s) <= edge_set(u)


def test_content_only_edge_can_survive():
    # 2 and 3 share a private vocabulary but are not topologically adjacent
    g = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 5)])
    store = TermVectorStore.from_dicts([{0: 1}, {0: 1}, {9: 4}, {9: 4}, {2: 1}, {2: 1}])
    cfg = _cfg(k=1, alpha=0.0)
    ce = build_content_edges(store, 1)
    assert [2, 3] in ce.tolist()
    s = sample_edges(g, ce, store, cfg)
    assert s.has_edge(2, 3) and not g.has_edge(2, 3)


def test_mutual_retention_is_subset():
    g, vecs, store = random_instance(44)
    ce = build_content_edges(store, 5)
    union = sample_edges(g, ce, store, _cfg(retention="union"))
    mutual = sample_edges(g, ce, store, _cfg(retention="mutual"))
    assert edge_set(mutual) <= edge_set(union)


@pytest.mark.parametrize("sim", ["cosine-simhash", "jaccard-minhash"])
def test_estimated_kinds_are_seed_deterministic(sim):
    g, vecs, store = random_instance(21)
    ce = build_content_edges(store, 4)
    a = sample_edges(g, ce, store, _cfg(similarity=sim, seed=5))
    b = sample_edges(g, ce, store, _cfg(similarity=sim, seed=5))
    assert a == b
    union = Graph(g.vertex_count, build_edge_union(g, ce))
    assert np.all((union.degrees() > 0) <= (a.degrees() > 0))


def test_weighted_unit_weights_match_unweighted():
    g, vecs, store = random_instance(3)
    ce = build_content_edges(store, 4)
    gw = Graph(g.vertex_count, g.edges, np.ones(g.edge_count))
    a = sample_edges(g, ce, store, _cfg())
    b = sample_edges_weighted(gw, ce, store, _cfg())
    assert edge_set(a) == edge_set(b)


def test_weighted_uniform_scaling_invariant():
    g, vecs, store = random_instance(4, weighted=True)
    ce = np.zeros((0, 2))
    a = sample_edges_weighted(g, ce, store, _cfg())
    b = sample_edges_weighted(Graph(g.vertex_count, g.edges, 2 * g.weights), ce, store, _cfg())
    assert edge_set(a) == edge_set(b)


def test_weighted_breaks_score_tie():
    # star center keeps 2 of 4 structurally identical leaves; leaf 4 carries weight 2
    g = Graph.from_edges(5, [(0, i) for i in range(1, 5)], [1.0, 1.0, 1.0, 2.0])
    store = TermVectorStore.empty(5)
    plain = select_edges(g, np.zeros((0, 2)), store, _cfg())
    heavy = select_edges(g, np.zeros((0, 2)), store, _cfg(), weighted=True)
    assert plain.chosen[:2].tolist() == [1, 2]
    assert heavy.chosen[:2].tolist() == [4, 1]


def test_weighted_matches_oracle():
    for seed in range(8):
        g, vecs, store = random_instance(900 + seed, weighted=True)
        ce = build_content_edges(store, 3)
        w = {tuple(e): x for e, x in zip(g.edges.tolist(), g.weights.tolist())}
        ref = naive.sample(g.vertex_count, [tuple(e) for e in g.edges.tolist()], vecs,
                           {tuple(e) for e in ce.tolist()}, weights=w)
        got = sample_edges_weighted(g, ce, store, _cfg())
        assert edge_set(got) == ref
        assert got.weights.tolist() == [w.get(tuple(e), 1.0) for e in got.edges.tolist()]


def test_weighted_rejects_nonpositive_weight():
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 1)], [-1.0])


def test_deterministic_repeat():
    g, vecs, store = random_instance(17)
    ce = build_content_edges(store, 6)
    assert sample_edges(g, ce, store, _cfg()) == sample_edges(g, ce, store, _cfg())


# configuration

@pytest.mark.parametrize("kw", [
    {"alpha": 1.2}, {"alpha": -0.1}, {"k": 0}, {"hashes": 0}, {"bits": 0}, {"m": 0},
    {"similarity": "dice"}, {"normalizer": "l2"}, {"scope": "far"}, {"retention": "any"},
    {"structural_neighborhood": "half"}, {"seed": -1},
])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SamplerConfig(**kw)


def test_config_aliases():
    cfg = SamplerConfig(similarity="jac-mh", normalizer="z", scope="2hop")
    assert (cfg.similarity, cfg.normalizer, cfg.scope) == ("jaccard-minhash", "z-norm", "2-hop")


def test_derive_seed_streams_differ():
    seeds = {derive_seed(0, s) for s in range(1, 6)}
    assert len(seeds) == 5
    assert derive_seed(7, 1) == derive_seed(7, 1)
    assert all(0 <= s < 2**64 for s in seeds)


# full pipeline

def _two_cliques():
    edges = [(i, j) for b in (0, 10) for i in range(b, b + 10) for j in range(i + 1, b + 10)] + [(9, 10)]
    g = Graph.from_edges(20, edges)
    store = TermVectorStore.from_dicts([{0: 2, 1: 1}] * 10 + [{2: 1, 3: 2}] * 10)
    return g, store


@pytest.mark.parametrize("backend", ["mcl", "lp"])
def test_two_cliques_recovered(backend):
    g, store = _two_cliques()
    res = codicil(g, store, SamplerConfig(k=5), 2, backend)
    truth = Clustering.from_labels([0] * 10 + [1] * 10)
    assert fscore_clustering(res.clustering, truth).aggregate == 1.0
    assert set(res.timings_ms) == {"content_edges", "union", "sampling", "clustering"}
    assert res.counts["sample"] <= res.counts["union"]


def test_empty_store_alpha_one_is_sparsify_then_cluster():
    g, vecs, _ = random_instance(33)
    res = codicil(g, None, SamplerConfig(alpha=1.0), 3, "mcl")
    sparse = sample_edges(g, np.zeros((0, 2)), TermVectorStore.empty(g.vertex_count), SamplerConfig(alpha=1.0))
    assert res.sample == sparse
    assert res.clustering.labels.tolist() == mcl_cluster(sparse).labels.tolist()


def test_codicil_rejects_bad_inputs():
    g, store = _two_cliques()
    with pytest.raises(ValueError):
        codicil(g, store, SamplerConfig(), 0)
    with pytest.raises(ValueError):
        codicil(g, store, SamplerConfig(), 2, "kmeans")
