import io
import math

import numpy as np
import pytest

from codicil import (CosineIndex, FormatError, Graph, TermVectorStore, WeightedVector, build_content_edges,
                     tfidf_weight, topk_content_neighbors, truncate_top_m)
from codicil.textindex import (idf_weights, parse_scope, read_term_vectors, read_vocabulary, suggest_k,
                               write_term_vectors, write_vocabulary)

import naive_codicil as naive
from instances import random_graph, random_vectors


def _wv(d):
    terms = np.array(sorted(d), dtype=np.int64)
    return WeightedVector(terms, np.array([d[t] for t in terms.tolist()], dtype=float))


def test_tfidf_hand_value():
    # tf=4 in vertex 0, corpus total 5, corpus size 10
    vecs = [{0: 4}, {0: 1}] + [{1: 1}] * 8
    store = TermVectorStore.from_dicts(vecs)
    w = tfidf_weight(store, 0)
    assert w.terms.tolist() == [0]
    assert w.weights[0] == pytest.approx(2 * math.log(3))


def test_tfidf_single_document():
    store = TermVectorStore.from_dicts([{7: 1}])
    assert tfidf_weight(store, 0).weights.tolist() == pytest.approx([math.log(2)])


def test_tfidf_absent_terms_absent():
    store = TermVectorStore.from_dicts([{0: 2, 3: 0}, {3: 1}])
    assert tfidf_weight(store, 0).terms.tolist() == [0]


def test_store_doc_freq():
    store = TermVectorStore.from_dicts([{0: 2, 1: 1}, {1: 5}, {}])
    assert store.doc_freq.tolist() == [1, 2]
    assert store.term_totals.tolist() == [2.0, 6.0]
    assert idf_weights(store)[1] == pytest.approx(math.log(1 + 3 / 6))


def test_weighted_vector_norm():
    v = _wv({0: 3.0, 5: 4.0})
    assert v.norm == pytest.approx(5.0, abs=1e-9)


def test_truncate_examples():
    v = _wv({0: 3.0, 1: 2.0, 2: 1.0})
    assert truncate_top_m(v, 2).as_dict() == {0: 3.0, 1: 2.0}
    assert truncate_top_m(v, 10) is v
    tie = _wv({0: 2.0, 1: 2.0, 2: 1.0})
    assert truncate_top_m(tie, 1).as_dict() == {0: 2.0}
    assert truncate_top_m(v, 1).norm == pytest.approx(3.0)


def test_truncate_composes():
    rng = np.random.default_rng(1)
    for _ in range(50):
        d = {int(t): float(rng.integers(1, 4)) for t in rng.choice(40, size=12, replace=False)}
        v = _wv(d)
        a, b = rng.integers(1, 12, size=2)
        assert truncate_top_m(truncate_top_m(v, a), b).as_dict() == truncate_top_m(v, min(a, b)).as_dict()


def test_topk_empty_vector():
    store = TermVectorStore.from_dicts([{}, {1: 1}, {1: 2}])
    assert topk_content_neighbors(store, 0, 2).tolist() == []


def test_topk_identical_pair():
    store = TermVectorStore.from_dicts([{1: 1, 2: 1}, {1: 1, 2: 1}, {3: 1}])
    assert topk_content_neighbors(store, 0, 1).tolist() == [1]
    assert topk_content_neighbors(store, 1, 1).tolist() == [0]


def test_topk_orthogonal_corpus_gives_no_edges():
    store = TermVectorStore.from_dicts([{i: 1} for i in range(6)])
    assert build_content_edges(store, 3).shape == (0, 2)


def _brute_topk(vecs, i, k, m=None):
    weighted = [naive.truncate(v, m) for v in naive.tfidf(vecs)]
    scored = sorted((-naive.cosine(weighted[i], weighted[j]), j) for j in range(len(vecs)) if j != i)
    return [j for s, j in scored if s < 0][:k]


@pytest.mark.parametrize("seed", range(10))
def test_topk_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    vecs = random_vectors(rng, 20, vocab=15, density=0.3)
    store = TermVectorStore.from_dicts(vecs, num_terms=15)
    m = None if seed % 2 else 3
    index = CosineIndex(store, m)
    for i in range(20):
        assert topk_content_neighbors(store, i, 5, index=index).tolist() == _brute_topk(vecs, i, 5, m)


@pytest.mark.parametrize("seed", range(5))
def test_content_edges_match_brute_force(seed):
    rng = np.random.default_rng(100 + seed)
    vecs = random_vectors(rng, 30, vocab=20)
    store = TermVectorStore.from_dicts(vecs, num_terms=20)
    got = {tuple(e) for e in build_content_edges(store, 3).tolist()}
    assert got == naive.content_edges(vecs, 3)
    assert len(got) <= 30 * 3


def test_topk_scores_sorted_and_padded():
    rng = np.random.default_rng(5)
    store = TermVectorStore.from_dicts(random_vectors(rng, 40, vocab=25))
    nbrs, scores = CosineIndex(store).topk(8)
    for row, sc in zip(nbrs, scores):
        valid = row >= 0
        assert np.all(valid[:-1] >= valid[1:])
        assert np.all(np.diff(sc[valid]) <= 0)
        assert np.all(sc[~valid] == 0)


def test_symmetric_inputs_symmetric_outputs():
    vecs = [{0: 1, 1: 2}, {0: 1, 1: 2}, {0: 3}, {1: 1, 4: 1}, {0: 1, 4: 2}]
    store = TermVectorStore.from_dicts(vecs)
    for k in (1, 2, 3):
        assert (1 in topk_content_neighbors(store, 0, k)) == (0 in topk_content_neighbors(store, 1, k))


def test_ranking_invariant_to_scaling():
    rng = np.random.default_rng(8)
    vecs = random_vectors(rng, 25, vocab=10, density=0.4)
    base = CosineIndex(TermVectorStore.from_dicts(vecs, num_terms=10)).topk(4)[0][0]
    vecs[0] = {t: 3 * c for t, c in vecs[0].items()}
    # term totals change with the scaled counts, so compare against the rescaled corpus's own ranking
    store = TermVectorStore.from_dicts(vecs, num_terms=10)
    w = naive.tfidf(vecs)
    expected = sorted((-naive.cosine(w[0], w[j]), j) for j in range(1, 25))
    got = CosineIndex(store).topk(4)[0][0]
    assert got.tolist() == [j for s, j in expected if s < 0][:4]
    assert base.size == got.size


def test_scope_one_hop_edges_are_topological():
    rng = np.random.default_rng(12)
    g = random_graph(rng, 40, 0.1)
    store = TermVectorStore.from_dicts(random_vectors(rng, 40, vocab=12, density=0.3))
    ce = build_content_edges(store, 4, "1-hop", g)
    assert all(g.has_edge(u, v) for u, v in ce.tolist())


def test_scope_two_hop_within_distance_two():
    rng = np.random.default_rng(13)
    g = random_graph(rng, 40, 0.06)
    store = TermVectorStore.from_dicts(random_vectors(rng, 40, vocab=12, density=0.3))
    ce = build_content_edges(store, 4, "2hop", g)
    A = g.adjacency(weighted=False)
    reach = (A + A @ A).toarray() > 0
    assert ce.shape[0] > 0
    assert all(reach[u, v] for u, v in ce.tolist())


def test_scope_requires_graph_and_valid_name():
    store = TermVectorStore.from_dicts([{0: 1}, {0: 1}])
    with pytest.raises(ValueError):
        CosineIndex(store).topk(1, "1-hop")
    with pytest.raises(ValueError):
        parse_scope("3-hop")


def test_suggest_k():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)])
    assert suggest_k(g) == 2
    assert suggest_k(Graph.empty(0)) == 1


def test_term_vector_roundtrip():
    rng = np.random.default_rng(2)
    store = TermVectorStore.from_dicts(random_vectors(rng, 15, vocab=10), num_terms=10)
    buf = io.StringIO()
    write_term_vectors(store, buf)
    back = read_term_vectors(io.StringIO(buf.getvalue()))
    assert (back.counts != store.counts[:, :back.num_terms]).nnz == 0
    assert back.corpus_size == store.corpus_size


def test_term_vectors_missing_lines_are_empty():
    store = read_term_vectors(io.StringIO("2 0:1\n"), vertex_count=4)
    assert store.corpus_size == 4
    assert store.vector(0) == {} and store.vector(2) == {0: 1.0}


@pytest.mark.parametrize("text", ["0 1\n", "0 a:1\n", "0 1:0\n", "x 1:1\n", "0 1:1\n0 2:1\n", "-1 1:1\n"])
def test_term_vectors_errors(text):
    with pytest.raises(FormatError):
        read_term_vectors(io.StringIO(text))


def test_vocabulary_roundtrip():
    vocab = {0: "graph", 3: "markov chain", 7: "tf-idf"}
    buf = io.StringIO()
    write_vocabulary(vocab, buf)
    assert read_vocabulary(io.StringIO(buf.getvalue())) == vocab
