import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from substory.corpus import Corpus, PreprocessOptions, SynthSpec, Tweet, preprocess, synth_generate
from substory.spectral import (
    OUTLIER, SpectralConfig, SpectralError, WordClusters, WordGraph, assign_tweets, build_graph, cluster_words,
    fix_signs, is_connected, kmeans, laplacian_embedding, largest_connected_component, npmi,
)


def _corpus(texts):
    tweets = tuple(Tweet(f"t{i}", s, i) for i, s in enumerate(texts))
    return preprocess(Corpus(tweets), PreprocessOptions(stem=False))


def random_connected_graph(rng, n):
    """Random spanning tree plus extra random edges, positive weights."""
    w = np.zeros((n, n))
    order = rng.permutation(n)
    for i in range(1, n):
        a, b = order[i], order[rng.integers(i)]
        w[a, b] = w[b, a] = rng.uniform(0.1, 1.0)
    extra = rng.random((n, n)) < rng.uniform(0.05, 0.5)
    extra = np.triu(extra, 1)
    vals = rng.uniform(0.1, 1.0, size=(n, n))
    w = np.where(extra & (w == 0), vals, w)
    w = np.triu(w, 1)
    return WordGraph(np.arange(n), w + w.T)


def dense_reference_embedding(weights, dim):
    """L_sym through explicit diagonal matrices and a general (nonsymmetric) eigen-solver."""
    n = len(weights)
    d_inv_sqrt = np.diag(1.0 / np.sqrt(weights.sum(axis=1)))
    lap = np.eye(n) - d_inv_sqrt @ weights @ d_inv_sqrt
    vals, vecs = scipy.linalg.eig(lap)
    vals, vecs = vals.real, vecs.real
    order = np.argsort(vals, kind="stable")[:dim]
    vals, vecs = vals[order], vecs[:, order]
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    for j in range(dim):
        col = vecs[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            vecs[:, j] = -col
    rows = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
    return vals, rows


# -- NPMI -----------------------------------------------------------------------

def test_npmi_examples():
    assert npmi(5, 5, 5, 10) == 1.0
    assert npmi(0, 3, 4, 10) == -1.0
    assert npmi(2, 4, 5, 20) == pytest.approx(math.log(2) / math.log(10), abs=1e-12)
    assert round(npmi(2, 4, 5, 20), 4) == 0.3010


@pytest.mark.parametrize("args", [(3, 2, 5, 10), (1, 0, 0, 10), (1, 5, 5, 4), (-1, 2, 2, 5)])
def test_npmi_rejects_invalid_counts(args):
    with pytest.raises(SpectralError):
        npmi(*args)


valid_counts = st.integers(1, 200).flatmap(
    lambda n: st.tuples(st.integers(1, n), st.integers(1, n)).flatmap(
        lambda xy: st.tuples(st.integers(max(0, xy[0] + xy[1] - n), min(xy)), st.just(xy[0]),
                             st.just(xy[1]), st.just(n))))


@settings(max_examples=1000, deadline=None)
@given(valid_counts)
def test_npmi_bounded_and_symmetric(c):
    xy, x, y, n = c
    v = npmi(xy, x, y, n)
    assert -1.0 <= v <= 1.0
    assert v == npmi(xy, y, x, n)


# -- graph -------------------------------------------------------------------------

def test_build_graph_six_tweet_fixture():
    c = _corpus(["apple banana cherry", "apple banana", "apple banana",
                 "cherry durian", "durian", "eggplant durian"])
    g = build_graph(c, SpectralConfig(k=2, min_word_freq=1, npmi_threshold=0.1))
    term = c.vocabulary.term
    # hand table: only apple-banana (always together) and durian-eggplant clear 0.1
    #   apple-banana   3 of 6, df 3,3: ln(3*6/9) / ln(6/3)   = 1
    #   durian-eggplant 1 of 6, df 3,1: ln(1*6/3) / ln(6/1)   = ln2/ln6
    #   apple-cherry, banana-cherry, cherry-durian: ln(1*6/(3*2)) = 0
    got = {(term(a), term(b)): w for a, b, w in g.edges()}
    assert got.keys() == {("apple", "banana"), ("durian", "eggplant")}
    assert got[("apple", "banana")] == pytest.approx(1.0, abs=1e-12)
    assert got[("durian", "eggplant")] == pytest.approx(math.log(2) / math.log(6), abs=1e-12)
    assert np.allclose(g.weights, g.weights.T) and not np.diag(g.weights).any()


def test_build_graph_frequency_filter():
    c = _corpus(["apple banana", "apple banana", "cherry"])
    g = build_graph(c, SpectralConfig(k=1, min_word_freq=2))
    assert [c.vocabulary.term(t) for t in g.nodes] == ["apple", "banana"]
    assert g.edges()[0][2] == pytest.approx(1.0)
    with pytest.raises(SpectralError):
        build_graph(c, SpectralConfig(k=1, min_word_freq=5))


def test_build_graph_disjoint_words_have_no_edge():
    c = _corpus(["apple", "banana", "apple", "banana"])
    assert build_graph(c, SpectralConfig(k=1, min_word_freq=1)).edges() == []


def _two_triangles(w1, w2):
    w = np.zeros((6, 6))
    for (a, b), v in zip([(0, 1), (1, 2), (0, 2)], w1):
        w[a, b] = w[b, a] = v
    for (a, b), v in zip([(3, 4), (4, 5), (3, 5)], w2):
        w[a, b] = w[b, a] = v
    return WordGraph(np.array([10, 11, 12, 20, 21, 22]), w)


def test_lcc():
    g = random_connected_graph(np.random.default_rng(0), 6)
    assert largest_connected_component(g) is g
    w = np.zeros((5, 5))
    w[0, 1] = w[1, 0] = w[1, 2] = w[2, 1] = 0.5
    w[3, 4] = w[4, 3] = 0.9
    lcc = largest_connected_component(WordGraph(np.arange(5), w))
    assert lcc.nodes.tolist() == [0, 1, 2]
    assert is_connected(lcc)


def test_lcc_ties():
    g = _two_triangles([0.7, 0.7, 0.0], [0.7, 0.7, 0.7])  # weights 1.4 vs 2.1
    assert largest_connected_component(g).nodes.tolist() == [20, 21, 22]
    g = _two_triangles([0.5, 0.5, 0.0], [0.5, 0.5, 0.0])
    assert largest_connected_component(g).nodes.tolist() == [10, 11, 12]


# -- embedding -------------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(10))
def test_embedding_matches_dense_reference(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 51))
    g = random_connected_graph(rng, n)
    dim = int(rng.integers(1, min(n, 8) + 1))
    emb = laplacian_embedding(g, dim)
    vals, rows = dense_reference_embedding(g.weights, dim)
    assert np.max(np.abs(emb.coords - rows)) < 1e-6
    assert np.allclose(emb.eigenvalues, vals, atol=1e-9)
    assert abs(emb.eigenvalues[0]) < 1e-8
    assert np.all(np.diff(emb.eigenvalues) >= -1e-12)
    full = laplacian_embedding(g, n).eigenvalues
    assert full.min() >= -1e-8 and full.max() <= 2 + 1e-8


def test_embedding_two_cliques():
    w = np.zeros((8, 8))
    w[:4, :4] = 1.0
    w[4:, 4:] = 1.0
    np.fill_diagonal(w, 0.0)
    w[3, 4] = w[4, 3] = 0.01
    emb = laplacian_embedding(WordGraph(np.arange(8), w), 2)
    second = emb.eigenvectors[:, 1]
    assert np.all(np.sign(second[:4]) == np.sign(second[0]))
    assert np.all(np.sign(second[4:]) == -np.sign(second[0]))


def test_embedding_complete_graph():
    w = np.ones((5, 5)) - np.eye(5)
    emb = laplacian_embedding(WordGraph(np.arange(5), w), 1)
    assert np.allclose(emb.coords, emb.coords[0])


def test_embedding_errors():
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = w[2, 3] = w[3, 2] = 1.0
    with pytest.raises(SpectralError, match="connected component"):
        laplacian_embedding(WordGraph(np.arange(4), w), 2)
    with pytest.raises(SpectralError):
        laplacian_embedding(random_connected_graph(np.random.default_rng(1), 3), 4)


def test_fix_signs():
    v = np.array([[0.1, -0.2], [-0.9, 0.1]])
    out = fix_signs(v)
    assert out[1, 0] > 0 and out[0, 1] > 0


# -- k-means ---------------------------------------------------------------------------

def test_kmeans_one_cluster_per_point():
    pts = np.random.default_rng(0).normal(size=(6, 2))
    res = kmeans(pts, 6)
    assert sorted(res.labels.tolist()) == list(range(6))
    assert res.wcss == pytest.approx(0.0, abs=1e-12)


def test_kmeans_duplicates():
    res = kmeans(np.tile([[1.5, -2.0]], (5, 1)), 1)
    assert np.allclose(res.centroids, [[1.5, -2.0]])
    assert res.wcss == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_kmeans_blobs(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal([0, 0], 0.3, size=(30, 2))
    b = rng.normal([5, 5], 0.3, size=(30, 2))
    res = kmeans(np.vstack([a, b]), 2, seed=seed)
    assert len(set(res.labels[:30])) == 1 and len(set(res.labels[30:])) == 1
    assert res.labels[0] != res.labels[-1]


def test_kmeans_errors_and_determinism():
    pts = np.random.default_rng(3).normal(size=(20, 3))
    with pytest.raises(SpectralError):
        kmeans(pts, 21)
    a, b = kmeans(pts, 4, seed=7), kmeans(pts, 4, seed=7)
    assert np.array_equal(a.labels, b.labels) and np.array_equal(a.centroids, b.centroids)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 40), st.integers(1, 6))
def test_kmeans_wcss_non_increasing(seed, n, k):
    pts = np.random.default_rng(seed).normal(size=(n, 2))
    # duplicate points make empty clusters likely
    pts = np.round(pts, 0)
    res = kmeans(pts, min(k, n), restarts=1, seed=seed)
    h = np.asarray(res.history)
    assert np.all(np.diff(h) <= 1e-9 * (1 + h[:-1]))


# -- composition -------------------------------------------------------------------------

def _disjoint_corpus():
    return preprocess(synth_generate(SynthSpec(n_substories=3, tweets_per_story=80, vocab_per_story=12,
                                               shared_vocab_size=0, seed=5)))


def test_cluster_words_recovers_vocabularies():
    c = _disjoint_corpus()
    wc = cluster_words(c, SpectralConfig(k=3, min_word_freq=5))
    story_of = {}
    for t, p in zip(c.tweets, c.processed):
        for w in p.tokens:
            story_of[w] = t.gold_substory
    assert len(wc.clusters) == 3
    for _, members in wc.clusters:
        assert len({story_of[t] for t, _ in members}) == 1
        assert abs(sum(s for _, s in members) - 1.0) < 1e-9
        assert all(s >= 0 for _, s in members)


def test_cluster_words_single_cluster():
    c = _disjoint_corpus()
    g = largest_connected_component(build_graph(c, SpectralConfig(k=1, min_word_freq=5)))
    wc = cluster_words(c, SpectralConfig(k=1, min_word_freq=5))
    assert len(wc.clusters) == 1
    assert sorted(t for t, _ in wc.clusters[0][1]) == g.nodes.tolist()
    clustered = {t for _, m in wc.clusters for t, _ in m}
    assert not clustered & set(wc.unclustered)


def test_assign_tweets_hand_scores():
    c = _corpus(["apple banana", "apple cherry", "durian", "cherry cherry"])
    vid = c.vocabulary.id_of
    wc = WordClusters((
        (0, ((vid("apple"), 0.3), (vid("banana"), 0.7))),
        (1, ((vid("cherry"), 0.25), (vid("eggs") if "eggs" in c.vocabulary else 99, 0.75))),
    ))
    got = assign_tweets(c, wc)
    assert got["t0"] == 0  # entirely inside cluster 0
    assert got["t1"] == 0  # 0.3 vs 0.25
    assert got["t2"] == OUTLIER
    assert got["t3"] == 1  # 2 * 0.25


def test_assign_tweets_tie_goes_to_lower_id():
    c = _corpus(["apple banana"])
    vid = c.vocabulary.id_of
    wc = WordClusters(((3, ((vid("banana"), 0.5),)), (1, ((vid("apple"), 0.5),))))
    ordered = WordClusters(tuple(sorted(wc.clusters)))
    assert assign_tweets(c, ordered)["t0"] == 1
