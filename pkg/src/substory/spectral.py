"""Spectral clustering of words on an NPMI co-occurrence graph, and tweet assignment to word clusters."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .corpus import Corpus

OUTLIER = -1


class SpectralError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralConfig:
    k: int = 10
    npmi_threshold: float = 0.1
    min_word_freq: int = 10
    embedding_dim: int | None = None  # None -> k
    kmeans_iters: int = 100
    kmeans_restarts: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise SpectralError("k must be positive")
        if not -1.0 <= self.npmi_threshold <= 1.0:
            raise SpectralError("npmi_threshold must lie in [-1, 1]")
        if self.min_word_freq < 1:
            raise SpectralError("min_word_freq must be positive")


@dataclass(frozen=True)
class WordGraph:
    """Undirected weighted graph over term ids; ``weights`` is symmetric with zero diagonal."""

    nodes: np.ndarray  # term ids, ascending
    weights: np.ndarray  # dense (n, n)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def edges(self) -> list[tuple[int, int, float]]:
        i, j = np.nonzero(np.triu(self.weights, 1))
        return [(int(self.nodes[a]), int(self.nodes[b]), float(self.weights[a, b])) for a, b in zip(i, j)]

    def induced(self, positions) -> "WordGraph":
        positions = np.asarray(positions, dtype=np.int64)
        return WordGraph(self.nodes[positions], self.weights[np.ix_(positions, positions)])


@dataclass(frozen=True)
class WordClusters:
    clusters: tuple[tuple[int, tuple[tuple[int, float], ...]], ...]
    unclustered: tuple[int, ...] = ()
    config: SpectralConfig | None = None
    _score: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        lookup = {}
        for cid, members in self.clusters:
            for term, score in members:
                lookup[term] = (cid, score)
        object.__setattr__(self, "_score", lookup)

    def cluster_of(self, term_id: int):
        return self._score.get(term_id)

    def to_json(self, vocabulary=None) -> dict:
        name = (lambda t: vocabulary.term(t)) if vocabulary is not None else (lambda t: t)
        return {
            "clusters": [{"id": cid, "words": [[name(t), s] for t, s in sorted(m, key=lambda x: (-x[1], x[0]))]}
                         for cid, m in self.clusters],
            "unclustered": [name(t) for t in self.unclustered],
            "config": None if self.config is None else self.config.__dict__,
        }


def npmi(count_xy: int, count_x: int, count_y: int, n_docs: int) -> float:
    """Normalized PMI of two words from tweet-level occurrence counts, in [-1, 1]."""
    if not (0 <= count_xy <= min(count_x, count_y) and 1 <= max(count_x, count_y) <= n_docs and min(count_x, count_y) >= 0):
        raise SpectralError(f"invalid counts xy={count_xy} x={count_x} y={count_y} n={n_docs}")
    if count_xy == 0:
        return -1.0
    if count_xy == count_x == count_y:
        return 1.0
    # count_xy == n_docs would leave -ln p(x,y) = 0; it forces the previous branch
    # integer products keep the value exactly symmetric and exactly 0 under independence
    pmi = math.log(count_xy * n_docs) - math.log(count_x * count_y)
    value = pmi / (math.log(n_docs) - math.log(count_xy))
    return min(1.0, max(-1.0, value))


def build_graph(corpus: Corpus, config: SpectralConfig) -> WordGraph:
    df = np.asarray(corpus.vocabulary.document_frequency, dtype=np.int64)
    keep = np.flatnonzero(df >= config.min_word_freq)
    if len(keep) == 0:
        raise SpectralError(f"no word reaches document frequency {config.min_word_freq}")
    pos = {int(t): i for i, t in enumerate(keep)}
    rows, cols = [], []
    for doc_i, p in enumerate(corpus.processed):
        for t in p.term_counts:
            if t in pos:
                rows.append(doc_i)
                cols.append(pos[t])
    n_docs = len(corpus)
    incidence = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_docs, len(keep))).tocsr()
    co = (incidence.T @ incidence).toarray().astype(np.int64)
    counts = np.diag(co).copy()
    w = np.zeros(co.shape)
    ii, jj = np.nonzero(np.triu(co, 1))
    for a, b in zip(ii, jj):
        v = npmi(int(co[a, b]), int(counts[a]), int(counts[b]), n_docs)
        if v >= config.npmi_threshold:
            w[a, b] = w[b, a] = v
    return WordGraph(keep.astype(np.int64), w)


def largest_connected_component(graph: WordGraph) -> WordGraph:
    """Largest component by node count; ties by total edge weight, then smallest member id."""
    if graph.n_nodes == 0:
        raise SpectralError("empty graph")
    n_comp, labels = connected_components(graph.weights != 0, directed=False)
    if n_comp == 1:
        return graph
    best_key, best = None, None
    for c in range(n_comp):
        members = np.flatnonzero(labels == c)
        weight = graph.weights[np.ix_(members, members)].sum() / 2
        key = (-len(members), -round(float(weight), 12), int(graph.nodes[members].min()))
        if best_key is None or key < best_key:
            best_key, best = key, members
    return graph.induced(best)


def is_connected(graph: WordGraph) -> bool:
    return connected_components(graph.weights != 0, directed=False)[0] == 1


def normalized_laplacian(weights: np.ndarray) -> np.ndarray:
    deg = weights.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(deg)
    return np.eye(len(deg)) - inv_sqrt[:, None] * weights * inv_sqrt[None, :]


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry (first on ties) is positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


@dataclass(frozen=True)
class Embedding:
    nodes: np.ndarray
    coords: np.ndarray  # (n, dim), rows unit length
    eigenvalues: np.ndarray  # the dim smallest, nondecreasing
    eigenvectors: np.ndarray  # (n, dim), sign-fixed, before row normalization

    def as_dict(self) -> dict[int, np.ndarray]:
        return {int(t): self.coords[i] for i, t in enumerate(self.nodes)}


def laplacian_embedding(graph: WordGraph, dim: int) -> Embedding:
    """Row-normalized coordinates from the ``dim`` smallest eigenvectors of I - D^-1/2 W D^-1/2."""
    if not 1 <= dim <= graph.n_nodes:
        raise SpectralError(f"embedding dim {dim} outside [1, {graph.n_nodes}]")
    if graph.n_nodes > 1 and not is_connected(graph):
        raise SpectralError("graph is disconnected; extract the largest connected component first")
    if graph.n_nodes == 1:
        vals, vecs = np.zeros(1), np.ones((1, 1))
    else:
        vals, vecs = np.linalg.eigh(normalized_laplacian(graph.weights))
        vals, vecs = vals[:dim], fix_signs(vecs[:, :dim])
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    coords = vecs / np.where(norms > 0, norms, 1.0)
    return Embedding(graph.nodes, coords, vals, vecs)


# -- k-means -----------------------------------------------------------------

@dataclass(frozen=True)
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    wcss: float
    history: tuple[float, ...]  # WCSS after each Lloyd iteration of the chosen restart


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d = (points ** 2).sum(1)[:, None] - 2 * points @ centroids.T + (centroids ** 2).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _kmeanspp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    chosen = [int(rng.integers(n))]
    d2 = ((points - points[chosen[0]]) ** 2).sum(1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            # all remaining mass on existing centres: pick any unchosen point
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rest[rng.integers(len(rest))])
        else:
            nxt = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            nxt = min(nxt, n - 1)
        chosen.append(nxt)
        d2 = np.minimum(d2, ((points - points[nxt]) ** 2).sum(1))
    return points[chosen].copy()


def _lloyd(points: np.ndarray, centroids: np.ndarray, iters: int):
    history = []
    labels = None
    for _ in range(iters):
        d = _sq_dists(points, centroids)
        new_labels = d.argmin(1)
        wcss = float(d[np.arange(len(points)), new_labels].sum())
        history.append(wcss)
        if labels is not None and np.array_equal(labels, new_labels):
            break
        labels = new_labels
        for c in range(len(centroids)):
            members = labels == c
            if members.any():
                centroids[c] = points[members].mean(0)
            else:
                # re-seed an empty cluster at the point farthest from its centroid
                far = int(d[np.arange(len(points)), labels].argmax())
                centroids[c] = points[far]
                labels[far] = c
                d[far] = 0.0
    d = _sq_dists(points, centroids)
    labels = d.argmin(1)
    wcss = float(d[np.arange(len(points)), labels].sum())
    history.append(wcss)
    return labels, centroids, wcss, history


def kmeans(points, k: int, iters: int = 100, restarts: int = 10, seed: int = 0) -> KMeansResult:
    """k-means++ seeding plus Lloyd iterations, best of ``restarts`` by within-cluster sum of squares."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if not 1 <= k <= len(points):
        raise SpectralError(f"k={k} needs between 1 and {len(points)} clusters")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        labels, centroids, wcss, history = _lloyd(points, _kmeanspp(points, k, rng), iters)
        if best is None or wcss < best.wcss - 1e-12:
            best = KMeansResult(labels, centroids, wcss, tuple(history))
    return best


# -- pipeline ------------------------------------------------------------------

def cluster_words(corpus: Corpus, config: SpectralConfig) -> WordClusters:
    graph = build_graph(corpus, config)
    lcc = largest_connected_component(graph)
    dim = config.embedding_dim or config.k
    dim = min(dim, lcc.n_nodes)
    k = min(config.k, lcc.n_nodes)
    emb = laplacian_embedding(lcc, dim)
    km = kmeans(emb.coords, k, config.kmeans_iters, config.kmeans_restarts, config.seed)
    clusters = []
    for cid in range(k):
        pos = np.flatnonzero(km.labels == cid)
        if len(pos) == 0:
            continue
        sub = lcc.weights[np.ix_(pos, pos)].sum(1)
        if sub.sum() > 0:
            scores = sub / sub.sum()
        else:
            scores = np.full(len(pos), 1.0 / len(pos))
        clusters.append((cid, tuple((int(lcc.nodes[p]), float(s)) for p, s in zip(pos, scores))))
    unclustered = tuple(int(t) for t in np.setdiff1d(graph.nodes, lcc.nodes))
    return WordClusters(tuple(clusters), unclustered, config)


def assign_tweets(corpus: Corpus, word_clusters: WordClusters) -> dict[str, int]:
    """Assign each tweet to the word cluster with the highest importance-weighted term count."""
    if not word_clusters.clusters:
        raise SpectralError("no word clusters")
    ids = [cid for cid, _ in word_clusters.clusters]
    col = {cid: j for j, cid in enumerate(ids)}
    out = {}
    for p in corpus.processed:
        scores = np.zeros(len(ids))
        for t, c in p.term_counts.items():
            hit = word_clusters.cluster_of(t)
            if hit is not None:
                scores[col[hit[0]]] += hit[1] * c
        j = int(np.argmax(scores))  # first max -> lowest cluster id (ids ascending)
        out[p.tweet_id] = ids[j] if scores[j] > 0 else OUTLIER
    return out
