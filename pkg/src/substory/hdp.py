"""Hierarchical Dirichlet process topic model fit by collapsed Gibbs sampling.

The sampler follows the Chinese restaurant franchise with explicit tables: tokens are seated
at tables within their tweet, each table serves one topic, and whole tables move between topics.
Seating is conditioned on explicit global topic weights ``pi0`` (plus the mass left for unseen
topics), which are redrawn from a Dirichlet over table counts after every sweep. The number of
topics alive at once is capped at ``max_topics``; once the cap is hit, new-topic mass is
simply unavailable.

Every random draw of sweep ``s`` comes from ``numpy.random.default_rng([seed, s, stream])``, so a
run is reproducible from its seed and sweep index alone.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numba
import numpy as np

from .corpus import Corpus, ProcessedTweet

OUTLIER = -1
MIN_TOPIC_TOKENS = 3


class HdpError(ValueError):
    pass


@dataclass(frozen=True)
class HdpConfig:
    alpha_init: float = 1.0  # top-level concentration: how many topics
    gamma_init: float = 1.0  # tweet-level concentration: how close tweets stay to pi0
    eta: float = 0.01
    max_topics: int = 50
    sweeps: int = 500
    burn_in: int = 250
    resample_concentrations: bool = True
    seed: int = 0
    n_chains: int = 1
    held_out_fraction: float = 0.1  # only used to rank chains when n_chains > 1
    concentration_iters: int = 10

    def __post_init__(self):
        if min(self.alpha_init, self.gamma_init, self.eta) <= 0:
            raise HdpError("alpha_init, gamma_init and eta must be positive")
        if self.max_topics < 1 or self.sweeps < 1:
            raise HdpError("max_topics and sweeps must be positive")
        if not 0 <= self.burn_in < self.sweeps:
            raise HdpError("burn_in must satisfy 0 <= burn_in < sweeps")
        if self.n_chains < 1:
            raise HdpError("n_chains must be positive")


# -- stick breaking ------------------------------------------------------------

def stick_break(breaks) -> np.ndarray:
    """weights[i] = breaks[i] * prod_{l<i} (1 - breaks[l])."""
    breaks = np.asarray(breaks, dtype=float)
    if np.any(breaks <= 0) or np.any(breaks > 1):
        raise HdpError("stick breaks must lie in (0, 1]")
    remaining = np.concatenate(([1.0], np.cumprod(1.0 - breaks)[:-1]))
    return breaks * remaining


def sample_gem(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """First ``n`` weights of a GEM(alpha) draw; the tail mass is 1 - sum."""
    return stick_break(np.maximum(rng.beta(1.0, alpha, size=n), np.finfo(float).tiny))


# -- sampler state ---------------------------------------------------------------

@dataclass
class HdpState:
    """Sampler state. ``tab``/``table_dish``/``table_n`` are the franchise seating; ``z``,
    ``n_dk`` and ``m_dk`` are derived views refreshed after every sweep."""

    words: np.ndarray  # (T,) term id per token, corpus order
    doc_of: np.ndarray  # (T,) tweet index per token
    doc_start: np.ndarray  # (D + 1,) token offsets
    tab: np.ndarray  # (T,) table within the tweet, -1 before the first sweep
    table_dish: np.ndarray  # (D, L) topic served at each table, -1 if unused
    table_n: np.ndarray  # (D, L) tokens seated at each table
    z: np.ndarray  # (T,) topic slot per token
    n_dk: np.ndarray  # (D, K)
    n_kw: np.ndarray  # (K, V)
    n_k: np.ndarray  # (K,)
    m_dk: np.ndarray  # (D, K) tables per (tweet, topic)
    pi0: np.ndarray  # (K + 1,), last entry is the mass left for unseen topics
    alpha: float
    gamma: float
    sweep: int = 0
    born: np.ndarray = field(default=None)  # (K,) slots opened during the last sweep

    @property
    def n_topics_cap(self) -> int:
        return self.n_k.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.n_kw.shape[1]

    @property
    def active(self) -> np.ndarray:
        return np.flatnonzero(self.n_k > 0)

    def copy(self) -> "HdpState":
        return replace(self, tab=self.tab.copy(), table_dish=self.table_dish.copy(),
                       table_n=self.table_n.copy(), z=self.z.copy(), n_dk=self.n_dk.copy(),
                       n_kw=self.n_kw.copy(), n_k=self.n_k.copy(), m_dk=self.m_dk.copy(),
                       pi0=self.pi0.copy(), born=None if self.born is None else self.born.copy())

    def refresh(self) -> None:
        k = self.n_topics_cap
        d = self.n_dk.shape[0]
        seated = self.tab >= 0
        self.z = np.full(len(self.words), -1, dtype=np.int64)
        self.z[seated] = self.table_dish[self.doc_of[seated], self.tab[seated]]
        self.n_dk = np.zeros((d, k), dtype=np.int64)
        np.add.at(self.n_dk, (self.doc_of[seated], self.z[seated]), 1)
        self.m_dk = np.zeros((d, k), dtype=np.int64)
        used = self.table_n > 0
        rows = np.nonzero(used)[0]
        np.add.at(self.m_dk, (rows, self.table_dish[used]), 1)

    def check(self) -> None:
        """Assert the count bookkeeping agrees with the token assignments."""
        assigned = self.z >= 0
        k = self.n_k.shape[0]
        assert np.array_equal(self.n_kw.sum(1), self.n_k)
        doc_len = np.bincount(self.doc_of[assigned], minlength=self.n_dk.shape[0])
        assert np.array_equal(self.n_dk.sum(1), doc_len)
        assert np.array_equal(np.bincount(self.z[assigned], minlength=k), self.n_k)
        kw = np.zeros_like(self.n_kw)
        np.add.at(kw, (self.z[assigned], self.words[assigned]), 1)
        assert np.array_equal(kw, self.n_kw)
        assert np.all(self.pi0 >= 0) and abs(self.pi0.sum() - 1.0) < 1e-9
        assert np.all(self.pi0[:k][self.n_k == 0] == 0)
        assert np.array_equal(self.m_dk > 0, self.n_dk > 0)
        assert np.all(self.m_dk <= self.n_dk)
        assert len(self.active) <= k


def init_state(corpus: Corpus, config: HdpConfig) -> HdpState:
    if not corpus.is_processed:
        raise HdpError("corpus must be preprocessed")
    lengths = np.array([len(p) for p in corpus.processed], dtype=np.int64)
    if lengths.sum() == 0:
        raise HdpError("all tweets are empty after preprocessing")
    words = np.fromiter((w for p in corpus.processed for w in p.tokens), dtype=np.int64)
    doc_of = np.repeat(np.arange(len(lengths)), lengths)
    doc_start = np.concatenate(([0], np.cumsum(lengths)))
    d, k, v = len(corpus), config.max_topics, len(corpus.vocabulary)
    n_tab = max(1, int(lengths.max()))
    pi0 = np.zeros(k + 1)
    pi0[k] = 1.0
    t = len(words)
    return HdpState(words, doc_of, doc_start, np.full(t, -1, dtype=np.int64),
                    np.full((d, n_tab), -1, dtype=np.int64), np.zeros((d, n_tab), dtype=np.int64),
                    np.full(t, -1, dtype=np.int64), np.zeros((d, k), dtype=np.int64),
                    np.zeros((k, v), dtype=np.int64), np.zeros(k, dtype=np.int64),
                    np.zeros((d, k), dtype=np.int64), pi0,
                    float(config.alpha_init), float(config.gamma_init), 0, np.zeros(k, dtype=bool))


@numba.njit(cache=True)
def _f_word(n_kw, n_k, k, w, eta, v_eta):
    return (n_kw[k, w] + eta) / (n_k[k] + v_eta)


@numba.njit(cache=True)
def _open_topic(n_k, pi0, born, u):
    """Claim the first free slot, splitting off a Beta(1, alpha) share of the remainder."""
    n_topics = n_k.shape[0]
    for k in range(n_topics):
        if n_k[k] == 0 and pi0[k] == 0.0:
            pi0[k] = u * pi0[n_topics]
            pi0[n_topics] -= pi0[k]
            born[k] = True
            return k
    return -1


@numba.njit(cache=True)
def _first_free(n_k):
    for k in range(n_k.shape[0]):
        if n_k[k] == 0:
            return k
    return -1


@numba.njit(cache=True)
def _sample_tables(words, doc_start, tab, table_dish, table_n, n_kw, n_k, m_k, pi0, born,
                   gamma, eta, u_table, u_dish, b_new):
    """Reseat every token: an existing table in proportion to its size times the word
    likelihood of its dish, or a new table whose dish is drawn from pi0."""
    n_topics = n_k.shape[0]
    vocab = n_kw.shape[1]
    v_eta = vocab * eta
    f = np.empty(n_topics)
    n_docs = doc_start.shape[0] - 1
    for d in range(n_docs):
        lo = doc_start[d]
        hi = doc_start[d + 1]
        n_tab = table_n.shape[1]
        cum = np.empty(n_tab + 1)
        for i in range(lo, hi):
            w = words[i]
            t = tab[i]
            if t >= 0:
                k = table_dish[d, t]
                table_n[d, t] -= 1
                n_kw[k, w] -= 1
                n_k[k] -= 1
                if table_n[d, t] == 0:
                    table_dish[d, t] = -1
                    m_k[k] -= 1
                    if m_k[k] == 0:
                        pi0[n_topics] += pi0[k]
                        pi0[k] = 0.0
            free = _first_free(n_k)
            new_mass = 0.0
            for k in range(n_topics):
                if n_k[k] > 0:
                    f[k] = _f_word(n_kw, n_k, k, w, eta, v_eta)
                    new_mass += pi0[k] * f[k]
                else:
                    f[k] = 0.0
            if free >= 0:
                new_mass += pi0[n_topics] / vocab
            total = 0.0
            for tt in range(n_tab):
                if table_n[d, tt] > 0:
                    total += table_n[d, tt] * f[table_dish[d, tt]]
                cum[tt] = total
            total += gamma * new_mass
            cum[n_tab] = total
            target = u_table[i] * total
            chosen = -1
            for tt in range(n_tab):
                if table_n[d, tt] > 0 and target < cum[tt]:
                    chosen = tt
                    break
            if chosen < 0:
                # new table: pick its dish
                dtarget = u_dish[i] * new_mass
                dish = -1
                acc = 0.0
                for k in range(n_topics):
                    if n_k[k] > 0:
                        acc += pi0[k] * f[k]
                        if dtarget < acc:
                            dish = k
                            break
                if dish < 0 and free >= 0:
                    dish = _open_topic(n_k, pi0, born, b_new[i])
                if dish < 0:
                    for k in range(n_topics - 1, -1, -1):
                        if n_k[k] > 0:
                            dish = k
                            break
                if dish < 0:
                    # nothing alive and nothing free cannot happen while max_topics >= 1
                    dish = 0
                for tt in range(n_tab):
                    if table_n[d, tt] == 0:
                        chosen = tt
                        break
                table_dish[d, chosen] = dish
                m_k[dish] += 1
            k = table_dish[d, chosen]
            tab[i] = chosen
            table_n[d, chosen] += 1
            n_kw[k, w] += 1
            n_k[k] += 1


@numba.njit(cache=True)
def _sample_dishes(words, doc_start, tab, table_dish, table_n, n_kw, n_k, m_k, pi0, born,
                   eta, u_dish, b_new):
    """Resample the topic of every table, moving all of its tokens at once."""
    n_topics = n_k.shape[0]
    vocab = n_kw.shape[1]
    v_eta = vocab * eta
    logp = np.empty(n_topics + 1)
    n_docs = doc_start.shape[0] - 1
    draw = 0
    lg_veta = math.lgamma(v_eta)
    lg_eta = math.lgamma(eta)
    for d in range(n_docs):
        lo = doc_start[d]
        hi = doc_start[d + 1]
        for t in range(table_n.shape[1]):
            size = table_n[d, t]
            if size == 0:
                continue
            old = table_dish[d, t]
            for i in range(lo, hi):
                if tab[i] == t:
                    n_kw[old, words[i]] -= 1
            n_k[old] -= size
            m_k[old] -= 1
            if m_k[old] == 0:
                pi0[n_topics] += pi0[old]
                pi0[old] = 0.0
            free = _first_free(n_k)
            best = -np.inf
            for k in range(n_topics + 1):
                if k < n_topics:
                    if n_k[k] == 0:
                        logp[k] = -np.inf
                        continue
                    lp = math.log(pi0[k]) if pi0[k] > 0 else -np.inf
                    lp += math.lgamma(n_k[k] + v_eta) - math.lgamma(n_k[k] + v_eta + size)
                    # distinct words of the table: count each once by scanning first occurrences
                    for i in range(lo, hi):
                        if tab[i] != t:
                            continue
                        w = words[i]
                        first = True
                        c = 0
                        for j in range(lo, hi):
                            if tab[j] == t and words[j] == w:
                                if j < i:
                                    first = False
                                    break
                                c += 1
                        if first:
                            lp += math.lgamma(n_kw[k, w] + eta + c) - math.lgamma(n_kw[k, w] + eta)
                else:
                    if free < 0 or pi0[n_topics] <= 0:
                        logp[k] = -np.inf
                        continue
                    lp = math.log(pi0[n_topics]) + lg_veta - math.lgamma(v_eta + size)
                    for i in range(lo, hi):
                        if tab[i] != t:
                            continue
                        w = words[i]
                        first = True
                        c = 0
                        for j in range(lo, hi):
                            if tab[j] == t and words[j] == w:
                                if j < i:
                                    first = False
                                    break
                                c += 1
                        if first:
                            lp += math.lgamma(eta + c) - lg_eta
                logp[k] = lp
                if lp > best:
                    best = lp
            total = 0.0
            for k in range(n_topics + 1):
                if logp[k] > -np.inf:
                    logp[k] = math.exp(logp[k] - best)
                    total += logp[k]
                else:
                    logp[k] = 0.0
            new = old
            if total > 0:
                target = u_dish[draw] * total
                acc = 0.0
                new = -1
                for k in range(n_topics + 1):
                    acc += logp[k]
                    if logp[k] > 0 and target < acc:
                        new = k
                        break
                if new < 0:
                    for k in range(n_topics, -1, -1):
                        if logp[k] > 0:
                            new = k
                            break
                if new == n_topics:
                    new = _open_topic(n_k, pi0, born, b_new[draw])
            if new < 0 or (n_k[new] == 0 and pi0[new] == 0.0):
                # the old topic died and was not reopened: put the table back on a fresh slot
                new = _open_topic(n_k, pi0, born, b_new[draw])
            draw += 1
            table_dish[d, t] = new
            for i in range(lo, hi):
                if tab[i] == t:
                    n_kw[new, words[i]] += 1
            n_k[new] += size
            m_k[new] += 1


def _sweep_rng(config: HdpConfig, sweep: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([config.seed, sweep, stream])


def _resample_pi0(state: HdpState, rng: np.random.Generator) -> None:
    k = state.n_topics_cap
    m_k = state.m_dk.sum(0)
    active = state.active
    g = np.zeros(k + 1)
    if len(active):
        g[active] = rng.standard_gamma(m_k[active].astype(float))
    g[k] = rng.standard_gamma(state.alpha)
    total = g.sum()
    if total <= 0:
        g[:] = 0
        g[active] = m_k[active]
        g[k] = state.alpha
        total = g.sum()
    state.pi0 = g / total


def gibbs_sweep(state: HdpState, corpus: Corpus | None, config: HdpConfig) -> HdpState:
    """One sweep: reseat every token, resample every table's topic, redraw pi0 from the table
    counts and (optionally) the concentrations. Returns a new state; the input is untouched.

    ``corpus`` is only used to check that the state belongs to it.
    """
    if corpus is not None and corpus.is_processed and len(state.words) != sum(len(p) for p in corpus.processed):
        raise HdpError("state does not match corpus token count")
    s = state.copy()
    s.sweep = state.sweep + 1
    s.born = np.zeros(s.n_topics_cap, dtype=bool)
    rng = _sweep_rng(config, s.sweep, 0)
    n_tok = len(s.words)
    m_k = s.m_dk.sum(0)
    _sample_tables(s.words, s.doc_start, s.tab, s.table_dish, s.table_n, s.n_kw, s.n_k, m_k, s.pi0,
                   s.born, s.gamma, config.eta, rng.random(n_tok), rng.random(n_tok),
                   rng.beta(1.0, s.alpha, size=n_tok))
    _sample_dishes(s.words, s.doc_start, s.tab, s.table_dish, s.table_n, s.n_kw, s.n_k, m_k, s.pi0,
                   s.born, config.eta, rng.random(n_tok), rng.beta(1.0, s.alpha, size=n_tok))
    s.refresh()
    _resample_pi0(s, rng)
    if config.resample_concentrations:
        s = resample_concentrations(s, config)
    return s


def resample_concentrations(state: HdpState, config: HdpConfig) -> HdpState:
    """Auxiliary-variable updates for alpha and gamma under Gamma(1, 1) priors.

    Deterministic in (config.seed, state.sweep).
    """
    rng = _sweep_rng(config, state.sweep, 1)
    a_prior, b_prior = 1.0, 1.0
    n_d = state.n_dk.sum(1)
    n_d = n_d[n_d > 0]
    tables = int(state.m_dk.sum())
    n_topics = len(state.active)
    alpha, gamma = state.alpha, state.gamma
    for _ in range(config.concentration_iters):
        if tables > 0 and n_topics > 0:
            x = rng.beta(alpha + 1.0, tables)
            rate = b_prior - math.log(max(x, 1e-300))
            odds = (a_prior + n_topics - 1.0) / (tables * rate)
            shape = a_prior + n_topics - (0.0 if rng.random() < odds / (1.0 + odds) else 1.0)
            alpha = rng.gamma(shape, 1.0 / rate)
        if len(n_d):
            w = rng.beta(gamma + 1.0, n_d)
            s = rng.random(len(n_d)) < n_d / (n_d + gamma)
            rate = b_prior - np.sum(np.log(np.maximum(w, 1e-300)))
            gamma = rng.gamma(a_prior + tables - s.sum(), 1.0 / rate)
    out = state.copy()
    out.alpha = float(max(alpha, 1e-12))
    out.gamma = float(max(gamma, 1e-12))
    return out


# -- fitted model ------------------------------------------------------------------

@dataclass(frozen=True)
class Topic:
    id: int
    theta: np.ndarray
    weight: float
    top_words: tuple[str, ...]


@dataclass(frozen=True)
class TopicModel:
    topics: tuple[Topic, ...]
    terms: tuple[str, ...]
    config: HdpConfig
    effective_topic_count: int
    alpha: float = 0.0
    gamma: float = 0.0
    _theta: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.topics:
            object.__setattr__(self, "_theta", np.stack([t.theta for t in self.topics]))

    @property
    def theta(self) -> np.ndarray:
        return self._theta

    @property
    def topic_ids(self) -> list[int]:
        return [t.id for t in self.topics]

    def to_json(self, top_n: int | None = None) -> dict:
        topics = []
        for t in self.topics:
            order = np.lexsort((np.arange(len(t.theta)), -t.theta))
            if top_n is not None:
                order = order[:top_n]
            topics.append({"id": t.id, "weight": t.weight,
                           "words": [[self.terms[i], float(t.theta[i])] for i in order]})
        return {"topics": topics, "effective_topic_count": self.effective_topic_count,
                "alpha": self.alpha, "gamma": self.gamma, "config": asdict(self.config)}

    def dumps(self, top_n: int | None = None) -> str:
        return json.dumps(self.to_json(top_n), indent=2, sort_keys=True)


def _top_words(theta: np.ndarray, terms, n: int = 10) -> tuple[str, ...]:
    order = np.lexsort((np.arange(len(theta)), -theta))[:n]
    return tuple(terms[i] for i in order)


def run_chain(corpus: Corpus, config: HdpConfig, callback=None) -> tuple[TopicModel, HdpState]:
    """Run one chain; ``callback(state)`` sees every post-sweep state (used by invariant tests)."""
    state = init_state(corpus, config)
    k, v = config.max_topics, state.vocab_size
    acc_kw = np.zeros((k, v))
    acc_k = np.zeros(k)
    acc_pi = np.zeros(k)
    n_avg = np.zeros(k, dtype=np.int64)
    for sweep in range(1, config.sweeps + 1):
        state = gibbs_sweep(state, None, config)
        if callback is not None:
            callback(state)
        if sweep > config.burn_in:
            # a slot reopened for a new topic starts a fresh average
            reborn = state.born & (n_avg > 0)
            acc_kw[reborn] = 0
            acc_k[reborn] = 0
            acc_pi[reborn] = 0
            n_avg[reborn] = 0
            live = state.n_k > 0
            acc_kw[live] += state.n_kw[live]
            acc_k[live] += state.n_k[live]
            acc_pi[live] += state.pi0[:k][live]
            n_avg[live] += 1
    keep = np.flatnonzero((state.n_k >= MIN_TOPIC_TOKENS) & (n_avg > 0))
    eta = config.eta
    weights = acc_pi[keep] / n_avg[keep]
    order = keep[np.lexsort((keep, -weights))]
    terms = corpus.vocabulary.terms
    topics = []
    for new_id, slot in enumerate(order):
        mean_kw = acc_kw[slot] / n_avg[slot]
        theta = (mean_kw + eta) / (acc_k[slot] / n_avg[slot] + v * eta)
        theta = theta / theta.sum()  # remove rounding drift
        topics.append(Topic(new_id, theta, float(acc_pi[slot] / n_avg[slot]), _top_words(theta, terms)))
    model = TopicModel(tuple(topics), terms, config, len(topics), state.alpha, state.gamma)
    return model, state


def _held_out_loglik(model: TopicModel, corpus: Corpus, ids: set[str]) -> float:
    w = np.array([t.weight for t in model.topics])
    w = w / w.sum()
    p_word = w @ model.theta
    total = 0.0
    for p in corpus.processed:
        if p.tweet_id in ids:
            for t, c in p.term_counts.items():
                total += c * math.log(p_word[t])
    return total


def fit(corpus: Corpus, config: HdpConfig = HdpConfig()) -> TopicModel:
    """Fit the topic model. With several chains, each is trained without a held-out slice of
    tweets and the chain with the best held-out likelihood is kept."""
    if not corpus.is_processed:
        raise HdpError("corpus must be preprocessed")
    if all(len(p) == 0 for p in corpus.processed):
        raise HdpError("all tweets are empty after preprocessing")
    if config.n_chains == 1:
        return run_chain(corpus, config)[0]
    rng = np.random.default_rng([config.seed, 0xC4A1])
    nonempty = [p.tweet_id for p in corpus.processed if len(p)]
    n_hold = max(1, int(round(config.held_out_fraction * len(nonempty))))
    held = set(rng.choice(nonempty, size=min(n_hold, len(nonempty) - 1), replace=False)) if len(nonempty) > 1 else set()
    train = corpus.subset(t.id for t in corpus.tweets if t.id not in held)
    best, best_ll = None, -math.inf
    for chain in range(config.n_chains):
        cfg = replace(config, seed=config.seed * 1_000_003 + chain, n_chains=1)
        model = run_chain(train, cfg)[0]
        model = _reindex(model, corpus)
        ll = _held_out_loglik(model, corpus, held) if held else 0.0
        if ll > best_ll:
            best, best_ll = model, ll
    return replace(best, config=config)


def _reindex(model: TopicModel, corpus: Corpus) -> TopicModel:
    """Express a model trained on a sub-corpus over ``corpus``'s vocabulary (unseen terms get eta)."""
    index = {t: i for i, t in enumerate(model.terms)}
    v = len(corpus.vocabulary)
    topics = []
    for t in model.topics:
        floor = t.theta.min()
        theta = np.full(v, floor)
        for j, term in enumerate(corpus.vocabulary.terms):
            i = index.get(term)
            if i is not None:
                theta[j] = t.theta[i]
        theta /= theta.sum()
        topics.append(Topic(t.id, theta, t.weight, _top_words(theta, corpus.vocabulary.terms)))
    return TopicModel(tuple(topics), corpus.vocabulary.terms, model.config, model.effective_topic_count,
                      model.alpha, model.gamma)


# -- clustering with the model ---------------------------------------------------------

def topic_scores(tweet: ProcessedTweet, model: TopicModel) -> np.ndarray:
    if not tweet.term_counts or not model.topics:
        return np.zeros(len(model.topics))
    idx = np.fromiter(tweet.term_counts.keys(), dtype=np.int64)
    cnt = np.fromiter(tweet.term_counts.values(), dtype=float)
    ok = idx < model.theta.shape[1]
    return model.theta[:, idx[ok]] @ cnt[ok]


def assign_tweet(tweet: ProcessedTweet, model: TopicModel) -> tuple[int, float]:
    """Topic maximizing the sum of topic-word probabilities over the tweet's tokens."""
    if not model.topics:
        raise HdpError("model has no topics")
    if not tweet.term_counts:
        return OUTLIER, 0.0
    scores = topic_scores(tweet, model)
    j = int(np.argmax(scores))
    return model.topics[j].id, float(scores[j])


def cluster_corpus(corpus: Corpus, model: TopicModel) -> dict[str, int]:
    return {p.tweet_id: assign_tweet(p, model)[0] for p in corpus.processed}


def report_topics(model: TopicModel, top_n: int = 10) -> dict:
    """Top terms per topic, with terms common to at least half the topics split out as shared."""
    if top_n < 1:
        raise HdpError("top_n must be at least 1")
    tops = [_top_words(t.theta, model.terms, top_n) for t in model.topics]
    return split_shared([(t.id, w) for t, w in zip(model.topics, tops)])


def split_shared(topic_words: list[tuple[int, tuple[str, ...]]]) -> dict:
    n = len(topic_words)
    counts: dict[str, int] = {}
    for _, words in topic_words:
        for w in set(words):
            counts[w] = counts.get(w, 0) + 1
    need = max(2, math.ceil(n / 2))
    shared = sorted(w for w, c in counts.items() if c >= need)
    shared_set = set(shared)
    return {"shared": shared,
            "topics": [{"id": tid, "words": [w for w in words if w not in shared_set]}
                       for tid, words in topic_words]}
