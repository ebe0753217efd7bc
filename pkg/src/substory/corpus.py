"""Tweet data model, JSONL ingestion, preprocessing, tf-idf and a synthetic corpus generator."""
from __future__ import annotations

import json
import math
import os
import unicodedata
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from nltk.stem.porter import PorterStemmer

STOPWORDS_ENV = "SUBSTORY_STOPWORDS"


class CorpusError(ValueError):
    """Raised for malformed input files or invalid generator settings."""


@dataclass(frozen=True)
class Tweet:
    id: str
    text: str
    timestamp: int
    reply_to: str | None = None
    gold_substory: str | None = None


@dataclass(frozen=True)
class ProcessedTweet:
    tweet_id: str
    tokens: tuple[int, ...]
    term_counts: Mapping[int, int]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    document_frequency: tuple[int, ...]
    corpus_frequency: tuple[int, ...]
    _index: Mapping[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self._index:
            object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self._index

    def id_of(self, term: str) -> int:
        return self._index[term]

    def term(self, term_id: int) -> str:
        return self.terms[term_id]

    @classmethod
    def build(cls, docs: Iterable[Sequence[str]]) -> "Vocabulary":
        df: Counter[str] = Counter()
        cf: Counter[str] = Counter()
        for doc in docs:
            cf.update(doc)
            df.update(set(doc))
        terms = tuple(sorted(cf))
        return cls(terms, tuple(df[t] for t in terms), tuple(cf[t] for t in terms))


EMPTY_VOCABULARY = Vocabulary((), (), ())


@dataclass(frozen=True)
class TfIdfVector:
    """Sparse L2-normalized vector; ``indices`` ascending, ``weights`` strictly positive."""

    indices: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.indices)

    @classmethod
    def empty(cls) -> "TfIdfVector":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0))

    @classmethod
    def from_dense(cls, dense: Sequence[float]) -> "TfIdfVector":
        """Build a unit vector from a dense array (zero entries dropped, negative weights kept)."""
        dense = np.asarray(dense, dtype=float)
        idx = np.flatnonzero(dense)
        w = dense[idx]
        norm = np.linalg.norm(w)
        if norm == 0:
            return cls.empty()
        return cls(idx.astype(np.int64), w / norm)

    def dot(self, other: "TfIdfVector") -> float:
        common, ia, ib = np.intersect1d(self.indices, other.indices, assume_unique=True, return_indices=True)
        if len(common) == 0:
            return 0.0
        return float(np.dot(self.weights[ia], other.weights[ib]))

    def to_dense(self, dim: int) -> np.ndarray:
        out = np.zeros(dim)
        out[self.indices] = self.weights
        return out


@dataclass(frozen=True)
class Corpus:
    tweets: tuple[Tweet, ...]
    processed: tuple[ProcessedTweet, ...] = ()
    vocabulary: Vocabulary = EMPTY_VOCABULARY
    unresolved_replies: tuple[str, ...] = ()

    def __post_init__(self):
        if self.processed and len(self.processed) != len(self.tweets):
            raise CorpusError("tweets and processed must be index-aligned")

    def __len__(self) -> int:
        return len(self.tweets)

    @property
    def is_processed(self) -> bool:
        return len(self.processed) == len(self.tweets) and (bool(self.processed) or not self.tweets)

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.tweets]

    def gold(self) -> dict[str, str]:
        """Gold sub-story labels of the labeled tweets only; background tweets are left out."""
        return {t.id: t.gold_substory for t in self.tweets if t.gold_substory is not None}

    def subset(self, ids: Iterable[str]) -> "Corpus":
        """Restrict to ``ids`` (corpus order kept) and rebuild the vocabulary on the subset."""
        keep = set(ids)
        idx = [i for i, t in enumerate(self.tweets) if t.id in keep]
        tweets = tuple(self.tweets[i] for i in idx)
        present = {t.id for t in tweets}
        unresolved = tuple(t.id for t in tweets if t.reply_to is not None and t.reply_to not in present)
        if not self.is_processed:
            return Corpus(tweets, unresolved_replies=unresolved)
        docs = [[self.vocabulary.term(w) for w in self.processed[i].tokens] for i in idx]
        return _assemble(tweets, docs, unresolved)


# -- ingestion ---------------------------------------------------------------

def _tweets_to_corpus(tweets: list[Tweet]) -> Corpus:
    ids = {t.id for t in tweets}
    unresolved = tuple(t.id for t in tweets if t.reply_to is not None and t.reply_to not in ids)
    return Corpus(tuple(tweets), unresolved_replies=unresolved)


def load_jsonl(path: str | os.PathLike) -> Corpus:
    """Read one tweet per line. Missing timestamps default to the 0-based line index."""
    tweets: list[Tweet] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: malformed JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or not isinstance(rec.get("id"), str) or not isinstance(rec.get("text"), str):
                raise CorpusError(f"line {lineno}: record needs string fields 'id' and 'text'")
            tid = rec["id"]
            if not tid:
                raise CorpusError(f"line {lineno}: empty id")
            if tid in seen:
                raise CorpusError(f"duplicate id {tid!r} on lines {seen[tid]} and {lineno}")
            seen[tid] = lineno
            ts = rec.get("timestamp")
            if ts is None:
                ts = lineno - 1
            elif not isinstance(ts, int) or isinstance(ts, bool):
                raise CorpusError(f"line {lineno}: timestamp must be an integer")
            reply_to = rec.get("reply_to")
            gold = rec.get("gold_substory")
            tweets.append(Tweet(tid, rec["text"], ts,
                                None if reply_to is None else str(reply_to),
                                None if gold is None else str(gold)))
    return _tweets_to_corpus(tweets)


def write_jsonl(corpus: Corpus, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in corpus.tweets:
            rec: dict[str, object] = {"id": t.id, "text": t.text, "timestamp": t.timestamp}
            if t.reply_to is not None:
                rec["reply_to"] = t.reply_to
            if t.gold_substory is not None:
                rec["gold_substory"] = t.gold_substory
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


# -- preprocessing -----------------------------------------------------------

@dataclass(frozen=True)
class PreprocessOptions:
    min_token_len: int = 2
    stopwords: frozenset[str] | None = None  # None -> default list (or $SUBSTORY_STOPWORDS)
    stem: bool = True


def read_stopwords(path: str | os.PathLike) -> frozenset[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(w.strip().lower() for w in lines if w.strip())


@lru_cache(maxsize=1)
def _packaged_stopwords() -> frozenset[str]:
    text = resources.files("substory").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def default_stopwords() -> frozenset[str]:
    override = os.environ.get(STOPWORDS_ENV)
    if override:
        return read_stopwords(override)
    return _packaged_stopwords()


_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


@lru_cache(maxsize=65536)
def stem(word: str) -> str:
    # iterate to a fixed point so re-preprocessing output is a no-op
    while True:
        s = _stemmer.stem(word)
        if s == word:
            return s
        word = s


def _is_edge_punct(ch: str) -> bool:
    return ch not in "@#" and unicodedata.category(ch)[0] in "PS"


def _strip_punct(tok: str) -> str:
    i, j = 0, len(tok)
    while i < j and _is_edge_punct(tok[i]):
        i += 1
    while j > i and _is_edge_punct(tok[j - 1]):
        j -= 1
    return tok[i:j]


def _is_link(tok: str) -> bool:
    return "://" in tok or tok.startswith("www.")


def _keep(tok: str, opts: PreprocessOptions, stop: frozenset[str]) -> bool:
    if len(tok) < opts.min_token_len or tok in stop:
        return False
    alpha = sum(ch.isalpha() for ch in tok)
    return alpha * 2 > len(tok)


def tokenize(text: str, opts: PreprocessOptions = PreprocessOptions()) -> list[str]:
    """Turn raw tweet text into the list of surviving (optionally stemmed) terms."""
    stop = opts.stopwords if opts.stopwords is not None else default_stopwords()
    out = []
    for raw in text.lower().split():
        if raw.startswith(("@", "#")) or _is_link(raw):
            continue
        tok = _strip_punct(raw)
        if not tok or tok.startswith(("@", "#")) or _is_link(tok):
            continue
        if not _keep(tok, opts, stop):
            continue
        if opts.stem:
            tok = stem(tok)
            # a stem can collapse into a short token or a stopword
            if not _keep(tok, opts, stop):
                continue
        out.append(tok)
    return out


def _assemble(tweets: tuple[Tweet, ...], docs: list[list[str]], unresolved: tuple[str, ...]) -> Corpus:
    vocab = Vocabulary.build(docs)
    processed = []
    for t, doc in zip(tweets, docs):
        ids = tuple(vocab.id_of(w) for w in doc)
        processed.append(ProcessedTweet(t.id, ids, dict(sorted(Counter(ids).items()))))
    return Corpus(tweets, tuple(processed), vocab, unresolved)


def preprocess(corpus: Corpus, options: PreprocessOptions = PreprocessOptions()) -> Corpus:
    docs = [tokenize(t.text, options) for t in corpus.tweets]
    return _assemble(corpus.tweets, docs, corpus.unresolved_replies)


# -- tf-idf ------------------------------------------------------------------

def tfidf(corpus: Corpus) -> dict[str, TfIdfVector]:
    """Raw term frequency times natural-log idf, L2-normalized per tweet."""
    if not corpus.is_processed:
        raise CorpusError("corpus must be preprocessed before tf-idf")
    n_docs = len(corpus)
    df = np.asarray(corpus.vocabulary.document_frequency, dtype=float)
    idf = np.log(n_docs / df) if len(df) else df
    out = {}
    for p in corpus.processed:
        if not p.term_counts:
            out[p.tweet_id] = TfIdfVector.empty()
            continue
        idx = np.fromiter(p.term_counts.keys(), dtype=np.int64)
        tf = np.fromiter(p.term_counts.values(), dtype=float)
        w = tf * idf[idx]
        mask = w > 0
        idx, w = idx[mask], w[mask]
        norm = math.sqrt(float(np.dot(w, w)))
        out[p.tweet_id] = TfIdfVector(idx, w / norm) if norm > 0 else TfIdfVector.empty()
    return out


# -- synthetic corpora -------------------------------------------------------

@dataclass(frozen=True)
class SynthSpec:
    n_substories: int = 5
    tweets_per_story: int = 200
    vocab_per_story: int = 20
    shared_vocab_size: int = 10
    background_tweets: int = 0
    reply_fraction: float = 0.0
    seed: int = 0
    tweet_length: tuple[int, int] = (6, 12)
    shared_token_fraction: float = 0.3
    # replies mostly talk past their source: few story words, mostly chatter
    reply_story_fraction: float = 0.2
    chatter_vocab_size: int = 40
    story_span_hours: float = 24.0
    start_time: int = 1_407_000_000
    # sibling stories in a theme share extra words (e.g. two stories about the same officer)
    theme_size: int = 1
    theme_vocab_size: int = 0
    theme_token_fraction: float = 0.0
    # sources that copy an earlier source of their story verbatim
    retweet_fraction: float = 0.0
    # Zipf exponent for word choice inside a pool; 0 means uniform
    word_zipf: float = 0.0


# Well separated stories: a topic model should recover them almost exactly.
RECOVERY_SPEC = SynthSpec(n_substories=5, tweets_per_story=200, vocab_per_story=20, shared_vocab_size=10, seed=1)

# Overlapping stories with threads, retweets and unlabeled chatter; the method comparison corpus.
DIRECTIONAL_SPEC = SynthSpec(
    n_substories=8, tweets_per_story=150, vocab_per_story=60, shared_vocab_size=10,
    background_tweets=200, reply_fraction=0.3, shared_token_fraction=0.25,
    theme_size=2, theme_vocab_size=15, theme_token_fraction=0.3,
    retweet_fraction=0.3, word_zipf=1.0, seed=3,
)

_CONSONANTS = "bdfgkmptvz"
_VOWELS = "aou"


def _pseudo_words(rng: np.random.Generator, n: int, taken: set[str]) -> list[str]:
    """Random CVCVCVC words that survive tokenization unchanged."""
    words: list[str] = []
    opts = PreprocessOptions(stopwords=frozenset())
    while len(words) < n:
        syll = rng.integers(0, [len(_CONSONANTS), len(_VOWELS)] * 3 + [len(_CONSONANTS)])
        w = "".join(_CONSONANTS[v] if i % 2 == 0 else _VOWELS[v] for i, v in enumerate(syll))
        if w in taken or tokenize(w, opts) != [w]:
            continue
        taken.add(w)
        words.append(w)
    return words


def synth_generate(spec: SynthSpec = SynthSpec()) -> Corpus:
    """Generate a labeled corpus of sub-stories sharing a common background vocabulary.

    Each story tweet mixes story-specific words with shared event words. Replies link to a
    random earlier source of the same story and inherit its label, but mostly use generic
    chatter words. Background tweets carry no label.
    """
    if min(spec.n_substories, spec.tweets_per_story, spec.vocab_per_story, spec.shared_vocab_size,
           spec.background_tweets, spec.chatter_vocab_size) < 0:
        raise CorpusError("synth counts must be nonnegative")
    if not 0.0 <= spec.reply_fraction <= 1.0:
        raise CorpusError("reply_fraction must lie in [0, 1]")
    if spec.n_substories == 0 and spec.tweets_per_story > 0:
        raise CorpusError("tweets_per_story > 0 requires at least one sub-story")
    if spec.n_substories > 0 and spec.tweets_per_story > 0 and spec.vocab_per_story == 0:
        raise CorpusError("story tweets need a nonempty story vocabulary")

    if spec.theme_size < 1:
        raise CorpusError("theme_size must be at least 1")
    rng = np.random.default_rng(spec.seed)
    taken: set[str] = set()
    story_vocab = [_pseudo_words(rng, spec.vocab_per_story, taken) for _ in range(spec.n_substories)]
    shared = _pseudo_words(rng, spec.shared_vocab_size, taken)
    chatter = _pseudo_words(rng, spec.chatter_vocab_size, taken)
    n_themes = -(-spec.n_substories // spec.theme_size)
    themes = [_pseudo_words(rng, spec.theme_vocab_size, taken) for _ in range(n_themes)]
    lo, hi = spec.tweet_length
    span = spec.story_span_hours * 3600.0

    def pick(pool: list[str]) -> str:
        if spec.word_zipf > 0:
            w = 1.0 / np.arange(1, len(pool) + 1) ** spec.word_zipf
            return pool[int(rng.choice(len(pool), p=w / w.sum()))]
        return pool[int(rng.integers(len(pool)))]

    def draw(primary: list[str], secondary: list[str], frac_secondary: float,
             theme: list[str] | None = None) -> str:
        n = int(rng.integers(lo, hi + 1))
        words = []
        for _ in range(n):
            if theme and rng.random() < spec.theme_token_fraction:
                words.append(pick(theme))
                continue
            pool = secondary if (secondary and (not primary or rng.random() < frac_secondary)) else primary
            if not pool:
                break
            words.append(pick(pool))
        return " ".join(words)

    raw: list[tuple[int, str, str | None, str | None]] = []  # (ts, text, reply_to key, label)
    for s in range(spec.n_substories):
        label = f"story{s}"
        centre = spec.start_time + rng.uniform(0, 3 * span)
        times = np.sort(centre + rng.normal(0, span / 4, size=spec.tweets_per_story)).astype(np.int64)
        theme = themes[s // spec.theme_size]
        sources: list[int] = []
        texts: dict[int, str] = {}
        for i, ts in enumerate(times):
            if sources and rng.random() < spec.reply_fraction:
                parent = sources[int(rng.integers(len(sources)))]
                reply_pool = story_vocab[s] + shared
                text = draw(chatter, reply_pool, spec.reply_story_fraction)
                raw.append((int(ts), text, f"{label}-{parent}", label))
            else:
                if sources and rng.random() < spec.retweet_fraction:
                    text = texts[sources[int(rng.integers(len(sources)))]]
                else:
                    text = draw(story_vocab[s], shared, spec.shared_token_fraction, theme)
                sources.append(i)
                texts[i] = text
                raw.append((int(ts), text, None, label))
    for _ in range(spec.background_tweets):
        ts = int(spec.start_time + rng.uniform(0, 4 * span))
        raw.append((ts, draw(chatter, shared, 0.5), None, None))

    # story-local keys -> global ids assigned in time order
    keys = []
    for s in range(spec.n_substories):
        keys.extend(f"story{s}-{i}" for i in range(spec.tweets_per_story))
    keys.extend(f"bg-{i}" for i in range(spec.background_tweets))
    order = sorted(range(len(raw)), key=lambda i: (raw[i][0], i))
    gid = {keys[i]: f"t{rank:06d}" for rank, i in enumerate(order)}
    tweets = []
    for i in order:
        ts, text, parent, label = raw[i]
        tweets.append(Tweet(gid[keys[i]], text, ts, gid[parent] if parent else None, label))
    # a reply may precede its parent after jitter; clamp to keep replies after sources
    by_id = {t.id: t for t in tweets}
    fixed = [replace(t, timestamp=max(t.timestamp, by_id[t.reply_to].timestamp + 1)) if t.reply_to else t
             for t in tweets]
    return _tweets_to_corpus(fixed)
