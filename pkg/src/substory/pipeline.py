"""End-to-end runs: ingest, preprocess, detect, optionally propagate over threads, evaluate, write artifacts."""
from __future__ import annotations

import csv
import json
import logging
import os
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from . import hdp, lsh, spectral
from .corpus import Corpus, PreprocessOptions, load_jsonl, preprocess, read_stopwords, tfidf
from .evaluation import evaluate
from .threads import build_thread_index, propagate_to_replies, thread_baseline

log = logging.getLogger(__name__)

METHODS = ("hdp", "sc", "lsh", "thread-baseline")
MODES = ("all-tweets", "source-only", "source-then-propagate")

ASSIGNMENTS = "assignments.csv"
METRICS = "metrics.json"
TOPICS = "topics.json"
TIMING = "timing.json"
PROFILE = "temporal_profile.csv"


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    input: str
    method: str = "hdp"
    mode: str = "all-tweets"
    out: str = "runs/out"
    seed: int = 0
    hdp: hdp.HdpConfig = field(default_factory=hdp.HdpConfig)
    sc: spectral.SpectralConfig = field(default_factory=spectral.SpectralConfig)
    lsh: lsh.LshConfig = field(default_factory=lsh.LshConfig)
    preprocess: PreprocessOptions = field(default_factory=PreprocessOptions)
    partition_size: int | None = None
    bucket_seconds: int = 3600
    top_n: int = 10
    label: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise PipelineError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.mode not in MODES:
            raise PipelineError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.partition_size is not None and self.partition_size < 1:
            raise PipelineError("partition_size must be positive")

    def method_params(self) -> dict:
        if self.method == "hdp":
            return asdict(replace(self.hdp, seed=self.seed))
        if self.method == "sc":
            return asdict(replace(self.sc, seed=self.seed))
        if self.method == "lsh":
            return asdict(replace(self.lsh, seed=self.seed))
        return {}

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.method == "hdp":
            return f"HDP (k{self.hdp.max_topics})"
        if self.method == "sc":
            return f"SC (k{self.sc.k})"
        if self.method == "lsh":
            return f"LSH ({self.lsh.name})"
        return "thread-baseline"


@dataclass
class Timer:
    stages: dict = field(default_factory=dict)

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = self.stages.get(name, 0.0) + time.perf_counter() - t0


@dataclass
class RunResult:
    clustering: dict
    metrics: dict | None
    topics: dict | None
    timing: dict
    mode: str
    files: list[Path]


# -- detection -------------------------------------------------------------------

def detect(corpus: Corpus, config: RunConfig) -> tuple[dict, dict | None]:
    """Cluster a processed corpus with the configured method; returns (clustering, topic report)."""
    if config.method == "hdp":
        model = hdp.fit(corpus, replace(config.hdp, seed=config.seed))
        report = hdp.report_topics(model, config.top_n)
        report["model"] = model.to_json(config.top_n)
        return hdp.cluster_corpus(corpus, model), report
    if config.method == "sc":
        clusters = spectral.cluster_words(corpus, replace(config.sc, seed=config.seed))
        report = _sc_report(clusters, corpus, config.top_n)
        return spectral.assign_tweets(corpus, clusters), report
    if config.method == "lsh":
        vectors = tfidf(corpus)
        cl = lsh.cluster_stream(corpus.tweets, vectors, replace(config.lsh, seed=config.seed),
                                dim=max(1, len(corpus.vocabulary)))
        return cl, None
    raise PipelineError(f"detect() does not handle {config.method!r}")


def _sc_report(clusters: spectral.WordClusters, corpus: Corpus, top_n: int) -> dict:
    tops = []
    for cid, members in clusters.clusters:
        ranked = sorted(members, key=lambda m: (-m[1], m[0]))[:top_n]
        tops.append((cid, tuple(corpus.vocabulary.term(t) for t, _ in ranked)))
    report = hdp.split_shared(tops)
    report["model"] = clusters.to_json(corpus.vocabulary)
    return report


def _partitions(corpus: Corpus, size: int) -> list[list[str]]:
    ordered = sorted(corpus.tweets, key=lambda t: (t.timestamp, t.id))
    return [[t.id for t in ordered[i:i + size]] for i in range(0, len(ordered), size)]


def detect_partitioned(corpus: Corpus, config: RunConfig) -> tuple[dict, dict | None]:
    """Run ``detect`` per time-contiguous partition; cluster ids are renumbered so partitions
    never share a cluster."""
    if not config.partition_size or config.partition_size >= len(corpus):
        return detect(corpus, config)
    out: dict = {}
    reports = []
    next_id = 0
    for p, ids in enumerate(_partitions(corpus, config.partition_size)):
        part = corpus.subset(ids)
        local, report = detect(part, config)
        remap: dict = {}
        for tid in ids:
            c = local[tid]
            if c not in remap:
                remap[c] = next_id
                next_id += 1
            out[tid] = remap[c]
        if report is not None:
            reports.append({"partition": p, "cluster_ids": {str(k): v for k, v in remap.items()}, **report})
    return out, ({"partitions": reports} if reports else None)


# -- run ------------------------------------------------------------------------

def load_and_preprocess(config: RunConfig, timer: Timer) -> Corpus:
    with timer.stage("load"):
        raw = load_jsonl(config.input)
    with timer.stage("preprocess"):
        opts = config.preprocess
        env = os.environ.get("SUBSTORY_STOPWORDS")
        if opts.stopwords is None and env:
            opts = replace(opts, stopwords=read_stopwords(env))
        corpus = preprocess(raw, opts)
    return corpus


def cluster(corpus: Corpus, config: RunConfig, timer: Timer | None = None) -> tuple[dict, dict | None, str, Corpus]:
    """Apply the method under the configured mode.

    Returns (clustering, topic report, effective mode, evaluation universe corpus).
    """
    timer = timer or Timer()
    with timer.stage("threads"):
        index = build_thread_index(corpus)
    has_replies = any(index.root_of[t] != t for t in index.root_of)
    mode = config.mode
    if config.method == "thread-baseline":
        with timer.stage("detect"):
            return thread_baseline(corpus, index), None, mode, corpus
    if mode == "source-then-propagate" and not has_replies:
        log.warning("no reply structure in corpus; falling back to all-tweets mode")
        mode = "all-tweets"
    if mode == "all-tweets":
        with timer.stage("detect"):
            cl, report = detect_partitioned(corpus, config)
        return cl, report, mode, corpus
    with timer.stage("threads"):
        sources = corpus.subset(r for r in index.roots)
    with timer.stage("detect"):
        cl, report = detect_partitioned(sources, config)
    if mode == "source-only":
        return cl, report, mode, sources
    with timer.stage("propagate"):
        cl = propagate_to_replies(cl, index)
    return cl, report, mode, corpus


def write_assignments(path: Path, corpus: Corpus, clustering: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tweet_id", "cluster_id"])
        for t in corpus.tweets:
            if t.id in clustering:
                w.writerow([t.id, clustering[t.id]])


def temporal_profile(corpus: Corpus, clustering: dict, bucket_seconds: int = 3600) -> list[tuple]:
    counts: dict = {}
    for t in corpus.tweets:
        if t.id not in clustering:
            continue
        key = (clustering[t.id], t.timestamp - t.timestamp % bucket_seconds)
        counts[key] = counts.get(key, 0) + 1
    return [(c, b, n) for (c, b), n in sorted(counts.items(), key=lambda kv: (str(kv[0][0]), kv[0][1]))]


def write_profile(path: Path, rows: list[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cluster_id", "hour_bucket", "tweet_count"])
        w.writerows(rows)


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")


def run(config: RunConfig) -> RunResult:
    """Execute one configured run and write its artifacts to ``config.out``.

    Artifacts written by this call are removed again if any stage fails.
    """
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    timer = Timer()
    t0 = time.perf_counter()
    try:
        corpus = load_and_preprocess(config, timer)
        clustering, report, mode, universe = cluster(corpus, config, timer)
        metrics = None
        gold = universe.gold()
        if gold:
            with timer.stage("evaluate"):
                metrics = evaluate(gold, clustering)
                metrics = {"method": config.method, "name": config.name, "mode": mode,
                           "params": config.method_params(), **metrics}
        with timer.stage("write"):
            path = out / ASSIGNMENTS
            written.append(path)
            write_assignments(path, universe, clustering)
            if metrics is not None:
                path = out / METRICS
                written.append(path)
                _dump(path, metrics)
            if report is not None:
                path = out / TOPICS
                written.append(path)
                _dump(path, report)
            path = out / PROFILE
            written.append(path)
            write_profile(path, temporal_profile(universe, clustering, config.bucket_seconds))
        total = time.perf_counter() - t0
        timing = {"stages": timer.stages, "total_seconds": total, "method": config.method, "mode": mode,
                  "n_tweets": len(universe)}
        path = out / TIMING
        written.append(path)
        _dump(path, timing)
    except Exception:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    return RunResult(clustering, metrics, report, timing, mode, written)


# -- comparison --------------------------------------------------------------------

COMPARE_COLUMNS = ("P_micro", "R_micro", "F_micro", "AMI")


def compare(configs: list[RunConfig], out: str | os.PathLike) -> list[dict]:
    """Run several configurations over one input and write comparison.csv / comparison.json.

    The best value of each metric column (and the fastest runtime) is flagged.
    """
    if len(configs) < 2:
        raise PipelineError("compare needs at least two configurations")
    if len({c.mode for c in configs}) > 1:
        raise PipelineError("all compared runs must use the same mode")
    if len({c.input for c in configs}) > 1:
        raise PipelineError("all compared runs must share one input")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, cfg in enumerate(configs):
        res = run(replace(cfg, out=str(out / f"run{i:02d}")))
        if res.metrics is None:
            raise PipelineError("comparison needs gold labels in the input")
        m = res.metrics
        rows.append({"method": cfg.method, "name": cfg.name, "mode": res.mode,
                     "params": json.dumps(cfg.method_params(), sort_keys=True),
                     **{c: m[c] for c in COMPARE_COLUMNS}, "n_clusters": m["n_clusters"],
                     "runtime_seconds": res.timing["total_seconds"]})
    for c in COMPARE_COLUMNS:
        best = max(r[c] for r in rows)
        for r in rows:
            r[f"best_{c}"] = r[c] == best
    fastest = min(r["runtime_seconds"] for r in rows)
    for r in rows:
        r["best_runtime_seconds"] = r["runtime_seconds"] == fastest
    fields = list(rows[0])
    with open(out / "comparison.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    _dump(out / "comparison.json", rows)
    return rows
