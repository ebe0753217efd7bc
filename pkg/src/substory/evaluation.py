"""Clustering evaluation: max-overlap alignment with micro P/R/F, and MI / NMI / EMI / AMI.

A clustering is any mapping ``tweet id -> cluster label``. Gold clusterings cover labeled
tweets only; predicted clusterings are restricted to that universe before scoring.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Mapping

import numpy as np
from scipy.special import gammaln

Clustering = Mapping[str, Hashable]


class EvaluationError(ValueError):
    pass


def _label_key(label):
    # mixed int/str labels still need a total order for tie-breaking
    return (type(label).__name__, label)


def cluster_sizes(clustering: Clustering) -> dict:
    sizes: dict = defaultdict(int)
    for c in clustering.values():
        sizes[c] += 1
    return dict(sizes)


def restrict(clustering: Clustering, universe) -> dict:
    return {t: clustering[t] for t in universe}


# -- alignment and P/R/F -----------------------------------------------------

@dataclass(frozen=True)
class StoryAlignment:
    story: Hashable
    cluster: Hashable
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class AlignmentReport:
    stories: tuple[StoryAlignment, ...]
    n_labeled: int
    by_story: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "by_story", {s.story: s for s in self.stories})

    @property
    def tp(self) -> int:
        return sum(s.tp for s in self.stories)

    @property
    def fp(self) -> int:
        return sum(s.fp for s in self.stories)

    @property
    def fn(self) -> int:
        return sum(s.fn for s in self.stories)


def align_max_overlap(gold: Clustering, predicted: Clustering) -> AlignmentReport:
    """Align every gold sub-story with the predicted cluster holding most of its tweets.

    Several stories may share one cluster. False positives count labeled tweets only.
    """
    if not gold:
        raise EvaluationError("gold clustering is empty")
    missing = [t for t in gold if t not in predicted]
    if missing:
        raise EvaluationError(f"{len(missing)} labeled tweets missing from prediction, e.g. {missing[0]!r}")
    overlap: dict = defaultdict(lambda: defaultdict(int))
    labeled_size: dict = defaultdict(int)
    for t, story in gold.items():
        c = predicted[t]
        overlap[story][c] += 1
        labeled_size[c] += 1
    rows = []
    for story in sorted(overlap, key=_label_key):
        counts = overlap[story]
        best = min(counts, key=lambda c: (-counts[c], _label_key(c)))
        tp = counts[best]
        size = sum(counts.values())
        rows.append(StoryAlignment(story, best, tp, labeled_size[best] - tp, size - tp))
    return AlignmentReport(tuple(rows), len(gold))


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def micro_prf(report: AlignmentReport) -> tuple[float, float, float]:
    if not report.stories:
        raise EvaluationError("empty alignment report")
    return _prf(report.tp, report.fp, report.fn)


def per_story_prf(report: AlignmentReport, story) -> tuple[float, float, float]:
    try:
        s = report.by_story[story]
    except KeyError:
        raise EvaluationError(f"unknown story {story!r}") from None
    return _prf(s.tp, s.fp, s.fn)


# -- information-theoretic scores ---------------------------------------------

@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray  # R x C int64
    row_labels: tuple
    col_labels: tuple

    @property
    def a(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def b(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def from_array(cls, counts) -> "ContingencyTable":
        counts = np.asarray(counts, dtype=np.int64)
        return cls(counts, tuple(range(counts.shape[0])), tuple(range(counts.shape[1])))

    def transpose(self) -> "ContingencyTable":
        return ContingencyTable(self.counts.T.copy(), self.col_labels, self.row_labels)


def contingency(u: Clustering, v: Clustering) -> ContingencyTable:
    if u.keys() != v.keys():
        diff = set(u) ^ set(v)
        raise EvaluationError(f"clusterings cover different tweets ({len(diff)} ids in symmetric difference)")
    rows = sorted(set(u.values()), key=_label_key)
    cols = sorted(set(v.values()), key=_label_key)
    ri = {c: i for i, c in enumerate(rows)}
    ci = {c: j for j, c in enumerate(cols)}
    counts = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for t, cu in u.items():
        counts[ri[cu], ci[v[t]]] += 1
    return ContingencyTable(counts, tuple(rows), tuple(cols))


def entropy(marginals, n: int | None = None) -> float:
    m = np.asarray(marginals, dtype=float)
    n = float(m.sum()) if n is None else float(n)
    p = m[m > 0] / n
    return float(max(0.0, -np.sum(p * np.log(p))))


def mutual_information(table: ContingencyTable) -> float:
    n = table.n
    i, j = np.nonzero(table.counts)
    nij = table.counts[i, j].astype(float)
    a = table.a.astype(float)[i]
    b = table.b.astype(float)[j]
    mi = float(np.sum(nij / n * (np.log(n) + np.log(nij) - np.log(a) - np.log(b))))
    return max(mi, 0.0)


def expected_mi(table: ContingencyTable) -> float:
    """Exact E[MI] under random permutations with both sets of marginals held fixed.

    Sums over every feasible cell value with hypergeometric weights evaluated through
    log-factorials, so large N does not overflow.
    """
    n = table.n
    a = table.a[table.a > 0]
    b = table.b[table.b > 0]
    if n <= 1 or len(a) == 1 or len(b) == 1:
        return 0.0
    lf = gammaln(np.arange(n + 1, dtype=float) + 1.0)  # lf[k] = ln k!
    log_n = math.log(n)
    emi = 0.0
    for ai in a:
        ai = int(ai)
        for bj in b:
            bj = int(bj)
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if lo > hi:
                continue
            k = np.arange(lo, hi + 1)
            log_p = (lf[ai] + lf[bj] + lf[n - ai] + lf[n - bj] - lf[n]
                     - lf[k] - lf[ai - k] - lf[bj - k] - lf[n - ai - bj + k])
            term = k / n * (log_n + np.log(k) - math.log(ai) - math.log(bj))
            emi += float(np.sum(term * np.exp(log_p)))
    return max(emi, 0.0)


def nmi(u: Clustering, v: Clustering) -> float:
    t = contingency(u, v)
    h = max(entropy(t.a), entropy(t.b))
    if h == 0:
        return 0.0
    return mutual_information(t) / h


def ami(u: Clustering, v: Clustering) -> float:
    """Chance-adjusted MI with the max-entropy normalizer.

    Returns 1 for the degenerate case where the normalizer vanishes and MI equals its
    expectation (e.g. both clusterings a single cluster).
    """
    return ami_from_table(contingency(u, v))


def ami_from_table(t: ContingencyTable) -> float:
    mi = mutual_information(t)
    emi = expected_mi(t)
    denom = max(entropy(t.a), entropy(t.b)) - emi
    if abs(denom) < 1e-15:
        return 1.0 if abs(mi - emi) < 1e-15 else 0.0
    return (mi - emi) / denom


# -- report --------------------------------------------------------------------

def evaluate(gold: Clustering, predicted: Clustering) -> dict:
    """Score ``predicted`` against ``gold`` on the labeled universe; JSON-ready dict."""
    pred = restrict(predicted, gold.keys())
    report = align_max_overlap(gold, pred)
    p, r, f = micro_prf(report)
    t = contingency(dict(gold), pred)
    per_story = []
    for s in report.stories:
        sp, sr, sf = per_story_prf(report, s.story)
        per_story.append({"story": str(s.story), "cluster": s.cluster, "TP": s.tp, "FP": s.fp, "FN": s.fn,
                          "P": sp, "R": sr, "F": sf})
    return {
        "P_micro": p, "R_micro": r, "F_micro": f,
        "AMI": ami_from_table(t),
        "NMI": nmi(dict(gold), pred),
        "MI": mutual_information(t),
        "n_clusters": len(set(predicted.values())),
        "n_clusters_labeled": len(set(pred.values())),
        "n_labeled": len(gold),
        "background_excluded": True,
        "per_story": per_story,
    }
