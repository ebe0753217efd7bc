"""Conversation threads: root resolution, source-only subsets, reply propagation, thread baseline."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .corpus import Corpus
from .evaluation import Clustering


class ThreadError(ValueError):
    pass


@dataclass(frozen=True)
class ThreadIndex:
    root_of: Mapping[str, str]
    children: Mapping[str, tuple[str, ...]]

    @property
    def roots(self) -> list[str]:
        return list(self.children)

    def is_source(self, tweet_id: str) -> bool:
        return self.root_of[tweet_id] == tweet_id


def build_thread_index(corpus: Corpus) -> ThreadIndex:
    """Resolve every reply chain to its source tweet.

    A reply whose parent is not in the corpus is treated as a source.
    """
    parent = {t.id: t.reply_to for t in corpus.tweets}
    root_of: dict[str, str] = {}
    for tid in parent:
        path = []
        on_path = set()
        cur = tid
        while cur not in root_of:
            if cur in on_path:
                cycle = path[path.index(cur):] + [cur]
                raise ThreadError("reply cycle: " + " -> ".join(cycle))
            path.append(cur)
            on_path.add(cur)
            nxt = parent[cur]
            if nxt is None or nxt not in parent:
                root_of[cur] = cur
                break
            cur = nxt
        root = root_of[cur]
        for p in path:
            root_of[p] = root
    children: dict[str, list[str]] = {t.id: [] for t in corpus.tweets if root_of[t.id] == t.id}
    for t in corpus.tweets:
        r = root_of[t.id]
        if r != t.id:
            children[r].append(t.id)
    return ThreadIndex(root_of, {r: tuple(c) for r, c in children.items()})


def source_only(corpus: Corpus, index: ThreadIndex) -> Corpus:
    return corpus.subset(t.id for t in corpus.tweets if index.root_of[t.id] == t.id)


def propagate_to_replies(source_clustering: Clustering, index: ThreadIndex) -> dict:
    """Give every reply the cluster of its thread's source tweet."""
    out = {}
    for tid, root in index.root_of.items():
        try:
            out[tid] = source_clustering[root]
        except KeyError:
            raise ThreadError(f"no cluster assigned to source tweet {root!r}") from None
    return out


def thread_baseline(corpus: Corpus, index: ThreadIndex) -> dict:
    """One cluster per conversation thread, numbered in corpus order of the roots."""
    ids = {r: i for i, r in enumerate(r for r in (t.id for t in corpus.tweets) if index.root_of[r] == r)}
    return {t.id: ids[index.root_of[t.id]] for t in corpus.tweets}
