import pytest
from hypothesis import given, settings, strategies as st

from substory.corpus import Corpus, SynthSpec, Tweet, preprocess, synth_generate
from substory.evaluation import align_max_overlap, micro_prf
from substory.threads import (
    ThreadError, build_thread_index, propagate_to_replies, source_only, thread_baseline,
)


def _corpus(edges, n):
    """Tweets t0..t{n-1}; ``edges`` maps child index to parent id."""
    return Corpus(tuple(Tweet(f"t{i}", f"text {i}", i, edges.get(i)) for i in range(n)))


def test_transitive_root():
    idx = build_thread_index(_corpus({2: "t1", 3: "t2"}, 4))
    assert idx.root_of["t3"] == "t1"
    assert idx.children["t1"] == ("t2", "t3")
    assert idx.roots == ["t0", "t1"]


def test_absent_parent_is_own_root():
    idx = build_thread_index(_corpus({1: "elsewhere"}, 2))
    assert idx.root_of["t1"] == "t1"
    assert idx.is_source("t1")


def test_cycle_is_named():
    with pytest.raises(ThreadError, match="t1 -> t2 -> t1|t2 -> t1 -> t2"):
        build_thread_index(_corpus({1: "t2", 2: "t1"}, 3))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 40).flatmap(
    lambda n: st.lists(st.one_of(st.none(), st.integers(0, n - 1)), min_size=n, max_size=n)))
def test_root_of_idempotent_on_forests(parents):
    # parent index < child index keeps the graph acyclic
    edges = {i: f"t{p}" for i, p in enumerate(parents) if p is not None and p < i}
    idx = build_thread_index(_corpus(edges, len(parents)))
    assert set(idx.root_of) == {f"t{i}" for i in range(len(parents))}
    for t, r in idx.root_of.items():
        assert idx.root_of[r] == r
    for r in idx.roots:
        assert idx.root_of[r] == r


def test_synth_roots_have_no_parent_in_corpus():
    c = synth_generate(SynthSpec(n_substories=2, tweets_per_story=50, reply_fraction=0.5, seed=3))
    assert len(c) == 100
    idx = build_thread_index(c)
    ids = set(c.ids)
    by_id = {t.id: t for t in c.tweets}
    for r in idx.roots:
        assert by_id[r].reply_to is None or by_id[r].reply_to not in ids


def test_source_only():
    c = preprocess(_corpus({}, 4))
    idx = build_thread_index(c)
    assert source_only(c, idx).ids == c.ids
    c = preprocess(_corpus({3: "t0", 4: "t0", 5: "t1", 6: "t5", 7: "t2", 8: "t7", 9: "t3"}, 10))
    assert source_only(c, build_thread_index(c)).ids == ["t0", "t1", "t2"]


def test_source_only_gold_counts_match_generator():
    c = preprocess(synth_generate(SynthSpec(n_substories=3, tweets_per_story=40, reply_fraction=0.3, seed=8)))
    sub = source_only(c, build_thread_index(c))
    expected: dict = {}
    for t in c.tweets:
        if t.reply_to is None:
            expected[t.gold_substory] = expected.get(t.gold_substory, 0) + 1
    got: dict = {}
    for label in sub.gold().values():
        got[label] = got.get(label, 0) + 1
    assert got == expected


def test_propagation():
    idx = build_thread_index(_corpus({1: "t0", 2: "t1"}, 4))
    cl = propagate_to_replies({"t0": 7, "t3": 2}, idx)
    assert cl == {"t0": 7, "t1": 7, "t2": 7, "t3": 2}
    assert propagate_to_replies({"t0": 1, "t1": 2}, build_thread_index(_corpus({}, 2))) == {"t0": 1, "t1": 2}
    with pytest.raises(ThreadError, match="t3"):
        propagate_to_replies({"t0": 7}, idx)


def test_propagation_improves_recall():
    c = synth_generate(SynthSpec(n_substories=3, tweets_per_story=60, reply_fraction=0.4, seed=9))
    idx = build_thread_index(c)
    gold = c.gold()
    src = {r: gold[r] for r in idx.roots}  # a perfect source clustering
    src_gold = {r: gold[r] for r in idx.roots}
    _, r_src, _ = micro_prf(align_max_overlap(src_gold, src))
    prop = propagate_to_replies(src, idx)
    _, r_prop, _ = micro_prf(align_max_overlap(gold, prop))
    assert r_prop >= r_src
    for r in idx.roots:
        assert prop[r] == src[r]


def test_thread_baseline_singletons_without_replies():
    c = _corpus({}, 5)
    cl = thread_baseline(c, build_thread_index(c))
    assert sorted(cl.values()) == [0, 1, 2, 3, 4]


@pytest.mark.parametrize("seed", range(5))
def test_thread_baseline_precision_is_one(seed):
    c = synth_generate(SynthSpec(n_substories=4, tweets_per_story=50, reply_fraction=0.4,
                                 background_tweets=20, seed=seed))
    cl = thread_baseline(c, build_thread_index(c))
    p, r, _ = micro_prf(align_max_overlap(c.gold(), cl))
    assert p == 1.0
    assert r < 1.0
