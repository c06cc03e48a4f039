import random

import pytest
from hypothesis import given, strategies as st

from sjstream.errors import DomainMismatch, DuplicateMatch
from sjstream.graph import Schema
from sjstream.matchstore import (MatchStore, PartialMatch, UNIVERSAL_KEY,
                                 join_key_for, make_join_key)
from sjstream.query import project
from sjstream.templates import two_event_template


def _leaf_match(node, event, article, keyword="k7", t=1):
    return PartialMatch(node, {event: article, "f1": keyword}, {0 if event == "e1" else 1: t}, t, t)


def test_join_key_single_vertex_cut():
    query, tree = two_event_template(Schema())
    cut = tree.node(tree.root).cut_subgraph
    m1 = _leaf_match(0, "e1", "a101", "7")
    m2 = _leaf_match(1, "e2", "a999", "7")
    k1 = make_join_key(cut, m1)
    k2 = make_join_key(cut, m2)
    assert k1 == k2  # key depends only on the cut projection
    m3 = _leaf_match(0, "e1", "a101", "8")
    assert make_join_key(cut, m3) != k1


def test_join_key_matches_projection_equality():
    query, tree = two_event_template(Schema())
    cut = tree.node(tree.root).cut_subgraph
    m1 = _leaf_match(0, "e1", "a1", "7")
    m2 = _leaf_match(1, "e2", "a2", "7")
    pv1, _ = project(m1.vertex_map, m1.edge_map, cut)
    pv2, _ = project(m2.vertex_map, m2.edge_map, cut)
    assert (pv1 == pv2) == (make_join_key(cut, m1) == make_join_key(cut, m2))


def test_join_key_empty_cut_universal():
    m = _leaf_match(0, "e1", "a101")
    assert make_join_key(None, m) == UNIVERSAL_KEY
    query, _ = two_event_template(Schema())
    empty = query.subgraph_from_edges([])
    assert make_join_key(empty, m) == UNIVERSAL_KEY
    assert join_key_for((), m.vertex_map) == UNIVERSAL_KEY


def test_join_key_domain_mismatch():
    query, tree = two_event_template(Schema())
    cut = tree.node(tree.root).cut_subgraph
    bad = PartialMatch(0, {"e1": "a1"}, {0: 5}, 5, 5)
    with pytest.raises(DomainMismatch):
        make_join_key(cut, bad)


def test_insert_lookup_and_duplicate():
    store = MatchStore([0, 1, 2], window=100)
    m1 = _leaf_match(0, "e1", "a101")
    key = join_key_for(("f1",), m1.vertex_map)
    store.insert(0, key, m1)
    assert [m.vertex_map for m in store.lookup(0, key)] == [m1.vertex_map]
    m2 = _leaf_match(0, "e1", "a102", t=2)
    store.insert(0, key, m2)
    assert len(store.lookup(0, key)) == 2  # multi-valued table
    with pytest.raises(DuplicateMatch):
        store.insert(0, key, PartialMatch(0, dict(m1.vertex_map),
                                          dict(m1.edge_map), 1, 1))
    assert store.stored_counts()[0] == 2
    assert store.lookup(0, b"k" + b"nope") == []


def test_lookup_filters_expired_lazily():
    store = MatchStore([0], window=4)
    key = UNIVERSAL_KEY
    for t in (1, 5, 9):
        store.insert(0, key, PartialMatch(0, {"e1": f"a{t}", "f1": "k"}, {0: t}, t, t))
    store.advance(10)
    # linear-scan oracle: keep matches with t_low >= 10 - 4
    live = [m for m in store.all_matches(0) if m.t_low >= 10 - 4]
    assert sorted(m.t_low for m in store.lookup(0, key)) == \
        sorted(m.t_low for m in live) == [9]
    # stored counts still include expired entries until pruned
    assert store.stored_counts()[0] == 3


def test_prune_store_example():
    store = MatchStore([0], window=4)
    key = UNIVERSAL_KEY
    for t in (1, 5, 9):
        store.insert(0, key, PartialMatch(0, {"e1": f"a{t}", "f1": "k"}, {0: t}, t, t))
    removed = store.prune(10)  # cutoff 10 - 4 = 6: t_low 1 and 5 go
    assert removed == 2
    assert [m.t_low for m in store.all_matches(0)] == [9]
    assert store.total_stored == 1
    # a pruned signature may be stored again later
    store.insert(0, key, PartialMatch(0, {"e1": "a1", "f1": "k"}, {0: 1}, 8, 8))


def test_prune_noop_cases():
    store = MatchStore([0], window=1000)
    assert store.prune(50) == 0  # empty store
    store.insert(0, UNIVERSAL_KEY, PartialMatch(0, {"e1": "a", "f1": "k"}, {0: 3}, 3, 3))
    assert store.prune(50) == 0  # window larger than span
    assert store.total_stored == 1


def test_peak_stored_tracks_high_water_mark():
    store = MatchStore([0], window=4)
    for t in range(1, 6):
        store.insert(0, UNIVERSAL_KEY,
                     PartialMatch(0, {"e1": f"a{t}", "f1": "k"}, {0: t}, t, t))
    assert store.peak_stored == 5
    store.prune(30)
    assert store.total_stored == 0
    assert store.peak_stored == 5


qid_st = st.sampled_from(["e1", "e2", "f1", "f2", "g1"])
vid_st = st.sampled_from(["a", "b", "c", "d"])


@given(
    cut_qids=st.frozensets(qid_st, min_size=0, max_size=4),
    vmap1=st.fixed_dictionaries({}, optional={q: vid_st for q in
                                              ("e1", "e2", "f1", "f2", "g1")}),
    vmap2=st.fixed_dictionaries({}, optional={q: vid_st for q in
                                              ("e1", "e2", "f1", "f2", "g1")}),
)
def test_key_soundness_and_completeness(cut_qids, vmap1, vmap2):
    """Equal keys exactly when the cut projections agree as vertex maps."""
    if not (cut_qids <= set(vmap1) and cut_qids <= set(vmap2)):
        return
    order = tuple(sorted(cut_qids))
    k1 = join_key_for(order, vmap1)
    k2 = join_key_for(order, vmap2)
    proj1 = {q: vmap1[q] for q in cut_qids}
    proj2 = {q: vmap2[q] for q in cut_qids}
    assert (k1 == k2) == (proj1 == proj2)


class FlatStore:
    """Reference implementation: a flat list with linear scans."""

    def __init__(self, window):
        self.window = window
        self.rows = []  # (node, key, match)
        self.now = 0

    def insert(self, node, key, m):
        for n, _, other in self.rows:
            if n == node and other.signature == m.signature:
                raise DuplicateMatch("dup")
        self.rows.append((node, key, m))

    def lookup(self, node, key):
        cutoff = self.now - self.window
        return [m for n, k, m in self.rows
                if n == node and k == key and m.t_low >= cutoff]

    def prune(self, now):
        self.now = max(self.now, now)
        cutoff = self.now - self.window
        before = len(self.rows)
        self.rows = [(n, k, m) for n, k, m in self.rows if m.t_low >= cutoff]
        return before - len(self.rows)


def test_store_equivalent_to_flat_list_reference():
    rng = random.Random(42)
    for trial in range(25):
        window = rng.choice([3, 6, 10])
        store = MatchStore([0, 1], window)
        flat = FlatStore(window)
        t = 0
        for _ in range(rng.randrange(10, 60)):
            op = rng.random()
            t += rng.choice([0, 1, 1])
            store.advance(t)
            flat.now = max(flat.now, t)
            node = rng.randrange(2)
            key = rng.choice([b"ka", b"kb", UNIVERSAL_KEY])
            if op < 0.6:
                lo = max(0, t - rng.randrange(0, 8))
                m = PartialMatch(node, {"e1": f"a{rng.randrange(6)}_{lo}_{t}",
                                        "f1": key.decode()},
                                 {0: rng.randrange(1000)}, lo, t)
                try:
                    store.insert(node, key, m)
                    inserted = True
                except DuplicateMatch:
                    inserted = False
                try:
                    flat.insert(node, key, m)
                    assert inserted
                except DuplicateMatch:
                    assert not inserted
            elif op < 0.9:
                got = {m.signature for m in store.lookup(node, key)}
                want = {m.signature for m in flat.lookup(node, key)}
                assert got == want
            else:
                assert store.prune(t) == flat.prune(t)
        for node in (0, 1):
            for key in (b"ka", b"kb", UNIVERSAL_KEY):
                got = {m.signature for m in store.lookup(node, key)}
                want = {m.signature for m in flat.lookup(node, key)}
                assert got == want
