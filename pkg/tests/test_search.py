import random

import pytest

from conftest import build_graph, kw_edge, loc_edge
from sjstream.errors import NotAStar
from sjstream.graph import DynamicGraph, Schema, TemporalEdge
from sjstream.oracle import enumerate_all
from sjstream.query import QueryGraph, QueryVertex
from sjstream.search import anchored_search, local_search, star_search
from sjstream.templates import event_feature_template


def _star_query(schema):
    """e1:article center with f:keyword[fire] and l:location peripherals."""
    art = schema.register_vertex_type("article")
    kw = schema.register_vertex_type("keyword")
    loc = schema.register_vertex_type("location")
    has_kw = schema.register_edge_type("has_kw", "article", "keyword")
    at_loc = schema.register_edge_type("at_loc", "article", "location")
    query = QueryGraph(
        schema,
        [QueryVertex("e1", art, "", True), QueryVertex("f", kw, "fire"),
         QueryVertex("l", loc)],
        [("e1", "f", has_kw), ("e1", "l", at_loc)],
    )
    return query


def test_star_search_finds_single_match():
    schema = Schema()
    query = _star_query(schema)
    g = DynamicGraph(schema)
    g.add_edge(loc_edge(8, "a101", "l3"))
    anchor = g.add_edge(kw_edge(9, "a101", "k7", label="fire"))
    got = star_search(g, query.full_subgraph(), anchor, min_ts=0)
    assert len(got) == 1
    vmap, emap, t_low, t_high = got[0]
    assert vmap == {"e1": "a101", "f": "k7", "l": "l3"}
    assert (t_low, t_high) == (8, 9)
    assert emap[0] == anchor.id


def test_star_search_window_excludes_old_edge():
    schema = Schema()
    query = _star_query(schema)
    g = DynamicGraph(schema)
    g.add_edge(loc_edge(1, "a101", "l3"))
    anchor = g.add_edge(kw_edge(9, "a101", "k7", label="fire"))
    assert star_search(g, query.full_subgraph(), anchor, min_ts=5) == []


def test_star_search_label_constraint():
    schema = Schema()
    query = _star_query(schema)
    g = DynamicGraph(schema)
    g.add_edge(loc_edge(8, "a101", "l3"))
    anchor = g.add_edge(kw_edge(9, "a101", "k7", label="storm"))
    assert star_search(g, query.full_subgraph(), anchor, min_ts=0) == []


def test_star_search_rejects_non_star():
    schema = Schema()
    A = schema.register_vertex_type("A")
    B = schema.register_vertex_type("B")
    et = schema.register_edge_type("rel", "A", "B")
    path = QueryGraph(
        schema,
        [QueryVertex("a1", A), QueryVertex("b1", B), QueryVertex("a2", A),
         QueryVertex("b2", B)],
        [("a1", "b1", et), ("b1", "a2", et), ("a2", "b2", et)],
    )
    g = DynamicGraph(schema)
    anchor = g.add_edge(TemporalEdge(1, "x", "y", "rel", "A", "", "B", ""))
    with pytest.raises(NotAStar):
        star_search(g, path.full_subgraph(), anchor, min_ts=0)
    # local_search dispatches to the general matcher instead
    assert local_search(g, path.full_subgraph(), anchor, min_ts=0) == []


def test_local_search_fast_reject_on_absent_edge_type():
    schema = Schema()
    query = _star_query(schema)
    g = DynamicGraph(schema)
    schema.register_edge_type("mentions", "article", "person")
    anchor = g.add_edge(TemporalEdge(5, "a1", "p1", "mentions",
                                     "article", "", "person", ""))
    assert local_search(g, query.full_subgraph(), anchor, min_ts=0) == []


def _anchored_oracle(graph, query, anchor_id, window_min_ts, tree_order=()):
    """Independent reference: full enumeration filtered to anchor-containing
    matches that respect the min_ts window."""
    out = set()
    for rec in enumerate_all(graph, query, 10 ** 9, tree_order):
        if anchor_id not in rec.edge_map.values():
            continue
        if any(graph.edge(eid).timestamp < window_min_ts
               for eid in rec.edge_map.values()):
            continue
        out.add(rec.signature)
    return out


def test_anchored_completeness_vs_oracle_randomized():
    rng = random.Random(99)
    schema = Schema()
    A = schema.register_vertex_type("A")
    B = schema.register_vertex_type("B")
    C = schema.register_vertex_type("C")
    r1 = schema.register_edge_type("r1", "A", "B")
    r2 = schema.register_edge_type("r2", "B", "C")
    primitives = []
    # star: b center with two A's
    primitives.append(QueryGraph(
        schema,
        [QueryVertex("a1", A), QueryVertex("a2", A), QueryVertex("b", B)],
        [("a1", "b", r1), ("a2", "b", r1)]))
    # path of 3: a-b-c plus b-a2 (non-star, 3 edges)
    primitives.append(QueryGraph(
        schema,
        [QueryVertex("a1", A), QueryVertex("b", B), QueryVertex("c", C),
         QueryVertex("a2", A)],
        [("a1", "b", r1), ("b", "c", r2), ("a2", "b", r1)]))
    # 4-edge: two B's sharing a C, each with an A
    primitives.append(QueryGraph(
        schema,
        [QueryVertex("a1", A), QueryVertex("b1", B), QueryVertex("c", C),
         QueryVertex("b2", B), QueryVertex("a2", A)],
        [("a1", "b1", r1), ("b1", "c", r2), ("b2", "c", r2), ("a2", "b2", r1)]))

    for trial in range(40):
        edges = []
        t = 0
        for _ in range(rng.randrange(10, 50)):
            t += rng.choice([0, 1])
            if rng.random() < 0.55:
                edges.append(TemporalEdge(t, f"A{rng.randrange(5)}",
                                          f"B{rng.randrange(4)}", "r1",
                                          "A", "", "B", ""))
            else:
                edges.append(TemporalEdge(t, f"B{rng.randrange(4)}",
                                          f"C{rng.randrange(3)}", "r2",
                                          "B", "", "C", ""))
        g = build_graph(edges, schema=schema)
        stored = list(g.edges())
        anchor = stored[rng.randrange(len(stored))]
        min_ts = rng.choice([0, max(0, anchor.timestamp - 4)])
        for query in primitives:
            got = local_search(g, query.full_subgraph(), anchor, min_ts)
            got_sigs = {(tuple(sorted(emap.values())),
                         tuple(sorted(vmap.items())))
                        for vmap, emap, _, _ in got}
            want = _anchored_oracle(g, query, anchor.id, min_ts)
            assert got_sigs == want


def test_symmetric_primitive_double_seeding_matches_oracle():
    schema = Schema()
    A = schema.register_vertex_type("A")
    B = schema.register_vertex_type("B")
    r1 = schema.register_edge_type("r1", "A", "B")
    # symmetric star: center b, two interchangeable unlabeled A peripherals
    query = QueryGraph(
        schema,
        [QueryVertex("a1", A), QueryVertex("a2", A), QueryVertex("b", B)],
        [("a1", "b", r1), ("a2", "b", r1)])
    g = DynamicGraph(schema)
    g.add_edge(TemporalEdge(1, "x", "hub", "r1", "A", "", "B", ""))
    g.add_edge(TemporalEdge(2, "y", "hub", "r1", "A", "", "B", ""))
    anchor = g.add_edge(TemporalEdge(3, "z", "hub", "r1", "A", "", "B", ""))
    got = local_search(g, query.full_subgraph(), anchor, min_ts=0)
    # anchor seeds both query edges; z pairs with x and y in both roles
    want = _anchored_oracle(g, query, anchor.id, 0)
    got_sigs = {(tuple(sorted(emap.values())), tuple(sorted(vmap.items())))
                for vmap, emap, _, _ in got}
    assert got_sigs == want
    assert len(got) == len(got_sigs) == 4


def test_window_discipline_no_result_uses_stale_edge():
    rng = random.Random(5)
    schema = Schema()
    query, _ = event_feature_template(schema, 2, [("keyword", "has_kw", "")], 10)
    edges = [kw_edge(rng.randrange(0, 20), f"a{rng.randrange(6)}",
                     f"k{rng.randrange(3)}", label="") for _ in range(40)]
    edges.sort(key=lambda e: e.timestamp)
    g = build_graph(edges, schema=schema)
    anchor = list(g.edges())[-1]
    min_ts = anchor.timestamp - 5
    leaf = query.subgraph_from_edges([0])
    for vmap, emap, t_low, t_high in local_search(g, leaf, anchor, min_ts):
        assert t_low >= min_ts
        for eid in emap.values():
            assert g.edge(eid).timestamp >= min_ts


def test_parallel_relation_types_between_same_pair():
    schema = Schema()
    U = schema.register_vertex_type("user")
    I = schema.register_vertex_type("item")
    acc = schema.register_edge_type("accept", "user", "item")
    rej = schema.register_edge_type("reject", "user", "item")
    query = QueryGraph(
        schema,
        [QueryVertex("u", U), QueryVertex("i", I)],
        [("u", "i", acc), ("u", "i", rej)])
    g = DynamicGraph(schema)
    g.add_edge(TemporalEdge(1, "u1", "i1", "accept", "user", "", "item", ""))
    anchor = g.add_edge(TemporalEdge(2, "u1", "i1", "reject", "user", "", "item", ""))
    got = local_search(g, query.full_subgraph(), anchor, min_ts=0)
    assert len(got) == 1
    vmap, emap, t_low, t_high = got[0]
    assert vmap == {"u": "u1", "i": "i1"}
    assert len(emap) == 2 and (t_low, t_high) == (1, 2)


def test_parallel_pair_inside_non_star_primitive():
    schema = Schema()
    U = schema.register_vertex_type("user")
    I = schema.register_vertex_type("item")
    K = schema.register_vertex_type("kw")
    acc = schema.register_edge_type("accept", "user", "item")
    rej = schema.register_edge_type("reject", "user", "item")
    prof = schema.register_edge_type("profile", "user", "kw")
    cat = schema.register_edge_type("in_cat", "item", "kw")
    query = QueryGraph(
        schema,
        [QueryVertex("u", U), QueryVertex("i", I), QueryVertex("k1", K),
         QueryVertex("k2", K)],
        [("u", "i", acc), ("u", "i", rej), ("u", "k1", prof), ("i", "k2", cat)])
    assert query.full_subgraph().star_center() is None
    g = DynamicGraph(schema)
    g.add_edge(TemporalEdge(1, "u1", "kA", "profile", "user", "", "kw", ""))
    g.add_edge(TemporalEdge(2, "i1", "kB", "in_cat", "item", "", "kw", ""))
    g.add_edge(TemporalEdge(3, "u1", "i1", "accept", "user", "", "item", ""))
    anchor = g.add_edge(TemporalEdge(4, "u1", "i1", "reject", "user", "", "item", ""))
    got = anchored_search(g, query.full_subgraph(), anchor, min_ts=0)
    want = _anchored_oracle(g, query, anchor.id, 0)
    got_sigs = {(tuple(sorted(emap.values())), tuple(sorted(vmap.items())))
                for vmap, emap, _, _ in got}
    assert got_sigs == want
    assert len(got) == 1
    assert got[0][0] == {"u": "u1", "i": "i1", "k1": "kA", "k2": "kB"}
