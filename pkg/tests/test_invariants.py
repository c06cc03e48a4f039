"""Property suites over generated cases (1,000+ each): join-tree structure,
join-key soundness, window discipline, emit-once, injectivity and temporal
ordering."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import assert_is_embedding
from sjstream.engine import ContinuousQueryEngine, EngineConfig
from sjstream.graph import DynamicGraph, Schema
from sjstream.matchstore import join_key_for
from sjstream.query import build_sjtree, validate_sjtree
from sjstream.streamio import GeneratorConfig, generate_edges
from sjstream.templates import event_feature_template

N_CASES = 1000

FEATURE_MENU = [
    [("keyword", "has_kw", "keyword_0")],
    [("keyword", "has_kw", "keyword_0"), ("location", "at_loc", "")],
    [("keyword", "has_kw", "")],
]


def _random_template(rng, schema):
    n_events = rng.choice([2, 2, 3, 4])
    features = rng.choice(FEATURE_MENU)
    window = rng.choice([4, 6, 10, 16])
    ordered = None if rng.random() < 0.8 else False
    return event_feature_template(schema, n_events, features, window,
                                  ordered=ordered)


def _random_tree_shape(rng, query, n_leaves, window):
    """Random binary join order over the per-event leaves."""
    per_event = [[] for _ in range(n_leaves)]
    for qe in query.edges:
        eq = qe.u if qe.u.startswith("e") else qe.v
        per_event[int(eq[1:]) - 1].append(qe.index)
    roots = list(range(n_leaves))
    joins = []
    next_id = n_leaves
    while len(roots) > 1:
        i = rng.randrange(len(roots) - 1)
        left = roots.pop(i)
        right = roots.pop(rng.randrange(len(roots)))
        joins.append((left, right, None))
        roots.append(next_id)
        next_id += 1
    return build_sjtree(query, per_event, joins, window)


def test_sjtree_properties_hold_and_mutations_are_caught():
    rng = random.Random(2024)
    for case in range(N_CASES):
        schema = Schema()
        query, _ = _random_template(rng, schema)
        n_events = sum(1 for v in query.vertices.values() if v.is_event)
        tree = _random_tree_shape(rng, query, n_events, window=10)
        report = validate_sjtree(tree)
        assert report.ok, f"case {case}: {report.summary()}"
        if n_events < 2:
            continue
        mutation = rng.choice(["p2", "p4", "partition"])
        if mutation == "p2":
            node = tree.node(rng.choice([n.nid for n in tree.internal_nodes()]))
            keep = sorted(node.query_subgraph.edge_indexes)[:-1]
            node.query_subgraph = query.subgraph_from_edges(keep)
            report = validate_sjtree(tree)
            assert any(i.check in ("P1", "P2") for i in report.issues)
        elif mutation == "p4":
            node = tree.node(rng.choice([n.nid for n in tree.internal_nodes()]))
            node.cut_subgraph = query.full_subgraph()
            report = validate_sjtree(tree)
            assert any(i.check == "P4" and i.node == node.nid
                       for i in report.issues)
        else:
            a, b = rng.sample(tree.leaves, 2)
            victim = tree.node(a)
            thief = tree.node(b)
            stolen = thief.query_subgraph.union(victim.query_subgraph)
            thief.query_subgraph = stolen
            report = validate_sjtree(tree)
            assert any(i.check == "leaf-partition" for i in report.issues)


_qids = ("e1", "e2", "f1", "f2", "g1")
_vmap_st = st.fixed_dictionaries(
    {}, optional={q: st.sampled_from(["a", "b", "c", "d"]) for q in _qids})


@settings(max_examples=N_CASES, deadline=None)
@given(cut=st.frozensets(st.sampled_from(_qids), max_size=4),
       vmap1=_vmap_st, vmap2=_vmap_st)
def test_join_key_soundness_and_completeness(cut, vmap1, vmap2):
    if not (cut <= set(vmap1) and cut <= set(vmap2)):
        return
    order = tuple(sorted(cut))
    keys_equal = join_key_for(order, vmap1) == join_key_for(order, vmap2)
    projections_equal = {q: vmap1[q] for q in cut} == {q: vmap2[q] for q in cut}
    assert keys_equal == projections_equal


@pytest.fixture(scope="module")
def engine_corpus():
    """1,000 randomized engine runs with their full emission history."""
    corpus = []
    rng = random.Random(77)
    for case in range(N_CASES):
        schema = Schema()
        query, tree = _random_template(rng, schema)
        needs_loc = any(qe.etype == schema.edge_type_id("at_loc")
                        for qe in query.edges) if schema.has_edge_type("at_loc") \
            else False
        etypes = [("has_kw", "article", "keyword")]
        vtypes = [("article", 10_000), ("keyword", rng.choice([2, 3, 5]))]
        if needs_loc:
            etypes.append(("at_loc", "article", "location"))
            vtypes.append(("location", rng.choice([2, 3])))
        cfg = GeneratorConfig(
            seed=case, total_edges=rng.choice([50, 80, 120]),
            event_type="article", vertex_types=vtypes, edge_types=etypes,
            zipf_exponent=rng.choice([0.0, 0.8]),
            events_per_tick=rng.choice([1, 1, 2]))
        edges = generate_edges(cfg)
        engine = ContinuousQueryEngine(
            DynamicGraph(schema), tree,
            EngineConfig(window=tree.window,
                         prune_interval_edges=rng.choice([13, 40, None])))
        records = engine.process_batch(edges)
        corpus.append((query, tree, engine, records))
    return corpus


def test_window_discipline_on_emitted_and_stored(engine_corpus):
    for query, tree, engine, records in engine_corpus:
        w = engine.config.window
        for rec in records:
            assert rec.span < w
        for node in tree.nodes:
            for m in engine.store.all_matches(node.nid):
                assert m.t_high - m.t_low < w


def test_emit_once(engine_corpus):
    for _, _, engine, records in engine_corpus:
        sigs = [rec.signature for rec in records]
        assert len(sigs) == len(set(sigs))
        assert engine.stats.duplicate_emissions == 0


def test_emitted_maps_are_injective_embeddings(engine_corpus):
    for query, _, engine, records in engine_corpus:
        for rec in records:
            assert_is_embedding(engine.graph, query, rec.vertex_map,
                                rec.edge_map)


def test_temporal_strict_ordering_on_ordered_trees(engine_corpus):
    checked = 0
    for query, tree, engine, records in engine_corpus:
        constraints = tree.ordering_constraints()
        if not constraints:
            continue
        for rec in records:
            tsmap = {i: engine.graph.edge(eid).timestamp
                     for i, eid in rec.edge_map.items()}
            for left, right in constraints:
                assert max(tsmap[i] for i in left) < min(tsmap[j] for j in right)
            checked += 1
    assert checked > 0
