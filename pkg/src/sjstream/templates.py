"""Builders for the standard event-sequence query templates.

The workhorse shape: n event vertices (type only) all connected to the same
set of feature vertices, at most one of which carries a label.  Each event's
star is one leaf, joined left-deep so the events must occur in strictly
increasing timestamp order.
"""

from __future__ import annotations

from .graph import Schema
from .query import QueryGraph, QueryVertex, SJTree, build_sjtree


def event_feature_template(
    schema: Schema,
    n_events: int,
    features: list[tuple[str, str, str]],
    window: int,
    event_type: str = "article",
    ordered: bool | None = None,
) -> tuple[QueryGraph, SJTree]:
    """Build the n-event template and its left-deep join tree.

    ``features`` lists (vertex type, edge type, label) triples; an empty label
    means type-only.  ``ordered=None`` keeps the default (ordered joins, since
    every join combines event-bearing subtrees).
    """
    if n_events < 1:
        raise ValueError("need at least one event vertex")
    if not features:
        raise ValueError("need at least one feature vertex")
    event_vt = schema.register_vertex_type(event_type)
    vertices = [QueryVertex(f"e{i + 1}", event_vt, "", True) for i in range(n_events)]
    edges: list[tuple[str, str, int]] = []
    for j, (vtype, etype, label) in enumerate(features):
        fid = f"f{j + 1}"
        vt = schema.register_vertex_type(vtype)
        et = schema.register_edge_type(etype, event_type, vtype)
        vertices.append(QueryVertex(fid, vt, label, False))
        for i in range(n_events):
            edges.append((f"e{i + 1}", fid, et))
    query = QueryGraph(schema, vertices, edges)
    # edge list above is feature-major; regroup indexes per event for leaves
    per_event: list[list[int]] = [[] for _ in range(n_events)]
    for idx, qe in enumerate(query.edges):
        event_qid = qe.u if qe.u.startswith("e") else qe.v
        per_event[int(event_qid[1:]) - 1].append(idx)
    joins: list[tuple[int, int, bool | None]] = []
    left = 0
    next_id = n_events
    for right in range(1, n_events):
        joins.append((left, right, ordered))
        left = next_id
        next_id += 1
    tree = build_sjtree(query, per_event, joins, window)
    return query, tree


def two_event_template(schema: Schema, label: str = "fire",
                       window: int = 10) -> tuple[QueryGraph, SJTree]:
    """Two events sharing one labeled keyword."""
    return event_feature_template(
        schema, 2, [("keyword", "has_kw", label)], window)


def four_event_template(schema: Schema, label: str = "fire",
                        window: int = 50) -> tuple[QueryGraph, SJTree]:
    """Four events sharing a labeled keyword and a type-only location."""
    return event_feature_template(
        schema, 4,
        [("keyword", "has_kw", label), ("location", "at_loc", "")],
        window)
