"""Edge-anchored subgraph isomorphism for search primitives.

Every arriving edge is tried as an anchor: each type-compatible query edge of
the primitive is seeded with it, and the rest of the primitive is completed by
backtracking over window-valid adjacency.  Star primitives (all edges sharing
one center) take a specialized path; everything else goes through the general
matcher with label-first, degree-first candidate ordering.

Matches are returned as (vertex_map, edge_map, t_low, t_high) tuples; vertex
and edge maps are injective and every used edge has timestamp >= min_ts.
"""

from __future__ import annotations

from .errors import NotAStar
from .graph import DynamicGraph, TemporalEdge
from .query import QuerySubgraph

Assignment = tuple[dict[str, str], dict[int, int], int, int]


def _seed_orientations(graph: DynamicGraph, primitive: QuerySubgraph,
                       anchor: TemporalEdge, anchor_et: int):
    """Yield (query edge, {qid: data vid}) seeds mapping the anchor."""
    query = primitive.query
    src_v = graph.vertex(anchor.src)
    dst_v = graph.vertex(anchor.dst)
    for qe in primitive.edges():
        if qe.etype != anchor_et:
            continue
        qu = query.vertex(qe.u)
        qv = query.vertex(qe.v)
        if qu.vtype == src_v.vtype and qv.vtype == dst_v.vtype:
            du, dv, lu, lv = anchor.src, anchor.dst, src_v.label, dst_v.label
        elif qu.vtype == dst_v.vtype and qv.vtype == src_v.vtype:
            du, dv, lu, lv = anchor.dst, anchor.src, dst_v.label, src_v.label
        else:
            continue
        if qu.label and qu.label != lu:
            continue
        if qv.label and qv.label != lv:
            continue
        yield qe, {qe.u: du, qe.v: dv}


def star_search(graph: DynamicGraph, primitive: QuerySubgraph,
                anchor: TemporalEdge, min_ts: int) -> list[Assignment]:
    """All matches of a star primitive that map some query edge to the anchor."""
    center = primitive.star_center()
    if center is None:
        raise NotAStar("primitive has no vertex incident to every edge")
    if anchor.id is None or anchor.timestamp < min_ts:
        return []
    query = primitive.query
    anchor_et = graph.schema.edge_type_id(anchor.etype)
    results: list[Assignment] = []
    seen: set = set()

    for seed_edge, vmap0 in _seed_orientations(graph, primitive, anchor, anchor_et):
        dc = vmap0[center]
        rest = [qe for qe in primitive.edges() if qe.index != seed_edge.index]
        # label-constrained peripherals first: they fail fastest
        rest.sort(key=lambda qe: (not query.vertex(qe.v if qe.u == center else qe.u).label,
                                  qe.index))
        vmap = dict(vmap0)
        emap = {seed_edge.index: anchor.id}
        used_v = set(vmap.values())
        used_e = {anchor.id}

        def extend(i: int, t_low: int, t_high: int):
            if i == len(rest):
                sig = (tuple(sorted(emap.values())), tuple(sorted(vmap.items())))
                if sig not in seen:
                    seen.add(sig)
                    results.append((dict(vmap), dict(emap), t_low, t_high))
                return
            qe = rest[i]
            p = qe.v if qe.u == center else qe.u
            bound = vmap.get(p)
            plabel = query.vertex(p).label
            for nbr, eid, ts in graph.neighbors(dc, qe.etype, min_ts):
                if eid in used_e:
                    continue
                if bound is not None:
                    if nbr != bound:
                        continue
                    emap[qe.index] = eid
                    used_e.add(eid)
                    extend(i + 1, min(t_low, ts), max(t_high, ts))
                    used_e.remove(eid)
                    del emap[qe.index]
                else:
                    if nbr in used_v:
                        continue
                    if plabel and graph.vertex(nbr).label != plabel:
                        continue
                    vmap[p] = nbr
                    emap[qe.index] = eid
                    used_v.add(nbr)
                    used_e.add(eid)
                    extend(i + 1, min(t_low, ts), max(t_high, ts))
                    used_e.remove(eid)
                    used_v.remove(nbr)
                    del emap[qe.index]
                    del vmap[p]

        extend(0, anchor.timestamp, anchor.timestamp)
    return results


def _compile_steps(primitive: QuerySubgraph, seeded: tuple[str, str],
                   seed_edge_index: int):
    """Extension order for the general matcher, given the seeded endpoints.

    Each step assigns one query vertex and lists the primitive edges that
    connect it back to already-assigned vertices.  Vertices adjacent to the
    assigned region come first, ordered label-first then degree-first.  Edges
    between the two seeded endpoints beyond the seed itself (parallel relation
    types) become a leading step whose vertex is already bound.
    """
    query = primitive.query
    extra = [
        (seeded[0], query.edges[ei].etype, ei)
        for ei in sorted(primitive.edge_indexes)
        if ei != seed_edge_index
        and {query.edges[ei].u, query.edges[ei].v} == set(seeded)
    ]
    steps = [(seeded[1], extra)] if extra else []
    assigned = set(seeded)
    remaining = set(primitive.vertex_ids) - assigned
    while remaining:
        adjacent = set()
        for qid in remaining:
            for other, ei in query.adjacent(qid):
                if other in assigned and ei in primitive.edge_indexes:
                    adjacent.add(qid)
                    break
        pool = adjacent if adjacent else remaining
        pick = max(pool, key=lambda q: (bool(query.vertex(q).label),
                                        primitive.degree(q), q))
        conn = [(other, query.edges[ei].etype, ei)
                for other, ei in query.adjacent(pick)
                if other in assigned and ei in primitive.edge_indexes]
        steps.append((pick, conn))
        assigned.add(pick)
        remaining.remove(pick)
    return steps


def anchored_search(graph: DynamicGraph, primitive: QuerySubgraph,
                    anchor: TemporalEdge, min_ts: int) -> list[Assignment]:
    """General anchored matcher: all isomorphisms of the primitive that map
    some query edge to the anchor, using only edges at or after min_ts."""
    if anchor.id is None or anchor.timestamp < min_ts:
        return []
    query = primitive.query
    anchor_et = graph.schema.edge_type_id(anchor.etype)
    # per-vertex required incident multiplicity by edge type (degree pre-filter)
    need: dict[str, dict[int, int]] = {q: {} for q in primitive.vertex_ids}
    for qe in primitive.edges():
        for q in (qe.u, qe.v):
            need[q][qe.etype] = need[q].get(qe.etype, 0) + 1

    results: list[Assignment] = []
    seen: set = set()

    for seed_edge, vmap0 in _seed_orientations(graph, primitive, anchor, anchor_et):
        ok = True
        for q, dv in vmap0.items():
            for et, mult in need[q].items():
                if graph.incident_count(dv, et, min_ts) < mult:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        steps = _compile_steps(primitive, (seed_edge.u, seed_edge.v),
                               seed_edge.index)
        vmap = dict(vmap0)
        emap = {seed_edge.index: anchor.id}
        used_v = set(vmap.values())
        used_e = {anchor.id}

        def admissible(qid: str, dv: str) -> bool:
            if dv in used_v:
                return False
            qv = query.vertex(qid)
            if qv.label and graph.vertex(dv).label != qv.label:
                return False
            if graph.vertex(dv).vtype != qv.vtype:
                return False
            for et, mult in need[qid].items():
                if graph.incident_count(dv, et, min_ts) < mult:
                    return False
            return True

        def extend(step_i: int, t_low: int, t_high: int):
            if step_i == len(steps):
                sig = (tuple(sorted(emap.values())), tuple(sorted(vmap.items())))
                if sig not in seen:
                    seen.add(sig)
                    results.append((dict(vmap), dict(emap), t_low, t_high))
                return
            qid, conn = steps[step_i]

            def more_edges(j: int, tl: int, th: int):
                if j == len(conn):
                    extend(step_i + 1, tl, th)
                    return
                other, et, ei = conn[j]
                here = vmap[qid]
                for nbr, eid, ts in graph.neighbors(vmap[other], et, min_ts):
                    if nbr != here or eid in used_e:
                        continue
                    used_e.add(eid)
                    emap[ei] = eid
                    more_edges(j + 1, min(tl, ts), max(th, ts))
                    del emap[ei]
                    used_e.remove(eid)

            if qid in vmap:
                # leading step for parallel edges between the seeded pair
                more_edges(0, t_low, t_high)
            elif conn:
                other, et, ei = conn[0]
                for nbr, eid, ts in graph.neighbors(vmap[other], et, min_ts):
                    if eid in used_e or not admissible(qid, nbr):
                        continue
                    vmap[qid] = nbr
                    used_v.add(nbr)
                    used_e.add(eid)
                    emap[ei] = eid
                    more_edges(1, min(t_low, ts), max(t_high, ts))
                    del emap[ei]
                    used_e.remove(eid)
                    used_v.remove(nbr)
                    del vmap[qid]
            else:
                # disconnected primitive: fall back to a type-indexed scan
                for cand in graph.vertices_of_type(query.vertex(qid).vtype):
                    if not admissible(qid, cand):
                        continue
                    vmap[qid] = cand
                    used_v.add(cand)
                    extend(step_i + 1, t_low, t_high)
                    used_v.remove(cand)
                    del vmap[qid]

        extend(0, anchor.timestamp, anchor.timestamp)
    return results


def local_search(graph: DynamicGraph, primitive: QuerySubgraph,
                 anchor: TemporalEdge, min_ts: int) -> list[Assignment]:
    """Anchored search for one primitive around an arriving edge.

    Dispatches to the star matcher when the primitive is a star, otherwise to
    the general matcher.  Anchors whose type does not occur in the primitive
    are rejected without touching the graph.
    """
    anchor_et = graph.schema.edge_type_id(anchor.etype)
    for qe in primitive.edges():
        if qe.etype == anchor_et:
            break
    else:
        return []
    if primitive.star_center() is not None:
        return star_search(graph, primitive, anchor, min_ts)
    return anchored_search(graph, primitive, anchor, min_ts)
