"""Exhaustive ground-truth enumeration over a static snapshot.

Independent of the incremental engine: a global backtracking search assigns
query vertices (and the data edges realizing each query edge) in every
possible way, then filters by window span and by the temporal ordering
constraints.  Deliberately unsophisticated; used to check the engine and the
baseline at desk scale.
"""

from __future__ import annotations

from .errors import SizeGuardExceeded
from .engine import MatchRecord, record_signature
from .graph import DynamicGraph
from .query import QueryGraph

DEFAULT_SIZE_GUARD = 10_000


def _vertex_order(query: QueryGraph):
    """Assignment order: labeled/high-degree vertices first, then grow along
    query adjacency so every later vertex connects back to an assigned one."""
    def rank(qid):
        v = query.vertex(qid)
        return (bool(v.label), len(query.adjacent(qid)), qid)

    start = max(query.vertices, key=rank)
    order = [(start, [])]
    assigned = {start}
    remaining = set(query.vertices) - assigned
    while remaining:
        adjacent = {q for q in remaining
                    if any(o in assigned for o, _ in query.adjacent(q))}
        pool = adjacent if adjacent else remaining
        pick = max(pool, key=rank)
        conn = [(other, query.edges[ei].etype, ei)
                for other, ei in query.adjacent(pick) if other in assigned]
        order.append((pick, conn))
        assigned.add(pick)
        remaining.remove(pick)
    return order


def enumerate_all(graph: DynamicGraph, query: QueryGraph, window: int,
                  ordering=(), *, max_edges: int = DEFAULT_SIZE_GUARD,
                  early_window_prune: bool = True) -> list[MatchRecord]:
    """Every injective, adjacency/type/label-preserving assignment of the
    query whose edge timestamps span strictly less than the window and satisfy
    the ordering constraints.

    ``ordering`` is a sequence of (left edge-index set, right edge-index set)
    pairs; a match passes when max(ts[left]) < min(ts[right]) for each pair.
    ``early_window_prune`` abandons partial assignments that already span the
    window; disabling it only affects running time, never the result.
    """
    if graph.edge_count > max_edges:
        raise SizeGuardExceeded(
            f"snapshot has {graph.edge_count} edges, guard is {max_edges}")
    order = _vertex_order(query)
    records: dict[tuple, MatchRecord] = {}
    vmap: dict[str, str] = {}
    emap: dict[int, int] = {}
    tsmap: dict[int, int] = {}
    used_v: set[str] = set()
    used_e: set[int] = set()

    def admissible(qid: str, vid: str) -> bool:
        if vid in used_v:
            return False
        v = graph.vertex(vid)
        qv = query.vertex(qid)
        return v.vtype == qv.vtype and (not qv.label or v.label == qv.label)

    def record():
        ts_values = tsmap.values()
        t_low, t_high = min(ts_values), max(ts_values)
        if t_high - t_low >= window:
            return
        for left, right in ordering:
            if max(tsmap[i] for i in left) >= min(tsmap[i] for i in right):
                return
        sig = record_signature(vmap, emap)
        if sig not in records:
            records[sig] = MatchRecord(dict(vmap), dict(emap),
                                       t_low, t_high, t_high, sig)

    def span_exceeded(ts: int) -> bool:
        if not early_window_prune or not tsmap:
            return False
        values = tsmap.values()
        lo = min(min(values), ts)
        hi = max(max(values), ts)
        return hi - lo >= window

    def bind_edges(conn, j, step_i):
        if j == len(conn):
            assign(step_i + 1)
            return
        other, et, ei = conn[j]
        qid = order[step_i][0]
        target = vmap[qid]
        for nbr, eid, ts in graph.neighbors(vmap[other], et, 0):
            if nbr != target or eid in used_e or span_exceeded(ts):
                continue
            used_e.add(eid)
            emap[ei] = eid
            tsmap[ei] = ts
            bind_edges(conn, j + 1, step_i)
            del tsmap[ei]
            del emap[ei]
            used_e.remove(eid)

    def assign(step_i: int):
        if step_i == len(order):
            record()
            return
        qid, conn = order[step_i]
        if not conn:
            for vid in graph.vertices_of_type(query.vertex(qid).vtype):
                if not admissible(qid, vid):
                    continue
                vmap[qid] = vid
                used_v.add(vid)
                assign(step_i + 1)
                used_v.remove(vid)
                del vmap[qid]
            return
        other, et, ei = conn[0]
        for nbr, eid, ts in graph.neighbors(vmap[other], et, 0):
            if eid in used_e or not admissible(qid, nbr) or span_exceeded(ts):
                continue
            vmap[qid] = nbr
            used_v.add(nbr)
            used_e.add(eid)
            emap[ei] = eid
            tsmap[ei] = ts
            bind_edges(conn, 1, step_i)
            del tsmap[ei]
            del emap[ei]
            used_e.remove(eid)
            used_v.remove(nbr)
            del vmap[qid]

    assign(0)
    return list(records.values())


def signature_set(records) -> set:
    return {r.signature for r in records}
