"""In-memory dynamic multi-relational graph.

Vertices are typed and optionally labeled; edges are typed, timestamped and
stored undirected (incidence on both endpoints) while keeping their (src, dst)
orientation in the record.  The graph is k-partite: an edge never connects two
vertices of the same type.  Edge ids are assigned in arrival order.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from .errors import SchemaViolation, TimestampRegression, UnknownVertex, UnknownEdge


class Schema:
    """Registry of vertex/edge type names with dense integer ids.

    Each edge type is pinned to one unordered pair of distinct vertex types.
    Once frozen, unseen names raise SchemaViolation instead of auto-registering.
    """

    def __init__(self):
        self._vtype_ids: dict[str, int] = {}
        self._vtype_names: list[str] = []
        self._etype_ids: dict[str, int] = {}
        self._etype_names: list[str] = []
        self._etype_endpoints: list[frozenset[int]] = []
        self.frozen = False

    def register_vertex_type(self, name: str) -> int:
        if name in self._vtype_ids:
            return self._vtype_ids[name]
        if self.frozen:
            raise SchemaViolation(f"unknown vertex type {name!r} (schema is frozen)")
        if not name:
            raise SchemaViolation("vertex type name must be non-empty")
        vid = len(self._vtype_names)
        self._vtype_ids[name] = vid
        self._vtype_names.append(name)
        return vid

    def register_edge_type(self, name: str, vtype_a: str, vtype_b: str) -> int:
        a = self.register_vertex_type(vtype_a)
        b = self.register_vertex_type(vtype_b)
        if a == b:
            raise SchemaViolation(
                f"edge type {name!r} connects two vertices of type {vtype_a!r}; "
                "unary relations are not representable"
            )
        pair = frozenset((a, b))
        if name in self._etype_ids:
            eid = self._etype_ids[name]
            if self._etype_endpoints[eid] != pair:
                raise SchemaViolation(
                    f"edge type {name!r} already registered between different vertex types"
                )
            return eid
        if self.frozen:
            raise SchemaViolation(f"unknown edge type {name!r} (schema is frozen)")
        eid = len(self._etype_names)
        self._etype_ids[name] = eid
        self._etype_names.append(name)
        self._etype_endpoints.append(pair)
        return eid

    def freeze(self) -> None:
        self.frozen = True

    def vertex_type_id(self, name: str) -> int:
        try:
            return self._vtype_ids[name]
        except KeyError:
            raise SchemaViolation(f"unknown vertex type {name!r}") from None

    def edge_type_id(self, name: str) -> int:
        try:
            return self._etype_ids[name]
        except KeyError:
            raise SchemaViolation(f"unknown edge type {name!r}") from None

    def vertex_type_name(self, vtype: int) -> str:
        return self._vtype_names[vtype]

    def edge_type_name(self, etype: int) -> str:
        return self._etype_names[etype]

    def edge_type_endpoints(self, etype: int) -> frozenset[int]:
        return self._etype_endpoints[etype]

    def has_edge_type(self, name: str) -> bool:
        return name in self._etype_ids

    @property
    def vertex_type_count(self) -> int:
        return len(self._vtype_names)

    @property
    def edge_type_count(self) -> int:
        return len(self._etype_names)


@dataclass(frozen=True, slots=True)
class TemporalEdge:
    """A typed, timestamped edge; the unit of the input stream.

    ``src_type``/``src_label`` (and the dst counterparts) carry enough
    information to create the endpoints on first sight.  ``id`` is None until
    the edge is inserted into a graph.
    """

    timestamp: int
    src: str
    dst: str
    etype: str
    src_type: str = ""
    src_label: str = ""
    dst_type: str = ""
    dst_label: str = ""
    id: int | None = None


class Vertex:
    """A typed data vertex; label is fixed once set (empty = unset)."""

    __slots__ = ("vid", "vtype", "label")

    def __init__(self, vid: str, vtype: int, label: str = ""):
        self.vid = vid
        self.vtype = vtype
        self.label = label

    def __repr__(self):
        return f"Vertex({self.vid!r}, vtype={self.vtype}, label={self.label!r})"


class DynamicGraph:
    """Insert-only timestamped multigraph with per-type adjacency.

    Adjacency lists are kept sorted by timestamp, so window lookups are a
    bisect plus a slice.  Mutations must come from a single control thread.
    """

    def __init__(self, schema: Schema | None = None, disorder_slack: int = 0):
        if disorder_slack < 0:
            raise ValueError("disorder_slack must be non-negative")
        self.schema = schema if schema is not None else Schema()
        self.disorder_slack = disorder_slack
        self.current_time = 0
        self._vertices: dict[str, Vertex] = {}
        # vid -> etype id -> [(timestamp, neighbor vid, edge id), ...] sorted
        self._adj: dict[str, dict[int, list[tuple[int, str, int]]]] = {}
        self._edges: dict[int, TemporalEdge] = {}
        self._by_type: dict[int, list[str]] = {}
        self._next_edge_id = 0

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @property
    def vertex_count(self) -> int:
        return len(self._vertices)

    def has_vertex(self, vid: str) -> bool:
        return vid in self._vertices

    def vertex(self, vid: str) -> Vertex:
        try:
            return self._vertices[vid]
        except KeyError:
            raise UnknownVertex(f"vertex {vid!r} not in graph") from None

    def edge(self, edge_id: int) -> TemporalEdge:
        try:
            return self._edges[edge_id]
        except KeyError:
            raise UnknownEdge(f"edge #{edge_id} not in graph") from None

    def has_edge(self, edge_id: int) -> bool:
        return edge_id in self._edges

    def vertices_of_type(self, vtype: int) -> list[str]:
        return self._by_type.get(vtype, [])

    def edges(self):
        """All stored edges, in arrival order."""
        return iter(sorted(self._edges.values(), key=lambda e: e.id))

    def _check_vertex(self, vid: str, type_name: str, label: str) -> None:
        """Validate a planned endpoint without mutating anything."""
        v = self._vertices.get(vid)
        if v is None:
            return
        if type_name and self.schema.register_vertex_type(type_name) != v.vtype:
            raise SchemaViolation(
                f"vertex {vid!r} already has type "
                f"{self.schema.vertex_type_name(v.vtype)!r}, got {type_name!r}"
            )
        if label and v.label and v.label != label:
            raise SchemaViolation(
                f"vertex {vid!r} already labeled {v.label!r}, got {label!r}"
            )

    def _touch_vertex(self, vid: str, type_name: str, label: str) -> Vertex:
        v = self._vertices.get(vid)
        if v is None:
            vtype = self.schema.register_vertex_type(type_name)
            v = Vertex(vid, vtype, label)
            self._vertices[vid] = v
            self._adj[vid] = {}
            self._by_type.setdefault(vtype, []).append(vid)
            return v
        if label and not v.label:
            v.label = label
        return v

    def add_edge(self, e: TemporalEdge) -> TemporalEdge:
        """Insert one edge; returns the stored record with its id assigned.

        All validation happens before the first mutation, so a raised error
        leaves vertices and adjacency untouched.
        """
        if e.timestamp < 0:
            raise TimestampRegression(f"negative timestamp {e.timestamp}")
        if e.timestamp < self.current_time - self.disorder_slack:
            raise TimestampRegression(
                f"timestamp {e.timestamp} below current time {self.current_time} "
                f"minus slack {self.disorder_slack}"
            )
        if e.src == e.dst:
            raise SchemaViolation(f"self-loop on vertex {e.src!r}")

        src_type = e.src_type or (
            self.schema.vertex_type_name(self._vertices[e.src].vtype)
            if e.src in self._vertices
            else ""
        )
        dst_type = e.dst_type or (
            self.schema.vertex_type_name(self._vertices[e.dst].vtype)
            if e.dst in self._vertices
            else ""
        )
        if not src_type:
            raise UnknownVertex(f"vertex {e.src!r} not in graph and no type given")
        if not dst_type:
            raise UnknownVertex(f"vertex {e.dst!r} not in graph and no type given")
        if src_type == dst_type:
            raise SchemaViolation(
                f"edge {e.src!r}--{e.dst!r} connects two {src_type!r} vertices"
            )
        etype = self.schema.register_edge_type(e.etype, src_type, dst_type)
        if (
            frozenset(
                (
                    self.schema.vertex_type_id(src_type),
                    self.schema.vertex_type_id(dst_type),
                )
            )
            != self.schema.edge_type_endpoints(etype)
        ):
            raise SchemaViolation(
                f"edge type {e.etype!r} not registered between "
                f"{src_type!r} and {dst_type!r}"
            )
        self._check_vertex(e.src, src_type, e.src_label)
        self._check_vertex(e.dst, dst_type, e.dst_label)

        self._touch_vertex(e.src, src_type, e.src_label)
        self._touch_vertex(e.dst, dst_type, e.dst_label)

        stored = TemporalEdge(e.timestamp, e.src, e.dst, e.etype,
                              e.src_type, e.src_label, e.dst_type, e.dst_label,
                              self._next_edge_id)
        self._next_edge_id += 1
        self._edges[stored.id] = stored
        entry_fwd = (stored.timestamp, e.dst, stored.id)
        entry_rev = (stored.timestamp, e.src, stored.id)
        for vid, entry in ((e.src, entry_fwd), (e.dst, entry_rev)):
            lst = self._adj[vid].setdefault(etype, [])
            if lst and entry < lst[-1]:
                bisect.insort(lst, entry)
            else:
                lst.append(entry)
        if stored.timestamp > self.current_time:
            self.current_time = stored.timestamp
        return stored

    def neighbors(self, vid: str, etype: int, min_ts: int = 0):
        """Incident edges of one type at or after min_ts, in timestamp order.

        Yields (neighbor id, edge id, timestamp) tuples.
        """
        if vid not in self._vertices:
            raise UnknownVertex(f"vertex {vid!r} not in graph")
        lst = self._adj[vid].get(etype)
        if not lst:
            return []
        lo = bisect.bisect_left(lst, (min_ts, "", -1)) if min_ts > 0 else 0
        return [(nbr, eid, ts) for ts, nbr, eid in lst[lo:]]

    def incident_count(self, vid: str, etype: int, min_ts: int = 0) -> int:
        """Number of window-valid incident edges of one type (degree filter)."""
        lst = self._adj.get(vid, {}).get(etype)
        if not lst:
            return 0
        if min_ts <= 0:
            return len(lst)
        return len(lst) - bisect.bisect_left(lst, (min_ts, "", -1))

    def degree(self, vid: str) -> int:
        if vid not in self._vertices:
            raise UnknownVertex(f"vertex {vid!r} not in graph")
        return sum(len(lst) for lst in self._adj[vid].values())

    def expire_edges(self, cutoff: int) -> int:
        """Remove every edge with timestamp < cutoff; keeps isolated vertices."""
        removed = [eid for eid, e in self._edges.items() if e.timestamp < cutoff]
        if not removed:
            return 0
        for eid in removed:
            del self._edges[eid]
        for adj in self._adj.values():
            for etype in list(adj):
                lst = adj[etype]
                lo = bisect.bisect_left(lst, (cutoff, "", -1))
                if lo:
                    del lst[:lo]
                if not lst:
                    del adj[etype]
        return len(removed)
