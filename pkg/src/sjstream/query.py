"""Query graph and join-tree representations.

A query is a connected k-partite pattern with per-vertex type and optional
label constraints.  The join tree is a binary decomposition of the query:
leaves hold search primitives (edge subsets that partition the query's edge
set) and every internal node joins its two children, keyed by the projection
onto the cut subgraph (the intersection of the children's subgraphs).

Trees are supplied by the caller and validated here; this module never
constructs a decomposition on its own.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainMismatch, SpecError
from .graph import Schema


@dataclass(frozen=True, slots=True)
class QueryVertex:
    qid: str
    vtype: int
    label: str = ""
    is_event: bool = False


@dataclass(frozen=True, slots=True)
class QueryEdge:
    """Undirected query edge; endpoints are stored in sorted qid order."""

    index: int
    u: str
    v: str
    etype: int


class QueryGraph:
    """The full pattern: vertices with constraints plus undirected typed edges.

    Construction validates connectivity, the k-partite property and edge
    uniqueness; instances are treated as immutable afterwards.
    """

    def __init__(self, schema: Schema, vertices: list[QueryVertex],
                 edges: list[tuple[str, str, int]]):
        self.schema = schema
        self.vertices: dict[str, QueryVertex] = {}
        for qv in vertices:
            if qv.qid in self.vertices:
                raise SpecError(f"duplicate query vertex {qv.qid!r}")
            self.vertices[qv.qid] = qv
        self.edges: list[QueryEdge] = []
        seen: set[tuple[str, str, int]] = set()
        for u, v, etype in edges:
            if u not in self.vertices or v not in self.vertices:
                raise SpecError(f"query edge ({u!r}, {v!r}) references unknown vertex")
            if u == v:
                raise SpecError(f"query self-loop on {u!r}")
            a, b = (u, v) if u < v else (v, u)
            key = (a, b, etype)
            if key in seen:
                raise SpecError(f"duplicate query edge ({a!r}, {b!r})")
            seen.add(key)
            ta, tb = self.vertices[a].vtype, self.vertices[b].vtype
            if ta == tb:
                raise SpecError(
                    f"query edge ({a!r}, {b!r}) connects two vertices of the same type"
                )
            if frozenset((ta, tb)) != schema.edge_type_endpoints(etype):
                raise SpecError(
                    f"edge type {schema.edge_type_name(etype)!r} not registered "
                    f"between the types of {a!r} and {b!r}"
                )
            self.edges.append(QueryEdge(len(self.edges), a, b, etype))
        if not self.edges:
            raise SpecError("query graph has no edges")
        self._check_connected()
        # adjacency: qid -> list of (other qid, edge index)
        self._adj: dict[str, list[tuple[str, int]]] = {q: [] for q in self.vertices}
        for qe in self.edges:
            self._adj[qe.u].append((qe.v, qe.index))
            self._adj[qe.v].append((qe.u, qe.index))

    def _check_connected(self) -> None:
        todo = {q for q in self.vertices}
        adj: dict[str, set[str]] = {q: set() for q in self.vertices}
        for qe in self.edges:
            adj[qe.u].add(qe.v)
            adj[qe.v].add(qe.u)
        stack = [next(iter(todo))]
        while stack:
            q = stack.pop()
            if q in todo:
                todo.remove(q)
                stack.extend(adj[q])
        if todo:
            raise SpecError(f"query graph is disconnected; unreachable: {sorted(todo)}")

    def vertex(self, qid: str) -> QueryVertex:
        return self.vertices[qid]

    def adjacent(self, qid: str) -> list[tuple[str, int]]:
        return self._adj[qid]

    def full_subgraph(self) -> "QuerySubgraph":
        return QuerySubgraph(self, frozenset(self.vertices),
                             frozenset(qe.index for qe in self.edges))

    def subgraph_from_edges(self, edge_indexes) -> "QuerySubgraph":
        idx = frozenset(edge_indexes)
        verts = set()
        for i in idx:
            qe = self.edges[i]
            verts.add(qe.u)
            verts.add(qe.v)
        return QuerySubgraph(self, frozenset(verts), idx)

    def diameter(self) -> int:
        """Longest shortest path between query vertices (hop count)."""
        best = 0
        for start in self.vertices:
            dist = {start: 0}
            frontier = [start]
            while frontier:
                nxt = []
                for q in frontier:
                    for other, _ in self._adj[q]:
                        if other not in dist:
                            dist[other] = dist[q] + 1
                            nxt.append(other)
                frontier = nxt
            best = max(best, max(dist.values()))
        return best


class QuerySubgraph:
    """A view over a subset of a QueryGraph's vertices and edges.

    Treated as immutable; derived values (edge list, star center) are computed
    once and cached since primitives sit on the per-edge hot path.
    """

    __slots__ = ("query", "vertex_ids", "edge_indexes", "_edges", "_center")

    def __init__(self, query: QueryGraph, vertex_ids: frozenset[str],
                 edge_indexes: frozenset[int]):
        self.query = query
        self.vertex_ids = vertex_ids
        self.edge_indexes = edge_indexes
        self._edges: list[QueryEdge] | None = None
        self._center: str | None | bool = False  # False = not yet computed

    def __repr__(self):
        return (f"QuerySubgraph(vertices={sorted(self.vertex_ids)}, "
                f"edges={sorted(self.edge_indexes)})")

    def sorted_qids(self) -> tuple[str, ...]:
        return tuple(sorted(self.vertex_ids))

    def edges(self) -> list[QueryEdge]:
        if self._edges is None:
            self._edges = [self.query.edges[i] for i in sorted(self.edge_indexes)]
        return self._edges

    def degree(self, qid: str) -> int:
        return sum(1 for qe in self.edges() if qid in (qe.u, qe.v))

    def has_event_vertex(self) -> bool:
        return any(self.query.vertices[q].is_event for q in self.vertex_ids)

    def star_center(self) -> str | None:
        """Vertex incident to every edge of the view, or None."""
        if self._center is not False:
            return self._center
        candidates = None
        for qe in self.edges():
            pair = {qe.u, qe.v}
            candidates = pair if candidates is None else candidates & pair
            if not candidates:
                break
        if not candidates:
            self._center = None
        else:
            # prefer the higher-degree endpoint, ties by qid for determinism
            self._center = max(candidates, key=lambda q: (self.degree(q), q))
        return self._center

    def union(self, other: "QuerySubgraph") -> "QuerySubgraph":
        return QuerySubgraph(self.query, self.vertex_ids | other.vertex_ids,
                             self.edge_indexes | other.edge_indexes)

    def intersection(self, other: "QuerySubgraph") -> "QuerySubgraph":
        return QuerySubgraph(self.query, self.vertex_ids & other.vertex_ids,
                             self.edge_indexes & other.edge_indexes)

    def same_as(self, other: "QuerySubgraph") -> bool:
        return (self.vertex_ids == other.vertex_ids
                and self.edge_indexes == other.edge_indexes)


def project(vertex_map: dict, edge_map: dict, sub: QuerySubgraph) -> tuple[dict, dict]:
    """Restrict a match mapping to a query subgraph.

    Raises DomainMismatch if the subgraph is not contained in the mapping's
    domain.
    """
    try:
        vmap = {q: vertex_map[q] for q in sub.vertex_ids}
        emap = {i: edge_map[i] for i in sub.edge_indexes}
    except KeyError as exc:
        raise DomainMismatch(f"subgraph element {exc.args[0]!r} not in mapping domain") from None
    return vmap, emap


class SJTreeNode:
    __slots__ = ("nid", "parent", "sibling", "left_child", "right_child",
                 "query_subgraph", "cut_subgraph", "ordered_join",
                 "cut_qids", "etype_set", "is_left_child")

    def __init__(self, nid: int, query_subgraph: QuerySubgraph):
        self.nid = nid
        self.parent: int | None = None
        self.sibling: int | None = None
        self.left_child: int | None = None
        self.right_child: int | None = None
        self.query_subgraph = query_subgraph
        self.cut_subgraph: QuerySubgraph | None = None
        self.ordered_join = False
        self.cut_qids: tuple[str, ...] = ()
        self.etype_set: frozenset[int] = frozenset()
        self.is_left_child = False

    @property
    def is_leaf(self) -> bool:
        return self.left_child is None and self.right_child is None


@dataclass(slots=True)
class ValidationIssue:
    check: str
    node: int | None
    message: str


@dataclass(slots=True)
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, check: str, node: int | None, message: str) -> None:
        self.issues.append(ValidationIssue(check, node, message))

    def summary(self) -> str:
        if self.ok:
            return "all checks passed"
        return "; ".join(f"[{i.check}] node {i.node}: {i.message}" for i in self.issues)


class SJTree:
    """Binary join tree over subgraphs of one query graph.

    Nodes are addressed by dense integer ids; ``leaves`` lists leaf ids in
    left-to-right order, which encodes the temporal event sequence for
    ordered joins.  Instances are immutable after validation.
    """

    def __init__(self, query: QueryGraph, nodes: list[SJTreeNode], root: int,
                 window: int):
        if window <= 0:
            raise SpecError("window must be positive")
        self.query = query
        self.nodes = nodes
        self.root = root
        self.window = window
        self.leaves = self._collect_leaves(root)

    def _collect_leaves(self, nid: int) -> list[int]:
        node = self.nodes[nid]
        if node.is_leaf:
            return [nid]
        out = []
        if node.left_child is not None:
            out.extend(self._collect_leaves(node.left_child))
        if node.right_child is not None:
            out.extend(self._collect_leaves(node.right_child))
        return out

    def node(self, nid: int) -> SJTreeNode:
        return self.nodes[nid]

    def leaf_primitives(self) -> list[tuple[int, QuerySubgraph]]:
        """Leaf ids with their search primitives, left to right."""
        return [(nid, self.nodes[nid].query_subgraph) for nid in self.leaves]

    def internal_nodes(self) -> list[SJTreeNode]:
        return [n for n in self.nodes if not n.is_leaf]

    def ordering_constraints(self) -> list[tuple[frozenset[int], frozenset[int]]]:
        """(left edge set, right edge set) pairs for every ordered join.

        A complete match satisfies the tree's temporal semantics iff for each
        pair the latest timestamp mapped from the left set strictly precedes
        the earliest timestamp mapped from the right set.
        """
        out = []
        for n in self.internal_nodes():
            if n.ordered_join:
                left = self.nodes[n.left_child].query_subgraph.edge_indexes
                right = self.nodes[n.right_child].query_subgraph.edge_indexes
                out.append((left, right))
        return out


def build_sjtree(query: QueryGraph, leaf_edge_sets: list[list[int]],
                 joins: list[tuple[int, int, bool | None]], window: int) -> SJTree:
    """Assemble a tree from leaf edge lists and (left, right, ordered) joins.

    Join children are referenced by node id: leaves get ids 0..L-1 in the
    given order, each join produces the next id.  Internal query subgraphs are
    the union of the children's, cut subgraphs their intersection; an ordered
    flag of None defaults to True exactly when both children contain an event
    vertex.  The result is validated; a failing report raises SpecError.
    """
    nodes: list[SJTreeNode] = []
    for edge_idxs in leaf_edge_sets:
        if not edge_idxs:
            raise SpecError("leaf with no edges")
        nodes.append(SJTreeNode(len(nodes), query.subgraph_from_edges(edge_idxs)))
    has_parent: set[int] = set()
    for left, right, ordered in joins:
        for child in (left, right):
            if child < 0 or child >= len(nodes):
                raise SpecError(f"join references unknown node {child}")
            if child in has_parent:
                raise SpecError(f"node {child} already has a parent")
        if left == right:
            raise SpecError("join children must be distinct")
        sub = nodes[left].query_subgraph.union(nodes[right].query_subgraph)
        node = SJTreeNode(len(nodes), sub)
        node.left_child, node.right_child = left, right
        node.cut_subgraph = nodes[left].query_subgraph.intersection(
            nodes[right].query_subgraph)
        node.cut_qids = node.cut_subgraph.sorted_qids()
        if ordered is None:
            node.ordered_join = (nodes[left].query_subgraph.has_event_vertex()
                                 and nodes[right].query_subgraph.has_event_vertex())
        else:
            node.ordered_join = ordered
        nodes[left].parent = nodes[right].parent = node.nid
        nodes[left].sibling, nodes[right].sibling = right, left
        nodes[left].is_left_child = True
        nodes[right].is_left_child = False
        has_parent.update((left, right))
        nodes.append(node)
    roots = [n.nid for n in nodes if n.parent is None]
    if len(roots) != 1:
        raise SpecError(f"tree must have exactly one root, found {len(roots)}")
    for n in nodes:
        if n.is_leaf:
            n.etype_set = frozenset(qe.etype for qe in n.query_subgraph.edges())
    tree = SJTree(query, nodes, roots[0], window)
    report = validate_sjtree(tree)
    if not report.ok:
        raise SpecError(f"invalid join tree: {report.summary()}")
    return tree


def validate_sjtree(tree: SJTree) -> ValidationReport:
    """Check the structural contract of a join tree.

    Verifies that the root covers the whole query, that every internal node is
    the union of its children and its cut their intersection, and that the
    leaf edge sets partition the query's edges.  Failures are report entries,
    not exceptions.
    """
    report = ValidationReport()
    full = tree.query.full_subgraph()
    root = tree.nodes[tree.root]
    if not root.query_subgraph.same_as(full):
        report.add("P1", tree.root, "root subgraph differs from the query graph")
    for n in tree.nodes:
        if n.is_leaf:
            if n.cut_subgraph is not None:
                report.add("structure", n.nid, "leaf carries a cut subgraph")
            if not n.query_subgraph.edge_indexes:
                report.add("leaf-edges", n.nid, "leaf primitive has no edges")
            continue
        if n.left_child is None or n.right_child is None:
            report.add("structure", n.nid, "internal node lacks two children")
            continue
        left = tree.nodes[n.left_child].query_subgraph
        right = tree.nodes[n.right_child].query_subgraph
        if not n.query_subgraph.same_as(left.union(right)):
            report.add("P2", n.nid, "subgraph is not the union of its children")
        if n.cut_subgraph is None:
            report.add("P4", n.nid, "internal node lacks a cut subgraph")
        elif not n.cut_subgraph.same_as(left.intersection(right)):
            report.add("P4", n.nid, "cut differs from the children's intersection")
    covered: dict[int, int] = {}
    for nid in tree.leaves:
        for i in tree.nodes[nid].query_subgraph.edge_indexes:
            covered[i] = covered.get(i, 0) + 1
    for qe in tree.query.edges:
        count = covered.get(qe.index, 0)
        if count != 1:
            report.add("leaf-partition", None,
                       f"query edge {qe.index} covered by {count} leaves")
    return report


def with_label(query: QueryGraph, tree: SJTree, qid: str, label: str) -> tuple[QueryGraph, SJTree]:
    """Rebuild a query/tree pair with one vertex's label replaced."""
    if qid not in query.vertices:
        raise SpecError(f"unknown query vertex {qid!r}")
    vertices = [
        QueryVertex(v.qid, v.vtype, label if v.qid == qid else v.label, v.is_event)
        for v in query.vertices.values()
    ]
    edges = [(qe.u, qe.v, qe.etype) for qe in query.edges]
    new_query = QueryGraph(query.schema, vertices, edges)
    leaf_sets = [sorted(tree.nodes[nid].query_subgraph.edge_indexes)
                 for nid in tree.leaves]
    # reconstruct joins bottom-up in original node-id order
    id_map = {nid: i for i, nid in enumerate(tree.leaves)}
    joins = []
    for n in sorted(tree.internal_nodes(), key=lambda n: n.nid):
        joins.append((id_map[n.left_child], id_map[n.right_child], n.ordered_join))
        id_map[n.nid] = len(id_map)
    return new_query, build_sjtree(new_query, leaf_sets, joins, tree.window)
