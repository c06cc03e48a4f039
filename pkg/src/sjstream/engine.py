"""The continuous query loop.

Every arriving edge updates the graph, is tried as an anchor for each leaf
primitive, and every resulting partial match is propagated bottom-up through
the join tree: it joins against the sibling's table under the parent's cut
key, successful joins recurse upward, and a join at the root emits a complete
match.  A match is stored at its node only after its join attempts, and the
root stores nothing.

Temporal semantics: an ordered join accepts (left, right) only when the left
match's latest timestamp strictly precedes the right match's earliest one, and
every stored or emitted match spans strictly less than the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import hashlib

from .graph import DynamicGraph, TemporalEdge
from .matchstore import MatchStore, PartialMatch, join_key_for
from .query import SJTree
from .search import local_search


@dataclass(slots=True)
class MatchRecord:
    """An emitted complete match."""

    vertex_map: dict[str, str]
    edge_map: dict[int, int]
    t_low: int
    t_high: int
    emitted_at: int
    signature: tuple

    @property
    def span(self) -> int:
        return self.t_high - self.t_low

    def signature_hex(self) -> str:
        return hashlib.sha1(repr(self.signature).encode()).hexdigest()[:16]

    def line(self) -> str:
        pairs = ",".join(f"{q}={v}" for q, v in sorted(self.vertex_map.items()))
        return f"{self.signature_hex()}\t{pairs}\t{self.t_low}\t{self.t_high}"


def record_signature(vertex_map: dict[str, str], edge_map: dict[int, int]) -> tuple:
    return (tuple(sorted(edge_map.values())), tuple(sorted(vertex_map.items())))


@dataclass(slots=True)
class EngineConfig:
    """Runtime knobs; window is mandatory and strictly positive."""

    window: int
    prune_interval_edges: int | None = 10_000
    disorder_slack: int = 0

    def __post_init__(self):
        if self.window <= 0:
            raise ValueError("window must be positive")
        if self.prune_interval_edges is not None and self.prune_interval_edges <= 0:
            raise ValueError("prune_interval_edges must be positive or None")


@dataclass(slots=True)
class EngineStats:
    edges_processed: int = 0
    leaf_matches: int = 0
    join_attempts: int = 0
    join_successes: int = 0
    emitted: int = 0
    duplicate_matches: int = 0
    duplicate_emissions: int = 0
    pruned_matches: int = 0
    node_inserts: dict[int, int] = field(default_factory=dict)


class ContinuousQueryEngine:
    """One registered query over one dynamic graph; single-threaded."""

    def __init__(self, graph: DynamicGraph, tree: SJTree,
                 config: EngineConfig | None = None, sink=None):
        self.graph = graph
        self.tree = tree
        self.config = config or EngineConfig(window=tree.window,
                                             disorder_slack=graph.disorder_slack)
        self.sink = sink
        self.store = MatchStore([n.nid for n in tree.nodes],
                                self.config.window,
                                self.config.disorder_slack)
        self.stats = EngineStats()
        self._emitted_signatures: set = set()
        self._edges_since_prune = 0
        self._leaf_info = tree.leaf_primitives()

    # -- public API ---------------------------------------------------------

    def process_batch(self, edges) -> list[MatchRecord]:
        """Run the continuous query over a batch of edges (Algorithm 1)."""
        out: list[MatchRecord] = []
        for e in edges:
            out.extend(self.process_edge(e))
        return out

    def process_edge(self, e: TemporalEdge) -> list[MatchRecord]:
        stored = self.graph.add_edge(e)
        self.stats.edges_processed += 1
        self.store.advance(self.graph.current_time)
        window = self.config.window
        min_ts = stored.timestamp - window + 1
        anchor_et = self.graph.schema.edge_type_id(stored.etype)
        emitted: list[MatchRecord] = []
        for nid, primitive in self._leaf_info:
            if anchor_et not in self.tree.node(nid).etype_set:
                continue
            for vmap, emap, t_low, t_high in local_search(
                    self.graph, primitive, stored, min_ts):
                if t_high - t_low >= window:
                    continue
                m = PartialMatch(nid, vmap, emap, t_low, t_high)
                self.stats.leaf_matches += 1
                emitted.extend(self.update_sjtree(nid, m))
        self._edges_since_prune += 1
        interval = self.config.prune_interval_edges
        if interval is not None and self._edges_since_prune >= interval:
            self.prune_window(self.graph.current_time)
            self._edges_since_prune = 0
        return emitted

    def update_sjtree(self, nid: int, m: PartialMatch) -> list[MatchRecord]:
        """Propagate one partial match upward (Algorithm 2)."""
        node = self.tree.node(nid)
        if nid == self.tree.root:
            # degenerate single-node tree: a leaf match is already complete
            rec = self._emit(m)
            return [rec] if rec else []
        if self.store.contains(nid, m.signature):
            self.stats.duplicate_matches += 1
            return []
        parent = self.tree.node(node.parent)
        key = join_key_for(parent.cut_qids, m.vertex_map)
        emitted: list[MatchRecord] = []
        for sibling_match in self.store.lookup(node.sibling, key):
            if node.is_left_child:
                joined = self.join_matches(parent, m, sibling_match)
            else:
                joined = self.join_matches(parent, sibling_match, m)
            if joined is None:
                continue
            if parent.nid == self.tree.root:
                rec = self._emit(joined)
                if rec:
                    emitted.append(rec)
            else:
                emitted.extend(self.update_sjtree(parent.nid, joined))
        self.store.insert(nid, key, m)
        self.stats.node_inserts[nid] = self.stats.node_inserts.get(nid, 0) + 1
        return emitted

    def join_matches(self, parent, left: PartialMatch,
                     right: PartialMatch) -> PartialMatch | None:
        """Merge two sibling matches; None is a normal reject.

        Rejects on: ordered-join violation, merged span at or beyond the
        window, non-injective merged vertex map, non-injective edge map.
        """
        self.stats.join_attempts += 1
        if parent.ordered_join and left.t_high >= right.t_low:
            return None
        t_low = left.t_low if left.t_low < right.t_low else right.t_low
        t_high = left.t_high if left.t_high > right.t_high else right.t_high
        if t_high - t_low >= self.config.window:
            return None
        vmap = dict(left.vertex_map)
        vmap.update(right.vertex_map)
        if len(set(vmap.values())) != len(vmap):
            return None
        emap = dict(left.edge_map)
        emap.update(right.edge_map)
        if len(set(emap.values())) != len(emap):
            return None
        self.stats.join_successes += 1
        return PartialMatch(parent.nid, vmap, emap, t_low, t_high)

    def prune_window(self, current_time: int) -> int:
        """Drop stored partial matches that slid out of the window."""
        removed = self.store.prune(current_time)
        self.stats.pruned_matches += removed
        return removed

    @property
    def emitted_count(self) -> int:
        return self.stats.emitted

    def stored_counts(self) -> dict[int, int]:
        return self.store.stored_counts()

    # -- internals ----------------------------------------------------------

    def _emit(self, m: PartialMatch) -> MatchRecord | None:
        if m.t_high - m.t_low >= self.config.window:
            return None
        sig = record_signature(m.vertex_map, m.edge_map)
        if sig in self._emitted_signatures:
            self.stats.duplicate_emissions += 1
            return None
        self._emitted_signatures.add(sig)
        rec = MatchRecord(dict(m.vertex_map), dict(m.edge_map),
                          m.t_low, m.t_high, self.graph.current_time, sig)
        self.stats.emitted += 1
        if self.sink is not None:
            self.sink(rec)
        return rec
