"""Per-tree-node storage of partial matches.

Each node owns a multi-valued hash table keyed by the match's projection onto
the parent's cut subgraph.  Expiry is lazy (filtered at lookup against the
store's current time) with bulk pruning layered on top, so lookup results
never depend on the prune cadence.
"""

from __future__ import annotations

from .errors import DomainMismatch, DuplicateMatch
from .query import QuerySubgraph

# key for matches whose parent cut is empty: every sibling pair is join-compatible
UNIVERSAL_KEY = b"u"


class PartialMatch:
    """Injective mapping of one tree node's query subgraph into the data graph.

    ``vertex_map`` maps query vertex ids to data vertex ids, ``edge_map`` maps
    query edge indexes to data edge ids.  The timestamp interval covers the
    mapped data edges.
    """

    __slots__ = ("node", "vertex_map", "edge_map", "t_low", "t_high", "signature")

    def __init__(self, node: int, vertex_map: dict[str, str],
                 edge_map: dict[int, int], t_low: int, t_high: int):
        self.node = node
        self.vertex_map = vertex_map
        self.edge_map = edge_map
        self.t_low = t_low
        self.t_high = t_high
        self.signature = (
            tuple(sorted(edge_map.values())),
            tuple(sorted(vertex_map.items())),
        )

    @property
    def span(self) -> int:
        return self.t_high - self.t_low

    def check_invariants(self, window: int) -> None:
        """Assert injectivity and window discipline; used by tests."""
        assert len(set(self.vertex_map.values())) == len(self.vertex_map)
        assert len(set(self.edge_map.values())) == len(self.edge_map)
        assert self.t_low <= self.t_high
        assert self.span < window

    def __repr__(self):
        return (f"PartialMatch(node={self.node}, v={self.vertex_map}, "
                f"e={self.edge_map}, [{self.t_low},{self.t_high}])")


def make_join_key(cut: QuerySubgraph | None, m: PartialMatch) -> bytes:
    """Canonical key of a match's projection onto a cut subgraph.

    Equal keys hold exactly when the projected vertex assignments agree; an
    empty cut maps every match to the universal key.
    """
    if cut is None or not cut.vertex_ids:
        return UNIVERSAL_KEY
    try:
        parts = [m.vertex_map[q] for q in cut.sorted_qids()]
    except KeyError as exc:
        raise DomainMismatch(
            f"cut vertex {exc.args[0]!r} not mapped by match at node {m.node}"
        ) from None
    return b"k" + "\x1f".join(parts).encode()


def join_key_for(cut_qids: tuple[str, ...], vertex_map: dict[str, str]) -> bytes:
    """Fast-path variant of make_join_key for a precomputed cut qid order."""
    if not cut_qids:
        return UNIVERSAL_KEY
    return b"k" + "\x1f".join(vertex_map[q] for q in cut_qids).encode()


class MatchStore:
    """Match tables for every node of one join tree.

    Lookups filter out matches whose earliest edge has slid out of the
    retention horizon (window plus disorder slack behind ``now``); pruning
    removes them for good.  Single-writer, like the engine that owns it.
    """

    def __init__(self, node_ids, window: int, disorder_slack: int = 0):
        if window <= 0:
            raise ValueError("window must be positive")
        self._tables: dict[int, dict[bytes, list[PartialMatch]]] = {
            nid: {} for nid in node_ids
        }
        self._signatures: dict[int, set] = {nid: set() for nid in node_ids}
        self.window = window
        self.retention = window + disorder_slack
        self.now = 0
        self.total_stored = 0
        self.peak_stored = 0

    def expiry_cutoff(self) -> int:
        return self.now - self.retention

    def advance(self, now: int) -> None:
        if now > self.now:
            self.now = now

    def contains(self, node: int, signature) -> bool:
        return signature in self._signatures[node]

    def insert(self, node: int, key: bytes, m: PartialMatch) -> None:
        """Store a match under its join key; DuplicateMatch on a repeat signature."""
        sigs = self._signatures[node]
        if m.signature in sigs:
            raise DuplicateMatch(f"match already stored at node {node}")
        sigs.add(m.signature)
        self._tables[node].setdefault(key, []).append(m)
        self.total_stored += 1
        if self.total_stored > self.peak_stored:
            self.peak_stored = self.total_stored

    def lookup(self, node: int, key: bytes) -> list[PartialMatch]:
        """Non-expired matches stored at a node under a key."""
        bucket = self._tables[node].get(key)
        if not bucket:
            return []
        cutoff = self.expiry_cutoff()
        return [m for m in bucket if m.t_low >= cutoff]

    def prune(self, current_time: int | None = None) -> int:
        """Drop every match whose t_low precedes the retention horizon."""
        if current_time is not None:
            self.advance(current_time)
        cutoff = self.expiry_cutoff()
        removed = 0
        for nid, table in self._tables.items():
            sigs = self._signatures[nid]
            for key in list(table):
                bucket = table[key]
                kept = [m for m in bucket if m.t_low >= cutoff]
                if len(kept) != len(bucket):
                    for m in bucket:
                        if m.t_low < cutoff:
                            sigs.discard(m.signature)
                            removed += 1
                    if kept:
                        table[key] = kept
                    else:
                        del table[key]
        self.total_stored -= removed
        return removed

    def stored_counts(self) -> dict[int, int]:
        """Live match count per node (includes expired-but-unpruned entries)."""
        return {
            nid: sum(len(b) for b in table.values())
            for nid, table in self._tables.items()
        }

    def all_matches(self, node: int) -> list[PartialMatch]:
        out = []
        for bucket in self._tables[node].values():
            out.extend(bucket)
        return out
