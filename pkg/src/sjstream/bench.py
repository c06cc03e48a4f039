"""Batched timing harness and the degree-sweep protocol.

Timing covers query processing only (graph update, local search, tree update,
pruning); parsing and match serialization happen outside the clock.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass, field

from .engine import ContinuousQueryEngine, EngineConfig, MatchRecord
from .errors import InsufficientLabels
from .graph import DynamicGraph, TemporalEdge
from .query import QueryGraph, SJTree, with_label

METRICS_FIELDS = ("batch_index", "edges_processed", "batch_seconds",
                  "cumulative_matches", "stored_per_node", "peak_stored")


@dataclass(slots=True)
class BatchRow:
    batch_index: int
    edges_processed: int
    batch_seconds: float
    cumulative_matches: int
    stored_per_node: dict[int, int]
    peak_stored: int

    def stored_repr(self) -> str:
        return ";".join(f"{nid}:{n}" for nid, n in sorted(self.stored_per_node.items()))


@dataclass(slots=True)
class RunResult:
    rows: list[BatchRow] = field(default_factory=list)
    records: list[MatchRecord] = field(default_factory=list)
    total_seconds: float = 0.0
    emitted: int = 0
    peak_stored: int = 0

    @property
    def peak_batch_seconds(self) -> float:
        return max((r.batch_seconds for r in self.rows), default=0.0)

    @property
    def edges_per_second(self) -> float:
        edges = self.rows[-1].edges_processed if self.rows else 0
        return edges / self.total_seconds if self.total_seconds > 0 else 0.0


def run_stream(engine, edges: list[TemporalEdge], batch_size: int = 1000,
               keep_records: bool = True, matches_fh=None) -> RunResult:
    """Drive an engine over a parsed edge list in timed batches."""
    result = RunResult()
    total = 0
    for start in range(0, len(edges), batch_size):
        batch = edges[start:start + batch_size]
        t0 = time.perf_counter()
        records = engine.process_batch(batch)
        elapsed = time.perf_counter() - t0
        total += len(batch)
        result.total_seconds += elapsed
        result.emitted += len(records)
        if keep_records:
            result.records.extend(records)
        if matches_fh is not None:
            for rec in records:
                matches_fh.write(rec.line() + "\n")
        peak = getattr(getattr(engine, "store", None), "peak_stored", 0)
        result.rows.append(BatchRow(
            batch_index=len(result.rows),
            edges_processed=total,
            batch_seconds=elapsed,
            cumulative_matches=result.emitted,
            stored_per_node=engine.stored_counts(),
            peak_stored=peak,
        ))
        result.peak_stored = max(result.peak_stored, peak)
    return result


def write_metrics(rows: list[BatchRow], fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(METRICS_FIELDS)
    for r in rows:
        writer.writerow((r.batch_index, r.edges_processed,
                         f"{r.batch_seconds:.6f}", r.cumulative_matches,
                         r.stored_repr(), r.peak_stored))


# ---------------------------------------------------------------------------
# degree sweep
# ---------------------------------------------------------------------------

@dataclass(slots=True)
class SweepRow:
    bin_index: int
    label: str
    degree: int
    median_batch_seconds: float
    median_edge_seconds: float


SWEEP_FIELDS = ("bin_index", "label", "degree",
                "median_batch_seconds", "median_edge_seconds")


def select_bin_labels(degrees: dict[str, int], bins: int,
                      per_bin: int) -> list[tuple[int, str, int]]:
    """Split the degree range into equal intervals and pick the labels whose
    degree sits closest to each interval's center.

    Raises InsufficientLabels for an interval containing no labels at all.
    """
    if not degrees:
        raise InsufficientLabels("no labeled vertices to sweep over")
    lo = min(degrees.values())
    hi = max(degrees.values())
    width = (hi - lo) / bins if hi > lo else 1.0
    chosen: list[tuple[int, str, int]] = []
    for b in range(bins):
        low = lo + b * width
        high = lo + (b + 1) * width
        members = [
            (label, deg) for label, deg in degrees.items()
            if (low <= deg < high) or (b == bins - 1 and deg == hi)
        ]
        if not members:
            raise InsufficientLabels(f"degree bin {b} [{low:.1f}, {high:.1f}) is empty")
        center = low + width / 2
        members.sort(key=lambda item: (abs(item[1] - center), item[0]))
        for label, deg in members[:per_bin]:
            chosen.append((b, label, deg))
    return chosen


def degree_sweep(query: QueryGraph, tree: SJTree, label_qid: str,
                 edges: list[TemporalEdge], bins: int = 10, per_bin: int = 5,
                 batch_size: int = 1000,
                 prune_interval: int | None = 10_000) -> list[SweepRow]:
    """Instantiate the template per selected label and time each full run."""
    if label_qid not in query.vertices:
        raise InsufficientLabels(f"template has no vertex {label_qid!r}")
    vt = query.vertex(label_qid).vtype
    probe = DynamicGraph(query.schema)
    for e in edges:
        probe.add_edge(e)
    degrees: dict[str, int] = {}
    for vid in probe.vertices_of_type(vt):
        label = probe.vertex(vid).label
        if label:
            degrees[label] = probe.degree(vid)
    rows: list[SweepRow] = []
    for bin_index, label, degree in select_bin_labels(degrees, bins, per_bin):
        run_query, run_tree = with_label(query, tree, label_qid, label)
        graph = DynamicGraph(query.schema)
        engine = ContinuousQueryEngine(
            graph, run_tree,
            EngineConfig(window=run_tree.window,
                         prune_interval_edges=prune_interval))
        result = run_stream(engine, edges, batch_size, keep_records=False)
        med = statistics.median(r.batch_seconds for r in result.rows)
        med_edge = statistics.median(
            r.batch_seconds / (r.edges_processed - prev)
            for r, prev in zip(result.rows,
                               [0] + [x.edges_processed for x in result.rows[:-1]])
        )
        rows.append(SweepRow(bin_index, label, degree, med, med_edge))
    return rows


def write_sweep(rows: list[SweepRow], fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(SWEEP_FIELDS)
    for r in rows:
        writer.writerow((r.bin_index, r.label, r.degree,
                         f"{r.median_batch_seconds:.6f}",
                         f"{r.median_edge_seconds:.6f}"))
