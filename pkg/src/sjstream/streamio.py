"""Edge-stream and query-spec serialization, plus the synthetic generator.

Edge stream format (one edge per line, pipe-delimited, 8 fields):

    timestamp|src_id|src_type|src_label|dst_id|dst_type|dst_label|edge_type

Label fields may be empty (unlabeled); everything else is mandatory.  Lines
starting with ``#`` are headers/comments; writers emit ``#sjstream-edges v1``.

Query spec format (token-based lines, ``#`` comments, shell-style quoting):

    #sjstream-query v1
    window 10
    vertex <qid> <vtype> [event] [label=<text>]
    edge <eid> <qid> <qid> <etype>
    leaf <name> <eid> [<eid> ...]
    join <name> <child> <child> [ordered|unordered]

Leaves appear left to right in declaration order; join children may be leaf or
join names.  Cut subgraphs are derived, never declared.  Omitting ``window``
or failing join-tree validation is a SpecError.

Generator config is a flat ``key = value`` file; see GeneratorConfig.
"""

from __future__ import annotations

import bisect
import io
import math
import random
import shlex
from dataclasses import dataclass, field
from pathlib import Path

from .engine import EngineConfig
from .errors import ConfigError, ParseError, SpecError
from .graph import Schema, TemporalEdge
from .query import QueryGraph, QueryVertex, SJTree, build_sjtree

EDGE_HEADER = "#sjstream-edges v1"
QUERY_HEADER = "#sjstream-query v1"


def _open_lines(source):
    """Accept a path, a file-like object, or an iterable of lines."""
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8"), True
    if hasattr(source, "read") or hasattr(source, "__iter__"):
        return source, False
    raise TypeError(f"unsupported source {type(source)!r}")


# ---------------------------------------------------------------------------
# edge streams
# ---------------------------------------------------------------------------

def parse_edge_stream(source):
    """Yield TemporalEdge records in file order.

    Malformed lines raise ParseError with their line number and the column of
    the offending field.
    """
    fh, owned = _open_lines(source)
    try:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("|")
            if len(fields) != 8:
                raise ParseError(lineno, 1, f"expected 8 fields, got {len(fields)}")
            cols = []
            pos = 1
            for f in fields:
                cols.append(pos)
                pos += len(f) + 1
            ts_s, src, src_type, src_label, dst, dst_type, dst_label, etype = fields
            try:
                ts = int(ts_s)
            except ValueError:
                raise ParseError(lineno, cols[0], f"bad timestamp {ts_s!r}") from None
            if ts < 0:
                raise ParseError(lineno, cols[0], f"negative timestamp {ts}")
            for value, col, name in ((src, cols[1], "src_id"),
                                     (src_type, cols[2], "src_type"),
                                     (dst, cols[4], "dst_id"),
                                     (dst_type, cols[5], "dst_type"),
                                     (etype, cols[7], "edge_type")):
                if not value:
                    raise ParseError(lineno, col, f"empty {name} field")
            yield TemporalEdge(ts, src, dst, etype, src_type, src_label,
                               dst_type, dst_label)
    finally:
        if owned:
            fh.close()


def format_edge(e: TemporalEdge) -> str:
    return "|".join((str(e.timestamp), e.src, e.src_type, e.src_label,
                     e.dst, e.dst_type, e.dst_label, e.etype))


def write_edge_stream(edges, dest) -> int:
    """Write edges in stream format; returns the number of edges written."""
    fh, owned = (open(dest, "w", encoding="utf-8"), True) \
        if isinstance(dest, (str, Path)) else (dest, False)
    count = 0
    try:
        fh.write(EDGE_HEADER + "\n")
        for e in edges:
            fh.write(format_edge(e) + "\n")
            count += 1
    finally:
        if owned:
            fh.close()
    return count


# ---------------------------------------------------------------------------
# query specs
# ---------------------------------------------------------------------------

def parse_query_spec(source, schema: Schema | None = None
                     ) -> tuple[QueryGraph, SJTree, EngineConfig]:
    """Parse and validate a query spec; returns the query, its join tree and
    an engine config carrying the declared window."""
    if isinstance(source, str) and "\n" in source:
        fh, owned = io.StringIO(source), False
    else:
        fh, owned = _open_lines(source)
    schema = schema if schema is not None else Schema()
    window: int | None = None
    vertices: list[tuple[str, str, str, bool]] = []
    edges: list[tuple[str, str, str, str]] = []
    leaves: list[tuple[str, list[str]]] = []
    joins: list[tuple[str, str, str, bool | None]] = []
    names: set[str] = set()

    def fail(lineno, msg):
        raise SpecError(f"line {lineno}: {msg}")

    try:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                tokens = shlex.split(line)
            except ValueError as exc:
                fail(lineno, f"unbalanced quoting: {exc}")
            directive, args = tokens[0], tokens[1:]
            if directive == "window":
                if len(args) != 1 or not args[0].isdigit():
                    fail(lineno, "window takes one non-negative integer")
                window = int(args[0])
            elif directive == "vertex":
                if len(args) < 2:
                    fail(lineno, "vertex takes: qid vtype [event] [label=...]")
                qid, vtype = args[0], args[1]
                label, is_event = "", False
                for extra in args[2:]:
                    if extra == "event":
                        is_event = True
                    elif extra.startswith("label="):
                        label = extra[len("label="):]
                    else:
                        fail(lineno, f"unknown vertex option {extra!r}")
                vertices.append((qid, vtype, label, is_event))
            elif directive == "edge":
                if len(args) != 4:
                    fail(lineno, "edge takes: eid qid qid etype")
                if args[0] in names:
                    fail(lineno, f"duplicate name {args[0]!r}")
                names.add(args[0])
                edges.append(tuple(args))
            elif directive == "leaf":
                if len(args) < 2:
                    fail(lineno, "leaf takes: name eid [eid ...]")
                if args[0] in names:
                    fail(lineno, f"duplicate name {args[0]!r}")
                names.add(args[0])
                leaves.append((args[0], args[1:]))
            elif directive == "join":
                if len(args) not in (3, 4):
                    fail(lineno, "join takes: name child child [ordered|unordered]")
                if args[0] in names:
                    fail(lineno, f"duplicate name {args[0]!r}")
                names.add(args[0])
                ordered: bool | None = None
                if len(args) == 4:
                    if args[3] == "ordered":
                        ordered = True
                    elif args[3] == "unordered":
                        ordered = False
                    else:
                        fail(lineno, f"unknown join option {args[3]!r}")
                joins.append((args[0], args[1], args[2], ordered))
            else:
                fail(lineno, f"unknown directive {directive!r}")
    finally:
        if owned:
            fh.close()

    if window is None:
        raise SpecError("spec does not declare a window (mandatory)")
    if not vertices:
        raise SpecError("spec declares no vertices")
    if not leaves:
        raise SpecError("spec declares no leaves")

    vtype_of = {qid: vtype for qid, vtype, _, _ in vertices}
    for name, u, v, etype in edges:
        if u not in vtype_of or v not in vtype_of:
            raise SpecError(f"edge {name!r} references unknown vertex")
        if vtype_of[u] == vtype_of[v]:
            raise SpecError(f"edge {name!r} connects two {vtype_of[u]!r} vertices")
        schema.register_edge_type(etype, vtype_of[u], vtype_of[v])

    try:
        qvertices = [QueryVertex(qid, schema.vertex_type_id(vtype), label, ev)
                     for qid, vtype, label, ev in vertices]
        qedges = [(u, v, schema.edge_type_id(etype)) for _, u, v, etype in edges]
        query = QueryGraph(schema, qvertices, qedges)
    except SpecError:
        raise
    edge_index = {name: i for i, (name, *_rest) in enumerate(edges)}

    node_ids: dict[str, int] = {}
    leaf_sets: list[list[int]] = []
    for name, eids in leaves:
        idxs = []
        for eid in eids:
            if eid not in edge_index:
                raise SpecError(f"leaf {name!r} references unknown edge {eid!r}")
            idxs.append(edge_index[eid])
        node_ids[name] = len(leaf_sets)
        leaf_sets.append(idxs)
    join_specs: list[tuple[int, int, bool | None]] = []
    next_id = len(leaf_sets)
    for name, left, right, ordered in joins:
        for child in (left, right):
            if child not in node_ids:
                raise SpecError(f"join {name!r} references unknown node {child!r}")
        join_specs.append((node_ids[left], node_ids[right], ordered))
        node_ids[name] = next_id
        next_id += 1

    tree = build_sjtree(query, leaf_sets, join_specs, window)
    return query, tree, EngineConfig(window=window)


def write_query_spec(query: QueryGraph, tree: SJTree, dest) -> None:
    """Serialize a query/tree pair back to spec format."""
    fh, owned = (open(dest, "w", encoding="utf-8"), True) \
        if isinstance(dest, (str, Path)) else (dest, False)
    schema = query.schema
    try:
        fh.write(QUERY_HEADER + "\n")
        fh.write(f"window {tree.window}\n")
        for qv in query.vertices.values():
            parts = [f"vertex {qv.qid} {schema.vertex_type_name(qv.vtype)}"]
            if qv.is_event:
                parts.append("event")
            if qv.label:
                parts.append(f"label={shlex.quote(qv.label)}")
            fh.write(" ".join(parts) + "\n")
        for qe in query.edges:
            fh.write(f"edge E{qe.index} {qe.u} {qe.v} "
                     f"{schema.edge_type_name(qe.etype)}\n")
        for i, nid in enumerate(tree.leaves):
            eids = " ".join(f"E{j}" for j in
                            sorted(tree.node(nid).query_subgraph.edge_indexes))
            fh.write(f"leaf L{i} {eids}\n")
        leaf_names = {nid: f"L{i}" for i, nid in enumerate(tree.leaves)}
        for n in sorted(tree.internal_nodes(), key=lambda n: n.nid):
            left = leaf_names[n.left_child]
            right = leaf_names[n.right_child]
            name = f"J{n.nid}"
            leaf_names[n.nid] = name
            flag = "ordered" if n.ordered_join else "unordered"
            fh.write(f"join {name} {left} {right} {flag}\n")
    finally:
        if owned:
            fh.close()


# ---------------------------------------------------------------------------
# synthetic stream generator
# ---------------------------------------------------------------------------

@dataclass(slots=True)
class GeneratorConfig:
    """Parameters of the synthetic k-partite temporal stream.

    Every event occupies one slot on a discrete clock (``events_per_tick``
    events share a tick; timestamps advance by ``timestamp_step`` per tick)
    and connects a fresh-or-recycled event vertex to one sampled feature
    vertex per fanout slot of every declared edge type.  Feature popularity
    follows a rank-Zipf law; ``planted`` features receive a fixed number of
    edges at evenly spaced event indexes, which plants known hot spots across
    the degree range.  The seed fixes the stream byte-exactly.
    """

    seed: int = 0
    total_edges: int = 1000
    event_type: str = "article"
    vertex_types: list[tuple[str, int]] = field(default_factory=list)
    edge_types: list[tuple[str, str, str]] = field(default_factory=list)
    fanout: dict[str, int] = field(default_factory=dict)
    zipf_exponent: float = 0.0
    max_feature_degree: int = 0
    timestamp_step: int = 1
    events_per_tick: int = 1
    start_time: int = 1
    planted: dict[str, list[int]] = field(default_factory=dict)

    def validate(self) -> None:
        if self.total_edges <= 0:
            raise ConfigError("total_edges must be positive")
        if self.zipf_exponent < 0:
            raise ConfigError("zipf_exponent must be non-negative")
        if self.timestamp_step <= 0 or self.events_per_tick <= 0:
            raise ConfigError("timestamp_step and events_per_tick must be positive")
        if self.start_time < 0:
            raise ConfigError("start_time must be non-negative")
        names = [n for n, _ in self.vertex_types]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate vertex type")
        if self.event_type not in names:
            raise ConfigError(f"event_type {self.event_type!r} not in vertex_types")
        for name, pop in self.vertex_types:
            if pop <= 0:
                raise ConfigError(f"population of {name!r} must be positive")
        if not self.edge_types:
            raise ConfigError("no edge types declared")
        for name, a, b in self.edge_types:
            if a not in names or b not in names:
                raise ConfigError(f"edge type {name!r} references unknown vertex type")
            if self.event_type not in (a, b):
                raise ConfigError(f"edge type {name!r} does not touch the event type")
            if a == b:
                raise ConfigError(f"edge type {name!r} is unary")
        for et, n in self.fanout.items():
            if et not in {name for name, _, _ in self.edge_types}:
                raise ConfigError(f"fanout for unknown edge type {et!r}")
            if n <= 0:
                raise ConfigError("fanout must be positive")
        for vt, degs in self.planted.items():
            if vt not in names or vt == self.event_type:
                raise ConfigError(f"planted degrees for invalid type {vt!r}")
            if any(d <= 0 for d in degs):
                raise ConfigError("planted degrees must be positive")


def parse_generator_config(source) -> GeneratorConfig:
    """Read a flat key=value config file (``planted_<vtype>`` keys allowed)."""
    if isinstance(source, str) and ("\n" in source or "=" in source):
        fh, owned = io.StringIO(source), False
    else:
        fh, owned = _open_lines(source)
    values: dict[str, str] = {}
    try:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            values[key] = val
    finally:
        if owned:
            fh.close()

    cfg = GeneratorConfig()
    planted: dict[str, list[int]] = {}
    try:
        for key, val in values.items():
            if key == "seed":
                cfg.seed = int(val)
            elif key == "total_edges":
                cfg.total_edges = int(val)
            elif key == "event_type":
                cfg.event_type = val
            elif key == "vertex_types":
                cfg.vertex_types = [
                    (name.strip(), int(pop))
                    for name, _, pop in (item.partition(":")
                                         for item in val.split(","))
                ]
            elif key == "edge_types":
                triples = []
                for item in val.split(","):
                    parts = item.strip().split(":")
                    if len(parts) != 3:
                        raise ConfigError(f"bad edge_types entry {item!r}")
                    triples.append((parts[0], parts[1], parts[2]))
                cfg.edge_types = triples
            elif key == "fanout":
                cfg.fanout = {
                    name.strip(): int(n)
                    for name, _, n in (item.partition(":")
                                       for item in val.split(","))
                }
            elif key == "zipf_exponent":
                cfg.zipf_exponent = float(val)
            elif key == "max_feature_degree":
                cfg.max_feature_degree = int(val)
            elif key == "timestamp_step":
                cfg.timestamp_step = int(val)
            elif key == "events_per_tick":
                cfg.events_per_tick = int(val)
            elif key == "start_time":
                cfg.start_time = int(val)
            elif key.startswith("planted_"):
                planted[key[len("planted_"):]] = [
                    int(d) for d in val.split(",") if d.strip()
                ]
            else:
                raise ConfigError(f"unknown config key {key!r}")
    except ValueError as exc:
        raise ConfigError(f"bad value: {exc}") from None
    cfg.planted = planted
    cfg.validate()
    return cfg


class _ZipfSampler:
    """Rank-based Zipf sampling over 0..n-1; exponent 0 is uniform."""

    def __init__(self, n: int, exponent: float):
        self.n = n
        if exponent == 0.0:
            self.cum = None
            return
        total = 0.0
        cum = []
        for rank in range(1, n + 1):
            total += 1.0 / rank ** exponent
            cum.append(total)
        self.cum = cum
        self.total = total

    def sample(self, rng: random.Random) -> int:
        if self.cum is None:
            return rng.randrange(self.n)
        return bisect.bisect_left(self.cum, rng.random() * self.total)


def generate_edges(config: GeneratorConfig) -> list[TemporalEdge]:
    """Produce the deterministic edge stream described by the config."""
    config.validate()
    rng = random.Random(config.seed)
    pops = dict(config.vertex_types)
    event_type = config.event_type
    event_pop = pops[event_type]
    samplers = {
        vt: _ZipfSampler(pop, config.zipf_exponent)
        for vt, pop in config.vertex_types if vt != event_type
    }
    degrees: dict[str, int] = {}
    # (etype, feature vtype, fanout) slots per event, in declared order
    slots = []
    for name, a, b in config.edge_types:
        feature_vt = b if a == event_type else a
        slots.append((name, feature_vt, config.fanout.get(name, 1)))
    edges_per_event = sum(n for _, _, n in slots)
    total_events = math.ceil(config.total_edges / edges_per_event)

    # schedule planted features: feature j of vtype vt emits its edges at
    # evenly spaced event indexes
    schedule: dict[int, dict[str, list[str]]] = {}
    for vt, targets in config.planted.items():
        for j, target in enumerate(targets):
            vid = f"{vt}_p{j}"
            for i in range(target):
                idx = min(total_events - 1, (i * total_events) // target)
                schedule.setdefault(idx, {}).setdefault(vt, []).append(vid)

    def pick_feature(vt: str) -> str:
        sampler = samplers[vt]
        cap = config.max_feature_degree
        for _ in range(64):
            vid = f"{vt}_{sampler.sample(rng)}"
            if cap == 0 or degrees.get(vid, 0) < cap:
                return vid
        return vid  # soft cap: give up after bounded resampling

    out: list[TemporalEdge] = []
    carry: dict[str, list[str]] = {}
    for k in range(total_events):
        if len(out) >= config.total_edges:
            break
        ts = config.start_time + (k // config.events_per_tick) * config.timestamp_step
        event_vid = f"{event_type}{k % event_pop}"
        due = schedule.get(k, {})
        for vt, vids in due.items():
            carry.setdefault(vt, []).extend(vids)
        for etype, vt, fanout in slots:
            for _ in range(fanout):
                if len(out) >= config.total_edges:
                    break
                pending = carry.get(vt)
                if pending:
                    feature_vid = pending.pop(0)
                else:
                    feature_vid = pick_feature(vt)
                degrees[feature_vid] = degrees.get(feature_vid, 0) + 1
                out.append(TemporalEdge(
                    ts, event_vid, feature_vid, etype,
                    src_type=event_type, src_label="",
                    dst_type=vt, dst_label=feature_vid,
                ))
    return out


def generate_stream(config: GeneratorConfig, dest) -> int:
    """Write the generated stream to a file; returns the edge count."""
    return write_edge_stream(generate_edges(config), dest)
