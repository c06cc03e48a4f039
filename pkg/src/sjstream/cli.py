"""Command-line entry points.

Exit codes: 0 success, 2 parse/spec/config error, 3 runtime error.  Set
SJSTREAM_LOG to a level name (DEBUG, INFO, ...) to adjust logging.
"""

from __future__ import annotations

import logging
import os
import sys

import click

from . import bench as bench_mod
from .baseline import BaselineEngine
from .engine import ContinuousQueryEngine, EngineConfig
from .errors import ConfigError, ParseError, SJStreamError, SpecError
from .graph import DynamicGraph
from .streamio import (generate_stream, parse_edge_stream,
                       parse_generator_config, parse_query_spec)

logger = logging.getLogger("sjstream")

EXIT_SPEC = 2
EXIT_RUNTIME = 3


def _setup_logging() -> None:
    level = os.environ.get("SJSTREAM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _fail(code: int, message: str):
    click.echo(f"sjstream: {message}", err=True)
    sys.exit(code)


@click.group()
def main() -> None:
    """Continuous subgraph queries over timestamped edge streams."""
    _setup_logging()


@main.command()
@click.argument("query_spec", type=click.Path(exists=True, dir_okay=False))
@click.argument("stream", type=click.Path(exists=True, dir_okay=False))
@click.option("--engine", "engine_kind", type=click.Choice(["sjtree", "baseline"]),
              default="sjtree", show_default=True,
              help="Incremental join-tree engine or the k-hop re-search baseline.")
@click.option("--batch-size", default=1000, show_default=True,
              help="Edges per timed batch.")
@click.option("--prune-interval", default=10_000, show_default=True,
              help="Prune stored matches every N edges; 0 disables pruning.")
@click.option("--window", default=None, type=int,
              help="Override the window declared in the query spec.")
@click.option("--metrics", "metrics_path", type=click.Path(dir_okay=False),
              default=None, help="Write per-batch metrics CSV here.")
@click.option("--matches", "matches_path", type=click.Path(dir_okay=False),
              default=None, help="Write matches here (default: stdout).")
@click.option("--seed", default=0, show_default=True,
              help="Seed for any sampling (accepted for interface stability).")
def run(query_spec, stream, engine_kind, batch_size, prune_interval, window,
        metrics_path, matches_path, seed):
    """Run a continuous query over an edge stream file."""
    del seed  # no sampling in this command
    try:
        query, tree, config = parse_query_spec(query_spec)
    except (SpecError, ParseError) as exc:
        _fail(EXIT_SPEC, f"query spec: {exc}")
    if window is not None:
        if window <= 0:
            _fail(EXIT_SPEC, "window must be positive")
        config = EngineConfig(window=window)
    config.prune_interval_edges = prune_interval if prune_interval > 0 else None
    try:
        edges = list(parse_edge_stream(stream))
    except ParseError as exc:
        _fail(EXIT_SPEC, f"edge stream: {exc}")

    graph = DynamicGraph(query.schema)
    if engine_kind == "baseline":
        engine = BaselineEngine(graph, query, config.window,
                                tree.ordering_constraints(), config)
    else:
        engine = ContinuousQueryEngine(graph, tree, config)
    try:
        matches_fh = open(matches_path, "w", encoding="utf-8") \
            if matches_path else sys.stdout
        try:
            result = bench_mod.run_stream(engine, edges, batch_size,
                                          keep_records=False,
                                          matches_fh=matches_fh)
        finally:
            if matches_path:
                matches_fh.close()
        if metrics_path:
            with open(metrics_path, "w", encoding="utf-8", newline="") as fh:
                bench_mod.write_metrics(result.rows, fh)
        click.echo(
            f"processed {len(edges)} edges in {result.total_seconds:.3f}s "
            f"({result.edges_per_second:.0f} edges/s), "
            f"{result.emitted} matches, peak stored {result.peak_stored}",
            err=True)
    except SJStreamError as exc:
        _fail(EXIT_RUNTIME, str(exc))


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.argument("out", type=click.Path(dir_okay=False))
def generate(config, out):
    """Generate a synthetic edge stream from a key=value config file."""
    try:
        cfg = parse_generator_config(config)
        count = generate_stream(cfg, out)
    except ConfigError as exc:
        _fail(EXIT_SPEC, f"generator config: {exc}")
    except SJStreamError as exc:
        _fail(EXIT_RUNTIME, str(exc))
    click.echo(f"wrote {count} edges to {out}", err=True)


@main.command("bench-degree-sweep")
@click.argument("template", type=click.Path(exists=True, dir_okay=False))
@click.argument("stream", type=click.Path(exists=True, dir_okay=False))
@click.option("--label-vertex", required=True,
              help="Query vertex whose label is substituted per run.")
@click.option("--bins", default=10, show_default=True)
@click.option("--per-bin", default=5, show_default=True)
@click.option("--batch-size", default=1000, show_default=True)
@click.option("--prune-interval", default=10_000, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the sweep CSV here (default: stdout).")
def bench_degree_sweep(template, stream, label_vertex, bins, per_bin,
                       batch_size, prune_interval, out_path):
    """Time the query across labels drawn from ten degree bins."""
    try:
        query, tree, _config = parse_query_spec(template)
        edges = list(parse_edge_stream(stream))
    except (SpecError, ParseError) as exc:
        _fail(EXIT_SPEC, str(exc))
    try:
        rows = bench_mod.degree_sweep(
            query, tree, label_vertex, edges, bins=bins, per_bin=per_bin,
            batch_size=batch_size,
            prune_interval=prune_interval if prune_interval > 0 else None)
    except SJStreamError as exc:
        _fail(EXIT_RUNTIME, str(exc))
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            bench_mod.write_sweep(rows, fh)
    else:
        bench_mod.write_sweep(rows, sys.stdout)


if __name__ == "__main__":
    main()
