import pytest
from hypothesis import settings

from sjstream.graph import DynamicGraph, Schema, TemporalEdge

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def kw_edge(ts, article, keyword, label="fire"):
    return TemporalEdge(ts, article, keyword, "has_kw",
                        "article", "", "keyword", label)


def loc_edge(ts, article, location, label=""):
    return TemporalEdge(ts, article, location, "at_loc",
                        "article", "", "location", label)


def build_graph(edges, schema=None, slack=0):
    g = DynamicGraph(schema if schema is not None else Schema(),
                     disorder_slack=slack)
    for e in edges:
        g.add_edge(e)
    return g


def assert_is_embedding(graph, query, vertex_map, edge_map):
    """Check a reported match is a genuine type/label-preserving embedding."""
    assert set(vertex_map) == set(query.vertices)
    assert len(set(vertex_map.values())) == len(vertex_map)
    assert len(set(edge_map.values())) == len(edge_map)
    for qid, vid in vertex_map.items():
        qv = query.vertex(qid)
        dv = graph.vertex(vid)
        assert dv.vtype == qv.vtype
        if qv.label:
            assert dv.label == qv.label
    for qe in query.edges:
        data_edge = graph.edge(edge_map[qe.index])
        assert {data_edge.src, data_edge.dst} == \
            {vertex_map[qe.u], vertex_map[qe.v]}
        assert graph.schema.edge_type_id(data_edge.etype) == qe.etype


@pytest.fixture
def data_dir():
    from pathlib import Path
    import sjstream
    return Path(sjstream.__file__).parent / "data"
