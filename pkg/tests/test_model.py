import csv
import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orgchart.model import (
    CSV_HEADER,
    BBox,
    GraphValidationError,
    OrgGraph,
    OrgNode,
    SchemaError,
    TableRow,
    errors_only,
    from_table,
    graph_from_json,
    graph_to_csv,
    graph_to_json,
    to_table,
    validate,
)
from orgchart.synthgen import GenSpec, generate

B = BBox(0, 0, 10, 10)


def kinds(graph):
    return [d.kind for d in validate(graph)]


def tree(parents: list, texts=None) -> OrgGraph:
    """Graph from a parent list (index i is node i+1; None marks the root)."""
    level = {}
    nodes = []
    for i, p in enumerate(parents, 1):
        level[i] = 0 if p is None else level[p] + 1
        nodes.append(OrgNode(i, BBox(i, i, i + 5, i + 5), texts[i - 1] if texts else f"n{i}",
                             level[i], p))
    return OrgGraph.from_nodes(nodes, 1)


def test_bbox_geometry():
    b = BBox(20, 30, 120, 90)
    assert (b.width, b.height, b.area) == (100, 60, 6000)
    assert b.contains(20, 30) and b.contains(119, 89) and not b.contains(120, 89)
    with pytest.raises(ValueError):
        BBox(5, 5, 5, 9)


def test_single_root_table():
    g = OrgGraph.from_nodes([OrgNode(1, B, "CEO")], 1)
    rows = to_table(g)
    assert [(r.node_id, r.parent_id, r.text, r.level) for r in rows] == [(1, None, "CEO", 0)]


def test_root_and_two_children():
    g = tree([None, 1, 1])
    rows = to_table(g)
    assert [(r.node_id, r.parent_id, r.level) for r in rows] == [(1, None, 0), (2, 1, 1), (3, 1, 1)]


def test_cycle_is_error():
    nodes = [OrgNode(1, B, "a", 0, None), OrgNode(2, B, "b", 1, 1)]
    g = OrgGraph(tuple(nodes), frozenset({(1, 2), (2, 1)}), 1)
    with pytest.raises(GraphValidationError):
        to_table(g)
    cyc = OrgGraph.from_nodes([OrgNode(1, B, "a", 0, None), OrgNode(2, B, "b", 1, 3),
                               OrgNode(3, B, "c", 2, 2)], 1)
    assert "cycle" in kinds(cyc)


def test_valid_five_node_tree():
    assert validate(tree([None, 1, 1, 2, 2])) == []


def test_multi_parent():
    nodes = [OrgNode(1, B, "a"), OrgNode(2, B, "b", 1, 1), OrgNode(3, B, "c", 1, 1),
             OrgNode(4, B, "d", 2, 2)]
    g = OrgGraph(tuple(nodes), frozenset({(1, 2), (1, 3), (2, 4), (3, 4)}), 1)
    assert "multi_parent" in kinds(g)


def test_orphan_is_warning_only():
    nodes = [OrgNode(1, B, "a"), OrgNode(2, B, "b", 1, 1), OrgNode(3, B, "c", 0, None)]
    g = OrgGraph.from_nodes(nodes, 1)
    diags = validate(g)
    assert [d.kind for d in diags] == ["orphan"]
    assert errors_only(diags) == []
    assert len(to_table(g)) == 3


def test_from_table_errors():
    rows = [TableRow(1, None, "a", 0, B), TableRow(2, 99, "b", 1, B)]
    with pytest.raises(GraphValidationError) as exc:
        from_table(rows)
    assert "dangling_parent" in [d.kind for d in exc.value.diagnostics]
    rows = [TableRow(1, None, "a", 0, B), TableRow(2, 1, "b", 3, B)]
    with pytest.raises(GraphValidationError) as exc:
        from_table(rows)
    assert "level_inconsistent" in [d.kind for d in exc.value.diagnostics]
    rows = [TableRow(1, None, "a", 0, B), TableRow(1, None, "b", 0, B)]
    with pytest.raises(GraphValidationError) as exc:
        from_table(rows)
    assert "duplicate_id" in [d.kind for d in exc.value.diagnostics]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 20))
def test_table_round_trip(seed, n):
    _, truth = generate(GenSpec(node_count=n, max_depth=5, seed=seed))
    g = truth.graph
    assert from_table(to_table(g)) == g
    assert graph_from_json(graph_to_json(g)) == g


def test_json_schema_and_errors():
    g = tree([None, 1])
    payload = json.loads(graph_to_json(g, {"junctions": []}))
    assert payload["root_id"] == 1 and payload["junctions"] == []
    assert set(payload["nodes"][0]) == {"id", "parent_id", "text", "level", "bbox"}
    with pytest.raises(SchemaError):
        graph_from_json("[]")
    with pytest.raises(SchemaError):
        graph_from_json('{"root_id": 1, "nodes": [{"id": 1}]}')
    with pytest.raises(SchemaError):
        graph_from_json("{not json")
    assert graph_from_json('{"root_id": null, "nodes": []}') == OrgGraph.empty()


def test_csv_export():
    g = tree([None, 1], texts=["Chief, Executive", 'Say "hi"'])
    rows = list(csv.reader(io.StringIO(graph_to_csv(g))))
    assert tuple(rows[0]) == CSV_HEADER
    assert rows[1][:4] == ["1", "", "Chief, Executive", "0"]
    assert rows[2][2] == 'Say "hi"'
