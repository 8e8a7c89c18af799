"""Graph types for extracted org charts and their tabular serialization.

The table layout mirrors the usual org-chart spreadsheet: one row per node
with its parent id, text, depth and bounding box.  JSON is the canonical
on-disk form; CSV is an export.
"""
from __future__ import annotations

import csv
import io
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from orgchart._io import atomic_write_text

CSV_HEADER = ("node_id", "parent_id", "text", "level", "x1", "y1", "x2", "y2")


class GraphValidationError(ValueError):
    """Raised when a graph or table violates the hierarchy invariants."""

    def __init__(self, diagnostics: Sequence["Diagnostic"]):
        self.diagnostics = list(diagnostics)
        msg = "; ".join(d.message for d in self.diagnostics) or "invalid graph"
        super().__init__(msg)


class SchemaError(ValueError):
    """A table file does not follow the expected JSON schema."""


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    ids: tuple[int, ...] = ()
    severity: str = "error"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message,
                "ids": list(self.ids), "severity": self.severity}


@dataclass(frozen=True, order=True)
class BBox:
    """Axis-aligned box in pixel coordinates, half-open on the right/bottom.

    Pixels ``x1 <= x < x2`` and ``y1 <= y < y2`` belong to the box, so
    ``width == x2 - x1``.
    """

    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        for name in ("x1", "y1", "x2", "y2"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"degenerate bbox {self.as_list()}")

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x1 + self.x2 - 1) / 2.0, (self.y1 + self.y2 - 1) / 2.0)

    def contains(self, x: float, y: float) -> bool:
        return self.x1 <= x <= self.x2 - 1 and self.y1 <= y <= self.y2 - 1

    def within(self, width: int, height: int) -> bool:
        return self.x1 >= 0 and self.y1 >= 0 and self.x2 <= width and self.y2 <= height

    def perimeter_distance(self, x: float, y: float) -> float:
        """Chebyshev distance from (x, y) to the box's outermost pixel ring."""
        left, top, right, bottom = self.x1, self.y1, self.x2 - 1, self.y2 - 1
        if left <= x <= right and top <= y <= bottom:
            return float(min(x - left, right - x, y - top, bottom - y))
        dx = max(left - x, 0, x - right)
        dy = max(top - y, 0, y - bottom)
        return float(max(dx, dy))

    def as_list(self) -> list[int]:
        return [self.x1, self.y1, self.x2, self.y2]

    @classmethod
    def from_list(cls, values: Sequence[int]) -> "BBox":
        if len(values) != 4:
            raise ValueError(f"bbox needs 4 values, got {len(values)}")
        return cls(*(int(v) for v in values))


@dataclass(frozen=True)
class OrgNode:
    id: int
    bbox: BBox
    text: str = ""
    level: int = 0
    parent_id: int | None = None


@dataclass(frozen=True)
class TableRow:
    node_id: int
    parent_id: int | None
    text: str
    level: int
    bbox: BBox


@dataclass(frozen=True)
class OrgGraph:
    """A directed hierarchy.  Nodes are kept sorted by id."""

    nodes: tuple[OrgNode, ...]
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    root_id: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.id)))
        object.__setattr__(self, "edges", frozenset((int(p), int(c)) for p, c in self.edges))

    @classmethod
    def from_nodes(cls, nodes: Iterable[OrgNode], root_id: int | None) -> "OrgGraph":
        nodes = tuple(nodes)
        edges = frozenset((n.parent_id, n.id) for n in nodes if n.parent_id is not None)
        return cls(nodes, edges, root_id)

    @classmethod
    def empty(cls) -> "OrgGraph":
        return cls((), frozenset(), None)

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: int) -> OrgNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def by_id(self) -> dict[int, OrgNode]:
        return {n.id: n for n in self.nodes}

    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = defaultdict(list)
        for p, c in sorted(self.edges):
            out[p].append(c)
        return dict(out)

    def depth(self) -> int:
        return max((n.level for n in self.nodes), default=0)


def validate(graph: OrgGraph) -> list[Diagnostic]:
    """Check the hierarchy invariants; an empty list means the graph is valid.

    Unreachable nodes that head their own well-formed subtree are reported
    with severity ``"warning"`` (kind ``orphan``); everything else is an error.
    """
    diags: list[Diagnostic] = []
    if not graph.nodes:
        if graph.root_id is not None:
            diags.append(Diagnostic("missing_root", f"root {graph.root_id} not among nodes",
                                    (graph.root_id,)))
        return diags

    counts = Counter(n.id for n in graph.nodes)
    for nid, k in sorted(counts.items()):
        if k > 1:
            diags.append(Diagnostic("duplicate_id", f"node id {nid} appears {k} times", (nid,)))
    nodes = {n.id: n for n in graph.nodes}

    if graph.root_id not in nodes:
        diags.append(Diagnostic("missing_root", f"root {graph.root_id} not among nodes",
                                () if graph.root_id is None else (graph.root_id,)))
    else:
        root = nodes[graph.root_id]
        if root.parent_id is not None:
            diags.append(Diagnostic("root_has_parent",
                                    f"root {root.id} has parent {root.parent_id}", (root.id,)))
        if root.level != 0:
            diags.append(Diagnostic("root_level", f"root {root.id} has level {root.level}",
                                    (root.id,)))

    inbound: dict[int, list[int]] = defaultdict(list)
    for p, c in sorted(graph.edges):
        if p == c:
            diags.append(Diagnostic("self_edge", f"self edge on node {p}", (p,)))
            continue
        missing = [x for x in (p, c) if x not in nodes]
        if missing:
            diags.append(Diagnostic("dangling_edge", f"edge ({p},{c}) references unknown node",
                                    (p, c)))
            continue
        inbound[c].append(p)
    for c, ps in sorted(inbound.items()):
        if len(ps) > 1:
            diags.append(Diagnostic("multi_parent", f"node {c} has parents {ps}", (c, *ps)))

    for n in graph.nodes:
        ps = inbound.get(n.id, [])
        if n.parent_id is not None and n.parent_id not in nodes:
            diags.append(Diagnostic("dangling_parent",
                                    f"node {n.id} references missing parent {n.parent_id}",
                                    (n.id, n.parent_id)))
        elif n.parent_id is not None and n.parent_id not in ps:
            diags.append(Diagnostic("edge_parent_mismatch",
                                    f"node {n.id} names parent {n.parent_id} but no such edge",
                                    (n.id, n.parent_id)))
        for p in ps:
            if p != n.parent_id:
                diags.append(Diagnostic("edge_parent_mismatch",
                                        f"edge ({p},{n.id}) but node parent is {n.parent_id}",
                                        (n.id, p)))
        if n.parent_id is None and n.level != 0:
            diags.append(Diagnostic("level_inconsistent",
                                    f"parentless node {n.id} has level {n.level}", (n.id,)))

    for p, c in sorted(graph.edges):
        if p in nodes and c in nodes and p != c and nodes[c].level != nodes[p].level + 1:
            diags.append(Diagnostic("level_inconsistent",
                                    f"edge ({p},{c}) levels {nodes[p].level}->{nodes[c].level}",
                                    (p, c)))

    # cycles via parent pointers, then reachability from the root
    in_cycle: set[int] = set()
    for start in nodes:
        seen: list[int] = []
        cur: int | None = start
        while cur is not None and cur in nodes and cur not in seen:
            seen.append(cur)
            cur = nodes[cur].parent_id
        if cur is not None and cur in seen:
            cyc = tuple(sorted(seen[seen.index(cur):]))
            if not in_cycle.intersection(cyc):
                diags.append(Diagnostic("cycle", f"cycle through nodes {list(cyc)}", cyc))
            in_cycle.update(cyc)

    kids = defaultdict(list)
    for p, c in graph.edges:
        kids[p].append(c)
    reached: set[int] = set()
    if graph.root_id in nodes:
        stack = [graph.root_id]
        while stack:
            u = stack.pop()
            if u in reached:
                continue
            reached.add(u)
            stack.extend(kids.get(u, ()))
    for nid in sorted(nodes):
        if nid not in reached and nid not in in_cycle:
            diags.append(Diagnostic("orphan", f"node {nid} is not reachable from the root",
                                    (nid,), severity="warning"))
    return diags


def errors_only(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "error"]


def to_table(graph: OrgGraph) -> list[TableRow]:
    errs = errors_only(validate(graph))
    if errs:
        raise GraphValidationError(errs)
    rows = [TableRow(n.id, n.parent_id, n.text, n.level, n.bbox) for n in graph.nodes]
    rows.sort(key=lambda r: (r.level, r.node_id))
    return rows


def from_table(rows: Sequence[TableRow], root_id: int | None = None) -> OrgGraph:
    """Rebuild a graph from table rows.

    Without ``root_id`` the first parentless row in table order is the root.
    """
    if not rows:
        raise GraphValidationError([Diagnostic("empty_table", "table has no rows")])
    if root_id is None:
        ordered = sorted(rows, key=lambda r: (r.level, r.node_id))
        root_id = next((r.node_id for r in ordered if r.parent_id is None), ordered[0].node_id)
    nodes = [OrgNode(r.node_id, r.bbox, r.text, r.level, r.parent_id) for r in rows]
    graph = OrgGraph.from_nodes(nodes, root_id)
    errs = errors_only(validate(graph))
    if errs:
        raise GraphValidationError(errs)
    return graph


# -- serialization -----------------------------------------------------------

def graph_to_dict(graph: OrgGraph) -> dict:
    rows = to_table(graph)
    return {
        "root_id": graph.root_id,
        "nodes": [
            {"id": r.node_id, "parent_id": r.parent_id, "text": r.text,
             "level": r.level, "bbox": r.bbox.as_list()}
            for r in rows
        ],
    }


def dumps_json(payload: Mapping) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def graph_to_json(graph: OrgGraph, extra: Mapping | None = None) -> str:
    payload = graph_to_dict(graph)
    if extra:
        payload.update(extra)
    return dumps_json(payload)


def graph_from_dict(payload: Mapping) -> OrgGraph:
    if not isinstance(payload, Mapping) or "nodes" not in payload or "root_id" not in payload:
        raise SchemaError("table JSON needs 'root_id' and 'nodes'")
    if not isinstance(payload["nodes"], list):
        raise SchemaError("'nodes' must be a list")
    rows = []
    for i, item in enumerate(payload["nodes"]):
        try:
            parent = item["parent_id"]
            rows.append(TableRow(
                node_id=int(item["id"]),
                parent_id=None if parent is None else int(parent),
                text=str(item["text"]),
                level=int(item["level"]),
                bbox=BBox.from_list(item["bbox"]),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"node entry {i} malformed: {exc}") from exc
    root = payload["root_id"]
    if not rows:
        if root is not None:
            raise SchemaError("empty node list with non-null root_id")
        return OrgGraph.empty()
    return from_table(rows, root_id=None if root is None else int(root))


def graph_from_json(text: str) -> OrgGraph:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    return graph_from_dict(payload)


def read_table_json(path: str | Path) -> OrgGraph:
    return graph_from_json(Path(path).read_text(encoding="utf-8"))


def write_table_json(path: str | Path, graph: OrgGraph, extra: Mapping | None = None) -> None:
    atomic_write_text(path, graph_to_json(graph, extra))


def graph_to_csv(graph: OrgGraph) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(CSV_HEADER)
    for r in to_table(graph):
        writer.writerow([r.node_id, "" if r.parent_id is None else r.parent_id, r.text,
                         r.level, *r.bbox.as_list()])
    return buf.getvalue()


def write_table_csv(path: str | Path, graph: OrgGraph) -> None:
    atomic_write_text(path, graph_to_csv(graph))
