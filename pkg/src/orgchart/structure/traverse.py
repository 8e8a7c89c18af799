"""Flood over connector pixels that turns a chart mask into a tree.

The walk starts on the connector pixels touching the root node and floods
every connector pixel reachable from them.  Each node whose border the flood
touches becomes a child of the node the flood started from; the flood stops
at that border.  Only when it is exhausted are the children expanded in
turn, so a wide connector shared by siblings is claimed by the parent before
any child can reach it.
Node interiors are never entered and each pixel is stacked at most once,
so the cost is linear in the number of connector pixels.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from orgchart.imaging import foreground
from orgchart.model import Diagnostic, OrgGraph, OrgNode
from orgchart.structure.nodes import DetectedNode
from orgchart.structure.points import NODE_POINT, ClassifiedPoint, node_occupancy

CONTACT_RING = 2


@dataclass
class TraversalResult:
    graph: OrgGraph
    diagnostics: list[Diagnostic] = field(default_factory=list)
    visits: int = 0
    foreground: int = 0
    order: list[int] = field(default_factory=list)  # node ids in discovery order


def contact_map(edge: np.ndarray, nodes: Sequence[DetectedNode],
                points: Sequence[ClassifiedPoint] = (), ring: int = CONTACT_RING) -> np.ndarray:
    """Owner id for connector pixels that touch a node (0 elsewhere)."""
    h, w = edge.shape
    owner = np.zeros((h, w), dtype=np.int32)
    # larger nodes first so a smaller node wins where rings overlap
    for n in sorted(nodes, key=lambda n: -n.bbox.area):
        b = n.bbox
        y0, y1 = max(0, b.y1 - ring), min(h, b.y2 + ring)
        x0, x1 = max(0, b.x1 - ring), min(w, b.x2 + ring)
        owner[y0:y1, x0:x1][edge[y0:y1, x0:x1]] = n.id
    for p in points:
        if p.kind == NODE_POINT and p.owner_node is not None:
            y0, y1 = max(0, p.y - 1), min(h, p.y + 2)
            x0, x1 = max(0, p.x - 1), min(w, p.x + 2)
            win = owner[y0:y1, x0:x1]
            win[edge[y0:y1, x0:x1] & (win == 0)] = p.owner_node
    return owner


def traverse(mask: np.ndarray, nodes: Sequence[DetectedNode],
             points: Sequence[ClassifiedPoint], root: int,
             texts: Mapping[int, str] | None = None,
             orphan_order: Sequence[int] | None = None) -> TraversalResult:
    """Recover parent links and levels by walking the connectors from ``root``.

    Nodes the walk cannot reach become local roots of their own subtrees and
    are reported as ``orphan`` diagnostics; ``orphan_order`` decides which
    unreached node is tried first (default: top-to-bottom, left-to-right).
    """
    by_id = {n.id: n for n in nodes}
    if root not in by_id:
        raise ValueError(f"root {root} is not a detected node")
    texts = texts or {}
    fg = foreground(mask)
    h, w = fg.shape
    edge = fg & ~node_occupancy(fg.shape, nodes)
    owner = contact_map(edge, nodes, points)

    edge_flat = edge.ravel()
    owner_flat = owner.ravel()
    visited = bytearray(h * w)
    contacts: dict[int, list[int]] = {}
    for idx in np.flatnonzero(owner_flat):
        contacts.setdefault(int(owner_flat[idx]), []).append(int(idx))

    parent: dict[int, int | None] = {}
    level: dict[int, int] = {}
    order: list[int] = []
    visits = 0
    offsets = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]

    def walk(start: int) -> None:
        nonlocal visits
        queue = deque([start])
        while queue:
            ctx = queue.popleft()
            stack = [idx for idx in contacts.get(ctx, ()) if not visited[idx]]
            for idx in stack:
                visited[idx] = 1
            stack.reverse()
            while stack:
                idx = stack.pop()
                visits += 1
                own = int(owner_flat[idx])
                if own and own != ctx:
                    # another node's border: claim it if free, never walk past it
                    if own not in parent:
                        parent[own] = ctx
                        level[own] = level[ctx] + 1
                        order.append(own)
                        queue.append(own)
                    continue
                y, x = divmod(idx, w)
                for dy, dx in offsets:
                    yy, xx = y + dy, x + dx
                    if 0 <= yy < h and 0 <= xx < w:
                        j = yy * w + xx
                        if edge_flat[j] and not visited[j]:
                            visited[j] = 1
                            stack.append(j)

    diags: list[Diagnostic] = []
    parent[root] = None
    level[root] = 0
    order.append(root)
    walk(root)

    if orphan_order is None:
        orphan_order = [n.id for n in sorted(nodes, key=lambda n: (n.bbox.y1, n.bbox.x1))]
    pending = [nid for nid in orphan_order if nid in by_id]
    pending += [nid for nid in sorted(by_id) if nid not in pending]
    for nid in pending:
        if nid in parent:
            continue
        diags.append(Diagnostic("orphan", f"node {nid} is not connected to the root",
                                (nid,), severity="warning"))
        parent[nid] = None
        level[nid] = 0
        order.append(nid)
        walk(nid)

    graph = OrgGraph.from_nodes(
        (OrgNode(nid, by_id[nid].bbox, texts.get(nid, ""), level[nid], parent[nid])
         for nid in by_id),
        root,
    )
    return TraversalResult(graph, diags, visits, int(fg.sum()), order)
