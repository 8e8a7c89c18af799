"""Scoring an extracted chart against ground truth.

Nodes are paired by cosine similarity of their text (term-frequency
vectors); node similarity is the matched fraction of ground-truth nodes,
structural accuracy the fraction of ground-truth parent links reproduced
under that pairing, and the total score their mean.  An exact graph edit
distance is available for small graphs as an independent check.
"""
from __future__ import annotations

import heapq
import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping

from orgchart.model import OrgGraph

MATCH_THRESHOLD = 0.95
GED_MAX_NODES = 12

_NON_WORD = re.compile(r"[^0-9a-z\s]+")


class GedBoundError(ValueError):
    """Inputs exceed the exact GED bound."""


@dataclass(frozen=True)
class TokenVector:
    counts: Mapping[str, int] = field(default_factory=dict)

    @property
    def norm(self) -> float:
        return math.sqrt(sum(c * c for c in self.counts.values()))

    def __len__(self) -> int:
        return len(self.counts)


def tokenize(text: str) -> TokenVector:
    """Lowercase, punctuation to spaces, whitespace split, term counts."""
    words = _NON_WORD.sub(" ", text.lower()).split()
    return TokenVector(dict(Counter(words)))


def cosine_similarity(a: TokenVector, b: TokenVector) -> float:
    na, nb = a.norm, b.norm
    if na == 0.0 or nb == 0.0:
        return 0.0
    small, big = (a.counts, b.counts) if len(a) <= len(b) else (b.counts, a.counts)
    dot = sum(c * big.get(tok, 0) for tok, c in small.items())
    return min(1.0, dot / (na * nb))


@dataclass(frozen=True)
class NodeMatching:
    pairs: tuple[tuple[int, int, float], ...]
    unmatched_gt: tuple[int, ...]
    unmatched_pred: tuple[int, ...]

    def gt_to_pred(self) -> dict[int, int]:
        return {g: p for g, p, _ in self.pairs}


def match_nodes(gt: OrgGraph, pred: OrgGraph, tau: float = MATCH_THRESHOLD) -> NodeMatching:
    """Greedy one-to-one pairing by descending similarity above ``tau``.

    Ties are broken by ground-truth id, then predicted id.
    """
    gvec = {n.id: tokenize(n.text) for n in gt.nodes}
    pvec = {n.id: tokenize(n.text) for n in pred.nodes}
    cands = []
    for gid, gv in gvec.items():
        for pid, pv in pvec.items():
            s = cosine_similarity(gv, pv)
            if s > tau:
                cands.append((-s, gid, pid))
    cands.sort()
    used_g, used_p, pairs = set(), set(), []
    for neg, gid, pid in cands:
        if gid in used_g or pid in used_p:
            continue
        used_g.add(gid)
        used_p.add(pid)
        pairs.append((gid, pid, -neg))
    return NodeMatching(
        tuple(sorted(pairs)),
        tuple(sorted(set(gvec) - used_g)),
        tuple(sorted(set(pvec) - used_p)),
    )


def node_similarity(matching: NodeMatching, n: int) -> float:
    if n <= 0:
        raise ValueError("node similarity needs at least one ground-truth node")
    return len(matching.pairs) / n


def structural_accuracy(gt: OrgGraph, pred: OrgGraph, matching: NodeMatching) -> float:
    """Fraction of ground-truth parent links reproduced in the prediction.

    A chart with no links at all scores its matched-node fraction instead.
    """
    linked = [n for n in gt.nodes if n.parent_id is not None]
    if not linked:
        # nothing to link: credit only what was found at all
        return len(matching.pairs) / len(gt.nodes) if gt.nodes else 1.0
    m = matching.gt_to_pred()
    correct = sum(
        1 for n in linked
        if n.id in m and n.parent_id in m and (m[n.parent_id], m[n.id]) in pred.edges
    )
    return correct / len(linked)


def total_score(ns: float, sa: float) -> float:
    return (ns + sa) / 2.0


@dataclass(frozen=True)
class EvalReport:
    n: int
    node_similarity: float
    structural_accuracy: float
    total_score: float
    ged: float | None = None

    def to_dict(self) -> dict:
        out = {"n": self.n, "node_similarity": self.node_similarity,
               "structural_accuracy": self.structural_accuracy,
               "total_score": self.total_score}
        if self.ged is not None:
            out["ged"] = self.ged
        return out

    def summary(self) -> str:
        return (f"n={self.n} N_S={self.node_similarity:.4f} "
                f"S_A={self.structural_accuracy:.4f} T_S={self.total_score:.4f}")


@dataclass(frozen=True)
class GedConfig:
    node_ins: float = 1.0
    node_del: float = 1.0
    node_sub: float = 1.0
    edge_ins: float = 1.0
    edge_del: float = 1.0

    def __post_init__(self):
        if min(self.node_ins, self.node_del, self.node_sub, self.edge_ins, self.edge_del) < 0:
            raise ValueError("edit costs must be non-negative")


def evaluate(gt: OrgGraph, pred: OrgGraph, tau: float = MATCH_THRESHOLD,
             with_ged: bool = False, ged_config: GedConfig | None = None) -> EvalReport:
    matching = match_nodes(gt, pred, tau)
    n = len(gt.nodes)
    ns = node_similarity(matching, n)
    sa = structural_accuracy(gt, pred, matching)
    ged = None
    if with_ged:
        ged = graph_edit_distance(gt, pred, ged_config or GedConfig())
    return EvalReport(n, ns, sa, total_score(ns, sa), ged)


# -- exact graph edit distance ----------------------------------------------

def _as_labeled(g: OrgGraph):
    ids = [n.id for n in g.nodes]
    index = {nid: i for i, nid in enumerate(ids)}
    labels = [n.text for n in g.nodes]
    edges = {(index[p], index[c]) for p, c in g.edges if p in index and c in index}
    return labels, edges


def _label_bound(rest1, rest2, cfg: GedConfig) -> float:
    """Cheapest node-only completion: pair equal labels free, then substitute."""
    common = sum((Counter(rest1) & Counter(rest2)).values())
    a, b = len(rest1) - common, len(rest2) - common
    s = min(a, b)
    return s * min(cfg.node_sub, cfg.node_del + cfg.node_ins) + (a - s) * cfg.node_del \
        + (b - s) * cfg.node_ins


def graph_edit_distance(g1: OrgGraph, g2: OrgGraph, cfg: GedConfig = GedConfig(),
                        max_nodes: int = GED_MAX_NODES) -> float:
    """Exact minimum edit cost by best-first search over node mappings.

    Node labels are node texts; edges are the directed parent links.  Each
    node of ``g1`` in turn is mapped to an unused node of ``g2`` or deleted;
    edge costs follow from the mapping.  The heuristic is the label-only
    completion cost, which never overestimates.
    """
    if len(g1.nodes) + len(g2.nodes) > max_nodes:
        raise GedBoundError(
            f"exact GED bound: {len(g1.nodes)} + {len(g2.nodes)} nodes exceeds {max_nodes}")
    l1, e1 = _as_labeled(g1)
    l2, e2 = _as_labeled(g2)
    n1, n2 = len(l1), len(l2)

    def step_cost(mapping: tuple[int, ...], j: int) -> float:
        k = len(mapping)
        if j < 0:
            cost = cfg.node_del
        else:
            cost = 0.0 if l1[k] == l2[j] else cfg.node_sub
        for i, ji in [*enumerate(mapping), (k, j)]:
            pairs = ((k, k, j, j),) if i == k else ((i, k, ji, j), (k, i, j, ji))
            for a, b, x, y in pairs:
                in1 = (a, b) in e1
                in2 = x >= 0 and y >= 0 and (x, y) in e2
                if in1 and not in2:
                    cost += cfg.edge_del
                elif in2 and not in1:
                    cost += cfg.edge_ins
        return cost

    def completion(mapping: tuple[int, ...]) -> float:
        used = {j for j in mapping if j >= 0}
        free = [j for j in range(n2) if j not in used]
        cost = cfg.node_ins * len(free)
        free_set = set(free)
        cost += cfg.edge_ins * sum(1 for a, b in e2 if a in free_set or b in free_set)
        return cost

    def heuristic(mapping: tuple[int, ...]) -> float:
        used = {j for j in mapping if j >= 0}
        return _label_bound(l1[len(mapping):], [l2[j] for j in range(n2) if j not in used], cfg)

    tie = itertools.count()
    start: tuple[int, ...] = ()
    heap = [(heuristic(start), next(tie), 0.0, start, False)]
    while heap:
        f, _, g, mapping, done = heapq.heappop(heap)
        if done:
            return g
        if len(mapping) == n1:
            total = g + completion(mapping)
            heapq.heappush(heap, (total, next(tie), total, mapping, True))
            continue
        used = {j for j in mapping if j >= 0}
        for j in [*(j for j in range(n2) if j not in used), -1]:
            g2_ = g + step_cost(mapping, j)
            child = mapping + (j,)
            heapq.heappush(heap, (g2_ + heuristic(child), next(tie), g2_, child, False))
    raise AssertionError("search space exhausted without a complete mapping")
