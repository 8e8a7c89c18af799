"""Chart structure recovery: nodes, corner classification, root choice, traversal."""
from orgchart.structure.nodes import DetectedNode, detect_nodes, load_injected_nodes
from orgchart.structure.points import (
    INVALID,
    JUNCTION_POINT,
    NODE_POINT,
    ClassifiedPoint,
    classify_points,
    filter_junctions,
)
from orgchart.structure.root import SeniorityCorpus, normalize_title, select_root
from orgchart.structure.traverse import TraversalResult, traverse

__all__ = [
    "ClassifiedPoint", "DetectedNode", "INVALID", "JUNCTION_POINT", "NODE_POINT",
    "SeniorityCorpus", "TraversalResult", "classify_points", "detect_nodes",
    "filter_junctions", "load_injected_nodes", "normalize_title", "select_root", "traverse",
]
