"""Org-chart image to hierarchy-table extraction, with a synthetic chart generator."""
from orgchart.evalmetrics import EvalReport, evaluate
from orgchart.model import BBox, OrgGraph, OrgNode
from orgchart.pipeline import extract

__version__ = "0.1.0"

__all__ = ["BBox", "EvalReport", "OrgGraph", "OrgNode", "evaluate", "extract", "__version__"]
