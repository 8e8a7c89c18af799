"""End-to-end extraction, evaluation, batch runs and threshold comparison."""
from __future__ import annotations

import csv
import io
import os
import statistics
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from orgchart._io import atomic_write_bytes, atomic_write_text
from orgchart.config import PipelineConfig
from orgchart.evalmetrics import EvalReport, evaluate
from orgchart.features import RefinementWarning, good_features, refine_bbox_corners, response_map
from orgchart.imaging import (
    FOREGROUND,
    NoJunctionPointsError,
    adaptive_threshold,
    binarize,
    fixed_threshold,
    grayscale,
    junction_window_otsu,
    otsu_image,
    png_bytes,
    read_png,
)
from orgchart.model import (
    Diagnostic,
    GraphValidationError,
    OrgGraph,
    SchemaError,
    dumps_json,
    errors_only,
    graph_to_csv,
    graph_to_json,
    read_table_json,
    to_table,
)
from orgchart.structure import (
    JUNCTION_POINT,
    NODE_POINT,
    DetectedNode,
    SeniorityCorpus,
    classify_points,
    detect_nodes,
    load_injected_nodes,
    select_root,
    traverse,
)
from orgchart.textmap import TextProviderError, assign_text, recognize, sidecar_path

EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 1, 2
SUMMARY_HEADER = ("image", "status", "n", "N_S", "S_A", "T_S")


def load_corpus(config: PipelineConfig) -> SeniorityCorpus:
    return SeniorityCorpus.load(config.corpus) if config.corpus else SeniorityCorpus.default()


@dataclass
class Analysis:
    """Intermediate results of the image stages (no text, no files)."""
    gray: np.ndarray
    provisional: np.ndarray
    nodes: list[DetectedNode]
    points: list = field(default_factory=list)
    mask: np.ndarray | None = None
    threshold: dict = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)


def _window_threshold(gray, points, corners, window: int, diags) -> tuple[int, dict] | None:
    """OTSU over windows at junction points, else node points, else any corner."""
    sources = (
        ("junction_points", [(p.x, p.y) for p in points if p.kind == JUNCTION_POINT]),
        ("node_points", [(p.x, p.y) for p in points if p.kind == NODE_POINT]),
        ("corners", [(c.x, c.y) for c in corners]),
    )
    for source, centres in sources:
        if not centres:
            continue
        try:
            t = junction_window_otsu(gray, centres, window).t
        except NoJunctionPointsError:
            continue
        if source != "junction_points":
            diags.append(Diagnostic("threshold_fallback",
                                    f"no junction points; windows taken around {source}",
                                    severity="warning"))
        return t, {"strategy": "junction_otsu", "t": t, "windows": source,
                   "count": len(centres)}
    return None


def _stages(mask, config: PipelineConfig, corners, injected):
    if injected is None:
        nodes = detect_nodes(mask, config.min_node_area, config.max_fill_gap, config.open_size)
    else:
        nodes = injected
    points = classify_points(corners, nodes, mask, config.point_window) if nodes else []
    return nodes, points


def _refine_injected(gray, injected, config, params, response, diags) -> list[DetectedNode]:
    nodes = []
    for n in injected:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RefinementWarning)
            box = refine_bbox_corners(gray, n.bbox, config.roi_radius, params,
                                      config.detector, response)
        for w in caught:
            diags.append(Diagnostic("refinement", f"node {n.id}: {w.message}", (n.id,),
                                    severity="warning"))
        nodes.append(DetectedNode(n.id, box, n.shape, n.fill_ratio))
    return nodes


def analyze(img: np.ndarray, config: PipelineConfig = PipelineConfig(),
            injected: list[DetectedNode] | None = None) -> Analysis:
    """Grayscale, node detection, corners, point classification and rebinarization.

    Nodes and points are first found on a provisional whole-image OTSU mask.
    With the ``junction_otsu`` strategy the windowed threshold replaces it.
    When the windowed threshold differs from the provisional one, nodes and
    points are found again on the new mask and kept only if that finds more
    nodes (an uneven background merges boxes into one blob on the provisional
    mask).
    """
    gray = grayscale(img)
    t0 = otsu_image(gray).t
    provisional = binarize(gray, t0)
    params = config.corner_params()
    response = response_map(gray, params, config.detector)
    diags: list[Diagnostic] = []
    if injected is not None:
        injected = _refine_injected(gray, injected, config, params, response, diags)
    corners = good_features(gray, params, config.detector, response)
    nodes, points = _stages(provisional, config, corners, injected)
    result = Analysis(gray, provisional, nodes, points, diagnostics=diags)

    if config.threshold == "global":
        result.mask = fixed_threshold(gray, config.global_threshold)
        result.threshold = {"strategy": "global", "t": config.global_threshold}
    elif config.threshold == "adaptive":
        result.mask = adaptive_threshold(gray, config.adaptive_window, config.adaptive_c)
        result.threshold = {"strategy": "adaptive", "window": config.adaptive_window,
                            "c": config.adaptive_c}
    elif config.threshold == "junction_otsu":
        first: list[Diagnostic] = []
        found = _window_threshold(gray, points, corners, config.junction_window, first)
        if found is not None and found[0] != t0:
            mask1 = binarize(gray, found[0])
            nodes1, points1 = _stages(mask1, config, corners, injected)
            if len(nodes1) > len(nodes):
                result.nodes, result.points = nodes1, points1
                second: list[Diagnostic] = []
                again = _window_threshold(gray, points1, corners, config.junction_window,
                                          second)
                if again is not None:
                    found, first = again, second
                found[1]["provisional_t"] = t0
                found[1]["second_pass"] = True
        if found is not None:
            diags.extend(first)
            result.mask, result.threshold = binarize(gray, found[0]), found[1]
        else:
            diags.append(Diagnostic("threshold_fallback",
                                    "no corners at all; using whole-image OTSU",
                                    severity="warning"))
    if result.mask is None:
        result.mask = provisional
        result.threshold = result.threshold or {"strategy": "otsu", "t": t0}
    return result


@dataclass
class ExtractResult:
    exit_code: int
    graph: OrgGraph | None
    diagnostics: list[Diagnostic]
    table_json: Path | None = None
    table_csv: Path | None = None
    diagnostics_json: Path | None = None


def _output_paths(image_path: Path, out_dir: Path) -> tuple[Path, Path, Path]:
    stem = image_path.stem
    return (out_dir / f"{stem}.table.json", out_dir / f"{stem}.table.csv",
            out_dir / f"{stem}.diagnostics.json")


def extract(image_path: str | Path, config: PipelineConfig = PipelineConfig(),
            out_dir: str | Path | None = None, nodes_path: str | Path | None = None,
            corpus: SeniorityCorpus | None = None) -> ExtractResult:
    """Run every stage on one image and write table JSON, table CSV and diagnostics."""
    image_path = Path(image_path)
    out = Path(out_dir if out_dir is not None else config.out_dir)
    table_json, table_csv, diag_json = _output_paths(image_path, out)
    diags: list[Diagnostic] = []
    info: dict = {"image": image_path.name}

    def finish(code: int, graph: OrgGraph | None) -> ExtractResult:
        info["status"] = {EXIT_OK: "ok", EXIT_IO: "io_error"}.get(code, "failed")
        info["diagnostics"] = [d.to_dict() for d in diags]
        out.mkdir(parents=True, exist_ok=True)
        atomic_write_text(diag_json, dumps_json(info))
        ok = code == EXIT_OK
        return ExtractResult(code, graph, diags, table_json if ok else None,
                             table_csv if ok else None, diag_json)

    try:
        img = read_png(image_path)
    except (OSError, ValueError) as exc:
        diags.append(Diagnostic("unreadable_image", f"cannot read {image_path.name}: {exc}"))
        return finish(EXIT_IO, None)
    injected = None
    if nodes_path is not None:
        try:
            injected = load_injected_nodes(nodes_path)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            diags.append(Diagnostic("bad_nodes_file", f"cannot read node boxes: {exc}"))
            return finish(EXIT_IO, None)

    analysis = analyze(img, config, injected)
    diags.extend(analysis.diagnostics)
    info["threshold"] = analysis.threshold
    info["counts"] = {
        "nodes": len(analysis.nodes),
        "node_points": sum(p.kind == NODE_POINT for p in analysis.points),
        "junction_points": sum(p.kind == JUNCTION_POINT for p in analysis.points),
    }
    if not analysis.nodes:
        diags.append(Diagnostic("no_nodes", "no nodes detected"))
        return finish(EXIT_INVALID, None)

    try:
        boxes = recognize(image_path, config.provider(), config.text_timeout)
    except TextProviderError as exc:
        diags.append(Diagnostic("text_provider", str(exc)))
        return finish(EXIT_IO, None)
    texts = assign_text(boxes, analysis.nodes, diags)
    corpus = corpus or load_corpus(config)
    root = select_root([(n, texts[n.id]) for n in analysis.nodes], corpus, diags)
    by_rank = sorted(analysis.nodes,
                     key=lambda n: (-corpus.score(texts[n.id]), n.bbox.y1, n.bbox.x1))
    result = traverse(analysis.mask, analysis.nodes, analysis.points, root, texts,
                      orphan_order=[n.id for n in by_rank])
    diags.extend(result.diagnostics)
    info["counts"].update(visits=result.visits, foreground=result.foreground)
    try:
        to_table(result.graph)
    except GraphValidationError as exc:
        diags.extend(errors_only(exc.diagnostics))
        return finish(EXIT_INVALID, result.graph)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(table_json, graph_to_json(result.graph))
    atomic_write_text(table_csv, graph_to_csv(result.graph))
    return finish(EXIT_OK, result.graph)


def evaluate_files(gt_path: str | Path, pred_path: str | Path,
                   out_path: str | Path | None = None, with_ged: bool = False) -> EvalReport:
    """Score a predicted table file against a ground-truth table file."""
    gt = read_table_json(gt_path)
    pred = read_table_json(pred_path)
    report = evaluate(gt, pred, with_ged=with_ged)
    if out_path is not None:
        atomic_write_text(out_path, dumps_json(report.to_dict()))
    return report


# -- batch ------------------------------------------------------------------------

def find_images(directory: str | Path) -> list[Path]:
    """Chart PNGs in ``directory`` (ink maps and mask images excluded), sorted by name."""
    d = Path(directory)
    return sorted(p for p in d.glob("*.png") if p.stem.count(".") == 0)


def _batch_one(args) -> tuple:
    image, config, out_dir = args
    truth = sidecar_path(image)
    try:
        res = extract(image, config, out_dir)
        if res.exit_code != EXIT_OK:
            return (image.name, "extract_failed", "", "", "", "")
        report = evaluate_files(truth, res.table_json,
                                Path(out_dir) / f"{image.stem}.eval.json")
    except (OSError, SchemaError, ValueError) as exc:
        return (image.name, f"error:{type(exc).__name__}", "", "", "", "")
    return (image.name, "ok", report.n, report.node_similarity,
            report.structural_accuracy, report.total_score)


def summarize(rows: list[tuple]) -> str:
    """Per-image rows, then mean and median over the ok rows."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for name, status, n, ns, sa, ts in rows:
        writer.writerow([name, status, n, *(f"{v:.6f}" if status == "ok" else "" for v in (ns, sa, ts))])
    ok = [r for r in rows if r[1] == "ok"]
    for label, fn in (("mean", statistics.fmean), ("median", statistics.median)):
        if ok:
            vals = [f"{fn([r[i] for r in ok]):.6f}" for i in (3, 4, 5)]
        else:
            vals = ["", "", ""]
        writer.writerow([label, "aggregate", len(ok), *vals])
    return buf.getvalue()


@dataclass
class BatchResult:
    exit_code: int
    rows: list[tuple]
    summary_csv: Path | None


def batch(directory: str | Path, config: PipelineConfig = PipelineConfig(),
          out_dir: str | Path | None = None, workers: int | None = None) -> BatchResult:
    images = find_images(directory)
    if not images:
        return BatchResult(EXIT_IO, [], None)
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(img, config, out) for img in images]
    workers = workers or os.cpu_count() or 1
    if workers == 1 or len(jobs) == 1:
        rows = [_batch_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            rows = list(pool.map(_batch_one, jobs, chunksize=4))
    summary = out / "summary.csv"
    atomic_write_text(summary, summarize(rows))
    code = EXIT_OK if any(r[1] == "ok" for r in rows) else EXIT_INVALID
    return BatchResult(code, rows, summary)


# -- threshold comparison ------------------------------------------------------------

STRATEGY_NAMES = ("fixed", "adaptive", "otsu", "junction_otsu")


def ink_path(image_path: str | Path) -> Path:
    p = Path(image_path)
    return p.with_name(p.stem + ".ink.png")


def mask_scores(mask: np.ndarray, ink: np.ndarray, region: np.ndarray | None = None) -> dict:
    """Foreground precision, recall and F1 of ``mask`` against a boolean ink map."""
    pred = mask == FOREGROUND
    if region is not None:
        pred, ink = pred[region], ink[region]
    tp = int(np.sum(pred & ink))
    fp = int(np.sum(pred & ~ink))
    fn = int(np.sum(~pred & ink))
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


@dataclass
class ThresholdComparison:
    masks: dict[str, np.ndarray]
    thresholds: dict
    metrics: dict | None
    report_path: Path | None = None


def compare_thresholds(image_path: str | Path, config: PipelineConfig = PipelineConfig(),
                       out_dir: str | Path | None = None) -> ThresholdComparison:
    """Four binarizations of one image; scored when ``<stem>.ink.png`` exists.

    ``edge_*`` scores count only pixels outside the node boxes, where the thin
    connector lines live.
    """
    image_path = Path(image_path)
    gray = grayscale(read_png(image_path))
    analysis = analyze(gray, config.replace(threshold="junction_otsu"))
    t_fixed = config.global_threshold
    t_otsu = otsu_image(gray).t
    masks = {
        "fixed": fixed_threshold(gray, t_fixed),
        "adaptive": adaptive_threshold(gray, config.adaptive_window, config.adaptive_c),
        "otsu": binarize(gray, t_otsu),
        "junction_otsu": analysis.mask if analysis.mask is not None else binarize(gray, t_otsu),
    }
    thresholds = {
        "fixed": {"t": t_fixed},
        "adaptive": {"window": config.adaptive_window, "c": config.adaptive_c},
        "otsu": {"t": t_otsu},
        "junction_otsu": analysis.threshold or {"strategy": "otsu", "t": t_otsu},
    }
    metrics = None
    truth_ink = ink_path(image_path)
    if truth_ink.exists():
        ink = grayscale(read_png(truth_ink)) == FOREGROUND
        outside = np.ones(gray.shape, dtype=bool)
        for n in analysis.nodes:
            b = n.bbox
            outside[b.y1:b.y2, b.x1:b.x2] = False
        metrics = {}
        for name in STRATEGY_NAMES:
            whole = mask_scores(masks[name], ink)
            edge = mask_scores(masks[name], ink, outside)
            metrics[name] = {**whole, **{f"edge_{k}": v for k, v in edge.items()}}
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in STRATEGY_NAMES:
        atomic_write_bytes(out / f"{image_path.stem}.{name}.png", png_bytes(masks[name]))
    report = {"image": image_path.name, "thresholds": thresholds}
    if metrics is not None:
        report["metrics"] = metrics
    report_path = out / f"{image_path.stem}.thresholds.json"
    atomic_write_text(report_path, dumps_json(report))
    return ThresholdComparison(masks, thresholds, metrics, report_path)
