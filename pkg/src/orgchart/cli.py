"""Command-line entry point: generate, extract, evaluate, batch, compare-thresholds.

Exit codes: 0 success, 1 I/O or usage error, 2 validation or extraction failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from orgchart.config import ConfigError, load_config
from orgchart.model import SchemaError
from orgchart.pipeline import (
    EXIT_INVALID,
    EXIT_IO,
    EXIT_OK,
    batch,
    compare_thresholds,
    evaluate_files,
    extract,
)
from orgchart.synthgen import LAYOUTS, SHAPES, GenSpec, LayoutError, NoiseSpec, generate, write_sample


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors share the I/O exit code
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _noise(text: str) -> NoiseSpec:
    kind, _, arg = text.partition(":")
    try:
        if kind == "none":
            return NoiseSpec()
        if kind == "gaussian":
            return NoiseSpec.gaussian(float(arg))
        if kind == "gradient":
            lo, hi = (int(v) for v in arg.split(",")) if arg else (80, 180)
            return NoiseSpec.gradient(lo, hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    raise argparse.ArgumentTypeError("noise must be none, gaussian:<sigma> or gradient:<lo>,<hi>")


def _node_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition("-")
    try:
        a, b = int(lo), int(hi or lo)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("nodes must be N or A-B") from exc
    if not 1 <= a <= b:
        raise argparse.ArgumentTypeError("node range must satisfy 1 <= A <= B")
    return a, b


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file (default: $ORGCHART_CONFIG)")
    common.add_argument("--out-dir", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="random seed (generate)")
    common.add_argument("--corpus", help="seniority corpus TSV (title<TAB>score)")
    common.add_argument("--text-provider", help="sidecar or external:<cmd>")

    parser = _Parser(prog="orgchart", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="write synthetic charts with truth")
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--nodes", type=_node_range, default=(10, 10), help="N or A-B")
    g.add_argument("--max-depth", type=int, default=4)
    g.add_argument("--max-children", type=int, default=4)
    g.add_argument("--shapes", default=",".join(SHAPES))
    g.add_argument("--width", type=int, default=1024)
    g.add_argument("--height", type=int, default=768)
    g.add_argument("--stroke-width", type=int, default=1)
    g.add_argument("--layout", choices=(*LAYOUTS, "mixed"), default="top-down")
    g.add_argument("--noise", type=_noise, default=NoiseSpec())
    g.add_argument("--prefix", default="chart")
    g.add_argument("--no-ink-map", action="store_true", help="skip <name>.ink.png")

    e = sub.add_parser("extract", parents=[common], help="image to table")
    e.add_argument("image")
    e.add_argument("--nodes-file", help="JSON list of node boxes from an external detector")

    v = sub.add_parser("evaluate", parents=[common], help="score a table against truth")
    v.add_argument("truth")
    v.add_argument("prediction")
    v.add_argument("--ged", action="store_true", help="also compute exact graph edit distance")

    b = sub.add_parser("batch", parents=[common], help="extract and evaluate a directory")
    b.add_argument("directory")
    b.add_argument("--workers", type=int, default=None)

    c = sub.add_parser("compare-thresholds", parents=[common], help="four binarizations")
    c.add_argument("image")
    return parser


def _cmd_generate(args, out: Path) -> int:
    shapes = tuple(s.strip() for s in args.shapes.split(",") if s.strip())
    rng = np.random.default_rng(args.seed)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        n = int(rng.integers(args.nodes[0], args.nodes[1] + 1))
        layout = args.layout if args.layout != "mixed" else LAYOUTS[int(rng.integers(2))]
        seed = int(rng.integers(2 ** 63)) if args.count > 1 else args.seed
        try:
            spec = GenSpec(node_count=n, max_depth=args.max_depth,
                           max_children=args.max_children, shapes=shapes, width=args.width,
                           height=args.height, stroke_width=args.stroke_width, layout=layout,
                           noise=args.noise, seed=seed)
            img, truth = generate(spec)
        except LayoutError as exc:
            print(f"layout error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        except ValueError as exc:
            print(f"invalid spec: {exc}", file=sys.stderr)
            return EXIT_IO
        name = f"{args.prefix}_{i:04d}" if args.count > 1 else args.prefix
        write_sample(out, name, img, truth, ink_map=not args.no_ink_map)
    print(f"wrote {args.count} chart(s) to {out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        config = config.replace(corpus=args.corpus, text_provider=args.text_provider,
                                out_dir=args.out_dir)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_IO
    out = Path(config.out_dir)

    if args.command == "generate":
        return _cmd_generate(args, out)

    if args.command == "extract":
        res = extract(args.image, config, out, args.nodes_file)
        for d in res.diagnostics:
            print(f"{d.severity}: {d.kind}: {d.message}", file=sys.stderr)
        if res.exit_code == EXIT_OK:
            print(f"wrote {res.table_json} and {res.table_csv}")
        return res.exit_code

    if args.command == "evaluate":
        report_path = out / f"{Path(args.prediction).stem}.eval.json"
        try:
            out.mkdir(parents=True, exist_ok=True)
            report = evaluate_files(args.truth, args.prediction, report_path, args.ged)
        except (OSError, SchemaError, ValueError) as exc:
            print(f"evaluate: {exc}", file=sys.stderr)
            return EXIT_IO
        print(report.summary())
        return EXIT_OK

    if args.command == "batch":
        res = batch(args.directory, config, out, args.workers)
        if res.summary_csv is None:
            print(f"batch: no chart images in {args.directory}", file=sys.stderr)
            return res.exit_code
        ok = sum(r[1] == "ok" for r in res.rows)
        print(f"{ok}/{len(res.rows)} ok; summary in {res.summary_csv}")
        return res.exit_code

    if args.command == "compare-thresholds":
        try:
            res = compare_thresholds(args.image, config, out)
        except (OSError, ValueError) as exc:
            print(f"compare-thresholds: {exc}", file=sys.stderr)
            return EXIT_IO
        if res.metrics:
            for name, m in res.metrics.items():
                print(f"{name:14s} F1={m['f1']:.4f} edge_F1={m['edge_f1']:.4f}")
        else:
            print("no ink map found; masks written without metrics")
        return EXIT_OK
    return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
