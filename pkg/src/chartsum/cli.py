"""Command-line front door: analyze, summarize, evaluate, bench-stats."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .agents import PipelineConfig, run_pipeline
from .backend import MockBackend, backend_from_env
from .bench import corpus_stats, format_stats, load_corpus, run_eval
from .errors import ChartsumError
from .ingest import load_chart
from .metrics import REPORT_COLUMNS, format_report
from .patches import uni_insight
from .relations import multi_insight
from .sumdoc import serialize


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def _emit(payload, out: str | None, fmt: str, text_renderer=None) -> None:
    if fmt == "text" and text_renderer is not None:
        body = text_renderer(payload)
    else:
        body = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(body + "\n", encoding="utf-8")
    else:
        sys.stdout.write(body + "\n")


def _build_backend(args) -> object:
    if args.backend == "mock":
        return MockBackend(seed=args.seed)
    import os

    env = dict(os.environ)
    env["CI_BACKEND"] = args.backend
    return backend_from_env(env)


def cmd_analyze(args) -> int:
    bound = load_chart(
        Path(args.spec).read_text(encoding="utf-8"),
        _read(args.data) if args.data else None,
    )
    records = [uni_insight(bound, name) for name in bound.data.dimension_names]
    payload = {
        "chart": {
            "title": bound.l1.title,
            "x_label": bound.l1.x_label,
            "y_label": bound.l1.y_label,
            "dimensions": list(bound.l1.dimension_names),
        },
        "uni_insights": [r.to_dict() for r in records],
    }
    if len(records) >= 2:
        payload["multi_insight"] = multi_insight(records, bound.data).to_dict()
    _emit(payload, args.out, args.format)
    return 0


def cmd_summarize(args) -> int:
    backend = _build_backend(args)
    cfg = PipelineConfig(
        seed=args.seed,
        vote_candidates=args.vote_candidates,
        max_refine_iters=args.max_iters,
    )
    doc, transcript = run_pipeline(
        Path(args.spec).read_text(encoding="utf-8"),
        _read(args.data) if args.data else None,
        cfg,
        backend,
        chart_id=Path(args.spec).stem,
    )
    payload = json.loads(serialize(doc))
    _emit(payload, args.out, args.format, text_renderer=lambda p: doc.text)
    if args.transcript:
        Path(args.transcript).write_text(transcript.to_text() + "\n", encoding="utf-8")
    return 0


def cmd_evaluate(args) -> int:
    entries, errors = load_corpus(args.corpus)
    for name, message in errors.items():
        print(f"warning: skipped {name}: {message}", file=sys.stderr)
    rows = run_eval(entries)
    if args.metrics_only == "diversity":
        keep = set(REPORT_COLUMNS[:6])
        rows = {
            system: {k: v for k, v in row.items() if k in keep}
            for system, row in rows.items()
        }
    _emit(rows, args.out, args.format, text_renderer=format_report)
    return 0


def cmd_bench_stats(args) -> int:
    entries, errors = load_corpus(args.corpus)
    for name, message in errors.items():
        print(f"warning: skipped {name}: {message}", file=sys.stderr)
    stats = corpus_stats(entries)
    _emit(stats, args.out, args.format, text_renderer=format_stats)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chartsum",
        description="Accurate summaries of time-series line charts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def io_flags(p, needs_chart: bool):
        if needs_chart:
            p.add_argument("--spec", required=True, help="chart spec JSON file")
            p.add_argument("--data", help="data table CSV file (omit for inline data)")
        p.add_argument("--out", help="output file (stdout when omitted)")
        p.add_argument("--format", choices=("json", "text"), default="json")

    p = sub.add_parser("analyze", help="segmentation and relation records only")
    io_flags(p, needs_chart=True)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("summarize", help="run the full summary pipeline")
    io_flags(p, needs_chart=True)
    p.add_argument("--backend", choices=("mock", "remote"), default="mock")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=5)
    p.add_argument("--vote-candidates", type=int, default=3)
    p.add_argument("--transcript", help="also write the stage transcript here")
    p.set_defaults(fn=cmd_summarize)

    p = sub.add_parser("evaluate", help="metrics table over a benchmark corpus")
    p.add_argument("--corpus", required=True, help="corpus root directory")
    p.add_argument("--metrics-only", choices=("all", "diversity"), default="all")
    io_flags(p, needs_chart=False)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("bench-stats", help="hallucination frequency table")
    p.add_argument("--corpus", required=True, help="corpus root directory")
    io_flags(p, needs_chart=False)
    p.set_defaults(fn=cmd_bench_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ChartsumError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
