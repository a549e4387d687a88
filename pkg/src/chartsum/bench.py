"""Benchmark corpus: layout, loader, complexity classifier, hallucination stats.

Corpus layout, one directory per chart:

    corpus/<chart_id>/
        spec.json                      chart spec (supported subset)
        data.csv                       data table
        meta.json                      complexity + provenance
        gold.summary.json              {"doc": <summary>, "annotations": []}
        generated/<model>.summary.json {"doc": <summary>, "annotations": [...]}

Annotations mark hallucinations at sentence granularity with one of the ten
catalogued types.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import EmptyCorpus, LayoutError, SchemaError
from .ingest import TimeSeriesDataset, load_chart
from .metrics import (
    MetricsConfig,
    diversity,
    embed,
    hallucination_rate,
    semantic_richness,
)
from .patches import SegmentationConfig, _max_prominences, _dense
from .sumdoc import SummaryDoc, deserialize

COMPLEXITY_LEVELS = ("simple", "moderate", "complex")


class HallucinationType(str, Enum):
    EXTREMUM_ERROR = "ExtremumError"
    NUMERICAL_VALUE_ERROR = "NumericalValueError"
    TREND_DIRECTION_ERROR = "TrendDirectionError"
    MULTIDIMENSIONAL_TREND_ERROR = "MultidimensionalTrendError"
    RANGE_ERROR = "RangeError"
    CYCLICALITY_ERROR = "CyclicalityError"
    STABILITY_ERROR = "StabilityError"
    DETAIL_OMISSION = "DetailOmission"
    JUNK_DESCRIPTION = "JunkDescription"
    PROPORTION_PERCEPTION_ERROR = "ProportionPerceptionError"


@dataclass(frozen=True)
class HallucinationAnnotation:
    sentence_index: int
    type: HallucinationType
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "sentence_index": self.sentence_index,
            "type": self.type.value,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "HallucinationAnnotation":
        try:
            kind = HallucinationType(raw["type"])
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"unknown hallucination type in {raw!r}") from exc
        return cls(
            sentence_index=int(raw.get("sentence_index", -1)),
            type=kind,
            note=raw.get("note", ""),
        )


@dataclass(frozen=True)
class BenchmarkEntry:
    chart_id: str
    spec_text: str
    data_raw: bytes
    complexity: str
    gold: SummaryDoc
    generated: dict[str, tuple[SummaryDoc, tuple[HallucinationAnnotation, ...]]]
    meta: dict = field(default_factory=dict)

    def dataset(self) -> TimeSeriesDataset:
        return load_chart(self.spec_text, self.data_raw).data


def peak_counts(data: TimeSeriesDataset, cfg: SegmentationConfig | None = None) -> dict[str, int]:
    """Prominent local maxima per dimension (the segmentation rule)."""
    cfg = cfg or SegmentationConfig()
    out = {}
    for name in data.dimension_names:
        idx, vals = _dense(data.dimensions[name])
        if len(vals) < 2:
            out[name] = 0
            continue
        rng = max(vals) - min(vals)
        if rng == 0:
            out[name] = 0
            continue
        threshold = cfg.prominence_fraction * rng
        proms = _max_prominences(vals)
        out[name] = sum(1 for p in proms.values() if p >= threshold)
    return out


def classify_complexity(data: TimeSeriesDataset,
                        cfg: SegmentationConfig | None = None) -> str:
    """Simple for 1-2 significant peaks, moderate for 3-4, complex beyond.

    The chart-level count is the largest per-dimension count, so a single
    busy dimension is enough to make a chart complex.
    """
    count = max(peak_counts(data, cfg).values())
    if count <= 2:
        return "simple"
    if count <= 4:
        return "moderate"
    return "complex"


def _load_summary_file(path: Path, expect_empty_annotations: bool):
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path.name}: {exc}") from exc
    if not isinstance(payload, dict) or "doc" not in payload:
        raise SchemaError(f"{path.name}: missing doc")
    doc = deserialize(json.dumps(payload["doc"]))
    annotations = tuple(
        HallucinationAnnotation.from_dict(a) for a in payload.get("annotations", [])
    )
    if expect_empty_annotations and annotations:
        raise SchemaError(f"{path.name}: gold summary must carry no annotations")
    for a in annotations:
        if not 0 <= a.sentence_index < len(doc.sentences):
            raise SchemaError(
                f"{path.name}: annotation index {a.sentence_index} out of range"
            )
    return doc, annotations


def load_entry(entry_dir: Path) -> BenchmarkEntry:
    """Load and validate one corpus entry directory."""
    spec_path = entry_dir / "spec.json"
    data_path = entry_dir / "data.csv"
    meta_path = entry_dir / "meta.json"
    gold_path = entry_dir / "gold.summary.json"
    for p in (spec_path, data_path, meta_path, gold_path):
        if not p.exists():
            raise SchemaError(f"{entry_dir.name}: missing {p.name}")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{entry_dir.name}: bad meta.json: {exc}") from exc
    complexity = meta.get("complexity")
    if complexity not in COMPLEXITY_LEVELS:
        raise SchemaError(f"{entry_dir.name}: complexity {complexity!r} invalid")

    spec_text = spec_path.read_text(encoding="utf-8")
    data_raw = data_path.read_bytes()
    try:
        load_chart(spec_text, data_raw)
    except Exception as exc:
        raise SchemaError(f"{entry_dir.name}: chart does not bind: {exc}") from exc

    gold, _ = _load_summary_file(gold_path, expect_empty_annotations=True)
    chart_id = entry_dir.name
    if gold.chart_id and gold.chart_id != chart_id:
        raise SchemaError(f"{entry_dir.name}: gold chart_id mismatch")

    generated = {}
    gen_dir = entry_dir / "generated"
    if gen_dir.is_dir():
        for path in sorted(gen_dir.glob("*.summary.json")):
            model = path.name[: -len(".summary.json")]
            doc, annotations = _load_summary_file(path, expect_empty_annotations=False)
            if doc.chart_id and doc.chart_id != chart_id:
                raise SchemaError(f"{path.name}: chart_id mismatch")
            generated[model] = (doc, annotations)

    return BenchmarkEntry(
        chart_id=chart_id,
        spec_text=spec_text,
        data_raw=data_raw,
        complexity=complexity,
        gold=gold,
        generated=generated,
        meta=meta,
    )


def load_corpus(root: str | Path) -> tuple[list[BenchmarkEntry], dict[str, str]]:
    """All valid entries under the corpus root, plus per-entry error report."""
    root = Path(root)
    if not root.is_dir():
        raise LayoutError(f"{root} is not a directory")
    entry_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not entry_dirs:
        raise LayoutError(f"{root} contains no corpus entries")
    entries = []
    errors: dict[str, str] = {}
    for entry_dir in entry_dirs:
        try:
            entries.append(load_entry(entry_dir))
        except SchemaError as exc:
            errors[entry_dir.name] = str(exc)
    return entries, errors


def corpus_stats(entries) -> dict:
    """Hallucination counts and frequencies per type and model."""
    entries = list(entries)
    if not entries:
        raise EmptyCorpus("no entries to analyze")
    by_model: dict[str, dict[str, int]] = {}
    sentences: dict[str, int] = {}
    for entry in entries:
        for model, (doc, annotations) in entry.generated.items():
            counts = by_model.setdefault(
                model, {t.value: 0 for t in HallucinationType}
            )
            sentences[model] = sentences.get(model, 0) + len(doc.sentences)
            for a in annotations:
                counts[a.type.value] += 1

    overall = {t.value: 0 for t in HallucinationType}
    for counts in by_model.values():
        for k, v in counts.items():
            overall[k] += v
    total = sum(overall.values())
    frequencies = {
        k: (100.0 * v / total if total else 0.0) for k, v in overall.items()
    }
    return {
        "counts_by_model": by_model,
        "sentences_by_model": sentences,
        "counts": overall,
        "total": total,
        "frequencies_percent": frequencies,
    }


def format_stats(stats: dict) -> str:
    """Aligned frequency table over the ten types."""
    rows = [("Type", "Count", "Percent")]
    for t in HallucinationType:
        rows.append(
            (
                t.value,
                str(stats["counts"][t.value]),
                f"{stats['frequencies_percent'][t.value]:.1f}%",
            )
        )
    rows.append(("Total", str(stats["total"]), "100.0%" if stats["total"] else "0.0%"))
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def run_eval(
    entries,
    *,
    metrics_cfg: MetricsConfig | None = None,
    pipeline_fn=None,
) -> dict:
    """Per-system evaluation table over the corpus.

    Rows cover the gold summaries and every generated model; diversity
    metrics average per summary, richness averages per summary, and the
    hallucination rate pools annotations over sentences (absent
    annotations leave the column empty). ``pipeline_fn(entry)`` may add a
    freshly generated row under the system name "pipeline".
    """
    entries = list(entries)
    if not entries:
        raise EmptyCorpus("no entries to evaluate")
    metrics_cfg = metrics_cfg or MetricsConfig()

    collected: dict[str, list[tuple[SummaryDoc, tuple]]] = {}
    for entry in entries:
        collected.setdefault("gold", []).append((entry.gold, ()))
        for model, (doc, annotations) in entry.generated.items():
            collected.setdefault(model, []).append((doc, annotations))
        if pipeline_fn is not None:
            collected.setdefault("pipeline", []).append((pipeline_fn(entry), ()))

    rows: dict[str, dict] = {}
    for system, docs in collected.items():
        div_acc: dict[str, list[float]] = {}
        rich_acc: list[float] = []
        annotation_count = 0
        sentence_count = 0
        annotated = False
        for doc, annotations in docs:
            texts = [s.text for s in doc.sentences]
            if texts:
                d = diversity(embed(texts, metrics_cfg), metrics_cfg)
                for k in ("remote_clique", "chamfer", "mst_dispersion",
                          "span", "sparseness", "entropy"):
                    div_acc.setdefault(k, []).append(d[k])
                rich_acc.append(semantic_richness(doc))
            sentence_count += len(doc.sentences)
            if annotations:
                annotated = True
            annotation_count += len(annotations)
        row = {k: sum(v) / len(v) for k, v in div_acc.items() if v}
        if rich_acc:
            row["semantic_richness"] = sum(rich_acc) / len(rich_acc)
        if system == "gold":
            row["hallucination_rate"] = 0.0
        elif annotated or annotation_count:
            row["hallucination_rate"] = hallucination_rate(
                range(annotation_count), sentence_count
            ) if sentence_count else None
        else:
            row["hallucination_rate"] = None
        rows[system] = row
    return rows
