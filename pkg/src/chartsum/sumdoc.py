"""Sentence-structured summary documents with level tags and data references.

Levels follow the chart-summary content taxonomy: L1 covers chart
construction (title, axes, series), L2 statistical facts (extrema,
averages), L3 perceptual trend and relation statements. Each sentence
carries the data references that drive text-to-chart linking.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace

from .errors import EmptyDoc, MalformedDocument, SchemaVersionMismatch
from .ingest import TimeSeriesDataset, TimeWindow
from .relations import align_temporal_expression

SCHEMA_VERSION = "1"

L1, L2, L3 = "L1", "L2", "L3"

_ABBREVIATIONS = (
    "U.S.", "U.K.", "U.N.", "e.g.", "i.e.", "etc.", "vs.",
    "Dr.", "Mr.", "Mrs.", "Ms.", "Fig.", "No.", "Inc.", "Ltd.", "Co.",
)
_MASK = "\x01"


@dataclass(frozen=True)
class DataRef:
    dimensions: tuple[str, ...]
    window: TimeWindow
    kind: str  # "point" | "range" | "comparison"
    patch_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.dimensions:
            raise ValueError("DataRef needs at least one dimension")

    def to_dict(self) -> dict:
        return {
            "dimensions": list(self.dimensions),
            "start": self.window.start,
            "end": self.window.end,
            "label": self.window.label,
            "kind": self.kind,
            "patch_ids": list(self.patch_ids),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "DataRef":
        return cls(
            dimensions=tuple(raw["dimensions"]),
            window=TimeWindow(raw["start"], raw["end"], label=raw.get("label", "")),
            kind=raw["kind"],
            patch_ids=tuple(raw.get("patch_ids", ())),
        )


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    level: str = L1
    refs: tuple[DataRef, ...] = ()
    unverifiable: bool = False
    edited: bool = False

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "text": self.text,
            "level": self.level,
            "refs": [r.to_dict() for r in self.refs],
            "flags": {"unverifiable": self.unverifiable, "edited": self.edited},
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Sentence":
        flags = raw.get("flags", {})
        return cls(
            index=int(raw["index"]),
            text=raw["text"],
            level=raw.get("level", L1),
            refs=tuple(DataRef.from_dict(r) for r in raw.get("refs", ())),
            unverifiable=bool(flags.get("unverifiable", False)),
            edited=bool(flags.get("edited", False)),
        )


@dataclass(frozen=True)
class SummaryDoc:
    sentences: tuple[Sentence, ...]
    source: str = "pipeline"  # "pipeline" | "gold" | "external-model"
    chart_id: str = ""

    def __post_init__(self):
        for i, s in enumerate(self.sentences):
            if s.index != i:
                raise ValueError("sentence indices must be dense from 0")

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)

    def replace_sentence(self, index: int, sentence: Sentence) -> "SummaryDoc":
        out = list(self.sentences)
        out[index] = sentence
        return replace(self, sentences=tuple(out))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "source": self.source,
            "chart_id": self.chart_id,
            "sentences": [s.to_dict() for s in self.sentences],
        }


def split_sentences(text: str) -> list[str]:
    """Split prose into sentences, protecting decimals and abbreviations."""
    if not text or not text.strip():
        return []
    masked = text
    for abbr in _ABBREVIATIONS:
        masked = masked.replace(abbr, abbr.replace(".", _MASK))
    # decimal points never split because the next char is a digit, not space
    parts = re.split(r"(?<=[.!?])\s+", masked.strip())
    out = []
    for part in parts:
        restored = part.replace(_MASK, ".").strip()
        if restored:
            out.append(restored)
    return out


_L2_RE = re.compile(
    r"\b(maximum|minimum|peak(?:ed)?|extremum|extrema|averaged?|mean|median"
    r"|growth rate|grew by|bottomed out|record high|record low|total(?:ed)?"
    r"|per cent|percent)\b",
    re.IGNORECASE,
)
_L3_RE = re.compile(
    r"\b(rose|rise|rising|fell|fall|falling|declin\w*|increas\w*|decreas\w*"
    r"|climb\w*|dropp?\w*|grew|trend\w*|stable|steady|fluctuat\w*|oscillat\w*"
    r"|cyclic\w*|rebound\w*|overtook|overtake\w*|surpass\w*|exceed\w*|above"
    r"|below|outpac\w*|gap|widen\w*|narrow\w*|surge\w*|plunge\w*|spike\w*"
    r"|crash\w*|slid|sank)\b",
    re.IGNORECASE,
)
_L1_RE = re.compile(
    r"\b(charts?|axis|axes|plott?(?:s|ed|ing)?|legend|lines?|series|title"
    r"|measured|shows?|shown|depicts?|displays?|tracks?|x-axis|y-axis)\b",
    re.IGNORECASE,
)
_NUM_RE = re.compile(r"\d")


def classify_level(sentence: str, bound=None, backend=None) -> str:
    """Assign L1/L2/L3 by keyword ladder, asking the backend only when unclear."""
    if _L2_RE.search(sentence):
        return L2
    if _L3_RE.search(sentence):
        return L3
    if _L1_RE.search(sentence):
        return L1
    if _NUM_RE.search(sentence):
        return L2
    if backend is not None:
        from .backend import GenRequest

        req = GenRequest(
            role_prompt="level-classification",
            user_prompt=json.dumps({"mode": "classify", "sentence": sentence}),
            tag="selfcheck",
        )
        try:
            answer = json.loads(backend.complete(req).text).get("level")
            if answer in (L1, L2, L3):
                return answer
        except Exception:
            pass
    return L1


_COMPARISON_RE = re.compile(
    r"\b(above|below|exceed\w*|overtook|overtake\w*|surpass\w*|gap|while"
    r"|both|versus|vs|outpac\w*|compared?)\b",
    re.IGNORECASE,
)

_TIME_SCAN_RE = re.compile(
    r"(?:early|mid|late)[\s-]\d{4}"
    r"|(?:after|since|before|until|through)\s+\d{4}"
    r"|\d{4}-\d{2}\s*(?:to|\.\.|and|–)\s*\d{4}-\d{2}"
    r"|(?:from\s+|between\s+)?\d{4}(?:-\d{2})?\s*(?:to|and|through|\.\.|–)\s*\d{4}(?:-\d{2})?"
    r"|(?:january|february|march|april|may|june|july|august|september"
    r"|october|november|december|jan|feb|mar|apr|jun|jul|aug|sep|oct|nov|dec)\s+\d{4}"
    r"|\d{4}-\d{2}"
    r"|\b(?:1[5-9]\d{2}|20\d{2})\b",
    re.IGNORECASE,
)


def attach_data_refs(sentence: str, records, data: TimeSeriesDataset) -> list[DataRef]:
    """Data references for one sentence: mentioned dimensions x resolved times."""
    patch_sets = [r.patches for r in records]
    mentioned = [
        name
        for name in data.dimension_names
        if re.search(rf"(?<![\w]){re.escape(name)}(?![\w])", sentence, re.IGNORECASE)
    ]
    windows: list[TimeWindow] = []
    for m in _TIME_SCAN_RE.finditer(sentence):
        try:
            windows.append(align_temporal_expression(m.group(0), patch_sets, data))
        except Exception:
            continue
    if not mentioned and not windows:
        return []
    dims = tuple(mentioned) if mentioned else tuple(data.dimension_names)
    if windows:
        window = TimeWindow(
            min(w.start for w in windows),
            max(w.end for w in windows),
            label=windows[0].label if len(windows) == 1 else "",
        )
    else:
        window = data.span

    if len(dims) >= 2 and _COMPARISON_RE.search(sentence):
        kind = "comparison"
    elif window.start == window.end:
        kind = "point"
    else:
        kind = "range"

    patch_ids = []
    by_name = {r.dimension: r for r in records}
    for dim in dims:
        rec = by_name.get(dim)
        if rec is None:
            continue
        for i, p in enumerate(rec.patches):
            if p.end_time >= window.start and p.start_time <= window.end:
                patch_ids.append(f"{dim}:{i}")
    return [DataRef(dimensions=dims, window=window, kind=kind, patch_ids=tuple(patch_ids))]


def build_summary_doc(
    text: str,
    records,
    data: TimeSeriesDataset,
    *,
    source: str = "pipeline",
    chart_id: str = "",
    backend=None,
) -> SummaryDoc:
    """Split, level-tag, and reference-annotate a prose summary."""
    sentences = []
    for i, s in enumerate(split_sentences(text)):
        sentences.append(
            Sentence(
                index=i,
                text=s,
                level=classify_level(s, backend=backend),
                refs=tuple(attach_data_refs(s, records, data)),
            )
        )
    return SummaryDoc(sentences=tuple(sentences), source=source, chart_id=chart_id)


def serialize(doc: SummaryDoc) -> bytes:
    """Canonical JSON bytes for a summary document."""
    return json.dumps(doc.to_dict(), sort_keys=True, indent=2).encode("utf-8")


def deserialize(raw: bytes | str) -> SummaryDoc:
    """Parse serialized summary bytes, enforcing the schema version."""
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "sentences" not in data:
        raise MalformedDocument("missing sentences")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"schema version {version!r} unsupported")
    try:
        sentences = tuple(Sentence.from_dict(s) for s in data["sentences"])
        return SummaryDoc(
            sentences=sentences,
            source=data.get("source", "pipeline"),
            chart_id=data.get("chart_id", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedDocument(f"bad sentence payload: {exc}") from exc


def semantic_levels(doc: SummaryDoc) -> dict:
    """Sentence counts per level (input to the richness metric)."""
    if not doc.sentences:
        raise EmptyDoc("document has no sentences")
    counts = {L1: 0, L2: 0, L3: 0}
    for s in doc.sentences:
        counts[s.level] += 1
    return counts
