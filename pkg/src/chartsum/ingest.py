"""Chart spec parsing, data table parsing, and binding.

The supported spec subset is a Vega-Lite-compatible JSON document with a
line mark, a temporal or ordinal x encoding, a quantitative y encoding and
an optional color channel naming the dimension key. Data arrives either as
RFC 4180 CSV (header row required) or as inline record arrays embedded in
the spec document. Temporal timestamps are canonicalized to integer epoch
days; ordinal labels become rank indices.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from datetime import date

from .errors import (
    EmptyTable,
    MissingEncoding,
    ParseError,
    SpecSyntaxError,
    TimeOrderError,
    UnboundColumn,
    UnsupportedMark,
)

_EPOCH = date(1970, 1, 1)

_MISSING_TOKENS = {"", "na", "n/a", "nan", "null", "none"}


def epoch_days(d: date) -> int:
    """Days since 1970-01-01 (negative before the epoch)."""
    return (d - _EPOCH).days


_YEAR_RE = re.compile(r"^(\d{4})$")
_YEAR_MONTH_RE = re.compile(r"^(\d{4})-(\d{1,2})$")
_YMD_RE = re.compile(r"^(\d{4})-(\d{1,2})-(\d{1,2})$")


def parse_time_label(label: str) -> date | None:
    """Parse a YYYY, YYYY-MM, or YYYY-MM-DD label; None if not a date."""
    text = label.strip()
    if "T" in text:
        text = text.split("T", 1)[0]
    m = _YEAR_RE.match(text)
    if m:
        return date(int(m.group(1)), 1, 1)
    m = _YEAR_MONTH_RE.match(text)
    if m:
        try:
            return date(int(m.group(1)), int(m.group(2)), 1)
        except ValueError:
            return None
    m = _YMD_RE.match(text)
    if m:
        try:
            return date(int(m.group(1)), int(m.group(2)), int(m.group(3)))
        except ValueError:
            return None
    return None


@dataclass(frozen=True)
class TimeWindow:
    """Inclusive [start, end] interval on the canonical time axis."""

    start: float
    end: float
    label: str = ""

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"window end {self.end} precedes start {self.start}")

    def contains(self, t: float) -> bool:
        return self.start <= t <= self.end


@dataclass(frozen=True)
class ChartSpec:
    title: str
    mark: str
    x_field: str
    x_type: str
    y_field: str
    y_type: str
    color_field: str | None = None
    x_label: str = ""
    y_label: str = ""
    legend: str | None = None

    def __post_init__(self):
        if self.mark != "line":
            raise UnsupportedMark(f"mark {self.mark!r} is not supported")
        if self.x_field == self.y_field:
            raise SpecSyntaxError("x and y encodings reference the same field")
        if self.color_field in (self.x_field, self.y_field):
            raise SpecSyntaxError("color field collides with x or y field")

    def to_document(self) -> dict:
        """Emit the spec back as a subset Vega-Lite document."""
        enc: dict = {
            "x": {"field": self.x_field, "type": self.x_type,
                  "axis": {"title": self.x_label}},
            "y": {"field": self.y_field, "type": self.y_type,
                  "axis": {"title": self.y_label}},
        }
        if self.color_field:
            enc["color"] = {"field": self.color_field, "type": "nominal"}
            if self.legend:
                enc["color"]["legend"] = {"title": self.legend}
        return {"title": self.title, "mark": self.mark, "encoding": enc}

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class TimeSeriesDataset:
    """Named time-indexed numeric dimensions on a shared time axis.

    ``timestamps`` is the canonical numeric axis (epoch days when temporal,
    rank indices when ordinal); ``labels`` preserves the raw time strings.
    Missing values stay as None and are excluded from every statistic.
    """

    timestamps: tuple[float, ...]
    labels: tuple[str, ...]
    time_kind: str  # "temporal" | "ordinal"
    dimensions: dict[str, tuple[float | None, ...]]
    units: dict[str, str] = field(default_factory=dict)
    time_field: str = "time"

    def __post_init__(self):
        if len(self.timestamps) < 2:
            raise EmptyTable("need at least 2 timestamps")
        if not self.dimensions:
            raise EmptyTable("need at least 1 dimension")
        for t0, t1 in zip(self.timestamps, self.timestamps[1:]):
            if t1 <= t0:
                raise TimeOrderError(f"timestamps not strictly increasing at {t1}")
        n = len(self.timestamps)
        if len(self.labels) != n:
            raise ParseError("labels misaligned with timestamps")
        for name, values in self.dimensions.items():
            if len(values) != n:
                raise ParseError(f"dimension {name!r} has {len(values)} values for {n} timestamps")

    @property
    def dimension_names(self) -> list[str]:
        return list(self.dimensions)

    @property
    def span(self) -> TimeWindow:
        return TimeWindow(self.timestamps[0], self.timestamps[-1])

    def missing_indices(self, name: str) -> list[int]:
        return [i for i, v in enumerate(self.dimensions[name]) if v is None]

    def window_indices(self, window: TimeWindow) -> tuple[int, int]:
        """First and last sample index inside the window (inclusive)."""
        idx = [i for i, t in enumerate(self.timestamps) if window.contains(t)]
        if not idx:
            from .errors import WindowEmpty
            raise WindowEmpty(f"no samples in [{window.start}, {window.end}]")
        return idx[0], idx[-1]

    def label_at(self, index: int) -> str:
        return self.labels[index]


@dataclass(frozen=True)
class L1Facts:
    title: str
    x_label: str
    y_label: str
    dimension_names: tuple[str, ...]


@dataclass(frozen=True)
class BoundChart:
    spec: ChartSpec
    data: TimeSeriesDataset
    l1: L1Facts


def parse_chart_spec(text: str) -> ChartSpec:
    """Parse a spec document in the supported line-chart subset."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise SpecSyntaxError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpecSyntaxError("spec document must be a JSON object")

    mark = doc.get("mark")
    if isinstance(mark, dict):
        mark = mark.get("type")
    if mark is None:
        raise MissingEncoding("spec has no mark")
    if mark != "line":
        raise UnsupportedMark(f"mark {mark!r} is not supported (line only)")

    enc = doc.get("encoding")
    if not isinstance(enc, dict):
        raise MissingEncoding("spec has no encoding block")

    def channel(name: str, required: bool) -> dict | None:
        ch = enc.get(name)
        if ch is None:
            if required:
                raise MissingEncoding(f"missing {name} encoding")
            return None
        if not isinstance(ch, dict) or "field" not in ch:
            raise MissingEncoding(f"{name} encoding has no field")
        return ch

    x = channel("x", required=True)
    y = channel("y", required=True)
    color = channel("color", required=False)

    x_type = x.get("type", "temporal")
    if x_type not in ("temporal", "ordinal"):
        raise SpecSyntaxError(f"unsupported x type {x_type!r}")
    y_type = y.get("type", "quantitative")
    if y_type != "quantitative":
        raise SpecSyntaxError(f"unsupported y type {y_type!r}")

    def axis_title(ch: dict, default: str) -> str:
        axis = ch.get("axis")
        if isinstance(axis, dict) and axis.get("title"):
            return str(axis["title"])
        return default

    title = doc.get("title", "")
    if isinstance(title, dict):
        title = title.get("text", "")

    legend = None
    if color is not None:
        leg = color.get("legend")
        if isinstance(leg, dict) and leg.get("title"):
            legend = str(leg["title"])
        else:
            legend = str(color["field"])

    return ChartSpec(
        title=str(title),
        mark="line",
        x_field=str(x["field"]),
        x_type=x_type,
        y_field=str(y["field"]),
        y_type=y_type,
        color_field=str(color["field"]) if color is not None else None,
        x_label=axis_title(x, str(x["field"])),
        y_label=axis_title(y, str(y["field"])),
        legend=legend,
    )


def _parse_value(cell, where: str) -> float | None:
    if cell is None:
        return None
    if isinstance(cell, (int, float)):
        return float(cell)
    text = str(cell).strip()
    if text.lower() in _MISSING_TOKENS:
        return None
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"non-numeric value {cell!r} at {where}") from None


def _canonical_times(raw_labels: list[str], x_type: str | None):
    labels = [str(lbl).strip() for lbl in raw_labels]
    parsed = [parse_time_label(lbl) for lbl in labels]
    if x_type is None:
        x_type = "temporal" if all(p is not None for p in parsed) else "ordinal"
    if x_type == "temporal":
        bad = [labels[i] for i, p in enumerate(parsed) if p is None]
        if bad:
            raise ParseError(f"non-temporal time label {bad[0]!r}")
        times = [float(epoch_days(p)) for p in parsed]  # type: ignore[arg-type]
    else:
        times = [float(i) for i in range(len(labels))]
    return times, labels, x_type


def _rows_to_dataset(
    rows: list[dict],
    *,
    time_field: str | None,
    key_field: str | None,
    value_field: str | None,
    x_type: str | None,
    sort: bool,
) -> TimeSeriesDataset:
    if not rows:
        raise EmptyTable("no data rows")
    columns = list(rows[0].keys())
    if time_field is None:
        time_field = columns[0]
    if time_field not in columns:
        raise UnboundColumn(f"time column {time_field!r} not in table")
    others = [c for c in columns if c != time_field]
    if not others:
        raise EmptyTable("table has no value columns")

    # Auto-detect long format: a single non-numeric key column plus numeric columns.
    if key_field is None and value_field is None:
        non_numeric = []
        for c in others:
            for row in rows:
                cell = row.get(c)
                if cell is None or (isinstance(cell, str) and cell.strip().lower() in _MISSING_TOKENS):
                    continue
                if isinstance(cell, (int, float)):
                    break
                try:
                    float(str(cell).strip())
                except ValueError:
                    non_numeric.append(c)
                break
        if len(non_numeric) == 1 and len(others) == 2:
            key_field = non_numeric[0]
            value_field = next(c for c in others if c != key_field)

    if key_field is not None:
        if key_field not in columns:
            raise UnboundColumn(f"key column {key_field!r} not in table")
        if value_field is None:
            remaining = [c for c in others if c != key_field]
            if len(remaining) != 1:
                raise ParseError("long table needs exactly one value column")
            value_field = remaining[0]
        if value_field not in columns:
            raise UnboundColumn(f"value column {value_field!r} not in table")

    raw_times: list[str] = []
    seen_times: dict[str, int] = {}
    for row in rows:
        lbl = str(row[time_field]).strip()
        if lbl not in seen_times:
            seen_times[lbl] = len(raw_times)
            raw_times.append(lbl)

    times, labels, kind = _canonical_times(raw_times, x_type)
    order = sorted(range(len(times)), key=lambda i: times[i]) if sort else list(range(len(times)))
    times_sorted = [times[i] for i in order]
    labels_sorted = [labels[i] for i in order]
    pos = {labels[i]: rank for rank, i in enumerate(order)}
    if kind == "ordinal":
        # rank indices follow the (possibly re-sorted) label order
        times_sorted = [float(i) for i in range(len(order))]

    n = len(times_sorted)
    dims: dict[str, list[float | None]] = {}
    if key_field is not None:
        for rownum, row in enumerate(rows, start=2):
            name = str(row[key_field]).strip()
            dims.setdefault(name, [None] * n)
            t = pos[str(row[time_field]).strip()]
            dims[name][t] = _parse_value(row[value_field], f"row {rownum}, column {value_field!r}")
    else:
        for c in others:
            dims[c] = [None] * n
        for rownum, row in enumerate(rows, start=2):
            t = pos[str(row[time_field]).strip()]
            for c in others:
                dims[c][t] = _parse_value(row.get(c), f"row {rownum}, column {c!r}")

    return TimeSeriesDataset(
        timestamps=tuple(times_sorted),
        labels=tuple(labels_sorted),
        time_kind=kind,
        dimensions={k: tuple(v) for k, v in dims.items()},
        time_field=time_field,
    )


def parse_data_table(
    raw: bytes | str,
    fmt: str = "csv",
    *,
    time_field: str | None = None,
    key_field: str | None = None,
    value_field: str | None = None,
    x_type: str | None = None,
    sort: bool = True,
) -> TimeSeriesDataset:
    """Parse a CSV or inline-record table into a TimeSeriesDataset.

    Wide tables (one column per dimension) and long tables (a dimension-key
    column) are both accepted; long form is auto-detected when exactly one
    non-numeric key column is present, or forced via ``key_field``.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(raw))
        if reader.fieldnames is None:
            raise EmptyTable("CSV has no header row")
        rows = [dict(r) for r in reader]
    elif fmt == "inline-records":
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"inline records are not valid JSON: {exc}") from exc
        if isinstance(payload, dict):
            payload = payload.get("values", [])
        if not isinstance(payload, list) or not all(isinstance(r, dict) for r in payload):
            raise ParseError("inline records must be a JSON array of objects")
        rows = payload
    else:
        raise ParseError(f"unknown table format {fmt!r}")
    return _rows_to_dataset(
        rows,
        time_field=time_field,
        key_field=key_field,
        value_field=value_field,
        x_type=x_type,
        sort=sort,
    )


def bind(spec: ChartSpec, data: TimeSeriesDataset) -> BoundChart:
    """Bind a parsed spec to a dataset and extract the L1 facts."""
    if spec.x_field != data.time_field:
        raise UnboundColumn(
            f"spec x field {spec.x_field!r} does not resolve to time column {data.time_field!r}"
        )
    if spec.color_field is None:
        if spec.y_field not in data.dimensions:
            if len(data.dimensions) != 1:
                raise UnboundColumn(f"spec y field {spec.y_field!r} not in data columns")
            # single anonymous dimension takes its name from the y encoding
    l1 = L1Facts(
        title=spec.title,
        x_label=spec.x_label,
        y_label=spec.y_label,
        dimension_names=tuple(data.dimension_names),
    )
    return BoundChart(spec=spec, data=data, l1=l1)


def load_chart(spec_text: str, data_raw: bytes | str | None = None) -> BoundChart:
    """Parse spec (plus CSV bytes or inline values) and bind them."""
    spec = parse_chart_spec(spec_text)
    if data_raw is not None:
        ds = parse_data_table(
            data_raw,
            "csv",
            time_field=spec.x_field,
            key_field=spec.color_field,
            value_field=spec.y_field if spec.color_field else None,
            x_type=spec.x_type,
        )
    else:
        doc = json.loads(spec_text)
        values = (doc.get("data") or {}).get("values")
        if not values:
            raise EmptyTable("spec has no inline data and no table was supplied")
        ds = parse_data_table(
            json.dumps(values),
            "inline-records",
            time_field=spec.x_field,
            key_field=spec.color_field,
            value_field=spec.y_field if spec.color_field else None,
            x_type=spec.x_type,
        )
    return bind(spec, ds)
