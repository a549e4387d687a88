"""Cross-dimension analysis: crossings, relations, trend pairs, rankings,
and alignment of temporal expressions to patch boundaries.

A pair of dimensions either keeps a consistent dominance order (same
relation) or swaps it at one or more crossing points (contrast relation).
Trend pairs compare window-dominant directions; the dominant direction of a
window is the sign of the net change across it.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import date

from .errors import (
    PeriodOutOfRange,
    SingleDimension,
    TieThroughout,
    Unresolvable,
    WindowEmpty,
)
from .ingest import TimeSeriesDataset, TimeWindow, epoch_days, parse_time_label
from .patches import UniInsightRecord

SAME_RELATION = "same_relation"
CONTRAST_RELATION = "contrast_relation"
SAME_TREND = "same_trend"
CONTRAST_TREND = "contrast_trend"
GAP_TREND = "gap_trend"


@dataclass(frozen=True)
class CrossingPoint:
    dim_a: str
    dim_b: str
    index_before: int
    index_after: int
    time: float
    direction: str  # "a_overtakes_b" | "b_overtakes_a"
    label: str = ""  # time label of the sample after the flip

    def to_dict(self) -> dict:
        return {
            "dims": [self.dim_a, self.dim_b],
            "between": [self.index_before, self.index_after],
            "time": self.time,
            "label": self.label,
            "direction": self.direction,
        }


@dataclass(frozen=True)
class RelationClass:
    kind: str  # SAME_RELATION | CONTRAST_RELATION
    above: str | None = None
    crossings: tuple[CrossingPoint, ...] = ()

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == SAME_RELATION:
            out["above"] = self.above
        else:
            out["crossings"] = [c.to_dict() for c in self.crossings]
        return out


@dataclass(frozen=True)
class TrendPairClass:
    kind: str  # SAME_TREND | CONTRAST_TREND | GAP_TREND
    window: TimeWindow
    direction_a: str = ""
    direction_b: str = ""
    gap_direction: str | None = None  # "widening" | "narrowing"

    def to_dict(self) -> dict:
        out: dict = {
            "kind": self.kind,
            "window": self.window.label,
            "days": self.window.end - self.window.start,
        }
        if self.kind == GAP_TREND:
            out["gap_direction"] = self.gap_direction
        else:
            out["directions"] = [self.direction_a, self.direction_b]
        return out


@dataclass(frozen=True)
class PeriodRanking:
    window: TimeWindow
    order: tuple[str, ...]
    means: dict[str, float]
    tied: bool

    def to_dict(self) -> dict:
        return {
            "window": self.window.label,
            "order": list(self.order),
            "means": {k: self.means[k] for k in sorted(self.means)},
            "tied": self.tied,
        }


@dataclass(frozen=True)
class PairInsight:
    dim_a: str
    dim_b: str
    relation: RelationClass | None
    trend_pairs: tuple[TrendPairClass, ...]
    dominance: tuple[dict, ...] = ()  # {"above", "start", "end"} per interval
    evidence: tuple[tuple[str, str], ...] = ()  # (window label, note)

    def to_dict(self) -> dict:
        return {
            "pair": [self.dim_a, self.dim_b],
            "relation": self.relation.to_dict() if self.relation else None,
            "trend_pairs": [t.to_dict() for t in self.trend_pairs],
            "dominance": [dict(d) for d in self.dominance],
            "evidence": [list(e) for e in self.evidence],
        }


@dataclass(frozen=True)
class MultiInsightRecord:
    pairs: tuple[PairInsight, ...]
    rankings: tuple[PeriodRanking, ...]
    window: TimeWindow

    def to_dict(self) -> dict:
        return {
            "kind": "multi_insight",
            "window": self.window.label,
            "pairs": [p.to_dict() for p in self.pairs],
            "rankings": [r.to_dict() for r in self.rankings],
        }


def _paired_points(a, b, timestamps, window: TimeWindow | None):
    """(index, time, a, b) for samples where both series are present."""
    pts = []
    for i, (va, vb) in enumerate(zip(a, b)):
        if va is None or vb is None:
            continue
        t = float(timestamps[i])
        if window is not None and not window.contains(t):
            continue
        pts.append((i, t, float(va), float(vb)))
    return pts


def detect_intersections(
    a,
    b,
    *,
    timestamps=None,
    labels=None,
    window: TimeWindow | None = None,
    dim_a: str = "a",
    dim_b: str = "b",
) -> list[CrossingPoint]:
    """Every dominance flip of a over b, once each, with interpolated time.

    A sign change between adjacent samples is located by linear
    interpolation; an exact tie at a sample is a crossing at that sample
    time when the nearest nonzero signs on each side differ.
    """
    if timestamps is None:
        timestamps = list(range(len(a)))

    def label_of(i: int) -> str:
        return str(labels[i]) if labels is not None else ""

    pts = _paired_points(a, b, timestamps, window)
    if not pts:
        raise WindowEmpty("no overlapping samples in window")
    diffs = [(i, t, va - vb) for i, t, va, vb in pts]
    crossings: list[CrossingPoint] = []

    def sign(x: float) -> int:
        return (x > 0) - (x < 0)

    k = 0
    while k < len(diffs) - 1:
        i0, t0, d0 = diffs[k]
        i1, t1, d1 = diffs[k + 1]
        s0, s1 = sign(d0), sign(d1)
        if s0 != 0 and s1 != 0 and s0 != s1:
            t_cross = t0 + (t1 - t0) * d0 / (d0 - d1)
            direction = "a_overtakes_b" if s1 > 0 else "b_overtakes_a"
            crossings.append(
                CrossingPoint(dim_a, dim_b, i0, i1, t_cross, direction, label_of(i1))
            )
            k += 1
            continue
        if s1 == 0 and k + 1 < len(diffs):
            # maximal run of exact ties: crossing iff the surrounding signs flip
            run_start = k + 1
            run_end = run_start
            while run_end + 1 < len(diffs) and sign(diffs[run_end + 1][2]) == 0:
                run_end += 1
            after = sign(diffs[run_end + 1][2]) if run_end + 1 < len(diffs) else 0
            if s0 != 0 and after != 0 and s0 != after:
                iz, tz, _ = diffs[run_start]
                direction = "a_overtakes_b" if after > 0 else "b_overtakes_a"
                crossings.append(
                    CrossingPoint(dim_a, dim_b, iz, iz, tz, direction, label_of(iz))
                )
            k = run_end + 1
            continue
        k += 1
    return crossings


def classify_relation(
    a,
    b,
    *,
    timestamps=None,
    labels=None,
    window: TimeWindow | None = None,
    dim_a: str = "a",
    dim_b: str = "b",
) -> RelationClass:
    """Same relation (one dimension always above) or contrast relation."""
    if timestamps is None:
        timestamps = list(range(len(a)))
    pts = _paired_points(a, b, timestamps, window)
    if not pts:
        raise WindowEmpty("no overlapping samples in window")
    crossings = detect_intersections(
        a, b, timestamps=timestamps, labels=labels, window=window,
        dim_a=dim_a, dim_b=dim_b,
    )
    if crossings:
        return RelationClass(kind=CONTRAST_RELATION, crossings=tuple(crossings))
    signs = {(va > vb) - (va < vb) for _, _, va, vb in pts} - {0}
    if not signs:
        raise TieThroughout(f"{dim_a} and {dim_b} identical on the window")
    above = dim_a if signs == {1} else dim_b
    return RelationClass(kind=SAME_RELATION, above=above)


def rank_over_periods(data: TimeSeriesDataset, periods) -> list[PeriodRanking]:
    """Dimensions ordered by descending mean value in each period."""
    span = data.span
    out = []
    for window in periods:
        if window.end < span.start or window.start > span.end:
            raise PeriodOutOfRange(f"period {window} outside data span")
        means: dict[str, float] = {}
        for name in data.dimension_names:
            vals = [
                float(v)
                for t, v in zip(data.timestamps, data.dimensions[name])
                if v is not None and window.contains(t)
            ]
            if vals:
                means[name] = math.fsum(vals) / len(vals)
        if not means:
            raise PeriodOutOfRange(f"period {window} contains no samples")
        order = tuple(sorted(means, key=lambda n: (-means[n], n)))
        tied = len({round(m, 12) for m in means.values()}) < len(means)
        out.append(PeriodRanking(window=window, order=order, means=means, tied=tied))
    return out


def _record_window_net(record: UniInsightRecord, window: TimeWindow) -> float | None:
    """Net change of a dimension across a window, from its patch samples."""
    present = [
        (t, v)
        for patch in record.patches
        for t, v in zip(patch.times, patch.values)
        if v is not None and window.contains(t)
    ]
    if len(present) < 2:
        return None
    return present[-1][1] - present[0][1]


def _direction(net: float) -> str:
    if net > 0:
        return "rising"
    if net < 0:
        return "falling"
    return "flat"


def classify_trend_pair(
    insight_a: UniInsightRecord,
    insight_b: UniInsightRecord,
    window: TimeWindow,
) -> TrendPairClass:
    """Same or contrast trend from the two window-dominant directions."""
    net_a = _record_window_net(insight_a, window)
    net_b = _record_window_net(insight_b, window)
    if net_a is None or net_b is None:
        raise WindowEmpty(f"window {window.label or window} misses one dimension")
    da, db = _direction(net_a), _direction(net_b)
    kind = SAME_TREND if da == db else CONTRAST_TREND
    return TrendPairClass(kind=kind, window=window, direction_a=da, direction_b=db)


def gap_trend(
    a,
    b,
    *,
    timestamps=None,
    window: TimeWindow | None = None,
    tolerance: float = 0.05,
) -> TrendPairClass | None:
    """Gap trend when |a-b| moves one way, allowing <= tolerance violations."""
    if timestamps is None:
        timestamps = list(range(len(a)))
    pts = _paired_points(a, b, timestamps, window)
    if len(pts) < 2:
        return None
    gaps = [abs(va - vb) for _, _, va, vb in pts]
    net = gaps[-1] - gaps[0]
    if net == 0:
        return None
    direction = 1 if net > 0 else -1
    steps = list(zip(gaps, gaps[1:]))
    violations = sum(1 for g0, g1 in steps if (g1 - g0) * direction < 0)
    if violations > tolerance * len(steps):
        return None
    win = window if window is not None else TimeWindow(pts[0][1], pts[-1][1])
    return TrendPairClass(
        kind=GAP_TREND,
        window=win,
        gap_direction="widening" if direction > 0 else "narrowing",
    )


# --- temporal expression grammar -------------------------------------------

_MONTHS = {
    name: i + 1
    for i, name in enumerate(
        "january february march april may june july august september october november december".split()
    )
}
_MONTHS.update({name[:3]: num for name, num in list(_MONTHS.items())})

_YEAR_ONLY = re.compile(r"^(?:in\s+|year\s+)?(\d{4})$")
_YEAR_RANGE = re.compile(
    r"^(?:from\s+|between\s+)?(\d{4})\s*(?:-|–|to|and|through)\s*(\d{4})$"
)
_MONTH_YEAR = re.compile(r"^(?:in\s+)?([a-z]+)\s+(\d{4})$")
_NUMERIC_MONTH = re.compile(r"^(\d{4})-(\d{1,2})$")
_QUARTER = re.compile(r"^q([1-4])\s*(\d{4})$|^(first|second|third|fourth) quarter of (\d{4})$")
_COARSE = re.compile(r"^(early|mid|late)[\s-](\d{4})$")
_AFTER = re.compile(r"^(?:after|since)\s+(\d{4})$")
_BEFORE = re.compile(r"^(?:before|until|through|up to)\s+(\d{4})$")
_YEAR_RE_LABEL = re.compile(r"^\d{4}$")

_DAYS = {"early": (1, 1), "mid": (7, 1), "late": (12, 31)}


def _year_window(year: int) -> tuple[float, float]:
    return float(epoch_days(date(year, 1, 1))), float(epoch_days(date(year, 12, 31)))


def _month_window(year: int, month: int) -> tuple[float, float]:
    start = date(year, month, 1)
    end = date(year + 1, 1, 1) if month == 12 else date(year, month + 1, 1)
    return float(epoch_days(start)), float(epoch_days(end)) - 1


def _clip(start: float, end: float, data: TimeSeriesDataset, label: str) -> TimeWindow:
    span = data.span
    lo, hi = max(start, span.start), min(end, span.end)
    if lo > hi:
        raise Unresolvable(f"{label!r} lies outside the data span")
    return TimeWindow(lo, hi, label=label)


def patch_boundary_times(patch_sets) -> list[float]:
    """Sorted distinct boundary times across one or more patch lists."""
    times = set()
    for patches in patch_sets:
        for p in patches:
            times.add(p.start_time)
            times.add(p.end_time)
    return sorted(times)


def align_temporal_expression(
    expr: str,
    patches,
    data: TimeSeriesDataset,
) -> TimeWindow:
    """Resolve a time phrase to a window of the data.

    Calendar phrases (years, ranges, month-years, quarters) resolve to
    their interval clipped to the data span; coarse {early, mid, late}-year
    phrases snap to the nearest patch boundary. ``patches`` is an iterable
    of patch lists, one per dimension.
    """
    text = expr.strip().lower().rstrip(".")
    if not text:
        raise Unresolvable("empty phrase")

    if data.time_kind == "ordinal":
        labels = [lbl.lower() for lbl in data.labels]
        if text in labels:
            t = data.timestamps[labels.index(text)]
            return TimeWindow(t, t, label=expr.strip())
        m = re.match(
            r"^(?:from\s+|between\s+)?(\S+)\s*(?:\.\.|–| to | and | through |-)\s*(\S+)$",
            text,
        )
        if m and m.group(1) in labels and m.group(2) in labels:
            t0 = data.timestamps[labels.index(m.group(1))]
            t1 = data.timestamps[labels.index(m.group(2))]
            return TimeWindow(min(t0, t1), max(t0, t1), label=expr.strip())
        raise Unresolvable(f"{expr!r} matches no ordinal label")

    m = _YEAR_ONLY.match(text)
    if m:
        start, end = _year_window(int(m.group(1)))
        return _clip(start, end, data, m.group(1))
    m = _AFTER.match(text)
    if m:
        start, _ = _year_window(int(m.group(1)))
        return _clip(start, data.span.end, data, text)
    m = _BEFORE.match(text)
    if m:
        _, end = _year_window(int(m.group(1)))
        return _clip(data.span.start, end, data, text)
    m = _YEAR_RANGE.match(text)
    if m:
        y0, y1 = sorted((int(m.group(1)), int(m.group(2))))
        start, _ = _year_window(y0)
        _, end = _year_window(y1)
        return _clip(start, end, data, f"{y0}-{y1}")
    m = _NUMERIC_MONTH.match(text)
    if m and 1 <= int(m.group(2)) <= 12:
        start, end = _month_window(int(m.group(1)), int(m.group(2)))
        return _clip(start, end, data, text)
    m = _MONTH_YEAR.match(text)
    if m and m.group(1) in _MONTHS:
        year, month = int(m.group(2)), _MONTHS[m.group(1)]
        start, end = _month_window(year, month)
        return _clip(start, end, data, f"{year}-{month:02d}")
    m = _QUARTER.match(text)
    if m:
        q = int(m.group(1)) if m.group(1) else "first second third fourth".split().index(m.group(3)) + 1
        year = int(m.group(2) or m.group(4))
        start, _ = _month_window(year, 3 * (q - 1) + 1)
        _, end = _month_window(year, 3 * q)
        return _clip(start, end, data, f"Q{q} {year}")
    m = re.match(r"^(?:from\s+|between\s+)?(\S+)\s*(?:\.\.|–|—| to | and | through )\s*(\S+)$", text)
    if m:
        lo, hi = parse_time_label(m.group(1)), parse_time_label(m.group(2))
        if lo is not None and hi is not None:
            start = float(epoch_days(lo))
            # the right endpoint covers its whole labelled period
            g = m.group(2)
            if _YEAR_RE_LABEL.match(g):
                _, end = _year_window(hi.year)
            elif re.match(r"^\d{4}-\d{1,2}$", g):
                _, end = _month_window(hi.year, hi.month)
            else:
                end = float(epoch_days(hi))
            if end < start:
                start, end = float(epoch_days(hi)), float(epoch_days(lo))
            return _clip(start, end, data, text)
    m = _COARSE.match(text)
    if m:
        part, year = m.group(1), int(m.group(2))
        month, day = _DAYS[part]
        anchor = float(epoch_days(date(year, month, day)))
        span = data.span
        if anchor < span.start - 366 or anchor > span.end + 366:
            raise Unresolvable(f"{expr!r} lies outside the data span")
        boundaries = [t for t in patch_boundary_times(patches) if span.contains(t)]
        if not boundaries:
            raise Unresolvable("no patch boundaries to snap to")
        snap = min(boundaries, key=lambda t: (abs(t - anchor), t))
        return TimeWindow(snap, snap, label=expr.strip())
    raise Unresolvable(f"cannot parse time phrase {expr!r}")


# --- pairwise assembly ------------------------------------------------------


def _dominance_intervals(
    a,
    b,
    data: TimeSeriesDataset,
    window: TimeWindow,
    relation: RelationClass | None,
    dim_a: str,
    dim_b: str,
) -> list[dict]:
    """Who is on top between consecutive crossings, with sample-aligned labels."""
    if relation is None:
        return []
    if relation.kind == SAME_RELATION:
        inside = [lbl for t, lbl in zip(data.timestamps, data.labels) if window.contains(t)]
        return [{"above": relation.above, "start": inside[0], "end": inside[-1]}]
    marks = [window.start] + [c.time for c in relation.crossings] + [window.end]
    out = []
    for lo, hi in zip(marks, marks[1:]):
        inside = [
            (t, lbl, va, vb)
            for t, lbl, va, vb in zip(data.timestamps, data.labels, a, b)
            if lo <= t <= hi and va is not None and vb is not None
        ]
        inside = [(t, lbl) for t, lbl, va, vb in inside if va != vb]
        if not inside:
            continue
        t_mid = inside[len(inside) // 2][0]
        idx = data.timestamps.index(t_mid)
        above = dim_a if a[idx] > b[idx] else dim_b
        out.append({"above": above, "start": inside[0][1], "end": inside[-1][1]})
    return out


def _grid_windows(records, window: TimeWindow, data: TimeSeriesDataset) -> list[TimeWindow]:
    """Consecutive patch-boundary intervals of the records, clipped to window."""
    times = [t for t in patch_boundary_times([r.patches for r in records]) if window.contains(t)]
    if window.start not in times:
        times.insert(0, window.start)
    if window.end not in times:
        times.append(window.end)
    label_of = {t: lbl for t, lbl in zip(data.timestamps, data.labels)}

    def lbl(t: float) -> str:
        return label_of.get(t, f"{t:g}")

    out = []
    for t0, t1 in zip(times, times[1:]):
        if t1 > t0:
            out.append(TimeWindow(t0, t1, label=f"{lbl(t0)}..{lbl(t1)}"))
    return out


def _coalesce(pairs: list[TrendPairClass], label_sep: str = "..") -> list[TrendPairClass]:
    """Join adjacent windows that share a kind and per-dimension directions."""
    out: list[TrendPairClass] = []
    for tp in pairs:
        if (
            out
            and out[-1].kind == tp.kind
            and out[-1].direction_a == tp.direction_a
            and out[-1].direction_b == tp.direction_b
            and out[-1].window.end == tp.window.start
        ):
            prev = out[-1]
            start_lbl = prev.window.label.split(label_sep)[0]
            end_lbl = tp.window.label.split(label_sep)[-1]
            out[-1] = TrendPairClass(
                kind=tp.kind,
                window=TimeWindow(
                    prev.window.start, tp.window.end, label=f"{start_lbl}{label_sep}{end_lbl}"
                ),
                direction_a=tp.direction_a,
                direction_b=tp.direction_b,
            )
        else:
            out.append(tp)
    return out


def multi_insight(
    uni_records,
    data: TimeSeriesDataset,
    window: TimeWindow | None = None,
    depth: int = 1,
) -> MultiInsightRecord:
    """Pairwise relations, trend pairs, and rankings for a chart window.

    ``depth`` controls temporal granularity: 0 analyzes the window as a
    whole; >= 1 descends to the merged patch-boundary grid of each pair.
    """
    records = list(uni_records)
    if len(records) < 2:
        raise SingleDimension("multi-dimensional analysis needs >= 2 dimensions")
    if window is None:
        window = TimeWindow(
            data.span.start, data.span.end, label=f"{data.labels[0]}..{data.labels[-1]}"
        )

    pairs = []
    all_windows: list[TimeWindow] = []
    for ia in range(len(records)):
        for ib in range(ia + 1, len(records)):
            ra, rb = records[ia], records[ib]
            a, b = data.dimensions[ra.dimension], data.dimensions[rb.dimension]
            evidence: list[tuple[str, str]] = []
            try:
                relation = classify_relation(
                    a, b, timestamps=data.timestamps, labels=data.labels,
                    window=window, dim_a=ra.dimension, dim_b=rb.dimension,
                )
            except TieThroughout:
                relation = None
                evidence.append((window.label, "series identical throughout window"))
            dominance = _dominance_intervals(
                a, b, data, window, relation, ra.dimension, rb.dimension
            )

            if depth <= 0:
                grid = [window]
            else:
                grid = _grid_windows([ra, rb], window, data)
            trend_pairs = []
            for w in grid:
                try:
                    trend_pairs.append(classify_trend_pair(ra, rb, w))
                except WindowEmpty:
                    continue
            trend_pairs = _coalesce(trend_pairs)
            gap = gap_trend(a, b, timestamps=data.timestamps, window=window)
            if gap is not None:
                trend_pairs.append(gap)
            pairs.append(
                PairInsight(
                    dim_a=ra.dimension,
                    dim_b=rb.dimension,
                    relation=relation,
                    trend_pairs=tuple(trend_pairs),
                    dominance=tuple(dominance),
                    evidence=tuple(evidence),
                )
            )
            all_windows.extend(grid)

    # whole-window ranking first, then the per-grid periods
    seen = set()
    periods = []
    for w in [window] + (all_windows if depth > 0 else []):
        key = (w.start, w.end)
        if key not in seen:
            seen.add(key)
            periods.append(w)
    rankings = tuple(rank_over_periods(data, periods))
    return MultiInsightRecord(pairs=tuple(pairs), rankings=rankings, window=window)


def insight_tuples(record: MultiInsightRecord) -> frozenset:
    """Canonical comparable facts of a record, for voting and novelty tests."""
    out = set()
    for pair in record.pairs:
        key = (pair.dim_a, pair.dim_b)
        if pair.relation is not None:
            rel = pair.relation
            if rel.kind == SAME_RELATION:
                out.add(("relation", *key, SAME_RELATION, rel.above))
            else:
                out.add(("relation", *key, CONTRAST_RELATION, len(rel.crossings)))
        for tp in pair.trend_pairs:
            if tp.kind == GAP_TREND:
                out.add((GAP_TREND, *key, tp.gap_direction, tp.window.label))
            else:
                out.add((tp.kind, *key, tp.direction_a, tp.direction_b, tp.window.label))
    return frozenset(out)


def propose_trend_pairs(record_dicts: list[dict], depth: int) -> list[dict]:
    """Record-level trend-pair proposals from serialized single-dim analyses.

    This mirrors what a language model can infer from the patch summaries
    alone (no raw data): per-window net directions from patch endpoints.
    Used by the deterministic mock backend to draft candidates.
    """
    def boundaries(rec: dict) -> list[str]:
        out = []
        for p in rec["patches"]:
            out.append(p["start_time"])
            out.append(p["end_time"])
        return out

    def net_on(rec: dict, lo: str, hi: str) -> float:
        net = 0.0
        for p in rec["patches"]:
            if p["end_time"] <= lo or p["start_time"] >= hi:
                continue
            net += p["stats"]["net_change"]
        return net

    proposals = []
    for ia in range(len(record_dicts)):
        for ib in range(ia + 1, len(record_dicts)):
            ra, rb = record_dicts[ia], record_dicts[ib]
            if depth <= 0:
                grid = [(ra["span"]["start"], ra["span"]["end"])]
            else:
                marks = sorted(set(boundaries(ra)) | set(boundaries(rb)))
                grid = list(zip(marks, marks[1:]))
            entries = []
            for lo, hi in grid:
                da = _direction(net_on(ra, lo, hi))
                db = _direction(net_on(rb, lo, hi))
                # merge adjacent windows that agree, mirroring the module
                if entries and entries[-1]["directions"] == [da, db] and \
                        entries[-1]["window"].endswith(f"..{lo}"):
                    prev_lo = entries[-1]["window"].split("..")[0]
                    entries[-1]["window"] = f"{prev_lo}..{hi}"
                    continue
                entries.append(
                    {
                        "kind": SAME_TREND if da == db else CONTRAST_TREND,
                        "pair": [ra["dimension"], rb["dimension"]],
                        "window": f"{lo}..{hi}",
                        "directions": [da, db],
                    }
                )
            proposals.extend(entries)
    return proposals
