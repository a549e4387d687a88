"""Deterministic claim verifiers and claim extraction.

Each verifier recomputes one kind of quantitative or trend claim directly
from the data and returns a Verdict. Claims travel as JSON between the
text backend and the pipeline; ``parse_claim_sentence`` is the shared
deterministic extractor for the sentence shapes the writer produces.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace

from .errors import (
    ClaimParseError,
    TrendAbsent,
    UnknownDimension,
    UnknownStatistic,
    WindowEmpty,
)
from .ingest import TimeSeriesDataset, TimeWindow
from .patches import SegmentationConfig, TrendClass, chart_baseline_range, classify_trend, segment
from .relations import (
    CONTRAST_RELATION,
    CONTRAST_TREND,
    GAP_TREND,
    SAME_RELATION,
    SAME_TREND,
    align_temporal_expression,
    classify_relation,
    gap_trend,
)

EXTREMUM_KIND = "extremum"
NUMERIC_KIND = "numeric"
TREND_KIND = "trend_direction"
RANGE_KIND = "range"
MULTI_KIND = "multi_trend"
SIGNIFICANCE_KIND = "significance"

CLAIM_KINDS = (
    EXTREMUM_KIND,
    NUMERIC_KIND,
    TREND_KIND,
    RANGE_KIND,
    MULTI_KIND,
    SIGNIFICANCE_KIND,
)

EXTREMUM_REL_TOL = 0.005
NUMERIC_REL_TOL = 0.01
VALUE_AT_REL_TOL = 0.005
SIGNIFICANCE_THRESHOLD = 0.25

PASS = "pass"
FAIL = "fail"
UNVERIFIABLE = "unverifiable"


def fmt_num(v: float) -> str:
    """Canonical prose formatting for numbers (stable across runs/platforms)."""
    return format(float(v), "g")


@dataclass(frozen=True)
class Claim:
    kind: str
    source_sentence: int = -1
    dimension: str | None = None
    pair: tuple[str, str] | None = None
    window_phrase: str = ""
    window: TimeWindow | None = None
    which: str | None = None          # extremum: "max" | "min"
    value: float | None = None
    claimed_time: str | None = None
    statistic: str | None = None      # numeric: mean | growth_rate | value_at
    at_time: str | None = None
    direction: str | None = None      # trend_direction claims
    trend: str | None = None          # range claims: rising | falling
    relation: str | None = None       # multi_trend claims
    above: str | None = None
    asserted: str | None = None       # significance: significant | minor
    attr_value: float | None = None   # value smuggled into a multi-dim clause
    attr_time: str | None = None
    unresolvable_window: bool = False

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        for name in (
            "dimension", "window_phrase", "which", "value", "claimed_time",
            "statistic", "at_time", "direction", "trend", "relation",
            "above", "asserted", "attr_value", "attr_time",
        ):
            v = getattr(self, name)
            if v not in (None, ""):
                out[name] = v
        if self.pair is not None:
            out["pair"] = list(self.pair)
        if self.source_sentence >= 0:
            out["source_sentence"] = self.source_sentence
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "Claim":
        if not isinstance(raw, dict) or raw.get("kind") not in CLAIM_KINDS:
            raise ClaimParseError(f"bad claim object: {raw!r}")
        pair = raw.get("pair")
        if pair is not None:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ClaimParseError(f"bad pair in claim: {pair!r}")
            pair = (str(pair[0]), str(pair[1]))
        value = raw.get("value")
        if value is not None:
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ClaimParseError(f"non-numeric claim value {value!r}") from None
        return cls(
            kind=raw["kind"],
            source_sentence=int(raw.get("source_sentence", -1)),
            dimension=raw.get("dimension"),
            pair=pair,
            window_phrase=str(raw.get("window_phrase", "")),
            which=raw.get("which"),
            value=value,
            claimed_time=raw.get("claimed_time"),
            statistic=raw.get("statistic"),
            at_time=raw.get("at_time"),
            direction=raw.get("direction"),
            trend=raw.get("trend"),
            relation=raw.get("relation"),
            above=raw.get("above"),
            asserted=raw.get("asserted"),
            attr_value=raw.get("attr_value"),
            attr_time=raw.get("attr_time"),
        )


@dataclass(frozen=True)
class Verdict:
    status: str
    computed: object = None
    tolerance_used: float = 0.0
    explanation: str = ""

    def __post_init__(self):
        if self.status == FAIL and self.computed is None:
            raise ValueError("Fail verdict must carry the computed correction")

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "computed": self.computed,
            "tolerance_used": self.tolerance_used,
            "explanation": self.explanation,
        }


def _within(claimed: float, true: float, rel_tol: float) -> bool:
    if true == 0:
        return abs(claimed) <= rel_tol
    return abs(claimed - true) <= rel_tol * abs(true)


def _window_or_span(claim: Claim, data: TimeSeriesDataset) -> TimeWindow:
    if claim.window is not None:
        return claim.window
    return data.span


def _series_in_window(data: TimeSeriesDataset, dimension: str, window: TimeWindow):
    if dimension not in data.dimensions:
        raise UnknownDimension(f"dimension {dimension!r} not in {data.dimension_names}")
    pts = [
        (i, float(v))
        for i, (t, v) in enumerate(zip(data.timestamps, data.dimensions[dimension]))
        if v is not None and window.contains(t)
    ]
    if not pts:
        raise WindowEmpty(f"no samples for {dimension!r} in {window.label or window}")
    return pts


def resolve_window(claim: Claim, data: TimeSeriesDataset, patch_sets) -> Claim:
    """Attach the resolved TimeWindow for the claim's phrase (span if none).

    A phrase outside the grammar or the data span marks the claim
    unverifiable instead of failing extraction.
    """
    if claim.window is not None:
        return claim
    if not claim.window_phrase:
        return replace(claim, window=data.span)
    from .errors import Unresolvable

    try:
        window = align_temporal_expression(claim.window_phrase, patch_sets, data)
    except Unresolvable:
        return replace(claim, unresolvable_window=True)
    return replace(claim, window=window)


def _point_candidates(
    window: TimeWindow,
    data: TimeSeriesDataset,
    dims,
    cfg: SegmentationConfig | None,
) -> list[TimeWindow]:
    """Windows to test when a phrase pins fewer than two samples.

    Coarse phrases snap to a patch boundary and fine phrases may cover a
    single sample; a trend there means the movement of the patches anchored
    at that time, so each overlapping patch supplies a candidate window.
    """
    samples = sum(1 for t in data.timestamps if window.contains(t))
    if samples >= 2:
        return [window]
    cfg = cfg or SegmentationConfig()
    seen = set()
    cands: list[TimeWindow] = []
    for dim in dims:
        if dim not in data.dimensions:
            continue
        for p in segment(
            data.dimensions[dim], cfg,
            timestamps=data.timestamps, labels=data.labels, dimension=dim,
        ):
            if p.end_time >= window.start and p.start_time <= window.end:
                key = (p.start_time, p.end_time)
                if key not in seen and p.start_time < p.end_time:
                    seen.add(key)
                    cands.append(
                        TimeWindow(p.start_time, p.end_time, label=window.label)
                    )
    return cands or [window]


def verify_extremum(claim: Claim, data: TimeSeriesDataset,
                    cfg: SegmentationConfig | None = None) -> Verdict:
    """Check a global max/min claim against the true extremum on the window."""
    window = _window_or_span(claim, data)
    pts = _series_in_window(data, claim.dimension, window)
    values = [v for _, v in pts]
    if claim.which == "min":
        true_val = min(values)
    else:
        true_val = max(values)
    true_idx = pts[values.index(true_val)][0]
    true_label = data.labels[true_idx]
    computed = {"value": true_val, "time": true_label}

    if claim.value is None or not _within(claim.value, true_val, EXTREMUM_REL_TOL):
        return Verdict(
            status=FAIL, computed=computed, tolerance_used=EXTREMUM_REL_TOL,
            explanation=f"true {claim.which or 'max'} on {window.label or 'the window'} "
                        f"is {true_val:g} at {true_label}",
        )
    if claim.claimed_time:
        cfg = cfg or SegmentationConfig()
        patches = segment(
            data.dimensions[claim.dimension], cfg,
            timestamps=data.timestamps, labels=data.labels, dimension=claim.dimension,
        )
        home = next(p for p in patches if p.start_index <= true_idx <= p.end_index)
        try:
            claimed_win = align_temporal_expression(claim.claimed_time, [patches], data)
        except Exception:
            return Verdict(
                status=UNVERIFIABLE, computed=computed,
                explanation=f"cannot resolve claimed time {claim.claimed_time!r}",
            )
        if claimed_win.end < home.start_time or claimed_win.start > home.end_time:
            return Verdict(
                status=FAIL, computed=computed, tolerance_used=EXTREMUM_REL_TOL,
                explanation=f"extremum occurs at {true_label}, not {claim.claimed_time}",
            )
    return Verdict(status=PASS, computed=computed, tolerance_used=EXTREMUM_REL_TOL)


def verify_numeric(claim: Claim, data: TimeSeriesDataset) -> Verdict:
    """Recompute a mean / growth-rate / point-value claim."""
    window = _window_or_span(claim, data)
    if claim.statistic == "value_at":
        if not claim.at_time:
            raise UnknownStatistic("value_at claim without a time")
        at = align_temporal_expression(claim.at_time, [], data)
        pts = _series_in_window(data, claim.dimension, at)
        true_val = pts[0][1]
        tol = VALUE_AT_REL_TOL
    elif claim.statistic == "mean":
        pts = _series_in_window(data, claim.dimension, window)
        vals = [v for _, v in pts]
        true_val = math.fsum(vals) / len(vals)
        tol = NUMERIC_REL_TOL
    elif claim.statistic == "growth_rate":
        pts = _series_in_window(data, claim.dimension, window)
        first, last = pts[0][1], pts[-1][1]
        true_val = (last - first) / abs(first) if first != 0 else last - first
        tol = NUMERIC_REL_TOL
    else:
        raise UnknownStatistic(f"statistic {claim.statistic!r} has no oracle")

    computed = {"value": true_val, "statistic": claim.statistic}
    if claim.value is not None and _within(claim.value, true_val, tol):
        return Verdict(status=PASS, computed=computed, tolerance_used=tol)
    return Verdict(
        status=FAIL, computed=computed, tolerance_used=tol,
        explanation=f"recomputed {claim.statistic} is {true_val:g}",
    )


_DIRECTION_WORDS = {
    "rising": "rising", "upward": "rising", "up": "rising", "increasing": "rising",
    "falling": "falling", "downward": "falling", "down": "falling", "decreasing": "falling",
    "stable": "stable", "flat": "stable", "steady": "stable",
    "oscillating": "oscillating", "fluctuating": "oscillating",
    "cyclic": "cyclic", "cyclical": "cyclic",
}

_LADDER_MATCH = {
    "stable": {TrendClass.STABLE},
    "oscillating": {TrendClass.OSCILLATING, TrendClass.CHANGE},
    "cyclic": {TrendClass.CYCLIC},
}


def verify_trend_direction(claim: Claim, data: TimeSeriesDataset,
                           cfg: SegmentationConfig | None = None) -> Verdict:
    """Check a directional or stability/cyclicality claim on a window."""
    base = _window_or_span(claim, data)
    claimed = _DIRECTION_WORDS.get((claim.direction or "").lower())
    if claimed is None:
        raise UnknownStatistic(f"unknown direction {claim.direction!r}")
    cfg = cfg or SegmentationConfig()
    all_vals = [v for v in data.dimensions.get(claim.dimension, ()) if v is not None]
    if not all_vals:
        raise UnknownDimension(f"dimension {claim.dimension!r} unknown")
    series_range = max(all_vals) - min(all_vals)

    best_fail: Verdict | None = None
    for window in _point_candidates(base, data, [claim.dimension], cfg):
        pts = _series_in_window(data, claim.dimension, window)
        values = [v for _, v in pts]
        ladder = classify_trend(values, cfg, series_range=series_range)
        net = values[-1] - values[0]
        if claimed in ("rising", "falling"):
            dominant = "rising" if net > 0 else "falling" if net < 0 else "flat"
            # the window-dominant sign decides unless the ladder saw no trend
            if dominant == claimed and ladder is not TrendClass.STABLE:
                return Verdict(status=PASS, computed={"direction": dominant},
                               tolerance_used=0.0)
            verdict = Verdict(
                status=FAIL, computed={"direction": dominant, "class": ladder.value},
                explanation=f"window moves {dominant} (net {net:g}), "
                            f"classified {ladder.value}",
            )
        else:
            if ladder in _LADDER_MATCH[claimed]:
                return Verdict(status=PASS, computed={"class": ladder.value},
                               tolerance_used=0.0)
            verdict = Verdict(
                status=FAIL, computed={"class": ladder.value},
                explanation=f"window classifies as {ladder.value}, not {claimed}",
            )
        if best_fail is None:
            best_fail = verdict
    return best_fail


def _trend_runs(patches, want_rising: bool):
    """Maximal runs of consecutive patches whose net change matches.

    A run only continues across a patch boundary when the step between the
    patches moves with the trend too; a counter-move there is a reversal
    even though both sides match in isolation.
    """
    runs = []
    current = []
    for p in patches:
        sign_ok = p.stats.net_change > 0 if want_rising else p.stats.net_change < 0
        if sign_ok and current:
            step = p.stats.first_value - current[-1].stats.last_value
            if (want_rising and step < 0) or (not want_rising and step > 0):
                runs.append(current)
                current = []
        if sign_ok:
            current.append(p)
        else:
            if current:
                runs.append(current)
            current = []
    if current:
        runs.append(current)
    return runs


def verify_range(claim: Claim, data: TimeSeriesDataset,
                 cfg: SegmentationConfig | None = None) -> Verdict:
    """Check the claimed start/end of a trend against patch boundaries."""
    window = _window_or_span(claim, data)
    if claim.dimension not in data.dimensions:
        raise UnknownDimension(f"dimension {claim.dimension!r} unknown")
    want_rising = (claim.trend or "rising") in ("rising", "upward", "increasing")
    cfg = cfg or SegmentationConfig()
    patches = segment(
        data.dimensions[claim.dimension], cfg,
        timestamps=data.timestamps, labels=data.labels, dimension=claim.dimension,
    )
    runs = _trend_runs(patches, want_rising)
    if not runs:
        raise TrendAbsent(f"no {'rising' if want_rising else 'falling'} patch found")

    def overlap(run) -> float:
        lo, hi = run[0].start_time, run[-1].end_time
        return max(0.0, min(hi, window.end) - max(lo, window.start))

    best = max(runs, key=overlap)
    comp_start, comp_end = best[0].start_time, best[-1].end_time
    computed = {"start": best[0].start_label, "end": best[-1].end_label}

    boundaries = sorted({p.start_time for p in patches} | {p.end_time for p in patches})

    def grid_pos(t: float) -> int:
        return sum(1 for b in boundaries if b <= t)

    ok = (
        abs(grid_pos(window.start) - grid_pos(comp_start)) <= 1
        and abs(grid_pos(window.end) - grid_pos(comp_end)) <= 1
    )
    if ok:
        return Verdict(status=PASS, computed=computed, tolerance_used=1.0)
    return Verdict(
        status=FAIL, computed=computed, tolerance_used=1.0,
        explanation=f"trend spans {computed['start']}..{computed['end']}, "
                    f"not {window.label or 'the claimed window'}",
    )


def verify_multidim(claim: Claim, data: TimeSeriesDataset) -> Verdict:
    """Recompute a cross-dimension relation or trend-pair claim."""
    if not claim.pair:
        raise ClaimParseError("multi_trend claim without a pair")
    dim_a, dim_b = claim.pair
    for d in (dim_a, dim_b):
        if d not in data.dimensions:
            raise UnknownDimension(f"dimension {d!r} unknown")
    window = _window_or_span(claim, data)

    if claim.attr_value is not None:
        # a value asserted inside a multi-dimension clause must belong to
        # one of the named dimensions; otherwise the clause mixes attributes
        owners = []
        for name in data.dimension_names:
            vals = [v for v in data.dimensions[name] if v is not None]
            for extreme in (max(vals), min(vals)):
                if _within(claim.attr_value, extreme, EXTREMUM_REL_TOL):
                    owners.append(name)
        if not set(owners) & {dim_a, dim_b} and owners:
            return Verdict(
                status=UNVERIFIABLE,
                computed={"belongs_to": sorted(set(owners))},
                explanation=f"value {claim.attr_value:g} belongs to "
                            f"{sorted(set(owners))}, not to {dim_a}/{dim_b}",
            )

    a, b = data.dimensions[dim_a], data.dimensions[dim_b]
    if claim.relation in (SAME_RELATION, CONTRAST_RELATION):
        rel = classify_relation(
            a, b, timestamps=data.timestamps, window=window, dim_a=dim_a, dim_b=dim_b
        )
        computed = rel.to_dict()
        if rel.kind != claim.relation:
            return Verdict(
                status=FAIL, computed=computed,
                explanation=f"window shows {rel.kind}, not {claim.relation}",
            )
        if claim.relation == SAME_RELATION and claim.above and rel.above != claim.above:
            return Verdict(
                status=FAIL, computed=computed,
                explanation=f"{rel.above} is the upper series, not {claim.above}",
            )
        if claim.relation == CONTRAST_RELATION and claim.above:
            expected = "a_overtakes_b" if claim.above == dim_a else "b_overtakes_a"
            if not any(c.direction == expected for c in rel.crossings):
                overtaker = dim_b if claim.above == dim_a else dim_a
                return Verdict(
                    status=FAIL, computed=computed,
                    explanation=f"{overtaker} does the overtaking, not {claim.above}",
                )
        return Verdict(status=PASS, computed=computed, tolerance_used=0.0)

    if claim.relation in (SAME_TREND, CONTRAST_TREND):
        def net(series, win: TimeWindow) -> float:
            pts = [
                float(v) for t, v in zip(data.timestamps, series)
                if v is not None and win.contains(t)
            ]
            if len(pts) < 2:
                raise WindowEmpty(f"window {win.label or win} too sparse")
            return pts[-1] - pts[0]

        best_fail: Verdict | None = None
        for win in _point_candidates(window, data, [dim_a, dim_b], None):
            sa_net, sb_net = net(a, win), net(b, win)
            sa = (sa_net > 0) - (sa_net < 0)
            sb = (sb_net > 0) - (sb_net < 0)
            kind = SAME_TREND if sa == sb else CONTRAST_TREND
            computed = {"kind": kind, "directions": [
                "rising" if s > 0 else "falling" if s < 0 else "flat"
                for s in (sa, sb)
            ]}
            if kind == claim.relation:
                return Verdict(status=PASS, computed=computed, tolerance_used=0.0)
            if best_fail is None:
                best_fail = Verdict(
                    status=FAIL, computed=computed,
                    explanation=f"window shows {kind}, not {claim.relation}",
                )
        return best_fail

    if claim.relation == GAP_TREND:
        gap = gap_trend(a, b, timestamps=data.timestamps, window=window)
        if gap is None:
            return Verdict(
                status=FAIL, computed={"kind": "none"},
                explanation="gap between the series does not move consistently",
            )
        computed = {"kind": GAP_TREND, "gap_direction": gap.gap_direction}
        if claim.direction and claim.direction != gap.gap_direction:
            return Verdict(
                status=FAIL, computed=computed,
                explanation=f"gap is {gap.gap_direction}, not {claim.direction}",
            )
        return Verdict(status=PASS, computed=computed, tolerance_used=0.0)

    raise ClaimParseError(f"unknown multi_trend relation {claim.relation!r}")


def significance_of_change(
    dimension: str,
    window: TimeWindow,
    data: TimeSeriesDataset,
    cfg: SegmentationConfig | None = None,
    threshold: float = SIGNIFICANCE_THRESHOLD,
) -> dict:
    """Window range relative to the largest patch range anywhere on the chart."""
    pts = _series_in_window(data, dimension, window)
    values = [v for _, v in pts]
    window_range = max(values) - min(values)
    baseline = chart_baseline_range(data, cfg or SegmentationConfig())
    ratio = window_range / baseline if baseline > 0 else 0.0
    return {"ratio": ratio, "significant": ratio >= threshold}


def verify_significance(claim: Claim, data: TimeSeriesDataset,
                        cfg: SegmentationConfig | None = None) -> Verdict:
    """Check 'sharp'/'slight' style wording against chart-wide variability."""
    base = _window_or_span(claim, data)
    candidates = _point_candidates(base, data, [claim.dimension], cfg)
    # the dominant local movement is what the wording describes
    results = [significance_of_change(claim.dimension, w, data, cfg) for w in candidates]
    result = max(results, key=lambda r: r["ratio"])
    asserted_significant = claim.asserted == "significant"
    computed = {
        "ratio": result["ratio"],
        "significant": result["significant"],
        "asserted": claim.asserted,
    }
    if result["significant"] == asserted_significant:
        return Verdict(status=PASS, computed=computed,
                       tolerance_used=SIGNIFICANCE_THRESHOLD)
    word = "significant" if result["significant"] else "minor"
    return Verdict(
        status=FAIL, computed=computed, tolerance_used=SIGNIFICANCE_THRESHOLD,
        explanation=f"change ratio {result['ratio']:.3f} makes this {word}, "
                    f"not {claim.asserted}",
    )


_VERIFIERS = {
    EXTREMUM_KIND: verify_extremum,
    NUMERIC_KIND: lambda c, d, cfg=None: verify_numeric(c, d),
    TREND_KIND: verify_trend_direction,
    RANGE_KIND: verify_range,
    MULTI_KIND: lambda c, d, cfg=None: verify_multidim(c, d),
    SIGNIFICANCE_KIND: verify_significance,
}


def verify_claim(claim: Claim, data: TimeSeriesDataset,
                 cfg: SegmentationConfig | None = None) -> Verdict:
    """Route a claim to its oracle."""
    if claim.unresolvable_window:
        return Verdict(
            status=UNVERIFIABLE,
            explanation=f"time phrase {claim.window_phrase!r} matches no span",
        )
    try:
        verifier = _VERIFIERS[claim.kind]
    except KeyError:
        raise ClaimParseError(f"no oracle for claim kind {claim.kind!r}") from None
    return verifier(claim, data, cfg=cfg)


# --- deterministic sentence-level claim extraction --------------------------

_NUM = r"(-?\d+(?:\.\d+)?)"
_PHRASE = (
    r"((?:early|mid|late)[\s-]\d{4}|(?:after|since|before|until|through)\s+\d{4}"
    r"|\d{4}-\d{2}\s*(?:to|\.\.|–|and)\s*\d{4}-\d{2}"
    r"|[A-Za-z]+\s+\d{4}|\d{4}-\d{2}|\d{4}\s*(?:-|–|to|and|through)\s*\d{4}|\d{4})"
)

_SIGNIFICANT_ADVERBS = {
    "sharply", "sharp", "dramatically", "dramatic", "significantly", "significant",
    "steeply", "steep", "drastically", "drastic",
}
_MINOR_ADVERBS = {
    "slightly", "slight", "modestly", "modest", "mildly", "mild",
    "gently", "gentle", "marginally", "marginal",
}
_MINOR_OF = {
    "sharply": "modestly", "sharp": "modest",
    "dramatically": "modestly", "dramatic": "modest",
    "significantly": "modestly", "significant": "modest",
    "steeply": "gently", "steep": "gentle",
    "drastically": "mildly", "drastic": "mild",
}
_UPGRADE_OF = {
    "slightly": "sharply", "slight": "sharp",
    "modestly": "sharply", "modest": "sharp",
    "mildly": "sharply", "mild": "sharp",
    "gently": "steeply", "gentle": "steep",
    "marginally": "sharply", "marginal": "sharp",
}
_FALL_OF = {
    "rose": "fell", "increased": "decreased", "climbed": "fell", "grew": "shrank",
    "gained": "lost", "surged": "plunged", "jumped": "slid", "rebounded": "fell",
}
_RISE_OF = {
    "fell": "rose", "declined": "rose", "dropped": "rose", "decreased": "increased",
    "slid": "rose", "plunged": "surged", "sank": "rose",
}

_RISE_VERBS = "rose|increased|climbed|grew|gained|surged|jumped|rebounded"
_FALL_VERBS = "fell|declined|dropped|decreased|slid|plunged|sank"


def _window_group(m: re.Match, idx: int) -> str:
    g = m.group(idx)
    return g.strip() if g else ""


def parse_claim_sentence(sentence: str, dimensions: list[str]) -> list[dict]:
    """Extract structured claim dicts from one summary sentence.

    Pure and deterministic; recognizes the sentence shapes the writer and
    chat editor emit. Sentences outside the grammar yield no claims.
    """
    text = sentence.strip()
    claims: list[dict] = []
    dims = sorted(dimensions, key=len, reverse=True)
    dim_pat = "|".join(re.escape(d) for d in dims)
    if not dim_pat:
        return []

    def add(kind: str, **fields):
        claims.append({"kind": kind, **{k: v for k, v in fields.items() if v not in (None, "")}})

    # extremum: "X reached a maximum of 3.38 in 2007" / "X peaked at 3.38 in 2007"
    for m in re.finditer(
        rf"({dim_pat})[\w\s,]*?\s+(?:reached|reaching|hit|hitting)\s+(?:a|an|its)\s+"
        rf"(maximum|minimum|peak|low|high)\s+of\s+{_NUM}"
        rf"(?:\s+(?:in|at|during)\s+{_PHRASE})?",
        text, re.IGNORECASE,
    ):
        which = "min" if m.group(2).lower() in ("minimum", "low") else "max"
        add(EXTREMUM_KIND, dimension=m.group(1), which=which,
            value=float(m.group(3)), claimed_time=_window_group(m, 4))
    for m in re.finditer(
        rf"({dim_pat})\s+(?:peaked|topped out)\s+at\s+{_NUM}(?:\s+(?:in|during)\s+{_PHRASE})?",
        text, re.IGNORECASE,
    ):
        add(EXTREMUM_KIND, dimension=m.group(1), which="max",
            value=float(m.group(2)), claimed_time=_window_group(m, 3))
    for m in re.finditer(
        rf"({dim_pat})\s+(?:bottomed out|fell to a low)\s+(?:at|of)\s+{_NUM}"
        rf"(?:\s+(?:in|during)\s+{_PHRASE})?",
        text, re.IGNORECASE,
    ):
        add(EXTREMUM_KIND, dimension=m.group(1), which="min",
            value=float(m.group(2)), claimed_time=_window_group(m, 3))

    # numeric: "X averaged 2.5 between 2000 and 2005" / "X stood at 1.2 in 2004"
    for m in re.finditer(
        rf"({dim_pat})\s+averaged\s+{_NUM}(?:\s+(?:in|over|during|between|from)\s+{_PHRASE})?",
        text, re.IGNORECASE,
    ):
        add(NUMERIC_KIND, dimension=m.group(1), statistic="mean",
            value=float(m.group(2)), window_phrase=_window_group(m, 3))
    for m in re.finditer(
        rf"({dim_pat})\s+(?:stood at|was valued at)\s+{_NUM}\s+(?:in|at)\s+{_PHRASE}",
        text, re.IGNORECASE,
    ):
        add(NUMERIC_KIND, dimension=m.group(1), statistic="value_at",
            value=float(m.group(2)), at_time=_window_group(m, 3))
    for m in re.finditer(
        rf"({dim_pat})\s+grew\s+by\s+{_NUM}%(?:\s+(?:in|over|during)\s+{_PHRASE})?",
        text, re.IGNORECASE,
    ):
        add(NUMERIC_KIND, dimension=m.group(1), statistic="growth_rate",
            value=float(m.group(2)) / 100.0, window_phrase=_window_group(m, 3))

    # single-dimension trends, optionally with a significance adverb
    for m in re.finditer(
        rf"({dim_pat})\s+(?:{_RISE_VERBS}|{_FALL_VERBS})(?!\s+to\s+a\s)(?:\s+(\w+ly))?"
        rf"(?:\s+(?:in|during|over|throughout)\s+{_PHRASE}"
        rf"|\s+(after\s+\d{{4}}|since\s+\d{{4}}|before\s+\d{{4}})"
        rf"|\s+from\s+(\d{{4}}(?:-\d{{2}})?)\s+(?:to|through|until)\s+(\d{{4}}(?:-\d{{2}})?)"
        rf"|\s+between\s+(\d{{4}}(?:-\d{{2}})?)\s+and\s+(\d{{4}}(?:-\d{{2}})?)"
        rf"|\s+from\s+(\S+)\s+to\s+(\S+?)(?=[,.;]|\s|$)"
        rf"|\s+between\s+(\S+)\s+and\s+(\S+?)(?=[,.;]|\s|$))?",
        text, re.IGNORECASE,
    ):
        dim = m.group(1)
        verb = m.group(0).split()[len(dim.split())].lower().rstrip(",.")
        rising = any(re.fullmatch(v, verb) for v in _RISE_VERBS.split("|"))
        adverb = (m.group(2) or "").lower()
        phrase = _window_group(m, 3) or _window_group(m, 4)
        ranged = False
        for lo_idx in (5, 7, 9, 11):
            lo, hi = m.group(lo_idx), m.group(lo_idx + 1)
            if lo and hi:
                phrase = f"{lo} to {hi.rstrip('.,;')}"
                ranged = True
                break
        direction = "rising" if rising else "falling"
        add(TREND_KIND, dimension=dim, direction=direction, window_phrase=phrase)
        if ranged:
            add(RANGE_KIND, dimension=dim, trend=direction, window_phrase=phrase)
        if adverb in _SIGNIFICANT_ADVERBS:
            add(SIGNIFICANCE_KIND, dimension=dim, asserted="significant", window_phrase=phrase)
        elif adverb in _MINOR_ADVERBS:
            add(SIGNIFICANCE_KIND, dimension=dim, asserted="minor", window_phrase=phrase)

    # stability / oscillation / cyclicality
    for m in re.finditer(
        rf"({dim_pat})\s+(?:remained|stayed|held|was)\s+(?:relatively\s+|broadly\s+)?"
        rf"(stable|flat|steady|unchanged)(?:\s+(?:from|between|in|during|throughout)\s+{_PHRASE})?",
        text, re.IGNORECASE,
    ):
        add(TREND_KIND, dimension=m.group(1), direction="stable",
            window_phrase=_window_group(m, 3))
    for m in re.finditer(
        rf"({dim_pat})\s+(oscillated|fluctuated)(?:\s+\w+ly)?"
        rf"(?:\s+(?:in|during|throughout|from|between|over)\s+{_PHRASE})?",
        text, re.IGNORECASE,
    ):
        add(TREND_KIND, dimension=m.group(1), direction="oscillating",
            window_phrase=_window_group(m, 3))
    for m in re.finditer(
        rf"({dim_pat})\s+showed\s+a\s+cyclical?\s+pattern"
        rf"(?:\s+(?:in|during|throughout|from|between|over)\s+{_PHRASE})?",
        text, re.IGNORECASE,
    ):
        add(TREND_KIND, dimension=m.group(1), direction="cyclic",
            window_phrase=_window_group(m, 2))

    # relations between two dimensions
    for m in re.finditer(
        rf"({dim_pat})\s+(?:remained|stayed|was|were)?\s*(?:always\s+|consistently\s+)?"
        rf"(?:above|exceeded|outpaced|led)\s+({dim_pat})"
        rf"(?:\s+(?:from|between|in|during|throughout)\s+{_PHRASE}"
        rf"|\s+(through\s+\d{{4}}|until\s+\d{{4}}))?",
        text, re.IGNORECASE,
    ):
        phrase = _window_group(m, 3) or _window_group(m, 4)
        add(MULTI_KIND, pair=[m.group(1), m.group(2)], relation=SAME_RELATION,
            above=m.group(1), window_phrase=phrase)
    for m in re.finditer(
        rf"({dim_pat})\s+(?:overtook|surpassed|crossed above)\s+({dim_pat})"
        rf"(?:\s+(?:in|during)\s+{_PHRASE})?",
        text, re.IGNORECASE,
    ):
        # `above` names the overtaker: it must end up on top
        add(MULTI_KIND, pair=[m.group(1), m.group(2)], relation=CONTRAST_RELATION,
            above=m.group(1), window_phrase=_window_group(m, 3))
    for m in re.finditer(
        rf"[Bb]oth\s+({dim_pat})\s+and\s+({dim_pat})\s+"
        rf"({_RISE_VERBS}|{_FALL_VERBS}|rebounded)"
        rf"(?:\s+(?:in|during|over|from|between|throughout)\s+{_PHRASE})?",
        text, re.IGNORECASE,
    ):
        add(MULTI_KIND, pair=[m.group(1), m.group(2)], relation=SAME_TREND,
            window_phrase=_window_group(m, 4))
    for m in re.finditer(
        rf"({dim_pat})\s+(?:{_RISE_VERBS})[\w\s,]*?\s+while\s+({dim_pat})\s+(?:{_FALL_VERBS})"
        rf"(?:\s+(?:in|during|from|between|over)\s+{_PHRASE})?",
        text, re.IGNORECASE,
    ):
        add(MULTI_KIND, pair=[m.group(1), m.group(2)], relation=CONTRAST_TREND,
            window_phrase=_window_group(m, 3))
    for m in re.finditer(
        rf"({dim_pat})\s+(?:{_FALL_VERBS})[\w\s,]*?\s+while\s+({dim_pat})\s+(?:{_RISE_VERBS})"
        rf"(?:\s+(?:in|during|from|between|over)\s+{_PHRASE})?",
        text, re.IGNORECASE,
    ):
        add(MULTI_KIND, pair=[m.group(1), m.group(2)], relation=CONTRAST_TREND,
            window_phrase=_window_group(m, 3))
    for m in re.finditer(
        rf"gap\s+between\s+({dim_pat})\s+and\s+({dim_pat})\s+(widened|narrowed)"
        rf"(?:\s+(?:in|during|from|over)\s+{_PHRASE})?",
        text, re.IGNORECASE,
    ):
        add(MULTI_KIND, pair=[m.group(1), m.group(2)], relation=GAP_TREND,
            direction="widening" if m.group(3).lower() == "widened" else "narrowing",
            window_phrase=_window_group(m, 4))

    # a bare-trend fragment of a two-dimension clause carries no window of its
    # own; the multi claim already covers it
    multi_dims = {d for c in claims if c["kind"] == MULTI_KIND for d in c.get("pair", [])}
    claims = [
        c
        for c in claims
        if not (
            c["kind"] == TREND_KIND
            and not c.get("window_phrase")
            and c.get("dimension") in multi_dims
        )
    ]
    for c in claims:
        c["source_sentence"] = -1
    return claims


def extract_claims(
    sentence: str,
    refs,
    backend,
    *,
    data: TimeSeriesDataset,
    patch_sets,
    sentence_index: int = -1,
) -> list[Claim]:
    """Ask the backend for the structured claims in one sentence.

    The backend returns claim JSON (the mock applies the deterministic
    grammar); windows are then resolved against the patch boundaries.
    Sentences with no quantitative content return an empty list.
    """
    from .backend import GenRequest

    ref_dims = sorted({d for r in (refs or []) for d in getattr(r, "dimensions", [])})
    payload = {
        "mode": "extract",
        "sentence": sentence,
        "dimensions": data.dimension_names,
        "referenced": ref_dims,
    }
    req = GenRequest(
        role_prompt="claim-extraction",
        user_prompt=json.dumps(payload, sort_keys=True),
        tag="selfcheck",
    )
    response = backend.complete(req)
    try:
        parsed = json.loads(response.text)
        raw_claims = parsed["claims"]
        assert isinstance(raw_claims, list)
    except (json.JSONDecodeError, KeyError, AssertionError) as exc:
        raise ClaimParseError(f"backend claim payload malformed: {exc}") from exc

    claims = []
    for raw in raw_claims:
        claim = Claim.from_dict(raw)
        claim = replace(claim, source_sentence=sentence_index)
        claims.append(resolve_window(claim, data, patch_sets))
    return claims


# --- deterministic correction of failed claims -------------------------------


def _swap_word(sentence: str, table: dict[str, str]) -> str | None:
    for word in sorted(table, key=len, reverse=True):
        if re.search(rf"\b{word}\b", sentence, re.IGNORECASE):
            return re.sub(rf"\b{word}\b", table[word], sentence, count=1,
                          flags=re.IGNORECASE)
    return None


def apply_correction(sentence: str, claim: Claim, verdict: Verdict) -> str:
    """Rewrite one sentence so it states the verdict's computed facts.

    Pure text surgery over the known sentence shapes; returns the input
    unchanged when no textual handle is found (the caller then replaces
    the sentence wholesale via ``canonical_sentence``).
    """
    if verdict.status != FAIL:
        return sentence
    computed = verdict.computed if isinstance(verdict.computed, dict) else {}

    if claim.kind in (EXTREMUM_KIND, NUMERIC_KIND):
        new_val = computed.get("value")
        if new_val is None or claim.value is None:
            return sentence
        old, new = fmt_num(claim.value), fmt_num(new_val)
        if old not in sentence:
            return sentence
        out = sentence.replace(old, new, 1)
        new_time = computed.get("time")
        if claim.kind == EXTREMUM_KIND and claim.claimed_time and new_time:
            if claim.claimed_time != new_time and claim.claimed_time in out:
                out = out.replace(claim.claimed_time, new_time, 1)
        return out

    if claim.kind == SIGNIFICANCE_KIND:
        significant = computed.get("significant")
        if claim.asserted == "significant" and significant is False:
            out = _swap_word(sentence, _MINOR_OF)
        elif claim.asserted == "minor" and significant is True:
            out = _swap_word(sentence, _UPGRADE_OF)
        else:
            out = None
        return out if out is not None else sentence

    if claim.kind in (TREND_KIND, RANGE_KIND):
        target = computed.get("direction") or ""
        if claim.kind == RANGE_KIND:
            # move the claimed endpoints onto the computed patch boundaries
            out = sentence
            start, end = computed.get("start"), computed.get("end")
            if start and end and claim.window_phrase:
                parts = re.split(r"\s*(?:to|and|through|-|–|\.\.)\s*", claim.window_phrase)
                if len(parts) == 2 and parts[0] in out and parts[1] in out:
                    out = out.replace(parts[0], start, 1).replace(parts[1], end, 1)
                    return out
            return sentence
        if target == "falling":
            out = _swap_word(sentence, _FALL_OF)
        elif target == "rising":
            out = _swap_word(sentence, _RISE_OF)
        elif computed.get("class") == TrendClass.STABLE.value:
            out = _swap_word(
                sentence, {w: "held steady" for w in (*_FALL_OF, *_RISE_OF)}
            )
        else:
            out = None
        return out if out is not None else sentence

    if claim.kind == MULTI_KIND and claim.pair:
        a, b = claim.pair
        kind = computed.get("kind")
        if kind == SAME_RELATION and computed.get("above") and claim.above:
            if claim.above in sentence and computed["above"] != claim.above:
                other = b if computed["above"] == a else a
                out = re.sub(rf"\b{re.escape(claim.above)}\b", "\x00", sentence)
                out = re.sub(rf"\b{re.escape(other)}\b", claim.above, out)
                return out.replace("\x00", other)
        if kind == SAME_TREND and claim.relation == CONTRAST_TREND:
            directions = computed.get("directions", [])
            if directions and directions[0] in ("rising", "falling"):
                verb = "rose" if directions[0] == "rising" else "fell"
                win = f" during {claim.window_phrase}" if claim.window_phrase else ""
                return f"Both {a} and {b} {verb}{win}."
        if kind == CONTRAST_TREND and claim.relation == SAME_TREND:
            directions = computed.get("directions", ["rising", "falling"])
            va = "rose" if directions[0] == "rising" else "fell"
            vb = "rose" if directions[1] == "rising" else "fell"
            win = f" during {claim.window_phrase}" if claim.window_phrase else ""
            return f"{a} {va} while {b} {vb}{win}."
    return sentence


def canonical_sentence(claim: Claim, verdict: Verdict) -> str | None:
    """A fresh sentence stating the computed fact, when one can be built."""
    computed = verdict.computed if isinstance(verdict.computed, dict) else {}
    if claim.kind == EXTREMUM_KIND and "value" in computed:
        word = "minimum" if claim.which == "min" else "maximum"
        time_part = f" in {computed['time']}" if computed.get("time") else ""
        return (
            f"{claim.dimension} reached a {word} of "
            f"{fmt_num(computed['value'])}{time_part}."
        )
    if claim.kind == NUMERIC_KIND and "value" in computed and claim.statistic == "mean":
        win = f" over {claim.window_phrase}" if claim.window_phrase else " over the period"
        return f"{claim.dimension} averaged {fmt_num(computed['value'])}{win}."
    return None
