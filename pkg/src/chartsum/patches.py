"""Numerical pattern analysis: segmentation of series into trend-consistent patches.

A dimension is cut at significant local extrema (prominence relative to the
global range), consecutive low-variance patches are merged under a
median-plus-k-standard-deviations threshold, and each patch gets summary
statistics plus a trend class. Missing values ride along as gaps and are
excluded from every statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import TooShort, UnknownDimension
from .ingest import BoundChart


class TrendClass(str, Enum):
    RISING = "Rising"
    FALLING = "Falling"
    STABLE = "Stable"
    CHANGE = "Change"
    BIG_CHANGE = "BigChange"
    CYCLIC = "Cyclic"
    OSCILLATING = "Oscillating"


@dataclass(frozen=True)
class SegmentationConfig:
    k: float = 0.0
    prominence_fraction: float = 0.05
    stable_slope_eps: float = 0.02
    oscillation_min_crossings: int = 4
    cyclicality_min_autocorr: float = 0.6
    change_net_fraction: float = 0.25
    significance_ratio: float = 0.25
    big_change_max_span_fraction: float = 0.15

    def __post_init__(self):
        if self.prominence_fraction <= 0 or self.prominence_fraction > 1:
            raise ValueError("prominence_fraction must be in (0, 1]")
        if self.stable_slope_eps <= 0:
            raise ValueError("stable_slope_eps must be positive")
        if self.oscillation_min_crossings <= 0:
            raise ValueError("oscillation_min_crossings must be positive")
        if not 0 < self.cyclicality_min_autocorr < 1:
            raise ValueError("cyclicality_min_autocorr must be in (0, 1)")
        if self.change_net_fraction <= 0:
            raise ValueError("change_net_fraction must be positive")
        if self.significance_ratio <= 0:
            raise ValueError("significance_ratio must be positive")


@dataclass(frozen=True)
class PatchStats:
    min_value: float
    min_index: int
    max_value: float
    max_index: int
    mean: float
    variance: float
    growth_rate: float
    growth_is_absolute: bool
    net_change: float
    value_range: float
    first_value: float
    last_value: float
    trend_class: TrendClass | None = None

    def to_dict(self) -> dict:
        return {
            "min": {"value": self.min_value, "index": self.min_index},
            "max": {"value": self.max_value, "index": self.max_index},
            "mean": self.mean,
            "variance": self.variance,
            "growth_rate": self.growth_rate,
            "growth_is_absolute": self.growth_is_absolute,
            "net_change": self.net_change,
            "range": self.value_range,
            "first_value": self.first_value,
            "last_value": self.last_value,
            "trend": self.trend_class.value if self.trend_class else None,
        }


@dataclass(frozen=True)
class Patch:
    dimension: str
    start_index: int
    end_index: int
    start_time: float
    end_time: float
    start_label: str
    end_label: str
    values: tuple[float | None, ...]
    times: tuple[float, ...]
    stats: PatchStats

    def __post_init__(self):
        if self.start_index > self.end_index:
            raise ValueError("patch start_index exceeds end_index")

    @property
    def length(self) -> int:
        return self.end_index - self.start_index + 1

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "start_index": self.start_index,
            "end_index": self.end_index,
            "start_time": self.start_label,
            "end_time": self.end_label,
            "stats": self.stats.to_dict(),
        }


@dataclass(frozen=True)
class UniInsightRecord:
    """Compact single-dimension analysis record handed to the text backend."""

    dimension: str
    unit: str
    start_label: str
    end_label: str
    patches: tuple[Patch, ...]
    global_min: dict
    global_max: dict
    overall_growth_rate: float
    growth_is_absolute: bool
    overall_mean: float

    def to_dict(self) -> dict:
        return {
            "kind": "uni_insight",
            "dimension": self.dimension,
            "unit": self.unit,
            "span": {"start": self.start_label, "end": self.end_label},
            "patches": [p.to_dict() for p in self.patches],
            "global_min": self.global_min,
            "global_max": self.global_max,
            "overall_growth_rate": self.overall_growth_rate,
            "growth_is_absolute": self.growth_is_absolute,
            "overall_mean": self.overall_mean,
        }


def _dense(series) -> tuple[list[int], list[float]]:
    """Positions and values of the non-missing samples."""
    idx = [i for i, v in enumerate(series) if v is not None]
    return idx, [float(series[i]) for i in idx]


def _max_prominences(vals: list[float]) -> dict[int, float]:
    """Prominence of every interior local maximum (plateaus count once)."""
    n = len(vals)
    out: dict[int, float] = {}
    for i in range(1, n - 1):
        if vals[i] <= vals[i - 1]:
            continue
        j = i + 1
        while j < n and vals[j] == vals[i]:
            j += 1
        if j >= n or vals[j] > vals[i]:
            continue  # plateau runs to the end, or keeps climbing
        left_min = math.inf
        p = i - 1
        while p >= 0 and vals[p] <= vals[i]:
            left_min = min(left_min, vals[p])
            p -= 1
        right_min = math.inf
        p = j
        while p < n and vals[p] <= vals[i]:
            right_min = min(right_min, vals[p])
            p += 1
        out[i] = vals[i] - max(left_min, right_min)
    return out


def find_segmentation_points(series, cfg: SegmentationConfig | None = None) -> list[int]:
    """Indices of local extrema prominent enough to cut the series at.

    Prominence must reach ``prominence_fraction`` of the global range;
    endpoints never qualify. Indices refer to the original series even when
    missing values are present.
    """
    cfg = cfg or SegmentationConfig()
    idx, vals = _dense(series)
    if len(vals) < 2:
        raise TooShort(f"need at least 2 values, got {len(vals)}")
    rng = max(vals) - min(vals)
    if rng == 0:
        return []
    threshold = cfg.prominence_fraction * rng
    points = set()
    for pos, prom in _max_prominences(vals).items():
        if prom >= threshold:
            points.add(idx[pos])
    negated = [-v for v in vals]
    for pos, prom in _max_prominences(negated).items():
        if prom >= threshold:
            points.add(idx[pos])
    return sorted(points)


def _compute_stats(values, start_index: int) -> PatchStats:
    present = [(i, float(v)) for i, v in enumerate(values) if v is not None]
    if not present:
        raise ValueError("patch has no values")
    offsets, vals = zip(*present)
    n = len(vals)
    mean = math.fsum(vals) / n
    variance = math.fsum((v - mean) ** 2 for v in vals) / n
    min_pos = min(range(n), key=lambda i: (vals[i], i))
    max_pos = min(range(n), key=lambda i: (-vals[i], i))
    first, last = vals[0], vals[-1]
    net = last - first
    if first != 0:
        growth, absolute = net / abs(first), False
    else:
        growth, absolute = net, True
    return PatchStats(
        min_value=vals[min_pos],
        min_index=start_index + offsets[min_pos],
        max_value=vals[max_pos],
        max_index=start_index + offsets[max_pos],
        mean=mean,
        variance=variance,
        growth_rate=growth,
        growth_is_absolute=absolute,
        net_change=net,
        value_range=vals[max_pos] - vals[min_pos],
        first_value=first,
        last_value=last,
        trend_class=None,
    )


def _autocorrelation(vals: list[float], lag: int, mean: float, denom: float) -> float:
    n = len(vals)
    num = math.fsum((vals[t] - mean) * (vals[t + lag] - mean) for t in range(n - lag))
    return (num / (n - lag)) / denom


def _has_cyclic_peak(vals: list[float], min_autocorr: float) -> bool:
    """Local maximum of the autocorrelation at lag >= 2 above the threshold."""
    n = len(vals)
    max_lag = n // 2
    if max_lag < 2:
        return False
    mean = math.fsum(vals) / n
    denom = math.fsum((v - mean) ** 2 for v in vals) / n
    if denom == 0:
        return False
    r = [1.0] + [_autocorrelation(vals, lag, mean, denom) for lag in range(1, max_lag + 1)]
    for lag in range(2, max_lag + 1):
        left = r[lag - 1]
        right = r[lag + 1] if lag + 1 <= max_lag else -math.inf
        if r[lag] > left and r[lag] >= right and r[lag] >= min_autocorr:
            return True
    return False


def _mean_crossings(vals: list[float]) -> int:
    mean = math.fsum(vals) / len(vals)
    signs = [1 if v > mean else -1 for v in vals if v != mean]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def classify_trend(
    values,
    cfg: SegmentationConfig | None = None,
    *,
    series_range: float | None = None,
    significance_context: tuple[float, float, int] | None = None,
) -> TrendClass:
    """Assign a trend class to one patch's values.

    Decision ladder: Cyclic, then Oscillating, then Stable for flat
    low-variance patches, then Change when the net movement is a minor
    share of the patch's own range, then Rising/Falling by slope sign,
    with a promotion to BigChange for range-significant short patches.
    ``significance_context`` is (baseline_range, span_fraction,
    sibling_patch_count) from the whole series; without it no promotion
    happens.
    """
    cfg = cfg or SegmentationConfig()
    vals = [float(v) for v in values if v is not None]
    if not vals:
        raise TooShort("no values to classify")
    if len(vals) == 1:
        return TrendClass.STABLE
    rng = series_range if series_range is not None else max(vals) - min(vals)
    if rng == 0:
        return TrendClass.STABLE

    if _has_cyclic_peak(vals, cfg.cyclicality_min_autocorr):
        return TrendClass.CYCLIC
    if _mean_crossings(vals) >= cfg.oscillation_min_crossings:
        return TrendClass.OSCILLATING

    net = vals[-1] - vals[0]
    nslope = (net / (len(vals) - 1)) / rng
    variance = _compute_stats(vals, 0).variance
    patch_range = max(vals) - min(vals)
    if abs(nslope) < cfg.stable_slope_eps and variance < (cfg.stable_slope_eps * rng) ** 2:
        return TrendClass.STABLE
    # up-and-down fluctuation: the net movement is a minor share of the total
    if abs(net) < cfg.change_net_fraction * patch_range:
        return TrendClass.CHANGE

    trend = TrendClass.RISING if net > 0 else TrendClass.FALLING
    if significance_context is not None:
        baseline, span_fraction, siblings = significance_context
        patch_range = max(vals) - min(vals)
        if (
            siblings >= 2
            and baseline > 0
            and patch_range / baseline >= cfg.significance_ratio
            and span_fraction <= cfg.big_change_max_span_fraction
        ):
            return TrendClass.BIG_CHANGE
    return trend


def _make_patch(dimension, series, timestamps, labels, start: int, end: int) -> Patch:
    values = tuple(series[start : end + 1])
    return Patch(
        dimension=dimension,
        start_index=start,
        end_index=end,
        start_time=float(timestamps[start]),
        end_time=float(timestamps[end]),
        start_label=str(labels[start]),
        end_label=str(labels[end]),
        values=values,
        times=tuple(float(t) for t in timestamps[start : end + 1]),
        stats=_compute_stats(values, start),
    )


def _merge_run(run: list[Patch]) -> Patch:
    first, last = run[0], run[-1]
    values = tuple(v for p in run for v in p.values)
    return Patch(
        dimension=first.dimension,
        start_index=first.start_index,
        end_index=last.end_index,
        start_time=first.start_time,
        end_time=last.end_time,
        start_label=first.start_label,
        end_label=last.end_label,
        values=values,
        times=tuple(t for p in run for t in p.times),
        stats=_compute_stats(values, first.start_index),
    )


def merge_threshold(patches, k: float) -> float:
    """Median of patch variances plus k standard deviations of them."""
    variances = sorted(p.stats.variance for p in patches)
    n = len(variances)
    mid = n // 2
    median = variances[mid] if n % 2 else (variances[mid - 1] + variances[mid]) / 2
    mean = math.fsum(variances) / n
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in variances) / n)
    return median + k * std


def merge_low_variance_patches(patches, cfg: SegmentationConfig | None = None) -> list[Patch]:
    """Merge every maximal run of >= 2 consecutive patches below the threshold.

    The threshold is computed once from the incoming patch variances and is
    not recomputed after merging (single pass).
    """
    cfg = cfg or SegmentationConfig()
    patches = list(patches)
    if len(patches) <= 1:
        return patches
    threshold = merge_threshold(patches, cfg.k)
    out: list[Patch] = []
    run: list[Patch] = []
    for patch in patches:
        if patch.stats.variance < threshold:
            run.append(patch)
            continue
        if len(run) >= 2:
            out.append(_merge_run(run))
        else:
            out.extend(run)
        run = []
        out.append(patch)
    if len(run) >= 2:
        out.append(_merge_run(run))
    else:
        out.extend(run)
    return out


def _finalize_trends(
    patches: list[Patch],
    cfg: SegmentationConfig,
    significance_baseline: float | None,
) -> list[Patch]:
    all_vals = [v for p in patches for v in p.values if v is not None]
    series_range = max(all_vals) - min(all_vals) if all_vals else 0.0
    baseline = (
        significance_baseline
        if significance_baseline is not None
        else max(p.stats.value_range for p in patches)
    )
    total_len = sum(p.length for p in patches)
    finalized = []
    for patch in patches:
        trend = classify_trend(
            patch.values,
            cfg,
            series_range=series_range,
            significance_context=(baseline, patch.length / total_len, len(patches)),
        )
        finalized.append(replace(patch, stats=replace(patch.stats, trend_class=trend)))
    return finalized


def segment(
    series,
    cfg: SegmentationConfig | None = None,
    *,
    timestamps=None,
    labels=None,
    dimension: str = "series",
    significance_baseline: float | None = None,
) -> list[Patch]:
    """Segment one dimension into trend-consistent patches.

    Cuts at the significant extrema, merges low-variance runs once, then
    attaches statistics and trend classes. Deterministic for fixed inputs;
    the patches tile [0, n-1] in index space.
    """
    cfg = cfg or SegmentationConfig()
    n = len(series)
    if timestamps is None:
        timestamps = list(range(n))
    if labels is None:
        labels = [str(t) for t in timestamps]
    cuts = find_segmentation_points(series, cfg)

    boundaries = []
    start = 0
    for cut in cuts:
        boundaries.append((start, cut))
        start = cut + 1
    boundaries.append((start, n - 1))

    # fold any all-missing slice into its neighbor so every patch has stats
    merged_bounds: list[tuple[int, int]] = []
    for lo, hi in boundaries:
        if any(v is not None for v in series[lo : hi + 1]):
            merged_bounds.append((lo, hi))
        elif merged_bounds:
            plo, _ = merged_bounds[-1]
            merged_bounds[-1] = (plo, hi)
        else:
            merged_bounds.append((lo, hi))  # leading gap joins the next patch
    if len(merged_bounds) > 1 and all(v is None for v in series[merged_bounds[0][0] : merged_bounds[0][1] + 1]):
        lo, _ = merged_bounds.pop(0)
        nlo, nhi = merged_bounds[0]
        merged_bounds[0] = (lo, nhi)

    patches = [
        _make_patch(dimension, series, timestamps, labels, lo, hi) for lo, hi in merged_bounds
    ]
    patches = merge_low_variance_patches(patches, cfg)
    return _finalize_trends(patches, cfg, significance_baseline)


def chart_baseline_range(data, cfg: SegmentationConfig | None = None) -> float:
    """Largest patch range across every dimension of the chart."""
    cfg = cfg or SegmentationConfig()
    best = 0.0
    for name in data.dimension_names:
        for patch in segment(
            data.dimensions[name],
            cfg,
            timestamps=data.timestamps,
            labels=data.labels,
            dimension=name,
        ):
            best = max(best, patch.stats.value_range)
    return best


def uni_insight(bound: BoundChart, dimension: str, cfg: SegmentationConfig | None = None) -> UniInsightRecord:
    """Full single-dimension analysis record for the given chart dimension."""
    cfg = cfg or SegmentationConfig()
    data = bound.data
    if dimension not in data.dimensions:
        raise UnknownDimension(f"dimension {dimension!r} not in {data.dimension_names}")
    baseline = chart_baseline_range(data, cfg)
    series = data.dimensions[dimension]
    patches = segment(
        series,
        cfg,
        timestamps=data.timestamps,
        labels=data.labels,
        dimension=dimension,
        significance_baseline=baseline,
    )
    overall = _compute_stats(series, 0)
    return UniInsightRecord(
        dimension=dimension,
        unit=data.units.get(dimension, ""),
        start_label=data.labels[0],
        end_label=data.labels[-1],
        patches=tuple(patches),
        global_min={
            "value": overall.min_value,
            "time": data.labels[overall.min_index],
            "index": overall.min_index,
        },
        global_max={
            "value": overall.max_value,
            "time": data.labels[overall.max_index],
            "index": overall.max_index,
        },
        overall_growth_rate=overall.growth_rate,
        growth_is_absolute=overall.growth_is_absolute,
        overall_mean=overall.mean,
    )
