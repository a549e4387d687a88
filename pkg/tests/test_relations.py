import random

import pytest

from chartsum.errors import (
    PeriodOutOfRange,
    SingleDimension,
    TieThroughout,
    Unresolvable,
    WindowEmpty,
)
from chartsum.ingest import TimeWindow, parse_data_table
from chartsum.patches import uni_insight
from chartsum.relations import (
    CONTRAST_RELATION,
    CONTRAST_TREND,
    GAP_TREND,
    SAME_RELATION,
    SAME_TREND,
    align_temporal_expression,
    classify_relation,
    classify_trend_pair,
    detect_intersections,
    gap_trend,
    insight_tuples,
    multi_insight,
    rank_over_periods,
)


def oracle_crossings(a, b):
    """Brute-force scan over all adjacent index pairs."""
    out = []
    prev_sign = None
    for i, (va, vb) in enumerate(zip(a, b)):
        d = va - vb
        sign = (d > 0) - (d < 0)
        if prev_sign is not None and sign != 0 and prev_sign != 0 and sign != prev_sign:
            out.append(i)
        if sign != 0:
            prev_sign = sign
    return out


def test_parallel_lines_never_cross():
    a = [t + 1 for t in range(11)]
    b = [t for t in range(11)]
    assert detect_intersections(a, b) == []


def test_linear_crossing_at_midpoint():
    a = [float(t) for t in range(11)]
    b = [10.0 - t for t in range(11)]
    crossings = detect_intersections(a, b)
    assert len(crossings) == 1
    assert crossings[0].time == pytest.approx(5.0)
    assert crossings[0].direction == "a_overtakes_b"


def test_seeded_pairs_match_bruteforce_scan():
    for seed in range(20):
        rng = random.Random(seed)
        a, b = [0.0], [1.0]
        for _ in range(99):
            a.append(a[-1] + rng.uniform(-1, 1))
            b.append(b[-1] + rng.uniform(-1, 1))
        got = detect_intersections(a, b)
        expected = oracle_crossings(a, b)
        assert [c.index_after for c in got] == expected, seed


def test_exact_tie_at_sample_counts_once():
    a = [0.0, 1.0, 2.0, 3.0]
    b = [1.0, 1.0, 1.0, 1.0]
    crossings = detect_intersections(a, b)
    assert len(crossings) == 1
    assert crossings[0].time == pytest.approx(1.0)


def test_touch_without_flip_is_not_a_crossing():
    a = [2.0, 1.0, 2.0]
    b = [1.0, 1.0, 1.0]
    assert detect_intersections(a, b) == []


def test_crossing_parity():
    for seed in range(20):
        rng = random.Random(1000 + seed)
        a = [rng.uniform(0, 10) for _ in range(50)]
        b = [rng.uniform(0, 10) for _ in range(50)]
        d0 = a[0] - b[0]
        d1 = a[-1] - b[-1]
        if d0 == 0 or d1 == 0:
            continue
        crossings = detect_intersections(a, b)
        same_side = (d0 > 0) == (d1 > 0)
        assert (len(crossings) % 2 == 0) == same_side


def test_same_relation_stocks_2000_2008(stocks_bound, stocks_patch_sets):
    data = stocks_bound.data
    window = align_temporal_expression("2000-2008", stocks_patch_sets, data)
    rel = classify_relation(
        data.dimensions["Google"], data.dimensions["Apple"],
        timestamps=data.timestamps, window=window,
        dim_a="Google", dim_b="Apple",
    )
    assert rel.kind == SAME_RELATION
    assert rel.above == "Google"


def test_single_crossing_contrast(stocks_bound):
    data = stocks_bound.data
    rel = classify_relation(
        data.dimensions["Google"], data.dimensions["Apple"],
        timestamps=data.timestamps, dim_a="Google", dim_b="Apple",
    )
    assert rel.kind == CONTRAST_RELATION
    assert len(rel.crossings) == 1


def test_identical_series_tie():
    with pytest.raises(TieThroughout):
        classify_relation([1.0, 2.0], [1.0, 2.0])


def test_relation_antisymmetry(stocks_bound, stocks_patch_sets):
    data = stocks_bound.data
    window = align_temporal_expression("2000-2008", stocks_patch_sets, data)
    ab = classify_relation(
        data.dimensions["Google"], data.dimensions["Apple"],
        timestamps=data.timestamps, window=window, dim_a="Google", dim_b="Apple",
    )
    ba = classify_relation(
        data.dimensions["Apple"], data.dimensions["Google"],
        timestamps=data.timestamps, window=window, dim_a="Apple", dim_b="Google",
    )
    assert ab.kind == ba.kind == SAME_RELATION
    assert ab.above == ba.above == "Google"


def test_crossing_antisymmetry(stocks_bound):
    data = stocks_bound.data
    ab = detect_intersections(
        data.dimensions["Google"], data.dimensions["Apple"],
        timestamps=data.timestamps, dim_a="Google", dim_b="Apple",
    )
    ba = detect_intersections(
        data.dimensions["Apple"], data.dimensions["Google"],
        timestamps=data.timestamps, dim_a="Apple", dim_b="Google",
    )
    assert len(ab) == len(ba)
    flip = {"a_overtakes_b": "b_overtakes_a", "b_overtakes_a": "a_overtakes_b"}
    for x, y in zip(ab, ba):
        assert x.time == pytest.approx(y.time)
        assert flip[x.direction] == y.direction


def test_affine_shift_leaves_relations_unchanged():
    rng = random.Random(5)
    a = [rng.uniform(0, 5) for _ in range(60)]
    b = [rng.uniform(0, 5) for _ in range(60)]
    base = detect_intersections(a, b)
    shifted = detect_intersections([v + 100 for v in a], [v + 100 for v in b])
    assert [(c.index_before, c.direction) for c in base] == [
        (c.index_before, c.direction) for c in shifted
    ]


def test_rank_single_dimension():
    ds = parse_data_table(b"date,v\n2020,5\n2021,6")
    rankings = rank_over_periods(ds, [ds.span])
    assert rankings[0].order == ("v",)


def test_rank_two_constant_series():
    csv = b"date,k,v\n2020,A,5\n2020,B,3\n2021,A,5\n2021,B,3"
    ds = parse_data_table(csv, key_field="k", value_field="v")
    rankings = rank_over_periods(ds, [ds.span])
    assert rankings[0].order == ("A", "B")
    assert not rankings[0].tied


def test_rank_three_dimensions_two_periods():
    rows = ["date,k,v"]
    series = {"A": [1, 2, 9, 9], "B": [5, 5, 1, 1], "C": [3, 3, 3, 3]}
    for i, year in enumerate(("2000", "2001", "2002", "2003")):
        for name, vals in series.items():
            rows.append(f"{year},{name},{vals[i]}")
    ds = parse_data_table("\n".join(rows).encode(), key_field="k", value_field="v")
    early = align_temporal_expression("2000-2001", [], ds)
    late = align_temporal_expression("2002-2003", [], ds)
    rankings = rank_over_periods(ds, [early, late])
    # direct means: early A=1.5 B=5 C=3; late A=9 B=1 C=3
    assert rankings[0].order == ("B", "C", "A")
    assert rankings[1].order == ("A", "C", "B")
    assert rankings[0].means["A"] == pytest.approx(1.5)


def test_rank_period_out_of_range():
    ds = parse_data_table(b"date,v\n2020,5\n2021,6")
    with pytest.raises(PeriodOutOfRange):
        rank_over_periods(ds, [TimeWindow(1e6, 2e6)])


def test_trend_pair_same_and_contrast(stocks_records, stocks_bound):
    g, a = stocks_records
    data = stocks_bound.data
    w2007 = align_temporal_expression("2007", [], data)
    tp = classify_trend_pair(g, a, w2007)
    assert tp.kind == SAME_TREND
    assert tp.direction_a == tp.direction_b == "rising"
    w_mixed = align_temporal_expression("2001-09 to 2003-03", [], data)
    tp2 = classify_trend_pair(g, a, w_mixed)
    assert tp2.kind == CONTRAST_TREND


def test_trend_pair_empty_window(stocks_records, stocks_bound):
    with pytest.raises(WindowEmpty):
        classify_trend_pair(
            stocks_records[0], stocks_records[1], TimeWindow(1.0, 2.0)
        )


def test_gap_trend_widening():
    a = [float(2 * t) for t in range(30)]
    b = [float(t) for t in range(30)]
    gap = gap_trend(a, b)
    assert gap is not None
    assert gap.gap_direction == "widening"


def test_gap_trend_tolerates_small_violations():
    a = [2.0 * t for t in range(40)]
    b = [float(t) for t in range(40)]
    a[20] = b[20] + 18.0  # one counter-step out of 39
    assert gap_trend(a, b).gap_direction == "widening"


def test_gap_trend_absent_on_flat_gap():
    a = [t + 1.0 for t in range(20)]
    b = [float(t) for t in range(20)]
    assert gap_trend(a, b) is None


# --- temporal expression alignment --------------------------------------------

def test_align_year_on_monthly_data(stocks_bound, stocks_patch_sets):
    data = stocks_bound.data
    w = align_temporal_expression("2007", stocks_patch_sets, data)
    lo, hi = data.window_indices(w)
    assert data.labels[lo] == "2007-01"
    assert data.labels[hi] == "2007-12"


def test_align_early_2008_snaps_to_january(stocks_bound, stocks_patch_sets):
    data = stocks_bound.data
    w = align_temporal_expression("early 2008", stocks_patch_sets, data)
    lo, hi = data.window_indices(w)
    assert data.labels[lo] == data.labels[hi] == "2008-01"


def test_align_unresolvable_phrase(stocks_bound, stocks_patch_sets):
    with pytest.raises(Unresolvable):
        align_temporal_expression(
            "the Jurassic period", stocks_patch_sets, stocks_bound.data
        )


def test_align_output_inside_span_and_boundary_aligned(
    stocks_bound, stocks_patch_sets
):
    data = stocks_bound.data
    boundaries = {p.start_time for ps in stocks_patch_sets for p in ps}
    boundaries |= {p.end_time for ps in stocks_patch_sets for p in ps}
    for phrase in ("early 2008", "mid 2005", "late 2009"):
        w = align_temporal_expression(phrase, stocks_patch_sets, data)
        assert data.span.start <= w.start <= w.end <= data.span.end
        assert w.start in boundaries


def test_align_quarter_and_month(stocks_bound):
    data = stocks_bound.data
    q = align_temporal_expression("Q1 2008", [], data)
    lo, hi = data.window_indices(q)
    assert (data.labels[lo], data.labels[hi]) == ("2008-01", "2008-03")
    m = align_temporal_expression("January 2008", [], data)
    lo, hi = data.window_indices(m)
    assert data.labels[lo] == data.labels[hi] == "2008-01"


# --- multi insight -------------------------------------------------------------

def test_multi_insight_stocks(stocks_records, stocks_bound):
    record = multi_insight(stocks_records, stocks_bound.data, depth=1)
    assert len(record.pairs) == 1
    pair = record.pairs[0]
    assert pair.relation.kind == CONTRAST_RELATION
    assert pair.dominance[0]["above"] == "Google"
    assert pair.dominance[0]["start"] == "2000-01"
    same_rising = [
        tp for tp in pair.trend_pairs
        if tp.kind == SAME_TREND and tp.direction_a == "rising"
        and "2007" in tp.window.label
    ]
    assert same_rising, "2007 joint rise missing"


def test_multi_insight_single_dimension_rejected(stocks_records, stocks_bound):
    with pytest.raises(SingleDimension):
        multi_insight(stocks_records[:1], stocks_bound.data)


def test_multi_insight_identical_dimensions_flagged():
    csv = b"date,k,v\n2020,A,1\n2020,B,1\n2021,A,2\n2021,B,2"
    ds = parse_data_table(csv, key_field="k", value_field="v")
    import json

    from chartsum.ingest import bind, parse_chart_spec

    spec = parse_chart_spec(json.dumps({
        "title": "t", "mark": "line",
        "encoding": {"x": {"field": "date", "type": "temporal"},
                     "y": {"field": "v", "type": "quantitative"},
                     "color": {"field": "k"}},
    }))
    bound = bind(spec, ds)
    records = [uni_insight(bound, n) for n in ds.dimension_names]
    record = multi_insight(records, ds)
    assert record.pairs[0].relation is None
    assert record.pairs[0].evidence


def test_multi_insight_three_dimensions_matches_pairwise():
    rows = ["date,k,v"]
    rng = random.Random(9)
    series = {
        name: [rng.uniform(0, 10) for _ in range(12)] for name in ("A", "B", "C")
    }
    for i in range(12):
        for name in series:
            rows.append(f"{2000 + i},{name},{series[name][i]:.3f}")
    ds = parse_data_table("\n".join(rows).encode(), key_field="k", value_field="v")
    import json

    from chartsum.ingest import bind, parse_chart_spec

    spec = parse_chart_spec(json.dumps({
        "title": "t", "mark": "line",
        "encoding": {"x": {"field": "date", "type": "temporal"},
                     "y": {"field": "v", "type": "quantitative"},
                     "color": {"field": "k"}},
    }))
    bound = bind(spec, ds)
    records = {n: uni_insight(bound, n) for n in ds.dimension_names}
    record = multi_insight(list(records.values()), ds)
    assert len(record.pairs) == 3
    for pair in record.pairs:
        expected = classify_relation(
            ds.dimensions[pair.dim_a], ds.dimensions[pair.dim_b],
            timestamps=ds.timestamps, window=record.window,
            dim_a=pair.dim_a, dim_b=pair.dim_b,
        )
        assert pair.relation.kind == expected.kind
        assert pair.relation.above == expected.above


def test_insight_tuples_stable(stocks_records, stocks_bound):
    r1 = multi_insight(stocks_records, stocks_bound.data, depth=1)
    r2 = multi_insight(stocks_records, stocks_bound.data, depth=1)
    assert insight_tuples(r1) == insight_tuples(r2)
    assert insight_tuples(r1)
