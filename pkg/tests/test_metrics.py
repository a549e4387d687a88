import itertools
import math
import random

import numpy as np
import pytest

from chartsum.errors import EmptyDoc, EmptyInput, ZeroSentences
from chartsum.metrics import (
    MetricsConfig,
    PointSet,
    diversity,
    embed,
    format_report,
    hallucination_rate,
    semantic_richness,
)
from chartsum.sumdoc import L1, L2, L3, Sentence, SummaryDoc


def exhaustive_mst_weight(points: np.ndarray) -> float:
    """Minimum total weight over all labelled spanning trees (Pruefer codes)."""
    n = points.shape[0]
    if n < 2:
        return 0.0
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    if n == 2:
        return float(dist[0, 1])

    def decode(code):
        degree = [1] * n
        for v in code:
            degree[v] += 1
        edges = []
        code = list(code)
        leaves = sorted(i for i in range(n) if degree[i] == 1)
        for v in code:
            leaf = leaves.pop(0)
            edges.append((leaf, v))
            degree[v] -= 1
            if degree[v] == 1:
                # insert keeping the leaf list sorted
                import bisect

                bisect.insort(leaves, v)
        edges.append((leaves[0], leaves[1]))
        return edges

    best = math.inf
    for code in itertools.product(range(n), repeat=n - 2):
        weight = sum(dist[a, b] for a, b in decode(code))
        best = min(best, weight)
    return float(best)


def test_fixed_points_exact_values():
    ps = PointSet(points=np.array([[0.0], [1.0], [2.0]]))
    d = diversity(ps)
    assert d["remote_clique"] == pytest.approx(4.0 / 3.0)
    assert d["chamfer"] == pytest.approx(1.0)
    assert d["mst_dispersion"] == pytest.approx(2.0)


def test_two_identical_points_all_zero():
    ps = PointSet(points=np.array([[1.0, 2.0], [1.0, 2.0]]))
    d = diversity(ps)
    for key in ("chamfer", "mst_dispersion", "sparseness", "entropy",
                "remote_clique", "span"):
        assert d[key] == 0.0


def test_single_point_degenerate_convention():
    d = diversity(PointSet(points=np.array([[3.0, 4.0]])))
    assert d["degenerate"]
    assert all(d[k] == 0.0 for k in
               ("remote_clique", "chamfer", "mst_dispersion", "span",
                "sparseness", "entropy"))


def test_mst_matches_exhaustive_enumeration():
    rng = random.Random(0)
    for trial in range(30):
        n = rng.randint(2, 6)
        dim = rng.randint(1, 4)
        points = np.array(
            [[rng.uniform(-5, 5) for _ in range(dim)] for _ in range(n)]
        )
        got = diversity(PointSet(points=points))["mst_dispersion"]
        want = exhaustive_mst_weight(points)
        assert got == pytest.approx(want, abs=1e-9), trial


def test_chamfer_never_exceeds_remote_clique():
    rng = random.Random(1)
    for trial in range(30):
        n = rng.randint(2, 12)
        points = np.array(
            [[rng.uniform(-3, 3) for _ in range(3)] for _ in range(n)]
        )
        d = diversity(PointSet(points=points))
        assert d["chamfer"] <= d["remote_clique"] + 1e-12


def test_permutation_invariance():
    rng = random.Random(2)
    points = np.array([[rng.uniform(0, 1) for _ in range(4)] for _ in range(8)])
    base = diversity(PointSet(points=points))
    shuffled = points[np.random.RandomState(7).permutation(8)]
    other = diversity(PointSet(points=shuffled))
    for key in ("remote_clique", "chamfer", "mst_dispersion", "span",
                "sparseness", "entropy"):
        assert base[key] == pytest.approx(other[key], rel=1e-9, abs=1e-12)


def test_mst_edge_count_property():
    # duplicating a point adds a zero-weight edge, never increasing the MST
    rng = random.Random(3)
    points = np.array([[rng.uniform(0, 1) for _ in range(3)] for _ in range(6)])
    base = diversity(PointSet(points=points))["mst_dispersion"]
    dup = np.vstack([points, points[2]])
    with_dup = diversity(PointSet(points=dup))["mst_dispersion"]
    assert with_dup <= base + 1e-12


def test_entropy_bounds():
    cfg = MetricsConfig(entropy_grid_bins=10)
    rng = random.Random(4)
    points = np.array([[rng.uniform(0, 1) for _ in range(5)] for _ in range(40)])
    e = diversity(PointSet(points=points), cfg)["entropy"]
    assert 0.0 <= e <= math.log(cfg.entropy_grid_bins ** 2)


def test_embed_identical_sentences_identical_vectors():
    ps = embed(["same sentence here", "same sentence here"])
    assert np.allclose(ps.points[0], ps.points[1])


def test_embed_disjoint_vocabulary_nearly_orthogonal():
    ps = embed(["alpha beta gamma delta", "omicron pi rho sigma"])
    cos = float(ps.points[0] @ ps.points[1])
    assert abs(cos) < 0.05


def test_embed_empty_input():
    with pytest.raises(EmptyInput):
        embed([])


def make_doc(levels):
    return SummaryDoc(sentences=tuple(
        Sentence(index=i, text=f"s{i}.", level=level)
        for i, level in enumerate(levels)
    ))


def test_semantic_richness_examples():
    assert semantic_richness(make_doc([L2] * 3 + [L3] * 3 + [L1] * 2)) == 0.75
    assert semantic_richness(make_doc([L1] * 4)) == 0.0
    assert semantic_richness(make_doc([L3] * 4)) == 1.0
    with pytest.raises(EmptyDoc):
        semantic_richness(SummaryDoc(sentences=()))


def test_hallucination_rate_examples():
    assert hallucination_rate(range(3), 10) == pytest.approx(0.3)
    assert hallucination_rate(range(12), 10) == pytest.approx(1.2)
    assert hallucination_rate([], 7) == 0.0
    with pytest.raises(ZeroSentences):
        hallucination_rate([], 0)


def test_report_renders_all_columns():
    rows = {
        "gold": {"remote_clique": 1.0, "chamfer": 0.5, "mst_dispersion": 2.0,
                 "span": 0.9, "sparseness": 1.1, "entropy": 2.0,
                 "semantic_richness": 0.75, "hallucination_rate": 0.0},
        "model-x": {"remote_clique": 1.2, "hallucination_rate": None},
    }
    text = format_report(rows)
    assert "RC" in text and "HalluRate" in text
    assert "n/a" in text  # missing metric renders explicitly
    assert text.splitlines()[2].startswith("gold")
