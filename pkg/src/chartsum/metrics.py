"""Evaluation metrics: text-diversity suite, semantic richness, hallucination rate.

Diversity metrics operate on sentence embeddings: remote-clique (average of
mean pairwise distances), Chamfer distance (average of minimum pairwise
distances), MST dispersion (total minimum-spanning-tree edge weight), span
(Pth percentile distance to centroid), sparseness (mean distance to medoid),
and entropy (Shannon-Wiener index over an occupancy grid of the first two
principal components).
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import EmptyDoc, EmptyInput, ZeroSentences
from .sumdoc import L2, L3, SummaryDoc


@dataclass(frozen=True)
class MetricsConfig:
    span_percentile: float = 95.0
    entropy_grid_bins: int = 10
    embedding_dim: int = 256

    def __post_init__(self):
        if not 0 < self.span_percentile <= 100:
            raise ValueError("span_percentile must be in (0, 100]")
        if self.entropy_grid_bins < 2:
            raise ValueError("entropy_grid_bins must be >= 2")


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray  # (n, d)
    labels: tuple[int, ...] = ()

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[0] < 1:
            raise EmptyInput("point set needs at least one point")

    @property
    def size(self) -> int:
        return int(self.points.shape[0])


_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _token_index(token: str, dim: int) -> int:
    digest = hashlib.md5(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big") % dim


def embed(sentences, cfg: MetricsConfig | None = None) -> PointSet:
    """Deterministic hashed tf-idf vectors, L2-normalized."""
    cfg = cfg or MetricsConfig()
    sentences = list(sentences)
    if not sentences:
        raise EmptyInput("no sentences to embed")
    tokenized = [_TOKEN_RE.findall(s.lower()) for s in sentences]
    n = len(tokenized)
    df: dict[str, int] = {}
    for tokens in tokenized:
        for tok in set(tokens):
            df[tok] = df.get(tok, 0) + 1
    out = np.zeros((n, cfg.embedding_dim))
    for i, tokens in enumerate(tokenized):
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for tok, tf in counts.items():
            idf = math.log(n / (1 + df[tok])) + 1.0
            out[i, _token_index(tok, cfg.embedding_dim)] += tf * idf
        norm = np.linalg.norm(out[i])
        if norm > 0:
            out[i] /= norm
    return PointSet(points=out, labels=tuple(range(n)))


def _pairwise_distances(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def _mst_weight(dist: np.ndarray) -> float:
    """Prim's algorithm over the complete distance graph."""
    n = dist.shape[0]
    if n < 2:
        return 0.0
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    in_tree[0] = True
    best = dist[0].copy()
    best[0] = np.inf
    total = 0.0
    for _ in range(n - 1):
        j = int(np.argmin(np.where(in_tree, np.inf, best)))
        total += float(best[j])
        in_tree[j] = True
        best = np.minimum(best, dist[j])
        best[in_tree] = np.inf
    return total


def _grid_entropy(points: np.ndarray, bins: int) -> float:
    """Shannon-Wiener index over occupied cells of a bins x bins grid on the
    first two principal components (min-max scaled)."""
    n, d = points.shape
    centered = points - points.mean(axis=0)
    if n < 2:
        return 0.0
    # principal axes via SVD; fall back to raw axes in degenerate cases
    try:
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        comps = min(2, vt.shape[0])
        proj = centered @ vt[:comps].T
    except np.linalg.LinAlgError:
        proj = centered[:, : min(2, d)]
    if proj.shape[1] < 2:
        proj = np.hstack([proj, np.zeros((n, 2 - proj.shape[1]))])
    cells = np.zeros((n, 2), dtype=int)
    for k in range(2):
        lo, hi = proj[:, k].min(), proj[:, k].max()
        if hi > lo:
            scaled = (proj[:, k] - lo) / (hi - lo)
        else:
            scaled = np.zeros(n)
        cells[:, k] = np.minimum((scaled * bins).astype(int), bins - 1)
    occupancy: dict[tuple[int, int], int] = {}
    for cx, cy in cells:
        occupancy[(int(cx), int(cy))] = occupancy.get((int(cx), int(cy)), 0) + 1
    total = sum(occupancy.values())
    return -sum((c / total) * math.log(c / total) for c in occupancy.values()) + 0.0


def diversity(ps: PointSet, cfg: MetricsConfig | None = None) -> dict:
    """All six diversity metrics for one point set.

    A single point yields zeros by convention (flagged via "degenerate").
    """
    cfg = cfg or MetricsConfig()
    points = ps.points
    n = points.shape[0]
    if n < 2:
        return {
            "remote_clique": 0.0, "chamfer": 0.0, "mst_dispersion": 0.0,
            "span": 0.0, "sparseness": 0.0, "entropy": 0.0, "degenerate": True,
        }
    dist = _pairwise_distances(points)
    off_diag = dist + np.diag(np.full(n, np.inf))

    remote_clique = float(np.mean(dist.sum(axis=1) / (n - 1)))
    chamfer = float(np.mean(off_diag.min(axis=1)))
    mst = _mst_weight(dist)
    centroid = points.mean(axis=0)
    to_centroid = np.sqrt(((points - centroid) ** 2).sum(axis=1))
    span = float(np.percentile(to_centroid, cfg.span_percentile))
    medoid = int(np.argmin(dist.sum(axis=1)))
    sparseness = float(dist[medoid].sum() / (n - 1))
    entropy = _grid_entropy(points, cfg.entropy_grid_bins)
    return {
        "remote_clique": remote_clique,
        "chamfer": chamfer,
        "mst_dispersion": mst,
        "span": span,
        "sparseness": sparseness,
        "entropy": entropy,
        "degenerate": False,
    }


def semantic_richness(doc: SummaryDoc) -> float:
    """Share of sentences carrying statistical or perceptual content."""
    if not doc.sentences:
        raise EmptyDoc("document has no sentences")
    hits = sum(1 for s in doc.sentences if s.level in (L2, L3))
    return hits / len(doc.sentences)


def hallucination_rate(annotations, sentence_count: int) -> float:
    """Annotated hallucinations per sentence; can exceed 1."""
    if sentence_count < 1:
        raise ZeroSentences("need at least one sentence")
    return len(list(annotations)) / sentence_count


REPORT_COLUMNS = (
    "remote_clique", "chamfer", "mst_dispersion", "span",
    "sparseness", "entropy", "semantic_richness", "hallucination_rate",
)

_HEADER_OF = {
    "remote_clique": "RC",
    "chamfer": "Chamfer",
    "mst_dispersion": "MST",
    "span": "Span",
    "sparseness": "Sparseness",
    "entropy": "Entropy",
    "semantic_richness": "SemRich",
    "hallucination_rate": "HalluRate",
}


def format_report(rows: dict[str, dict]) -> str:
    """Aligned plain-text table: one row per system, fixed column order."""
    headers = ["System"] + [_HEADER_OF[c] for c in REPORT_COLUMNS]
    table = [headers]
    for system in sorted(rows):
        row = [system]
        for col in REPORT_COLUMNS:
            v = rows[system].get(col)
            row.append("n/a" if v is None else f"{v:.4f}")
        table.append(row)
    widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
    lines = []
    for i, row in enumerate(table):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
