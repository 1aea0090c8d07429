"""Retrieval metrics: Recall@k, hierarchical recall, OT alignment, PR sweeps.

Scoring follows training: parent-to-child retrieval ranks candidates by
descending beta1 with the query as parent; child-to-parent by descending
alpha2 with the query as child. A cosine mode exists for baselines. The
distribution-alignment metric is the 1-D Wasserstein distance between the
retrieved label histogram and the ground-truth hierarchy histogram, with
out-of-tree labels pooled into a trailing "other" bin.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from hierembed.geometry import tangent_entailment_angles
from hierembed.hierarchy import HierarchyTree
from hierembed.trainer import EmbeddingTable

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabelDistribution:
    """Normalized histogram over m hierarchy labels plus a trailing "other" bin."""

    labels: tuple[str, ...]  # includes "other" last
    mass: np.ndarray

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.mass):
            raise ValueError("labels and mass lengths differ")
        if abs(float(self.mass.sum()) - 1.0) > 1e-9:
            raise ValueError("mass must sum to 1")
        if np.any(self.mass < 0):
            raise ValueError("mass must be nonnegative")


@dataclass
class RetrievalResult:
    """Ranked candidates for one query; scores non-increasing, ties by id."""

    query_id: str
    ranked: list[tuple[str, float]]  # (candidate id, score)
    k: int

    @property
    def ids(self) -> list[str]:
        return [cid for cid, _ in self.ranked]


def _score(
    query: np.ndarray,
    candidate: np.ndarray,
    direction: str,
    space_kind: str,
    c: float,
    mode: str,
) -> float:
    if mode == "cosine":
        qn = np.linalg.norm(query)
        cn = np.linalg.norm(candidate)
        if qn == 0 or cn == 0:
            return -1.0
        return float(query @ candidate / (qn * cn))
    if direction == "parent_to_child":
        return tangent_entailment_angles(query, candidate, space_kind, c).beta1
    if direction == "child_to_parent":
        return tangent_entailment_angles(candidate, query, space_kind, c).alpha2
    raise ValueError(f"unknown direction {direction!r}")


def rank_candidates(
    query_id: str,
    query: np.ndarray,
    candidates: Mapping[str, np.ndarray],
    direction: str,
    space_kind: str,
    k: int,
    c: float = 1.0,
    score_mode: str = "angle",
) -> RetrievalResult:
    """Exhaustively score and rank candidates for one query."""
    scored = [
        (cid, _score(query, vec, direction, space_kind, c, score_mode))
        for cid, vec in candidates.items()
    ]
    scored.sort(key=lambda t: (-t[1], t[0]))
    if k > len(scored):
        log.debug("k=%d exceeds %d candidates; returning all", k, len(scored))
    return RetrievalResult(query_id=query_id, ranked=scored[:k], k=k)


def recall_at_k(
    results: Sequence[RetrievalResult],
    is_correct: Callable[[str, str], bool],
    k: int,
) -> float:
    """Mean over queries of the fraction of correct top-k candidates, x100."""
    per_query: list[float] = []
    skipped = 0
    for r in results:
        top = r.ranked[:k]
        if not top:
            skipped += 1
            continue
        hits = sum(1 for cid, _ in top if is_correct(r.query_id, cid))
        per_query.append(hits / len(top))
    if skipped:
        log.warning("recall_at_k: %d queries had no results", skipped)
    if not per_query:
        return 0.0
    return 100.0 * float(np.mean(per_query))


def hierarchical_recall(
    results: Sequence[RetrievalResult],
    ground_truth: Mapping[str, set[str]],
    k_large: int,
) -> float:
    """Mean percentage of each query's ground-truth set retrieved in the top k_large."""
    per_query: list[float] = []
    for r in results:
        truth = ground_truth.get(r.query_id, set())
        if not truth:
            log.debug("query %s has empty ground truth; skipped", r.query_id)
            continue
        retrieved = {cid for cid, _ in r.ranked[:k_large]}
        per_query.append(len(retrieved & truth) / len(truth))
    if not per_query:
        return 0.0
    return 100.0 * float(np.mean(per_query))


def label_distribution(
    counts: Mapping[str, float],
    tree_labels: Sequence[str],
) -> LabelDistribution:
    """Normalize counts over the query's hierarchy labels; the rest pool into "other"."""
    total = float(sum(counts.values()))
    if total <= 0:
        raise ValueError("counts must not be all zero")
    mass = [counts.get(label, 0.0) / total for label in tree_labels]
    other = sum(v for label, v in counts.items() if label not in set(tree_labels)) / total
    return LabelDistribution(labels=tuple(tree_labels) + ("other",),
                             mass=np.asarray(mass + [other], dtype=np.float64))


def ot_distance(h: LabelDistribution, r: LabelDistribution) -> float:
    """1-D Wasserstein distance with classes at consecutive integer positions.

    Closed form: the sum of absolute CDF differences over adjacent unit gaps.
    Zero iff the distributions are equal.
    """
    if h.labels != r.labels:
        raise ValueError("label distributions are not aligned")
    cdf_h = np.cumsum(h.mass)
    cdf_r = np.cumsum(r.mass)
    return float(np.abs(cdf_h[:-1] - cdf_r[:-1]).sum())


def pr_curve(
    scores: Sequence[float],
    positives: Sequence[bool],
    thresholds: Sequence[float] | None = None,
    sweep_max: float = math.pi,
    resolution: int = 65,
) -> list[tuple[float, float, float]]:
    """(threshold, precision, recall) over a score-threshold sweep.

    A pair is predicted positive when its score is >= the threshold.
    Precision at zero predictions is 1.0 by convention.
    """
    if not any(positives):
        raise ValueError("at least one positive pair is required")
    scores_a = np.asarray(scores, dtype=np.float64)
    pos_a = np.asarray(positives, dtype=bool)
    if thresholds is None:
        thresholds = np.linspace(0.0, sweep_max, resolution)
    out: list[tuple[float, float, float]] = []
    n_pos = int(pos_a.sum())
    for t in thresholds:
        pred = scores_a >= t
        tp = int((pred & pos_a).sum())
        n_pred = int(pred.sum())
        precision = tp / n_pred if n_pred else 1.0
        recall = tp / n_pos
        out.append((float(t), precision, recall))
    return out


def pr_area(curve: Sequence[tuple[float, float, float]]) -> float:
    """Area under the precision-recall curve via trapezoids over recall."""
    pts = sorted((r, p) for _, p, r in curve)
    area = 0.0
    for (r0, p0), (r1, p1) in zip(pts, pts[1:]):
        area += (r1 - r0) * (p0 + p1) / 2.0
    # close the curve down to recall 0 at the leftmost precision
    if pts and pts[0][0] > 0:
        area += pts[0][0] * pts[0][1]
    return area


def norm_profile(
    table: EmbeddingTable,
    groups: Mapping[str, str],
    bins: int = 20,
) -> dict[str, dict]:
    """Per-group mean/std/histogram of tangent-vector norms."""
    if not groups:
        raise ValueError("groups must be nonempty")
    norms = table.norms()
    by_group: dict[str, list[float]] = {}
    for node, tag in groups.items():
        if node in table:
            by_group.setdefault(tag, []).append(norms[node])
    out: dict[str, dict] = {}
    for tag, values in sorted(by_group.items()):
        arr = np.asarray(values)
        hist, edges = np.histogram(arr, bins=bins)
        out[tag] = {
            "count": int(arr.size),
            "mean": float(arr.mean()),
            "std": float(arr.std()),
            "hist": hist.tolist(),
            "bin_edges": edges.tolist(),
        }
    return out


def ground_truth_hierarchy_sets(
    queries: Iterable[str],
    query_labels: Mapping[str, set[str]],
    candidate_labels: Mapping[str, str],
    tree: HierarchyTree,
    direction: str = "parent_to_child",
) -> dict[str, set[str]]:
    """Candidate ids whose label sits below (or above) the query's labels in the tree."""
    out: dict[str, set[str]] = {}
    for q in queries:
        labels = query_labels.get(q, set())
        wanted = tree.descendants(labels) if direction == "parent_to_child" else tree.ancestors(labels)
        out[q] = {cid for cid, lab in candidate_labels.items() if lab in wanted and cid != q}
    return out
