"""Bounding-box ingestion, entailment-pair generation, and hierarchy trees.

A scene entails every box in it; a larger box entails a contained smaller
box (containment = overlap covering at least 80% of the smaller box by
default); scenes additionally entail same-label boxes sampled from other
images. Label-level edges that are frequent and consistent enough survive
into the ground-truth hierarchy tree used by retrieval evaluation.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

log = logging.getLogger(__name__)

DEFAULT_CONTAINMENT = 0.80
DEFAULT_MIN_AREA = 0.01
DEFAULT_FREQ_THRESHOLD = 50
DEFAULT_PROP_THRESHOLD = 0.10


class AnnotationError(ValueError):
    """Raised on malformed annotation records (carries line numbers)."""


@dataclass(frozen=True)
class BoundingBox:
    """One annotated box; coordinates normalized to [0, 1]."""

    image_id: str
    box_id: str
    box: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax
    label: str
    is_group_of: bool = False

    @property
    def area(self) -> float:
        xmin, ymin, xmax, ymax = self.box
        return (xmax - xmin) * (ymax - ymin)

    def validate(self) -> None:
        xmin, ymin, xmax, ymax = self.box
        if not all(0.0 <= v <= 1.0 for v in self.box):
            raise AnnotationError(f"box {self.box_id}: coordinates outside [0, 1]")
        if not (xmin < xmax and ymin < ymax):
            raise AnnotationError(f"box {self.box_id}: xmin < xmax and ymin < ymax required")


@dataclass(frozen=True)
class EntailmentPair:
    """Directed parent -> child relation between node ids."""

    parent_id: str
    child_id: str
    kind: str  # "scene_to_box" | "box_to_box" | "cross_image"

    def __post_init__(self) -> None:
        if self.parent_id == self.child_id:
            raise ValueError("a node cannot entail itself")
        if self.kind not in ("scene_to_box", "box_to_box", "cross_image"):
            raise ValueError(f"unknown pair kind {self.kind!r}")


@dataclass
class HierarchyTree:
    """Label-level DAG of entailment edges with frequency/proportion stats."""

    graph: nx.DiGraph

    @property
    def labels(self) -> set[str]:
        return set(self.graph.nodes)

    @property
    def edges(self) -> list[tuple[str, str, int, float]]:
        return sorted(
            (u, v, d["frequency"], d["proportion"])
            for u, v, d in self.graph.edges(data=True)
        )

    def descendants(self, labels: Iterable[str]) -> set[str]:
        """Labels strictly below any input label (inputs excluded)."""
        out: set[str] = set()
        for label in labels:
            if label not in self.graph:
                log.debug("label %r not in hierarchy tree; ignored", label)
                continue
            out |= nx.descendants(self.graph, label)
        return out - set(labels)

    def ancestors(self, labels: Iterable[str]) -> set[str]:
        """Labels strictly above any input label (inputs excluded)."""
        out: set[str] = set()
        for label in labels:
            if label not in self.graph:
                log.debug("label %r not in hierarchy tree; ignored", label)
                continue
            out |= nx.ancestors(self.graph, label)
        return out - set(labels)

    def to_json(self) -> str:
        edges = [
            {"parent": u, "child": v, "frequency": f, "proportion": p}
            for u, v, f, p in self.edges
        ]
        return json.dumps({"edges": edges}, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "HierarchyTree":
        data = json.loads(text)
        g = nx.DiGraph()
        for e in data["edges"]:
            g.add_edge(e["parent"], e["child"],
                       frequency=e["frequency"], proportion=e["proportion"])
        return cls(graph=g)


# ---------------------------------------------------------------------------
# annotations
# ---------------------------------------------------------------------------

def load_annotations(path: str | Path, strict: bool = True) -> list[BoundingBox]:
    """Parse an annotations JSONL file into boxes.

    In strict mode any invalid line is a hard failure; in lenient mode bad
    lines are skipped and reported through logging, with line numbers.
    """
    path = Path(path)
    boxes: list[BoundingBox] = []
    errors: list[str] = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                box = BoundingBox(
                    image_id=str(rec["image_id"]),
                    box_id=str(rec["box_id"]),
                    box=tuple(float(v) for v in rec["box"]),
                    label=str(rec["label"]),
                    is_group_of=bool(rec.get("is_group_of", False)),
                )
                box.validate()
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                errors.append(f"line {lineno}: {exc}")
                continue
            boxes.append(box)
    if errors:
        if strict:
            raise AnnotationError("; ".join(errors))
        for msg in errors:
            log.warning("skipped annotation: %s", msg)
    return boxes


def filter_boxes(
    boxes: Sequence[BoundingBox],
    min_area_fraction: float = DEFAULT_MIN_AREA,
) -> list[BoundingBox]:
    """Drop boxes whose area is below the fraction threshold (inclusive keep)."""
    return [b for b in boxes if b.area >= min_area_fraction]


def containment(
    outer: BoundingBox | None,
    inner: BoundingBox,
    threshold: float = DEFAULT_CONTAINMENT,
) -> bool:
    """True iff the overlap covers at least ``threshold`` of the inner box.

    ``outer=None`` stands for the full image, which contains every box in it.
    """
    if inner.area <= 0:
        raise ValueError(f"zero-area inner box {inner.box_id}")
    if outer is None:
        return True
    if outer.image_id != inner.image_id:
        raise ValueError("containment only defined within one image")
    oxmin, oymin, oxmax, oymax = outer.box
    ixmin, iymin, ixmax, iymax = inner.box
    w = min(oxmax, ixmax) - max(oxmin, ixmin)
    h = min(oymax, iymax) - max(oymin, iymin)
    if w <= 0 or h <= 0:
        return False
    return (w * h) / inner.area >= threshold


# ---------------------------------------------------------------------------
# pair generation
# ---------------------------------------------------------------------------

def within_image_pairs(
    image_id: str,
    boxes: Sequence[BoundingBox],
    threshold: float = DEFAULT_CONTAINMENT,
    drop_group_of_children: bool = True,
) -> list[EntailmentPair]:
    """Scene->box pairs for every box, plus big->small box pairs under containment.

    A box-to-box pair requires the child to be strictly smaller in area
    (exact ties dropped); group-of boxes never act as box-to-box children
    when ``drop_group_of_children`` is set.
    """
    pairs: list[EntailmentPair] = []
    boxes = sorted(boxes, key=lambda b: b.box_id)
    for b in boxes:
        if b.image_id != image_id:
            raise ValueError(f"box {b.box_id} belongs to image {b.image_id}")
        pairs.append(EntailmentPair(image_id, b.box_id, "scene_to_box"))
    for big in boxes:
        for small in boxes:
            if big.box_id == small.box_id or small.area >= big.area:
                continue
            if drop_group_of_children and small.is_group_of:
                continue
            if containment(big, small, threshold):
                pairs.append(EntailmentPair(big.box_id, small.box_id, "box_to_box"))
    return pairs


def _label_rng(seed: int, image_id: str, label: str) -> np.random.Generator:
    # Stable per-(image, label) stream so parallel generation stays deterministic.
    digest = hashlib.sha256(f"{seed}|{image_id}|{label}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def cross_image_pairs(
    dataset: Sequence[BoundingBox],
    image_id: str,
    k: int = 1,
    seed: int = 0,
) -> list[EntailmentPair]:
    """Scene->box pairs to up to K same-label boxes sampled from other images."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return []
    own_labels = sorted({b.label for b in dataset if b.image_id == image_id})
    pairs: list[EntailmentPair] = []
    for label in own_labels:
        candidates = sorted(
            (b.box_id for b in dataset if b.label == label and b.image_id != image_id)
        )
        if not candidates:
            log.debug("no cross-image candidates for label %r of image %s", label, image_id)
            continue
        rng = _label_rng(seed, image_id, label)
        take = min(k, len(candidates))
        if take < k:
            log.debug("label %r: only %d cross-image candidates for K=%d",
                      label, len(candidates), k)
        chosen = rng.choice(len(candidates), size=take, replace=False)
        for idx in sorted(chosen):
            pairs.append(EntailmentPair(image_id, candidates[idx], "cross_image"))
    return pairs


def generate_pairs(
    boxes: Sequence[BoundingBox],
    containment_threshold: float = DEFAULT_CONTAINMENT,
    min_area_fraction: float = DEFAULT_MIN_AREA,
    k_cross: int = 1,
    seed: int = 0,
    drop_group_of_children: bool = True,
) -> list[EntailmentPair]:
    """Full pair generation: filter, within-image, then cross-image sampling."""
    kept = filter_boxes(boxes, min_area_fraction)
    by_image: dict[str, list[BoundingBox]] = {}
    for b in kept:
        by_image.setdefault(b.image_id, []).append(b)
    pairs: list[EntailmentPair] = []
    for image_id in sorted(by_image):
        pairs.extend(
            within_image_pairs(image_id, by_image[image_id],
                               containment_threshold, drop_group_of_children)
        )
        pairs.extend(cross_image_pairs(kept, image_id, k_cross, seed))
    return pairs


# ---------------------------------------------------------------------------
# hierarchy tree
# ---------------------------------------------------------------------------

def edge_statistics(
    pairs: Sequence[EntailmentPair],
    boxes: Sequence[BoundingBox],
) -> dict[tuple[str, str], tuple[int, float]]:
    """(parent_label, child_label) -> (frequency, proportion) over box_to_box pairs.

    Frequency counts pair occurrences; proportion is the fraction of all
    parent-label boxes that contain at least one child-label box.
    """
    label_of = {b.box_id: b.label for b in boxes}
    label_count: dict[str, int] = {}
    for b in boxes:
        label_count[b.label] = label_count.get(b.label, 0) + 1
    freq: dict[tuple[str, str], int] = {}
    parents_seen: dict[tuple[str, str], set[str]] = {}
    for p in pairs:
        if p.kind != "box_to_box":
            continue
        key = (label_of[p.parent_id], label_of[p.child_id])
        freq[key] = freq.get(key, 0) + 1
        parents_seen.setdefault(key, set()).add(p.parent_id)
    return {
        key: (n, len(parents_seen[key]) / label_count[key[0]])
        for key, n in freq.items()
    }


def build_hierarchy_tree(
    stats: dict[tuple[str, str], tuple[int, float]],
    freq_threshold: int = DEFAULT_FREQ_THRESHOLD,
    prop_threshold: float = DEFAULT_PROP_THRESHOLD,
) -> HierarchyTree:
    """Keep edges meeting both thresholds; break cycles at the weakest edge."""
    if freq_threshold <= 0 or prop_threshold <= 0:
        raise ValueError("thresholds must be positive")
    g = nx.DiGraph()
    for (parent, child), (frequency, proportion) in sorted(stats.items()):
        if frequency >= freq_threshold and proportion >= prop_threshold:
            g.add_edge(parent, child, frequency=frequency, proportion=proportion)
    while True:
        try:
            cycle = nx.find_cycle(g)
        except nx.NetworkXNoCycle:
            break
        weakest = min(cycle, key=lambda e: (g.edges[e[0], e[1]]["frequency"], e))
        log.warning("breaking cycle %s by dropping edge %s -> %s",
                    cycle, weakest[0], weakest[1])
        g.remove_edge(weakest[0], weakest[1])
    return HierarchyTree(graph=g)


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def write_pairs_tsv(pairs: Sequence[EntailmentPair], path: str | Path) -> None:
    with Path(path).open("w") as fh:
        for p in pairs:
            fh.write(f"{p.parent_id}\t{p.child_id}\t{p.kind}\n")


def read_pairs_tsv(path: str | Path) -> list[EntailmentPair]:
    pairs: list[EntailmentPair] = []
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise AnnotationError(f"line {lineno}: expected 3 tab-separated fields")
            pairs.append(EntailmentPair(*parts))
    return pairs


def relation_oracle_from_pairs(pairs: Iterable[EntailmentPair]):
    """Membership oracle over the dataset-wide set of directed pairs."""
    relations = {(p.parent_id, p.child_id) for p in pairs}

    def oracle(parent: str, child: str) -> bool:
        return (parent, child) in relations

    return oracle
