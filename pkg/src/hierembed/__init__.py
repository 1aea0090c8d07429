"""Entailment-pair hierarchy embeddings in hyperbolic or Euclidean space.

Encodes user-defined part/containment hierarchies as directed entailment
pairs, learns a per-node embedding table with a bidirectional contrastive
entailment-angle loss, and evaluates hierarchical retrieval with Recall@k,
PR-threshold sweeps, and a 1-D Wasserstein distribution-alignment metric.
"""

from hierembed.geometry import (
    AnglePair,
    DegenerateGeometryError,
    HyperbolicPoint,
    entailment_angles,
    exp_map_origin,
    exterior_angle_euc,
    exterior_angle_hyp,
    lorentz_inner,
    time_component,
)
from hierembed.hierarchy import (
    BoundingBox,
    EntailmentPair,
    HierarchyTree,
    build_hierarchy_tree,
    containment,
    cross_image_pairs,
    edge_statistics,
    filter_boxes,
    load_annotations,
    within_image_pairs,
)
from hierembed.loss import LossConfig, PairBatch, bidirectional_loss, loss_gradients
from hierembed.trainer import (
    EmbeddingTable,
    TrainConfig,
    export_embeddings,
    import_embeddings,
    init_embeddings,
    train,
)

__all__ = [
    "AnglePair",
    "BoundingBox",
    "DegenerateGeometryError",
    "EmbeddingTable",
    "EntailmentPair",
    "HierarchyTree",
    "HyperbolicPoint",
    "LossConfig",
    "PairBatch",
    "TrainConfig",
    "bidirectional_loss",
    "build_hierarchy_tree",
    "containment",
    "cross_image_pairs",
    "edge_statistics",
    "entailment_angles",
    "exp_map_origin",
    "export_embeddings",
    "exterior_angle_euc",
    "exterior_angle_hyp",
    "filter_boxes",
    "import_embeddings",
    "init_embeddings",
    "load_annotations",
    "lorentz_inner",
    "loss_gradients",
    "time_component",
    "train",
    "within_image_pairs",
]
