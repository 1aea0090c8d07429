"""Command-line pipeline: make-pairs, build-tree, train, eval, serve, demo-data."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from hierembed import evaluation, hierarchy, reports, trainer
from hierembed.config import ExperimentConfig

log = logging.getLogger(__name__)


def _fail(message: str) -> None:
    click.echo(message, err=True)


def _load_config(config_path: str | None) -> ExperimentConfig:
    try:
        return ExperimentConfig.load(config_path)
    except (OSError, ValueError) as exc:
        _fail(f"config error: {exc}")
        sys.exit(2)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Hierarchy embedding toolkit: pair generation, training, retrieval metrics."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command("make-pairs")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=None, help="Cross-image sampling seed.")
def cmd_make_pairs(config_path: str | None, seed: int | None) -> None:
    """Generate entailment pairs (TSV) and node metadata from annotations."""
    cfg = _load_config(config_path)
    if seed is not None:
        cfg.train.seed = seed
    ann_path = Path(cfg.paths.annotations)
    if not ann_path.exists():
        _fail(f"annotations file not found: {ann_path}")
        sys.exit(2)
    try:
        boxes = hierarchy.load_annotations(ann_path, strict=True)
    except hierarchy.AnnotationError as exc:
        _fail(f"invalid annotations: {exc}")
        sys.exit(2)
    pairs = hierarchy.generate_pairs(
        boxes,
        containment_threshold=cfg.data.containment_threshold,
        min_area_fraction=cfg.data.min_area_fraction,
        k_cross=cfg.data.k_cross,
        seed=cfg.train.seed,
        drop_group_of_children=cfg.data.drop_group_of_children,
    )
    pairs_path = Path(cfg.paths.pairs)
    pairs_path.parent.mkdir(parents=True, exist_ok=True)
    hierarchy.write_pairs_tsv(pairs, pairs_path)

    nodes_path = Path(cfg.paths.nodes)
    nodes_path.parent.mkdir(parents=True, exist_ok=True)
    kept = hierarchy.filter_boxes(boxes, cfg.data.min_area_fraction)
    with nodes_path.open("w") as fh:
        for image_id in sorted({b.image_id for b in kept}):
            fh.write(f"{image_id}\t\tscene\n")
        for b in sorted(kept, key=lambda b: b.box_id):
            fh.write(f"{b.box_id}\t{b.label}\tobject\n")

    counts: dict[str, int] = {}
    for p in pairs:
        counts[p.kind] = counts.get(p.kind, 0) + 1
    stats = {"total": len(pairs), "by_kind": counts, "boxes_kept": len(kept)}
    stats_path = pairs_path.with_suffix(".stats.json")
    stats_path.write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")
    click.echo(f"wrote {len(pairs)} pairs to {pairs_path} ({counts})")


@main.command("build-tree")
@click.option("--config", "config_path", type=click.Path(), default=None)
def cmd_build_tree(config_path: str | None) -> None:
    """Build the label hierarchy tree from pair statistics."""
    cfg = _load_config(config_path)
    for path in (cfg.paths.annotations, cfg.paths.pairs):
        if not Path(path).exists():
            _fail(f"missing input: {path}")
            sys.exit(2)
    boxes = hierarchy.load_annotations(cfg.paths.annotations, strict=False)
    boxes = hierarchy.filter_boxes(boxes, cfg.data.min_area_fraction)
    pairs = hierarchy.read_pairs_tsv(cfg.paths.pairs)
    stats = hierarchy.edge_statistics(pairs, boxes)
    tree = hierarchy.build_hierarchy_tree(
        stats, cfg.data.freq_threshold, cfg.data.prop_threshold
    )
    tree_path = Path(cfg.paths.tree)
    tree_path.parent.mkdir(parents=True, exist_ok=True)
    tree_path.write_text(tree.to_json() + "\n")
    click.echo(f"wrote tree with {len(tree.edges)} edges to {tree_path}")


@main.command("train")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--space", type=click.Choice(["hyp", "euc"]), default=None)
@click.option("--neg-mode", type=click.Choice(["oracle", "batch"]), default=None)
def cmd_train(config_path: str | None, seed: int | None, space: str | None,
              neg_mode: str | None) -> None:
    """Train the embedding table on the generated pairs."""
    cfg = _load_config(config_path)
    if seed is not None:
        cfg.train.seed = seed
    if space is not None:
        cfg.train.space_kind = "hyperbolic" if space == "hyp" else "euclidean"
    if neg_mode is not None:
        cfg.train.negative_mode = "oracle" if neg_mode == "oracle" else "batch_local"
    if not Path(cfg.paths.pairs).exists():
        _fail(f"missing pairs file: {cfg.paths.pairs}")
        sys.exit(2)
    pairs = hierarchy.read_pairs_tsv(cfg.paths.pairs)
    node_ids = sorted({p.parent_id for p in pairs} | {p.child_id for p in pairs})
    table = trainer.init_embeddings(
        node_ids, cfg.train.d, scale=cfg.train.init_scale,
        seed=cfg.train.seed, space_kind=cfg.train.space_kind,
    )
    emb_path = Path(cfg.paths.embeddings)
    emb_path.parent.mkdir(parents=True, exist_ok=True)
    tcfg = trainer.TrainConfig(
        batch_size=cfg.train.batch_size,
        steps=cfg.train.steps,
        learning_rate=cfg.train.learning_rate,
        optimizer=cfg.train.optimizer,
        seed=cfg.train.seed,
        space_kind=cfg.train.space_kind,
        negative_mode=cfg.train.negative_mode,
        checkpoint_interval=cfg.train.checkpoint_interval,
        checkpoint_path=str(emb_path) + ".ckpt",
    )
    table, records = trainer.train(pairs, None, tcfg, table)
    trainer.export_embeddings(table, emb_path)
    log_path = emb_path.with_suffix(".log.json")
    log_path.write_text(json.dumps(records) + "\n")
    report_dir = Path(cfg.paths.reports)
    report_dir.mkdir(parents=True, exist_ok=True)
    reports.plot_training_curve(records, report_dir / "training_loss.png")
    final = records[-1]["loss"] if records else float("nan")
    click.echo(f"trained {len(node_ids)} nodes for {len(records)} steps; "
               f"final loss {final:.4f}; wrote {emb_path}")


def _load_nodes(path: str) -> dict[str, tuple[str, str]]:
    """node_id -> (label, group) from the nodes TSV."""
    out: dict[str, tuple[str, str]] = {}
    with Path(path).open() as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            node_id, label, group = line.split("\t")
            out[node_id] = (label, group)
    return out


def run_eval(cfg: ExperimentConfig) -> dict:
    """Retrieval evaluation over scene queries; returns the report digest."""
    table = trainer.import_embeddings(cfg.paths.embeddings)
    tree = hierarchy.HierarchyTree.from_json(Path(cfg.paths.tree).read_text())
    nodes = _load_nodes(cfg.paths.nodes)
    pairs = hierarchy.read_pairs_tsv(cfg.paths.pairs)

    scene_children: dict[str, set[str]] = {}
    for p in pairs:
        if p.kind == "scene_to_box":
            scene_children.setdefault(p.parent_id, set()).add(p.child_id)
    queries = sorted(q for q in scene_children if q in table)
    candidate_labels = {
        n: meta[0] for n, meta in nodes.items() if meta[1] != "scene" and n in table
    }
    candidates = {n: table[n] for n in candidate_labels}
    query_labels = {
        q: {nodes[b][0] for b in scene_children[q] if b in nodes}
        for q in queries
    }

    direction = cfg.eval.direction
    max_k = max(cfg.eval.k_list + cfg.eval.k_large_list + [len(candidates)])
    results = [
        evaluation.rank_candidates(
            q, table[q], candidates, direction, table.space_kind,
            k=max_k, c=table.c,
        )
        for q in queries
    ]

    def same_class(query_id: str, cand_id: str) -> bool:
        return candidate_labels[cand_id] in query_labels[query_id]

    gt_sets = evaluation.ground_truth_hierarchy_sets(
        queries, query_labels, candidate_labels, tree, direction
    )

    report: dict = {
        "queries": len(queries),
        "candidates": len(candidates),
        "space_kind": table.space_kind,
        "recall_at_k": {str(k): evaluation.recall_at_k(results, same_class, k)
                        for k in cfg.eval.k_list},
        "hierarchical_recall": {str(k): evaluation.hierarchical_recall(results, gt_sets, k)
                                for k in cfg.eval.k_large_list},
    }

    # distribution alignment over hierarchy labels
    ot_values = []
    for r in results:
        labels_in_tree = sorted(
            tree.descendants(query_labels[r.query_id]) | query_labels[r.query_id]
        )
        if not labels_in_tree:
            continue
        truth_counts = {
            lab: sum(1 for v in candidate_labels.values() if v == lab)
            for lab in labels_in_tree
        }
        if sum(truth_counts.values()) == 0:
            continue
        k_large = max(cfg.eval.k_large_list)
        retrieved_counts: dict[str, float] = {}
        for cid, _ in r.ranked[:k_large]:
            lab = candidate_labels[cid]
            retrieved_counts[lab] = retrieved_counts.get(lab, 0) + 1
        h = evaluation.label_distribution(truth_counts, labels_in_tree)
        rd = evaluation.label_distribution(retrieved_counts, labels_in_tree)
        ot_values.append(evaluation.ot_distance(h, rd))
    report["ot_distance_mean"] = float(np.mean(ot_values)) if ot_values else None

    # PR sweep: positive iff the candidate label is hierarchy-correct for the query
    scores, positives = [], []
    for r in results:
        correct = query_labels[r.query_id] | tree.descendants(query_labels[r.query_id])
        for cid, score in r.ranked:
            scores.append(score)
            positives.append(candidate_labels[cid] in correct)
    curves = {}
    if any(positives):
        curves["eval"] = evaluation.pr_curve(
            scores, positives, resolution=cfg.eval.sweep_resolution
        )
        report["pr_area"] = evaluation.pr_area(curves["eval"])

    groups = {n: meta[1] for n, meta in nodes.items() if n in table}
    profile = evaluation.norm_profile(table, groups)
    report["norm_profile"] = {
        tag: {"mean": s["mean"], "std": s["std"], "count": s["count"]}
        for tag, s in profile.items()
    }

    report_dir = Path(cfg.paths.reports)
    report_dir.mkdir(parents=True, exist_ok=True)
    reports.write_report_json(report, report_dir / "metrics.json")
    if curves:
        reports.write_pr_csv(curves, report_dir / "pr_curve.csv")
        reports.plot_pr_curves(curves, report_dir / "pr_curve.png")
    reports.plot_norm_profile(profile, report_dir / "norm_profile.png")
    return report


@main.command("eval")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--k", type=int, multiple=True, help="Override recall cutoffs.")
def cmd_eval(config_path: str | None, k: tuple[int, ...]) -> None:
    """Compute retrieval metrics and write report JSON, PR CSV, and figures."""
    cfg = _load_config(config_path)
    if k:
        cfg.eval.k_list = list(k)
    for path in (cfg.paths.embeddings, cfg.paths.tree, cfg.paths.nodes, cfg.paths.pairs):
        if not Path(path).exists():
            _fail(f"missing input: {path}")
            sys.exit(2)
    try:
        report = run_eval(cfg)
    except trainer.EmbeddingLoadError as exc:
        _fail(str(exc))
        sys.exit(2)
    click.echo(json.dumps(
        {key: report[key] for key in ("recall_at_k", "hierarchical_recall",
                                      "ot_distance_mean")},
        indent=2, sort_keys=True))


@main.command("serve")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def cmd_serve(config_path: str | None, host: str, port: int) -> None:
    """Serve the read-only retrieval HTTP API for the explorer UI."""
    import uvicorn

    from hierembed.service import create_app

    cfg = _load_config(config_path)
    for path in (cfg.paths.embeddings, cfg.paths.tree, cfg.paths.nodes):
        if not Path(path).exists():
            _fail(f"missing input: {path}")
            sys.exit(2)
    table = trainer.import_embeddings(cfg.paths.embeddings)
    tree = hierarchy.HierarchyTree.from_json(Path(cfg.paths.tree).read_text())
    nodes = _load_nodes(cfg.paths.nodes)
    app = create_app(table, tree, nodes)
    uvicorn.run(app, host=host, port=port)


@main.command("demo-data")
@click.option("--out", type=click.Path(), default="data/annotations.jsonl")
@click.option("--images", type=int, default=120)
@click.option("--seed", type=int, default=0)
def cmd_demo_data(out: str, images: int, seed: int) -> None:
    """Write a synthetic annotations JSONL with nested vehicle/part boxes."""
    rng = np.random.default_rng(seed)
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    records = []
    for i in range(images):
        image_id = f"img{i:04d}"
        vehicle = "car" if rng.random() < 0.5 else "bicycle"
        vx, vy = rng.uniform(0.02, 0.25, size=2)
        records.append({"image_id": image_id, "box_id": f"{image_id}_b0",
                        "box": [vx, vy, vx + 0.7, vy + 0.7], "label": vehicle,
                        "is_group_of": False})
        wx, wy = vx + rng.uniform(0.05, 0.3, size=2)
        records.append({"image_id": image_id, "box_id": f"{image_id}_b1",
                        "box": [wx, wy, wx + 0.3, wy + 0.3], "label": "wheel",
                        "is_group_of": False})
        tx, ty = wx + rng.uniform(0.02, 0.1, size=2)
        records.append({"image_id": image_id, "box_id": f"{image_id}_b2",
                        "box": [tx, ty, tx + 0.15, ty + 0.15], "label": "tire",
                        "is_group_of": False})
    with out_path.open("w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    click.echo(f"wrote {len(records)} boxes over {images} images to {out_path}")


if __name__ == "__main__":
    main()
