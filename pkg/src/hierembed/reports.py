"""Evaluation report writing: JSON digest, CSV curves, and matplotlib figures."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def write_report_json(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def write_pr_csv(curves: Mapping[str, Sequence[tuple[float, float, float]]],
                 path: str | Path) -> None:
    """One delimited file holding every named PR curve."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["curve", "threshold", "precision", "recall"])
        for name in sorted(curves):
            for t, p, r in curves[name]:
                writer.writerow([name, f"{t:.10g}", f"{p:.10g}", f"{r:.10g}"])


def plot_pr_curves(curves: Mapping[str, Sequence[tuple[float, float, float]]],
                   path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    for name in sorted(curves):
        pts = sorted((r, p) for _, p, r in curves[name])
        ax.plot([r for r, _ in pts], [p for _, p in pts], marker=".", label=name)
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.05)
    ax.legend()
    ax.set_title("precision vs recall over angle thresholds")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_norm_profile(profile: Mapping[str, dict], path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    for tag in sorted(profile):
        stats = profile[tag]
        edges = stats["bin_edges"]
        centers = [(a + b) / 2 for a, b in zip(edges, edges[1:])]
        ax.step(centers, stats["hist"], where="mid",
                label=f"{tag} (mean {stats['mean']:.2f})")
    ax.set_xlabel("tangent-vector norm")
    ax.set_ylabel("count")
    ax.legend()
    ax.set_title("embedding norm profile by group")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_training_curve(log_records: Sequence[dict], path: str | Path) -> None:
    if not log_records:
        return
    fig, ax = plt.subplots(figsize=(5, 4))
    steps = [r["step"] for r in log_records if "loss" in r]
    losses = [r["loss"] for r in log_records if "loss" in r]
    ax.plot(steps, losses, lw=0.8)
    ax.set_xlabel("step")
    ax.set_ylabel("bidirectional loss")
    ax.set_title("training loss")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
