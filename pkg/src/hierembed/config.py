"""Experiment configuration: one YAML file, CLI flags override."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from hierembed.hierarchy import (
    DEFAULT_CONTAINMENT,
    DEFAULT_FREQ_THRESHOLD,
    DEFAULT_MIN_AREA,
    DEFAULT_PROP_THRESHOLD,
)


@dataclass
class PathsConfig:
    annotations: str = "data/annotations.jsonl"
    pairs: str = "out/pairs.tsv"
    nodes: str = "out/nodes.tsv"
    tree: str = "out/tree.json"
    embeddings: str = "out/embeddings.bin"
    reports: str = "out/reports"


@dataclass
class DataConfig:
    containment_threshold: float = DEFAULT_CONTAINMENT
    min_area_fraction: float = DEFAULT_MIN_AREA
    freq_threshold: int = DEFAULT_FREQ_THRESHOLD
    prop_threshold: float = DEFAULT_PROP_THRESHOLD
    k_cross: int = 1
    drop_group_of_children: bool = True


@dataclass
class TrainSection:
    d: int = 128
    batch_size: int = 32
    steps: int = 2000
    learning_rate: float = 0.05
    optimizer: str = "adam"
    seed: int = 0
    space_kind: str = "hyperbolic"
    negative_mode: str = "oracle"
    init_scale: float = 0.1
    checkpoint_interval: int = 500


@dataclass
class EvalConfig:
    k_list: list[int] = field(default_factory=lambda: [5, 10])
    k_large_list: list[int] = field(default_factory=lambda: [50])
    sweep_resolution: int = 65
    direction: str = "parent_to_child"


@dataclass
class ExperimentConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    data: DataConfig = field(default_factory=DataConfig)
    train: TrainSection = field(default_factory=TrainSection)
    eval: EvalConfig = field(default_factory=EvalConfig)

    @classmethod
    def load(cls, path: str | Path | None) -> "ExperimentConfig":
        cfg = cls()
        if path is None:
            return cfg
        raw = yaml.safe_load(Path(path).read_text()) or {}
        for section_name, section in (
            ("paths", cfg.paths),
            ("data", cfg.data),
            ("train", cfg.train),
            ("eval", cfg.eval),
        ):
            for key, value in (raw.get(section_name) or {}).items():
                if not hasattr(section, key):
                    raise ValueError(f"unknown config key {section_name}.{key}")
                setattr(section, key, value)
        return cfg
