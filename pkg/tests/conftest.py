"""Shared fixtures: the synthetic balanced tree and tables trained on it.

Training runs once per session (it is the expensive part of the suite) and
is reused by the trainer, evaluation, and acceptance tests.
"""

from __future__ import annotations

import time

import numpy as np
import pytest
import torch

from hierembed.synthetic import SyntheticTree, balanced_tree
from hierembed.trainer import EmbeddingTable, TrainConfig, init_embeddings, train

FIXTURE_SEED = 0
FIXTURE_STEPS = 2000
FIXTURE_DIM = 8

# wall-clock seconds of the session training runs, keyed by space kind;
# the acceptance suite asserts a runtime budget against these
TRAIN_SECONDS: dict[str, float] = {}

torch.set_num_threads(1)  # bit-reproducibility of the training fixtures


@pytest.fixture(scope="session")
def tree() -> SyntheticTree:
    return balanced_tree(depth=3, branching=3)


@pytest.fixture(scope="session")
def fixture_config() -> TrainConfig:
    return TrainConfig(
        batch_size=32,
        steps=FIXTURE_STEPS,
        learning_rate=0.05,
        seed=FIXTURE_SEED,
        space_kind="hyperbolic",
    )


@pytest.fixture(scope="session")
def init_table(tree) -> EmbeddingTable:
    return init_embeddings(tree.nodes, FIXTURE_DIM, seed=FIXTURE_SEED,
                           space_kind="hyperbolic")


@pytest.fixture(scope="session")
def trained(tree, fixture_config, init_table):
    """Hyperbolic table trained on the closure pairs, plus the step log."""
    start = time.perf_counter()
    table, records = train(tree.closure_pairs(), tree.oracle(), fixture_config,
                           init_table)
    TRAIN_SECONDS["hyperbolic"] = time.perf_counter() - start
    return table, records


@pytest.fixture(scope="session")
def trained_euclidean(tree):
    config = TrainConfig(
        batch_size=32,
        steps=FIXTURE_STEPS,
        learning_rate=0.05,
        seed=FIXTURE_SEED,
        space_kind="euclidean",
    )
    init = init_embeddings(tree.nodes, FIXTURE_DIM, seed=FIXTURE_SEED,
                           space_kind="euclidean")
    table, records = train(tree.closure_pairs(), tree.oracle(), config, init)
    return table, records


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
