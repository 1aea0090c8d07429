"""Training loop for the lookup-table encoder.

Each node id owns a free tangent-space vector; the temperature and (in
hyperbolic mode) the curvature are learned in log-space. Updates act on the
tangent coordinates directly with a plain SGD or Adam-style optimizer, so
training is deterministic under a fixed seed in single-threaded mode.
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import torch

from hierembed.hierarchy import EntailmentPair, relation_oracle_from_pairs
from hierembed.loss import LossConfig, PairBatch, _ClampCounter, _allowed_masks, batch_loss_torch

log = logging.getLogger(__name__)

_MAGIC = b"HEMBED01"
_VERSION = 1
_SPACE_CODES = {"euclidean": 0, "hyperbolic": 1}
_SPACE_NAMES = {v: k for k, v in _SPACE_CODES.items()}


class EmbeddingLoadError(ValueError):
    """Corrupt header, bad magic bytes, or incompatible embedding file."""


@dataclass
class EmbeddingTable:
    """node id -> tangent vector, plus learnable log-temperature and log-curvature."""

    node_ids: list[str]
    vectors: np.ndarray  # (n, d) float64
    log_tau: float = math.log(0.07)
    log_c: float = 0.0
    space_kind: str = "hyperbolic"
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if len(set(self.node_ids)) != len(self.node_ids):
            raise ValueError("duplicate node ids")
        if self.vectors.shape[0] != len(self.node_ids):
            raise ValueError("vector count does not match node ids")
        self._index = {node: i for i, node in enumerate(self.node_ids)}

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def tau(self) -> float:
        return math.exp(self.log_tau)

    @property
    def c(self) -> float:
        return math.exp(self.log_c)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._index

    def __getitem__(self, node_id: str) -> np.ndarray:
        return self.vectors[self._index[node_id]]

    def index(self, node_id: str) -> int:
        return self._index[node_id]

    def norms(self) -> dict[str, float]:
        n = np.linalg.norm(self.vectors, axis=1)
        return {node: float(n[i]) for i, node in enumerate(self.node_ids)}

    def copy(self) -> "EmbeddingTable":
        return replace(self, vectors=self.vectors.copy(),
                       node_ids=list(self.node_ids), _index={})


@dataclass(frozen=True)
class TrainConfig:
    """Desk-scale training hyperparameters."""

    batch_size: int = 32
    steps: int = 2000
    learning_rate: float = 0.05
    optimizer: str = "adam"  # "adam" (betas 0.9/0.999) | "sgd"
    seed: int = 0
    space_kind: str = "hyperbolic"
    negative_mode: str = "oracle"
    checkpoint_interval: int = 500
    checkpoint_path: str | None = None
    # tau and c move on a slower schedule than the embeddings; a shared rate
    # lets the curvature collapse before the geometry settles
    scalar_lr_scale: float = 0.02
    # "none" keeps the rate constant; "cosine" decays it to ~0 by the last step
    lr_schedule: str = "none"

    def __post_init__(self) -> None:
        if self.batch_size <= 0 or self.steps < 0 or self.learning_rate <= 0:
            raise ValueError("batch size, steps, and learning rate must be positive")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


def init_embeddings(
    node_ids: Sequence[str],
    d: int,
    scale: float = 0.1,
    seed: int = 0,
    space_kind: str = "hyperbolic",
) -> EmbeddingTable:
    """Gaussian init with the stated scale; tau starts at 0.07, c at 1."""
    if d < 2:
        raise ValueError("embedding dimension must be at least 2")
    node_ids = list(node_ids)
    rng = np.random.default_rng(seed)
    vectors = rng.normal(0.0, 1.0, size=(len(node_ids), d)) * scale
    return EmbeddingTable(node_ids=node_ids, vectors=vectors,
                          log_tau=math.log(0.07), log_c=0.0, space_kind=space_kind)


def train(
    pairs: Sequence[EntailmentPair],
    relation_oracle: Callable[[str, str], bool] | None,
    config: TrainConfig,
    table: EmbeddingTable,
) -> tuple[EmbeddingTable, list[dict]]:
    """Run mini-batch updates of the bidirectional loss over the table.

    Batches sample pairs uniformly with replacement. Returns the trained
    table plus a per-step log (loss, tau, c, clamp counter). A non-finite
    loss aborts, restoring the last checkpointed state.
    """
    for p in pairs:
        if p.parent_id not in table or p.child_id not in table:
            raise ValueError(f"pair references unknown node: {p.parent_id} -> {p.child_id}")
    if relation_oracle is None:
        relation_oracle = relation_oracle_from_pairs(pairs)

    table = table.copy()
    table.space_kind = config.space_kind
    if config.steps == 0:
        return table, []

    weights = torch.from_numpy(table.vectors.copy()).requires_grad_(True)
    log_tau = torch.tensor(table.log_tau, dtype=torch.float64, requires_grad=True)
    log_c = torch.tensor(table.log_c, dtype=torch.float64, requires_grad=True)
    scalars = [log_tau]
    if config.space_kind == "hyperbolic":
        scalars.append(log_c)
    groups = [
        {"params": [weights], "lr": config.learning_rate},
        {"params": scalars, "lr": config.learning_rate * config.scalar_lr_scale},
    ]
    if config.optimizer == "adam":
        opt = torch.optim.Adam(groups, betas=(0.9, 0.999))
    else:
        opt = torch.optim.SGD(groups)

    pair_tuples = [(p.parent_id, p.child_id) for p in pairs]
    rng = np.random.default_rng(config.seed)
    records: list[dict] = []
    last_checkpoint = table.copy()

    def _sync(dst: EmbeddingTable) -> None:
        dst.vectors = weights.detach().numpy().copy()
        dst.log_tau = float(log_tau.detach())
        dst.log_c = float(log_c.detach())

    base_lrs = [g["lr"] for g in opt.param_groups]
    for step in range(config.steps):
        if config.lr_schedule == "cosine":
            factor = 0.5 * (1.0 + math.cos(math.pi * step / config.steps))
            for group, base in zip(opt.param_groups, base_lrs):
                group["lr"] = base * factor
        idx = rng.integers(0, len(pair_tuples), size=config.batch_size)
        batch_pairs = [pair_tuples[i] for i in idx]
        batch = PairBatch(pairs=batch_pairs, embeddings={}, relation_oracle=relation_oracle)
        allowed_p2c, allowed_c2p = _allowed_masks(batch, config.negative_mode)
        p_rows = torch.tensor([table.index(p) for p, _ in batch_pairs], dtype=torch.long)
        c_rows = torch.tensor([table.index(c) for _, c in batch_pairs], dtype=torch.long)
        counter = _ClampCounter()
        opt.zero_grad()
        loss = batch_loss_torch(
            weights[p_rows], weights[c_rows],
            torch.exp(log_tau), torch.exp(log_c),
            config.space_kind, allowed_p2c, allowed_c2p, counter,
        )
        loss_val = float(loss.detach())
        if not math.isfinite(loss_val):
            log.error("non-finite loss at step %d; restoring last checkpoint", step)
            records.append({"step": step, "loss": loss_val, "aborted": True})
            return last_checkpoint, records
        loss.backward()
        opt.step()
        records.append({
            "step": step,
            "loss": loss_val,
            "tau": math.exp(float(log_tau.detach())),
            "c": math.exp(float(log_c.detach())),
            "clamp_count": counter.count,
        })
        if (step + 1) % config.checkpoint_interval == 0:
            _sync(last_checkpoint)
            if config.checkpoint_path:
                export_embeddings(last_checkpoint, config.checkpoint_path)

    _sync(table)
    return table, records


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def export_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    """Write the self-describing binary embedding file (lossless round-trip)."""
    n, d = table.vectors.shape
    with Path(path).open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<BBII", _VERSION, _SPACE_CODES[table.space_kind], d, n))
        fh.write(struct.pack("<dd", table.log_tau, table.log_c))
        for node in table.node_ids:
            raw = node.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
        fh.write(np.ascontiguousarray(table.vectors, dtype="<f8").tobytes())


def import_embeddings(path: str | Path, expect_d: int | None = None) -> EmbeddingTable:
    """Load an embedding file; rejects bad magic/version or a dimension mismatch."""
    data = Path(path).read_bytes()
    if len(data) < len(_MAGIC) + 26 or data[: len(_MAGIC)] != _MAGIC:
        raise EmbeddingLoadError(f"{path}: not an embedding file (bad magic bytes)")
    off = len(_MAGIC)
    version, space_code, d, n = struct.unpack_from("<BBII", data, off)
    off += 10
    if version != _VERSION:
        raise EmbeddingLoadError(f"{path}: unsupported version {version}")
    if space_code not in _SPACE_NAMES:
        raise EmbeddingLoadError(f"{path}: unknown space code {space_code}")
    if expect_d is not None and d != expect_d:
        raise EmbeddingLoadError(f"{path}: dimension mismatch (file d={d}, expected {expect_d})")
    log_tau, log_c = struct.unpack_from("<dd", data, off)
    off += 16
    node_ids: list[str] = []
    try:
        for _ in range(n):
            (length,) = struct.unpack_from("<H", data, off)
            off += 2
            node_ids.append(data[off : off + length].decode("utf-8"))
            off += length
        payload = np.frombuffer(data, dtype="<f8", count=n * d, offset=off)
    except (struct.error, ValueError) as exc:
        raise EmbeddingLoadError(f"{path}: truncated or corrupt payload") from exc
    vectors = payload.reshape(n, d).astype(np.float64)
    return EmbeddingTable(node_ids=node_ids, vectors=vectors, log_tau=log_tau,
                         log_c=log_c, space_kind=_SPACE_NAMES[space_code])


def export_embeddings_csv(table: EmbeddingTable, path: str | Path) -> None:
    """Human-inspectable CSV mirror of the embedding table."""
    with Path(path).open("w") as fh:
        header = ",".join(["node_id"] + [f"v{i}" for i in range(table.dim)])
        fh.write(header + "\n")
        for node in table.node_ids:
            row = ",".join(f"{v:.17g}" for v in table[node])
            fh.write(f"{node},{row}\n")
