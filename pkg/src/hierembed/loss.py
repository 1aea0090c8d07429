"""Bidirectional contrastive entailment-angle loss.

Each batch is a set of directed parent->child pairs. The parent-to-child
direction treats the parent as anchor and softmax-normalizes beta1 against
the children of non-entailed pairs; the child-to-parent direction mirrors
this with alpha2. Negative sets honor a dataset-wide relation oracle so a
parent with several positives in one batch never sees its own children as
negatives (a batch-local fallback exists for ablation).

The numerical core is torch on float64; gradients for the embedding table,
the temperature, and the curvature come from autograd and are checked
against central finite differences in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import torch

from hierembed.geometry import EPS, MAX_TANGENT_NORM

Direction = str  # "parent_to_child" | "child_to_parent"

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class LossConfig:
    """Loss hyperparameters.

    The directional loss is a *mean* over batch anchors (the paper-side
    expectation), so batch size does not rescale the gradient magnitude.
    One temperature is shared by both directions.
    """

    tau: float = 0.07
    space_kind: str = "hyperbolic"
    c: float = 1.0
    negative_mode: str = "oracle"  # "oracle" | "batch_local"

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.space_kind not in ("hyperbolic", "euclidean"):
            raise ValueError(f"unknown space kind {self.space_kind!r}")
        if self.negative_mode not in ("oracle", "batch_local"):
            raise ValueError(f"unknown negative mode {self.negative_mode!r}")


@dataclass
class PairBatch:
    """A batch of directed entailment pairs over a tangent-space embedding map.

    ``embeddings`` maps node id to its tangent vector; ``relation_oracle``
    answers whether (parent, child) is an entailment pair anywhere in the
    dataset, not just in this batch.
    """

    pairs: Sequence[tuple[str, str]]
    embeddings: Mapping[str, np.ndarray]
    relation_oracle: Callable[[str, str], bool] = field(default=lambda a, b: False)

    def __len__(self) -> int:
        return len(self.pairs)


def _related(batch: PairBatch, mode: str, parent: str, child: str) -> bool:
    if mode == "batch_local":
        return (parent, child) in set(batch.pairs)
    return batch.relation_oracle(parent, child)


def negative_set(batch: PairBatch, i: int, direction: Direction,
                 negative_mode: str = "oracle") -> set[int]:
    """Indices j usable as negatives for anchor i in the given direction."""
    if not 0 <= i < len(batch.pairs):
        raise IndexError(f"anchor index {i} out of range")
    parent_i, child_i = batch.pairs[i]
    out: set[int] = set()
    for j, (parent_j, child_j) in enumerate(batch.pairs):
        if j == i:
            continue
        if direction == "parent_to_child":
            # candidate is child_j versus anchor parent_i
            if child_j == parent_i or _related(batch, negative_mode, parent_i, child_j):
                continue
        elif direction == "child_to_parent":
            if parent_j == child_i or _related(batch, negative_mode, parent_j, child_i):
                continue
        else:
            raise ValueError(f"unknown direction {direction!r}")
        out.add(j)
    return out


# ---------------------------------------------------------------------------
# torch core (shared with the trainer)
# ---------------------------------------------------------------------------

def exp_map_torch(v: torch.Tensor, c: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Row-wise exponential map at the origin; returns (space, time).

    Rows with tangent norm above MAX_TANGENT_NORM/sqrt(c) are rescaled onto
    the cap before mapping.
    """
    sqrt_c = torch.sqrt(c)
    norm = torch.linalg.norm(v, dim=-1, keepdim=True)
    cap = MAX_TANGENT_NORM / sqrt_c
    scale = torch.where(norm > cap, cap / norm.clamp_min(EPS), torch.ones_like(norm))
    v = v * scale
    a = (sqrt_c * norm * scale).clamp_min(1e-12)
    space = (torch.sinh(a) / a) * v
    time = torch.sqrt(1.0 / c + (space * space).sum(dim=-1))
    return space, time


class _ClampCounter:
    """Counts arccos arguments that landed outside [-1, 1]."""

    def __init__(self) -> None:
        self.count = 0


def _masked_arccos(arg: torch.Tensor, counter: _ClampCounter | None) -> torch.Tensor:
    """arccos with the argument clamped to [-1, 1].

    Out-of-range entries take the boundary angle with zero gradient (the
    subgradient choice at the clamp) and are counted.
    """
    inside = arg.abs() < 1.0
    if counter is not None:
        counter.count += int((~inside).sum())
    safe = torch.where(inside, arg, torch.zeros_like(arg))
    boundary = torch.arccos(arg.detach().clamp(-1.0, 1.0))
    return torch.where(inside, torch.arccos(safe), boundary)


def ext_hyp_matrix(
    x_space: torch.Tensor,
    x_time: torch.Tensor,
    y_space: torch.Tensor,
    y_time: torch.Tensor,
    c: torch.Tensor,
    counter: _ClampCounter | None = None,
) -> torch.Tensor:
    """Pairwise hyperbolic exterior angles ext(x_i, y_j), shape (n, m)."""
    inner = -x_time[:, None] * y_time[None, :] + x_space @ y_space.T
    ci = c * inner
    under = (ci * ci - 1.0).clamp_min(EPS)
    num = y_time[None, :] + x_time[:, None] * ci
    x_norm = torch.linalg.norm(x_space, dim=-1).clamp_min(EPS)
    denom = x_norm[:, None] * torch.sqrt(under)
    return _masked_arccos(num / denom, counter)


def ext_euc_matrix(
    x: torch.Tensor, y: torch.Tensor, counter: _ClampCounter | None = None
) -> torch.Tensor:
    """Pairwise Euclidean exterior angles ext(x_i, y_j), shape (n, m)."""
    nx2 = (x * x).sum(dim=-1)
    ny2 = (y * y).sum(dim=-1)
    d2 = (nx2[:, None] + ny2[None, :] - 2.0 * (x @ y.T)).clamp_min(EPS * EPS)
    dxy = torch.sqrt(d2)
    nx = torch.sqrt(nx2).clamp_min(EPS)
    arg = (ny2[None, :] - nx2[:, None] - d2) / (2.0 * nx[:, None] * dxy)
    return _masked_arccos(arg, counter)


def _masked_infonce(logits: torch.Tensor, allowed: torch.Tensor) -> torch.Tensor:
    """Mean over rows of -log softmax(diagonal | allowed columns)."""
    masked = logits.masked_fill(~allowed, _NEG_INF)
    lse = torch.logsumexp(masked, dim=1)
    return (lse - logits.diagonal()).mean()


def batch_loss_torch(
    parents: torch.Tensor,
    children: torch.Tensor,
    tau: torch.Tensor,
    c: torch.Tensor,
    space_kind: str,
    allowed_p2c: torch.Tensor,
    allowed_c2p: torch.Tensor,
    counter: _ClampCounter | None = None,
) -> torch.Tensor:
    """Bidirectional loss over tangent-space pair embeddings (n, d)."""
    if space_kind == "hyperbolic":
        p_space, p_time = exp_map_torch(parents, c)
        c_space, c_time = exp_map_torch(children, c)
        ext_pc = ext_hyp_matrix(p_space, p_time, c_space, c_time, c, counter)
        ext_cp = ext_hyp_matrix(c_space, c_time, p_space, p_time, c, counter)
    else:
        ext_pc = ext_euc_matrix(parents, children, counter)
        ext_cp = ext_euc_matrix(children, parents, counter)
    beta1 = math.pi - ext_pc  # anchor parent i vs child j
    alpha2 = ext_cp  # anchor child i vs parent j
    loss = _masked_infonce(beta1 / tau, allowed_p2c)
    loss = loss + _masked_infonce(alpha2 / tau, allowed_c2p)
    return loss


def _allowed_masks(batch: PairBatch, mode: str) -> tuple[torch.Tensor, torch.Tensor]:
    n = len(batch.pairs)
    p2c = torch.eye(n, dtype=torch.bool)
    c2p = torch.eye(n, dtype=torch.bool)
    for i in range(n):
        for j in negative_set(batch, i, "parent_to_child", mode):
            p2c[i, j] = True
        for j in negative_set(batch, i, "child_to_parent", mode):
            c2p[i, j] = True
    return p2c, c2p


def _batch_tensors(batch: PairBatch) -> tuple[list[str], torch.Tensor, torch.Tensor, torch.Tensor]:
    """Unique node tensor plus parent/children index views into it."""
    ids: list[str] = []
    index: dict[str, int] = {}
    for parent, child in batch.pairs:
        for node in (parent, child):
            if node not in index:
                index[node] = len(ids)
                ids.append(node)
    vectors = np.stack([np.asarray(batch.embeddings[i], dtype=np.float64) for i in ids])
    table = torch.from_numpy(vectors)
    p_idx = torch.tensor([index[p] for p, _ in batch.pairs], dtype=torch.long)
    c_idx = torch.tensor([index[c] for _, c in batch.pairs], dtype=torch.long)
    return ids, table, p_idx, c_idx


def _evaluate(
    batch: PairBatch, config: LossConfig, requires_grad: bool
) -> tuple[torch.Tensor, list[str], torch.Tensor, torch.Tensor, torch.Tensor, _ClampCounter]:
    if len(batch.pairs) == 0:
        raise ValueError("empty batch")
    ids, table, p_idx, c_idx = _batch_tensors(batch)
    tau = torch.tensor(float(config.tau), dtype=torch.float64)
    c = torch.tensor(float(config.c), dtype=torch.float64)
    if requires_grad:
        table.requires_grad_(True)
        tau.requires_grad_(True)
        c.requires_grad_(True)
    allowed_p2c, allowed_c2p = _allowed_masks(batch, config.negative_mode)
    counter = _ClampCounter()
    loss = batch_loss_torch(
        table[p_idx], table[c_idx], tau, c, config.space_kind,
        allowed_p2c, allowed_c2p, counter,
    )
    return loss, ids, table, tau, c, counter


def infonce_directional(batch: PairBatch, config: LossConfig, direction: Direction) -> float:
    """One direction of the loss: beta1 for parent-to-child, alpha2 otherwise."""
    if len(batch.pairs) == 0:
        raise ValueError("empty batch")
    ids, table, p_idx, c_idx = _batch_tensors(batch)
    tau = torch.tensor(float(config.tau), dtype=torch.float64)
    c = torch.tensor(float(config.c), dtype=torch.float64)
    allowed_p2c, allowed_c2p = _allowed_masks(batch, config.negative_mode)
    parents, children = table[p_idx], table[c_idx]
    if config.space_kind == "hyperbolic":
        p_space, p_time = exp_map_torch(parents, c)
        c_space, c_time = exp_map_torch(children, c)
        if direction == "parent_to_child":
            kappa = math.pi - ext_hyp_matrix(p_space, p_time, c_space, c_time, c)
        else:
            kappa = ext_hyp_matrix(c_space, c_time, p_space, p_time, c)
    else:
        if direction == "parent_to_child":
            kappa = math.pi - ext_euc_matrix(parents, children)
        else:
            kappa = ext_euc_matrix(children, parents)
    allowed = allowed_p2c if direction == "parent_to_child" else allowed_c2p
    return float(_masked_infonce(kappa / tau, allowed))


def bidirectional_loss(batch: PairBatch, config: LossConfig) -> float:
    """Sum of the parent-to-child and child-to-parent directional losses."""
    loss, *_ = _evaluate(batch, config, requires_grad=False)
    return float(loss)


def loss_gradients(batch: PairBatch, config: LossConfig) -> dict:
    """Analytic gradients of the bidirectional loss.

    Returns ``{"vectors": {node_id: d-vector}, "tau": float, "c": float,
    "clamp_count": int}``. Pairs at an arccos clamp boundary contribute zero
    gradient and bump the counter.
    """
    loss, ids, table, tau, c, counter = _evaluate(batch, config, requires_grad=True)
    loss.backward()
    grads = table.grad.detach().numpy()
    return {
        "vectors": {node: grads[k].copy() for k, node in enumerate(ids)},
        "tau": float(tau.grad),
        "c": float(c.grad) if config.space_kind == "hyperbolic" else 0.0,
        "clamp_count": counter.count,
        "loss": float(loss.detach()),
    }
