"""Self-supervised loss functions over batch embeddings.

Four signals, each a scalar tensor on the autodiff tape:

* walk proximity: softplus margin on diagonally weighted dot products
  of co-walk node pairs against type-matched negatives,
* mutual information: a bilinear discriminator separating clean node
  embeddings from embeddings of row-shuffled inputs, scored against
  per-type mean summaries,
* motif regression: squared error of an MLP predicting log-scaled
  motif participation counts,
* weak tying: mean squared distance of group members to their
  (differentiable) group centers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn.layers import MlpParams, mlp_forward
from ..nn.tensor import ShapeMismatch, Tensor, constant, gather_rows, parameter


class MissingDiagonal(Exception):
    """Raised when a walk pair's ordered type pair has no weight vector."""


class DegenerateType(Exception):
    """Raised when a type partition contains no nodes at all."""


@dataclass
class LossWeights:
    omega1: float = 1.0
    omega2: float = 1.0
    omega3: float = 1.0
    omega4: float = 1.0

    def __post_init__(self) -> None:
        weights = (self.omega1, self.omega2, self.omega3, self.omega4)
        if any(w < 0 for w in weights):
            raise ValueError("loss weights must be nonnegative")
        if not any(w > 0 for w in weights):
            raise ValueError("at least one loss weight must be positive")


TypedPair = tuple[int, str, int, str]


def init_mrw_diagonals(ntypes: list[str], dim: int) -> dict[tuple[str, str], Tensor]:
    """One trainable d-vector per ordered node-type pair, initialized to ones."""
    diagonals: dict[tuple[str, str], Tensor] = {}
    for t_src in sorted(ntypes):
        for t_dst in sorted(ntypes):
            diagonals[(t_src, t_dst)] = parameter(np.ones(dim))
    return diagonals


def sample_mrw_negatives(
    pos_pairs: list[TypedPair],
    type_rows: dict[str, list[int]],
    negatives: int,
    rng: np.random.Generator,
) -> list[TypedPair]:
    """Corrupt each positive pair by replacing its second endpoint.

    The replacement is a uniform batch node of the same type, resampled
    on collision with the true partner. A type with a single node
    yields no negatives for that pair.
    """
    if negatives < 1:
        raise ValueError("negatives must be >= 1")
    negs: list[TypedPair] = []
    for u_row, u_type, v_row, v_type in pos_pairs:
        pool = type_rows.get(v_type, [])
        if len(pool) < 2:
            continue
        for _ in range(negatives):
            candidate = pool[int(rng.integers(len(pool)))]
            while candidate == v_row:
                candidate = pool[int(rng.integers(len(pool)))]
            negs.append((u_row, u_type, candidate, v_type))
    return negs


def mrw_loss(
    pos_pairs: list[TypedPair],
    neg_pairs: list[TypedPair],
    h: Tensor,
    diagonals: dict[tuple[str, str], Tensor],
) -> Tensor:
    """Sum of softplus(-y * score) over labeled pairs.

    score = sum_j h_u[j] * w[j] * h_v[j] with w the diagonal weight for
    the ordered type pair; y is +1 for co-walk pairs, -1 for negatives.
    """
    grouped: dict[tuple[str, str], tuple[list[int], list[int], list[float]]] = {}
    for pairs, label in ((pos_pairs, 1.0), (neg_pairs, -1.0)):
        for u_row, u_type, v_row, v_type in pairs:
            us, vs, ys = grouped.setdefault((u_type, v_type), ([], [], []))
            us.append(u_row)
            vs.append(v_row)
            ys.append(label)
    total = constant(0.0)
    for type_pair in sorted(grouped):
        if type_pair not in diagonals:
            raise MissingDiagonal(f"no diagonal for type pair {type_pair}")
        us, vs, ys = grouped[type_pair]
        w = diagonals[type_pair]
        h_u = gather_rows(h, us)
        h_v = gather_rows(h, vs)
        scores = (h_u * h_v * w).sum(axis=1)
        total = total + (scores * constant(np.asarray(ys)) * -1.0).softplus().sum()
    return total


def him_loss(
    h: Tensor,
    h_corrupt: Tensor,
    w: Tensor,
    type_rows: dict[str, list[int]],
) -> Tensor:
    """Binary discrimination of clean vs corrupted embeddings.

    For each node type t with members, s_t is the mean of the clean
    member embeddings, and every member contributes
    -log sigma(h' W s_t) - log(1 - sigma(h_corrupt' W s_t)),
    written with softplus identities for stability. Types without
    members are skipped; an entirely empty partition is an error.
    """
    nonempty = {t: rows for t, rows in type_rows.items() if rows}
    if not nonempty:
        raise DegenerateType("type partition has no nodes")
    dim = h.data.shape[1]
    total = constant(0.0)
    for ntype in sorted(nonempty):
        rows = nonempty[ntype]
        h_t = gather_rows(h, rows)
        h_c = gather_rows(h_corrupt, rows)
        summary = h_t.mean(axis=0).reshape(dim, 1)
        w_s = w @ summary
        z_pos = (h_t @ w_s).reshape(len(rows))
        z_neg = (h_c @ w_s).reshape(len(rows))
        total = total + (z_pos * -1.0).softplus().sum() + z_neg.softplus().sum()
    return total


def mt_loss(h: Tensor, targets: np.ndarray, mlp: MlpParams) -> Tensor:
    """Sum over nodes of squared error against log-scaled motif counts."""
    pred = mlp_forward(h, mlp)
    if pred.data.shape != targets.shape:
        raise ShapeMismatch(
            f"motif head produced {pred.data.shape}, targets {targets.shape}"
        )
    diff = pred - constant(targets)
    return (diff * diff).sum()


def nt_loss(
    h: Tensor,
    groups: list[list[int]],
    stop_gradient_centers: bool = False,
) -> Tensor:
    """Sum over groups of the mean squared distance to the group center.

    Centers are means of member embeddings and gradients flow through
    them unless stop_gradient_centers is set. Groups with fewer than
    two members in the batch contribute nothing.
    """
    total = constant(0.0)
    for rows in groups:
        if len(rows) < 2:
            continue
        members = gather_rows(h, rows)
        center = members.mean(axis=0, keepdims=True)
        if stop_gradient_centers:
            center = constant(center.data)
        diff = members - center
        total = total + (diff * diff).sum(axis=1).mean()
    return total


def gather_weak_groups(batch, weak_groups: dict) -> list[list[int]]:
    """Batch-row index lists for weakly tied groups with >= 2 members present."""
    present: list[list[int]] = []
    for feature in sorted(weak_groups):
        rows = [
            batch.row_of[key] for key in weak_groups[feature] if key in batch.row_of
        ]
        if len(rows) >= 2:
            present.append(rows)
    return present


def combined_loss(
    l_mrw: Tensor,
    l_him: Tensor,
    l_mt: Tensor,
    l_nt: Tensor,
    weights: LossWeights,
) -> Tensor:
    return (
        l_mrw * weights.omega1
        + l_him * weights.omega2
        + l_mt * weights.omega3
        + l_nt * weights.omega4
    )
