"""Graph-level readout from node embeddings.

Three poolings: the mean over a graph's node rows, the embedding of a
per-graph virtual node wired to every real node (computed by the
encoder itself), and gated attention with a learned scalar gate and a
learned projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import BatchGraph
from ..nn.layers import glorot
from ..nn.tensor import Tensor, concat, gather_rows, parameter, slice_rows

POOLINGS = ("average", "virtual_node", "attention")


class EmptyGraph(Exception):
    """Raised when a pooled graph contributes no node rows."""


@dataclass
class AttentionParams:
    gate: Tensor   # d x 1
    proj: Tensor   # d x d

    def named(self, prefix: str = "attention") -> dict[str, Tensor]:
        return {f"{prefix}/gate": self.gate, f"{prefix}/proj": self.proj}


def init_attention(rng: np.random.Generator, dim: int) -> AttentionParams:
    return AttentionParams(
        gate=parameter(glorot(rng, dim, 1)),
        proj=parameter(glorot(rng, dim, dim)),
    )


def attention_weights(rows: Tensor, params: AttentionParams) -> Tensor:
    """Softmax over a graph's nodes of the scalar gate scores; sums to 1."""
    scores = rows @ params.gate                   # n x 1
    return scores.softmax(axis=0)


def pool_graph(
    h: Tensor,
    batch: BatchGraph,
    graph_index: int,
    kind: str,
    attention: AttentionParams | None = None,
) -> Tensor:
    """One pooled (1, d) row for the graph at `graph_index`."""
    start, stop = batch.real_slices[graph_index]
    if stop <= start:
        raise EmptyGraph(f"graph {graph_index} has no nodes")
    if kind == "average":
        return slice_rows(h, start, stop).mean(axis=0, keepdims=True)
    if kind == "virtual_node":
        if batch.virtual_rows is None:
            raise ValueError("batch was assembled without virtual nodes")
        return gather_rows(h, [batch.virtual_rows[graph_index]])
    if kind == "attention":
        if attention is None:
            raise ValueError("attention pooling requires gate parameters")
        rows = slice_rows(h, start, stop)
        weights = attention_weights(rows, attention)      # n x 1
        projected = rows @ attention.proj                 # n x d
        return weights.transpose() @ projected            # 1 x d
    raise ValueError(f"unknown pooling kind: {kind}")


def pool_batch(
    h: Tensor,
    batch: BatchGraph,
    kind: str,
    attention: AttentionParams | None = None,
) -> Tensor:
    """Pooled rows for every graph in the batch, shape (n_graphs, d)."""
    if not batch.graphs:
        raise EmptyGraph("batch holds no graphs")
    pooled = [
        pool_graph(h, batch, i, kind, attention) for i in range(len(batch.graphs))
    ]
    return concat(pooled, axis=0)
