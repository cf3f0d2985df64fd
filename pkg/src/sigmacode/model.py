"""Encoder state and batch-graph assembly.

A batch merges whole method graphs into one block-diagonal graph.
Initial features X combine constant subword vectors with learnable
rows gathered from the global embedding matrix for strictly tied
features, so gradients reach the shared rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import is_strict_feature
from .embed import INV_PREFIX, SubwordEmbedder
from .graphbuild import SIGMA0_EDGE_KINDS, SIGMA1_EDGE_KINDS, SigmaGraph
from .nn import (
    RgcnParams,
    Tensor,
    constant,
    encoder_forward,
    gather_rows,
    init_rgcn,
    parameter,
    scatter_rows,
)

POOL_RELATION = "pool"
VIRTUAL_FEATURE = "virtual"
VIRTUAL_NTYPE = "virtual"

NODE_TYPE_ORDER = ("entry", "exit", "data", "action", "control")


def relation_universe() -> list[str]:
    base = sorted(SIGMA0_EDGE_KINDS | SIGMA1_EDGE_KINDS)
    return base + [INV_PREFIX + r for r in base] + [POOL_RELATION]


@dataclass
class EncoderState:
    rgcn: RgcnParams
    global_embed: Tensor                # |strict_vocab| x d_in
    strict_vocab: dict[str, int]
    embedder: SubwordEmbedder
    dims: list[int]
    use_self_loop: bool = True

    @property
    def d_in(self) -> int:
        return self.dims[0]

    @property
    def d_out(self) -> int:
        return self.dims[-1]

    def named_params(self) -> dict[str, Tensor]:
        params = {"global/embed": self.global_embed}
        params.update(self.rgcn.named("encoder"))
        return params


def init_encoder_state(seed: int, strict_vocab: dict[str, int], dims: list[int],
                       embedder: SubwordEmbedder, use_self_loop: bool = True) -> EncoderState:
    rng = np.random.default_rng(seed)
    rgcn = init_rgcn(rng, relation_universe(), dims, use_self_loop)
    rows = np.zeros((len(strict_vocab), dims[0]))
    for feature, row in strict_vocab.items():
        rows[row] = embedder.feature_vector(feature)
    return EncoderState(rgcn, parameter(rows), dict(strict_vocab), embedder,
                        list(dims), use_self_loop)


@dataclass
class BatchGraph:
    graphs: list[SigmaGraph]
    n_nodes: int
    real_slices: list[tuple[int, int]]      # rows of each graph's own nodes
    virtual_rows: list[int] | None          # one per graph when pooling via virtual node
    ntypes: list[str]
    features: list[str]
    rel_edges: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]
    row_of: dict[tuple[str, int], int]
    x_base: np.ndarray
    strict_positions: np.ndarray
    strict_rows: np.ndarray


def assemble_batch(graphs: list[SigmaGraph], state: EncoderState,
                   virtual: bool = False) -> BatchGraph:
    ntypes: list[str] = []
    features: list[str] = []
    real_slices: list[tuple[int, int]] = []
    virtual_rows: list[int] | None = [] if virtual else None
    row_of: dict[tuple[str, int], int] = {}
    edge_lists: dict[str, tuple[list[int], list[int]]] = {}

    offset = 0
    for g in graphs:
        start = offset
        for n in g.nodes:
            row_of[(g.method_id, n.id)] = offset + n.id
        ntypes.extend(n.ntype for n in g.nodes)
        features.extend(n.feature for n in g.nodes)
        stop = offset + len(g.nodes)
        real_slices.append((start, stop))
        for e in g.edges:
            srcs, dsts = edge_lists.setdefault(e.etype, ([], []))
            srcs.append(offset + e.src)
            dsts.append(offset + e.dst)
        offset = stop
        if virtual:
            vrow = offset
            ntypes.append(VIRTUAL_NTYPE)
            features.append(VIRTUAL_FEATURE)
            srcs, dsts = edge_lists.setdefault(POOL_RELATION, ([], []))
            for r in range(start, stop):
                srcs.append(r)
                dsts.append(vrow)
            virtual_rows.append(vrow)
            offset += 1

    n_nodes = offset
    rel_edges: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    for r in sorted(edge_lists):
        src = np.asarray(edge_lists[r][0], dtype=np.int64)
        dst = np.asarray(edge_lists[r][1], dtype=np.int64)
        indeg = np.bincount(dst, minlength=n_nodes).astype(np.float64)
        coef = 1.0 / indeg[dst]
        rel_edges[r] = (src, dst, coef)

    d = state.d_in
    x_base = np.zeros((n_nodes, d))
    strict_positions: list[int] = []
    strict_rows: list[int] = []
    for i, feature in enumerate(features):
        if is_strict_feature(feature) and feature in state.strict_vocab:
            strict_positions.append(i)
            strict_rows.append(state.strict_vocab[feature])
        else:
            x_base[i] = state.embedder.feature_vector(feature)

    return BatchGraph(
        graphs=list(graphs),
        n_nodes=n_nodes,
        real_slices=real_slices,
        virtual_rows=virtual_rows,
        ntypes=ntypes,
        features=features,
        rel_edges=rel_edges,
        row_of=row_of,
        x_base=x_base,
        strict_positions=np.asarray(strict_positions, dtype=np.int64),
        strict_rows=np.asarray(strict_rows, dtype=np.int64),
    )


def batch_features(batch: BatchGraph, state: EncoderState) -> Tensor:
    base = constant(batch.x_base)
    if len(batch.strict_positions) == 0:
        return base
    rows = gather_rows(state.global_embed, batch.strict_rows)
    return scatter_rows(base, batch.strict_positions, rows)


def encode_batch(batch: BatchGraph, state: EncoderState, dropout_rate: float = 0.0,
                 train_mode: bool = False, rng: np.random.Generator | None = None,
                 x: Tensor | None = None) -> Tensor:
    if x is None:
        x = batch_features(batch, state)
    return encoder_forward(x, batch.rel_edges, state.rgcn, dropout_rate,
                           train_mode, rng)


# ---------------------------------------------------------------- checkpoints


def encoder_to_tensors(state: EncoderState) -> tuple[dict[str, np.ndarray], dict]:
    tensors = {name: t.data for name, t in state.named_params().items()}
    vocab_items = sorted(state.strict_vocab.items(), key=lambda kv: kv[1])
    meta = {
        "dims": state.dims,
        "use_self_loop": state.use_self_loop,
        "relations": state.rgcn.relations,
        "strict_features": [f for f, _ in vocab_items],
        "embedder": {
            "dim": state.embedder.dim,
            "mode": state.embedder.mode,
            "buckets": state.embedder.buckets,
            "seed": state.embedder.seed,
        },
    }
    return tensors, meta


def encoder_from_tensors(tensors: dict[str, np.ndarray], meta: dict,
                         table: dict[str, np.ndarray] | None = None) -> EncoderState:
    emb_meta = meta["embedder"]
    embedder = SubwordEmbedder(dim=emb_meta["dim"], mode=emb_meta["mode"] if table else "hashed",
                               buckets=emb_meta["buckets"], seed=emb_meta["seed"], table=table)
    strict_vocab = {f: i for i, f in enumerate(meta["strict_features"])}
    dims = list(meta["dims"])
    state = init_encoder_state(0, strict_vocab, dims, embedder,
                               use_self_loop=meta["use_self_loop"])
    state.global_embed = parameter(tensors["global/embed"].copy())
    for name, t in state.rgcn.named("encoder").items():
        t.data = tensors[name].copy()
    return state
