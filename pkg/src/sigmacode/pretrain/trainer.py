"""Self-supervised pre-training over a corpus of method graphs.

Mini-batches are fixed-size sets of whole method graphs merged into one
block-diagonal batch. Each step encodes the batch twice (clean and with
row-shuffled input features), evaluates the four signals, and applies
one Adam update to the encoder, the global tied-feature matrix, and all
signal heads. Checkpoints are written per epoch; the log holds one
record per step.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ..embed import HASHED, PRETRAINED, SubwordEmbedder, with_inverse_edges
from ..graphbuild import NODE_TYPES, SigmaGraph
from ..model import (
    EncoderState,
    assemble_batch,
    batch_features,
    encode_batch,
    encoder_to_tensors,
    init_encoder_state,
)
from ..nn.checkpoint import save_checkpoint
from ..nn.layers import MlpParams, glorot, init_mlp
from ..nn.optim import AdamState, adam_step, zero_grads
from ..nn.tensor import Tensor, gather_rows, parameter
from .losses import (
    LossWeights,
    TypedPair,
    combined_loss,
    gather_weak_groups,
    him_loss,
    init_mrw_diagonals,
    mrw_loss,
    mt_loss,
    nt_loss,
    sample_mrw_negatives,
)
from .motifs import MOTIF_CLASSES, motif_targets
from .walks import MrwConfig, sample_metapath_walks, walk_pairs


class NonFiniteLoss(Exception):
    """Raised when any loss term stops being finite."""


@dataclass
class PretrainConfig:
    dims: tuple[int, ...] = (300, 300, 300)
    use_self_loop: bool = True
    epochs: int = 10
    batch_size: int = 32
    lr: float = 1e-3
    dropout: float = 0.2
    l2: float = 1e-4
    weights: LossWeights = field(default_factory=LossWeights)
    mrw: MrwConfig = field(default_factory=MrwConfig)
    stop_gradient_centers: bool = False
    motif_hidden: int = 64
    embed_buckets: int = 2 ** 20
    embed_seed: int = 0
    embed_table: dict | None = None     # subtoken -> vector; hashed when absent
    checkpoint_dir: str | None = None
    log_path: str | None = None


@dataclass
class TrainRecord:
    step: int
    epoch: int
    l_mrw: float
    l_him: float
    l_mt: float
    l_nt: float
    l_total: float


@dataclass
class PretrainState:
    encoder: EncoderState
    diagonals: dict[tuple[str, str], Tensor]
    him_w: Tensor
    mt_mlp: MlpParams

    def named_params(self) -> dict[str, Tensor]:
        params = self.encoder.named_params()
        for (t_src, t_dst), w in self.diagonals.items():
            params[f"mrw/{t_src}:{t_dst}"] = w
        params["him/w"] = self.him_w
        params.update(self.mt_mlp.named("motif"))
        return params


@dataclass
class PretrainResult:
    state: PretrainState
    records: list[TrainRecord]


def init_pretrain_state(corpus, config: PretrainConfig, seed: int) -> PretrainState:
    embedder = SubwordEmbedder(
        dim=config.dims[0], seed=config.embed_seed, buckets=config.embed_buckets,
        mode=PRETRAINED if config.embed_table else HASHED, table=config.embed_table,
    )
    encoder = init_encoder_state(
        seed, corpus.tying.strict_vocab, list(config.dims), embedder,
        use_self_loop=config.use_self_loop,
    )
    rng = np.random.default_rng((seed, 1))
    d = encoder.d_out
    return PretrainState(
        encoder=encoder,
        diagonals=init_mrw_diagonals(sorted(NODE_TYPES), d),
        him_w=parameter(glorot(rng, d, d)),
        mt_mlp=init_mlp(rng, d, config.motif_hidden, len(MOTIF_CLASSES)),
    )


def pretrain_state_to_tensors(state: PretrainState) -> tuple[dict[str, np.ndarray], dict]:
    tensors, meta = encoder_to_tensors(state.encoder)
    for name, t in state.named_params().items():
        tensors.setdefault(name, t.data)
    meta["motif_hidden"] = int(state.mt_mlp.w1.data.shape[1])
    return tensors, meta


def write_train_log(records: list[TrainRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("step\tepoch\tL_MRW\tL_HIM\tL_MT\tL_NT\tL_total\n")
        for r in records:
            fh.write(
                f"{r.step}\t{r.epoch}\t{r.l_mrw:.10g}\t{r.l_him:.10g}"
                f"\t{r.l_mt:.10g}\t{r.l_nt:.10g}\t{r.l_total:.10g}\n"
            )


def pretrain_step(
    batch_graphs: list[SigmaGraph],
    state: PretrainState,
    corpus,
    config: PretrainConfig,
    rng: np.random.Generator,
    walk_seeds: list,
    motif_cache: dict[str, np.ndarray] | None = None,
) -> tuple[Tensor, Tensor, Tensor, Tensor, Tensor]:
    """Forward pass and the four losses for one batch of graphs."""
    batch = assemble_batch(batch_graphs, state.encoder)
    x = batch_features(batch, state.encoder)
    h = encode_batch(batch, state.encoder, config.dropout, True, rng, x=x)
    perm = rng.permutation(batch.n_nodes)
    h_corrupt = encode_batch(
        batch, state.encoder, config.dropout, True, rng, x=gather_rows(x, perm)
    )

    type_rows: dict[str, list[int]] = {}
    for row, ntype in enumerate(batch.ntypes):
        type_rows.setdefault(ntype, []).append(row)

    pos: list[TypedPair] = []
    for g, walk_seed in zip(batch_graphs, walk_seeds):
        walks = sample_metapath_walks(g, config.mrw, walk_seed)
        for u, v in walk_pairs(walks):
            u_row = batch.row_of[(g.method_id, u)]
            v_row = batch.row_of[(g.method_id, v)]
            pos.append((u_row, batch.ntypes[u_row], v_row, batch.ntypes[v_row]))
    negs = sample_mrw_negatives(pos, type_rows, config.mrw.negatives, rng)
    l_mrw = mrw_loss(pos, negs, h, state.diagonals)

    l_him = him_loss(h, h_corrupt, state.him_w, type_rows)

    if motif_cache is None:
        targets = np.vstack([motif_targets(g) for g in batch_graphs])
    else:
        targets = np.vstack([motif_cache[g.method_id] for g in batch_graphs])
    l_mt = mt_loss(h, targets, state.mt_mlp)

    groups = gather_weak_groups(batch, corpus.tying.weak_groups)
    l_nt = nt_loss(h, groups, config.stop_gradient_centers)

    total = combined_loss(l_mrw, l_him, l_mt, l_nt, config.weights)
    return l_mrw, l_him, l_mt, l_nt, total


def pretrain_run(corpus, config: PretrainConfig, seed: int) -> PretrainResult:
    state = init_pretrain_state(corpus, config, seed)
    source = corpus.graphs_in_split("train") if corpus.splits else list(corpus.graphs)
    graphs = with_inverse_edges(source)
    motif_cache: dict[str, np.ndarray] = {}

    params = state.named_params()
    adam = AdamState(lr=config.lr)
    rng = np.random.default_rng((seed, 2))
    records: list[TrainRecord] = []
    step = 0

    for epoch in range(config.epochs):
        order = [int(i) for i in rng.permutation(len(graphs))]
        for start in range(0, len(order), config.batch_size):
            chunk = order[start:start + config.batch_size]
            batch_graphs = [graphs[i] for i in chunk]
            for g in batch_graphs:
                if g.method_id not in motif_cache:
                    motif_cache[g.method_id] = motif_targets(g)
            walk_seeds = [(seed, epoch, i) for i in chunk]
            l_mrw, l_him, l_mt, l_nt, total = pretrain_step(
                batch_graphs, state, corpus, config, rng, walk_seeds, motif_cache
            )
            values = [float(t.data) for t in (l_mrw, l_him, l_mt, l_nt, total)]
            if not all(np.isfinite(v) for v in values):
                raise NonFiniteLoss(
                    f"step {step}: MRW={values[0]} HIM={values[1]}"
                    f" MT={values[2]} NT={values[3]} total={values[4]}"
                )
            zero_grads(params)
            total.backward()
            adam_step(params, adam, config.l2)
            records.append(TrainRecord(step, epoch, *values))
            step += 1
        if config.checkpoint_dir:
            tensors, meta = pretrain_state_to_tensors(state)
            meta["epoch"] = epoch
            meta["step"] = step
            os.makedirs(config.checkpoint_dir, exist_ok=True)
            save_checkpoint(
                os.path.join(config.checkpoint_dir, f"epoch{epoch:03d}.ckpt"),
                tensors, meta,
            )
    if config.log_path:
        write_train_log(records, config.log_path)
    return PretrainResult(state, records)
