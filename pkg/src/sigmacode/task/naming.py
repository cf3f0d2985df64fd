"""Method-name subtoken prediction.

A name is a sequence of at most five lowercase subtokens drawn from a
1000-entry vocabulary built on the training split (ids 0 and 1 are
reserved for padding and unknown). Five independent affine classifiers
predict one subtoken per position from the pooled graph embedding;
decoding takes the argmax per position and stops at the first pad.
Scoring is multiset subtoken overlap, micro-averaged over methods,
with unknown predictions earning no credit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..embed import subtokenize_name, with_inverse_edges
from ..model import (
    EncoderState,
    assemble_batch,
    batch_features,
    encode_batch,
)
from ..nn.optim import AdamState, adam_step, zero_grads
from ..nn.tensor import Tensor, constant, parameter
from ..nn.layers import glorot
from .pooling import AttentionParams, init_attention, pool_batch

PAD_ID = 0
UNK_ID = 1
UNK_TOKEN = "<unk>"


class VocabNotBuilt(Exception):
    """Raised when prediction runs before a vocabulary exists."""


@dataclass
class NameVocab:
    subtokens: list[str]                    # most frequent first
    max_len: int = 5
    index: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.index:
            self.index = {s: i + 2 for i, s in enumerate(self.subtokens)}

    @property
    def n_classes(self) -> int:
        return len(self.subtokens) + 2

    def token_of(self, token_id: int) -> str:
        if token_id == UNK_ID:
            return UNK_TOKEN
        return self.subtokens[token_id - 2]

    def encode(self, name: str) -> list[int]:
        """Target ids: truncated to max_len, padded with PAD."""
        ids = [self.index.get(s, UNK_ID) for s in subtokenize_name(name)]
        ids = ids[: self.max_len]
        return ids + [PAD_ID] * (self.max_len - len(ids))


def method_name_from_id(method_id: str) -> str:
    """Declared method name encoded in a graph id `pkg/name@ordinal`."""
    tail = method_id.rsplit("/", 1)[-1]
    return tail.split("@", 1)[0]


def build_name_vocab(
    names: list[str], vocab_size: int = 1000, max_len: int = 5
) -> NameVocab:
    """Most frequent training subtokens; ties break lexicographically."""
    counts: dict[str, int] = {}
    for name in names:
        for sub in subtokenize_name(name):
            counts[sub] = counts.get(sub, 0) + 1
    ranked = sorted(counts, key=lambda s: (-counts[s], s))
    return NameVocab(ranked[:vocab_size], max_len=max_len)


@dataclass
class NameHead:
    pooling: str
    weights: list[Tensor]                  # max_len entries, d x n_classes
    biases: list[Tensor]                   # max_len entries, n_classes
    vocab: NameVocab
    attention: AttentionParams | None = None

    def named_params(self) -> dict[str, Tensor]:
        params: dict[str, Tensor] = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            params[f"name/pos{i}/w"] = w
            params[f"name/pos{i}/b"] = b
        if self.attention is not None:
            params.update(self.attention.named("name/attention"))
        return params


def init_name_head(
    rng: np.random.Generator, dim: int, vocab: NameVocab, pooling: str
) -> NameHead:
    weights = [parameter(glorot(rng, dim, vocab.n_classes)) for _ in range(vocab.max_len)]
    biases = [parameter(np.zeros(vocab.n_classes)) for _ in range(vocab.max_len)]
    attention = init_attention(rng, dim) if pooling == "attention" else None
    return NameHead(pooling, weights, biases, vocab, attention)


def name_logits(pooled: Tensor, head: NameHead) -> list[Tensor]:
    """One (n, n_classes) logit block per name position."""
    return [pooled @ w + b for w, b in zip(head.weights, head.biases)]


def name_loss(logits: list[Tensor], targets: np.ndarray) -> Tensor:
    """Summed cross entropy over all positions and methods."""
    n, n_classes = logits[0].data.shape
    total = constant(0.0)
    for pos, block in enumerate(logits):
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), targets[:, pos]] = 1.0
        total = total + (block.log_softmax(axis=1) * constant(onehot)).sum() * -1.0
    return total


def decode_name(logit_rows: list[np.ndarray], vocab: NameVocab) -> list[str]:
    """Argmax per position, stop at the first pad, drop unknowns."""
    out: list[str] = []
    for row in logit_rows:
        token_id = int(np.argmax(row))
        if token_id == PAD_ID:
            break
        if token_id == UNK_ID:
            continue
        out.append(vocab.token_of(token_id))
    return out


def predict_name(pooled: Tensor, head: NameHead) -> list[list[str]]:
    """Decoded subtoken lists for every pooled row."""
    if head.vocab is None or head.vocab.n_classes <= 2:
        raise VocabNotBuilt("name vocabulary is empty")
    logits = name_logits(pooled, head)
    n = pooled.data.shape[0]
    return [
        decode_name([block.data[i] for block in logits], head.vocab)
        for i in range(n)
    ]


def name_metrics(pred: list[str], gold: list[str]) -> tuple[float, float, float]:
    """Multiset-overlap precision, recall, F1 for one method."""
    pred = [p for p in pred if p != UNK_TOKEN]
    remaining = list(gold)
    common = 0
    for p in pred:
        if p in remaining:
            remaining.remove(p)
            common += 1
    precision = common / len(pred) if pred else 0.0
    recall = common / len(gold) if gold else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return precision, recall, f1


def micro_name_metrics(
    pairs: list[tuple[list[str], list[str]]]
) -> tuple[float, float, float]:
    """Micro-averaged P/R/F1 over (predicted, gold) subtoken lists."""
    common = n_pred = n_gold = 0
    for pred, gold in pairs:
        pred = [p for p in pred if p != UNK_TOKEN]
        remaining = list(gold)
        for p in pred:
            if p in remaining:
                remaining.remove(p)
                common += 1
        n_pred += len(pred)
        n_gold += len(gold)
    precision = common / n_pred if n_pred else 0.0
    recall = common / n_gold if n_gold else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return precision, recall, f1


@dataclass
class NameFinetuneConfig:
    pooling: str = "attention"
    epochs: int = 100
    batch_size: int = 32
    lr: float = 1e-3
    dropout: float = 0.0
    l2: float = 1e-4
    freeze_encoder: bool = False
    vocab_size: int = 1000
    max_len: int = 5


@dataclass
class NameFinetuneResult:
    head: NameHead
    encoder: EncoderState
    metrics: dict[str, float]
    history: list[dict[str, float]]


def _split_or_all(corpus, split: str):
    if corpus.splits:
        return corpus.graphs_in_split(split)
    return list(corpus.graphs) if split == "train" else []


def evaluate_name(graphs, names, encoder, head, batch_size: int = 32):
    """Micro P/R/F1 of decoded names against gold subtokens; None if empty."""
    if not graphs:
        return None
    graphs = with_inverse_edges(list(graphs))
    pairs = []
    virtual = head.pooling == "virtual_node"
    for start in range(0, len(graphs), batch_size):
        chunk = graphs[start:start + batch_size]
        batch = assemble_batch(chunk, encoder, virtual=virtual)
        h = encode_batch(batch, encoder)
        pooled = pool_batch(h, batch, head.pooling, head.attention)
        decoded = predict_name(pooled, head)
        for g, pred in zip(chunk, decoded):
            pairs.append((pred, subtokenize_name(names[g.method_id])))
    return micro_name_metrics(pairs)


def finetune_name(
    corpus,
    encoder: EncoderState,
    config: NameFinetuneConfig,
    seed: int = 0,
    names: dict[str, str] | None = None,
) -> NameFinetuneResult:
    """Train the name head (and optionally the encoder) on the train split.

    Validation F1 selects the reported epoch; test metrics come from
    the same epoch's parameters. Without splits the corpus trains and
    reports on all graphs.
    """
    if names is None:
        names = {g.method_id: method_name_from_id(g.method_id) for g in corpus.graphs}

    train = with_inverse_edges(_split_or_all(corpus, "train"))
    valid = with_inverse_edges(_split_or_all(corpus, "valid"))
    test = with_inverse_edges(_split_or_all(corpus, "test"))

    vocab = build_name_vocab(
        [names[g.method_id] for g in train], config.vocab_size, config.max_len
    )
    if not vocab.subtokens:
        raise VocabNotBuilt("training split produced no name subtokens")

    rng = np.random.default_rng((seed, 3))
    head = init_name_head(rng, encoder.d_out, vocab, config.pooling)
    params = dict(head.named_params())
    if not config.freeze_encoder:
        params.update(encoder.named_params())
    adam = AdamState(lr=config.lr)
    virtual = config.pooling == "virtual_node"

    targets = {
        g.method_id: np.asarray(vocab.encode(names[g.method_id]), dtype=np.int64)
        for g in train
    }

    # all trainable tensors, encoder included even when frozen, so the
    # selected epoch's parameters can be restored after the last epoch
    snapshot_pool = dict(head.named_params())
    snapshot_pool.update(encoder.named_params())

    history: list[dict[str, float]] = []
    best = {"valid_f1": -1.0, "epoch": -1}
    best_metrics: dict[str, float] = {}
    best_snapshot: dict[str, np.ndarray] = {}
    for epoch in range(config.epochs):
        order = [int(i) for i in rng.permutation(len(train))]
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            chunk = [train[i] for i in order[start:start + config.batch_size]]
            batch = assemble_batch(chunk, encoder, virtual=virtual)
            h = encode_batch(batch, encoder, config.dropout, True, rng)
            pooled = pool_batch(h, batch, config.pooling, head.attention)
            logits = name_logits(pooled, head)
            y = np.stack([targets[g.method_id] for g in chunk])
            loss = name_loss(logits, y)
            zero_grads(params)
            loss.backward()
            adam_step(params, adam, config.l2)
            epoch_loss += float(loss.data)

        record: dict[str, float] = {"epoch": float(epoch), "loss": epoch_loss}
        train_m = evaluate_name(train, names, encoder, head, config.batch_size)
        record["train_f1"] = train_m[2]
        valid_m = evaluate_name(valid, names, encoder, head, config.batch_size)
        test_m = evaluate_name(test, names, encoder, head, config.batch_size)
        if valid_m is not None:
            record["valid_f1"] = valid_m[2]
        if test_m is not None:
            record["test_f1"] = test_m[2]
        history.append(record)

        selector = valid_m[2] if valid_m is not None else train_m[2]
        if selector > best["valid_f1"]:
            best = {"valid_f1": selector, "epoch": epoch}
            chosen = test_m if test_m is not None else train_m
            best_metrics = {
                "precision": chosen[0],
                "recall": chosen[1],
                "f1": chosen[2],
                "train_f1": train_m[2],
                "selected_epoch": float(epoch),
            }
            if valid_m is not None:
                best_metrics["valid_f1"] = valid_m[2]
            best_snapshot = {k: t.data.copy() for k, t in snapshot_pool.items()}

    for k, t in snapshot_pool.items():
        if k in best_snapshot:
            t.data = best_snapshot[k]
    return NameFinetuneResult(head, encoder, best_metrics, history)
