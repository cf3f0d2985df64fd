"""Link prediction over method graphs with a frozen encoder.

Candidate edges are the core (control + data) edge kinds, which both
graph flavors share as a prefix of their edge lists, so paired corpora
train and test on identical edge sets. A scorer is either DistMult
(one diagonal vector per edge kind, raw score) or a two-layer MLP on
concatenated endpoint embeddings (logistic score). Evaluation ranks
each held-out edge against 200 destination-corrupted negatives using
mid-rank tie handling.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..graphbuild import SIGMA0_EDGE_KINDS, SigmaEdge, SigmaGraph
from ..embed import INV_PREFIX, add_inverse_edges, with_inverse_edges
from ..model import EncoderState, assemble_batch, encode_batch
from ..nn.layers import MlpParams, glorot, init_mlp, mlp_forward
from ..nn.optim import AdamState, adam_step, zero_grads
from ..nn.tensor import Tensor, concat, constant, gather_rows, parameter

SCORER_KINDS = ("distmult", "mlp")


class NoTestEdges(Exception):
    """Raised when evaluation receives no held-out edges."""


@dataclass
class LinkScorer:
    kind: str
    rel: dict[str, Tensor] | None = None     # DistMult: edge kind -> d-vector
    mlp: MlpParams | None = None             # MLP: 2d -> hidden -> 1

    def named_params(self) -> dict[str, Tensor]:
        if self.kind == "distmult":
            return {f"link/rel/{r}": v for r, v in self.rel.items()}
        return self.mlp.named("link/mlp")


def init_link_scorer(
    rng: np.random.Generator,
    kind: str,
    dim: int,
    relations: list[str],
    hidden: int = 64,
) -> LinkScorer:
    if kind == "distmult":
        rel = {r: parameter(rng.normal(0.0, 1.0, size=dim)) for r in sorted(relations)}
        return LinkScorer("distmult", rel=rel)
    if kind == "mlp":
        return LinkScorer("mlp", mlp=init_mlp(rng, 2 * dim, hidden, 1))
    raise ValueError(f"unknown scorer kind: {kind}")


def distmult_score(h_u: np.ndarray, r_vec: np.ndarray, h_v: np.ndarray) -> float:
    """Diagonal bilinear form: sum_j h_u[j] * r[j] * h_v[j]."""
    return float(np.sum(np.asarray(h_u) * np.asarray(r_vec) * np.asarray(h_v)))


def score_logits(
    scorer: LinkScorer,
    h: Tensor,
    src_rows: list[int],
    dst_rows: list[int],
    etypes: list[str],
) -> Tensor:
    """Raw scores as a (n,) tensor on the tape (pre-logistic for MLP)."""
    if scorer.kind == "distmult":
        order = np.argsort(np.asarray(etypes), kind="stable")
        pieces = []
        perm: list[int] = []
        i = 0
        while i < len(order):
            j = i
            etype = etypes[order[i]]
            rows_u, rows_v = [], []
            while j < len(order) and etypes[order[j]] == etype:
                rows_u.append(src_rows[order[j]])
                rows_v.append(dst_rows[order[j]])
                perm.append(int(order[j]))
                j += 1
            h_u = gather_rows(h, rows_u)
            h_v = gather_rows(h, rows_v)
            pieces.append((h_u * h_v * scorer.rel[etype]).sum(axis=1))
            i = j
        grouped = concat(pieces, axis=0)
        inverse = np.empty(len(perm), dtype=np.int64)
        inverse[np.asarray(perm)] = np.arange(len(perm))
        return gather_rows(grouped, inverse)
    h_u = gather_rows(h, src_rows)
    h_v = gather_rows(h, dst_rows)
    x = concat([h_u, h_v], axis=1)
    return mlp_forward(x, scorer.mlp).reshape(len(src_rows))


def score_values(
    scorer: LinkScorer,
    h: np.ndarray,
    src_rows: np.ndarray,
    dst_rows: np.ndarray,
    etype: str,
) -> np.ndarray:
    """Evaluation-time scores without the tape; MLP output is logistic."""
    h_u = h[src_rows]
    h_v = h[dst_rows]
    if scorer.kind == "distmult":
        return np.sum(h_u * scorer.rel[etype].data * h_v, axis=1)
    x = np.concatenate([h_u, h_v], axis=1)
    hidden = np.maximum(x @ scorer.mlp.w1.data + scorer.mlp.b1.data, 0.0)
    z = (hidden @ scorer.mlp.w2.data + scorer.mlp.b2.data).reshape(-1)
    return 1.0 / (1.0 + np.exp(-z))


def core_edges(g: SigmaGraph) -> list[SigmaEdge]:
    """The graph's control + data edges (shared by both flavors)."""
    return [e for e in g.edges if e.etype in SIGMA0_EDGE_KINDS]


def split_graph_edges(
    g: SigmaGraph, test_fraction: float, seed: int
) -> tuple[list[SigmaEdge], list[SigmaEdge]]:
    """Deterministic (train, test) split of a graph's core edges.

    Held-out indices are drawn over the core edge list, which both
    flavors share, so paired corpora hold out identical edges. Graphs
    with fewer than two core edges keep everything.
    """
    candidates = core_edges(g)
    if len(candidates) < 2:
        return list(candidates), []
    rng = np.random.default_rng((seed, zlib.crc32(g.method_id.encode("utf-8"))))
    n_test = max(1, int(np.floor(test_fraction * len(candidates))))
    chosen = set(
        int(i) for i in rng.choice(len(candidates), size=n_test, replace=False)
    )
    train = [e for i, e in enumerate(candidates) if i not in chosen]
    test = [e for i, e in enumerate(candidates) if i in chosen]
    return train, test


def drop_edges(g: SigmaGraph, removed: list[SigmaEdge]) -> SigmaGraph:
    """Copy of g without the removed edges (multiset removal)."""
    budget: dict[tuple[int, str, int], int] = {}
    for e in removed:
        key = (e.src, e.etype, e.dst)
        budget[key] = budget.get(key, 0) + 1
    kept = []
    for e in g.edges:
        key = (e.src, e.etype, e.dst)
        if budget.get(key, 0) > 0:
            budget[key] -= 1
            continue
        kept.append(e)
    return SigmaGraph(g.method_id, g.flavor, list(g.nodes), kept)


@dataclass
class EvalItem:
    """One graph's frozen embeddings and its held-out edges."""
    h: np.ndarray
    test_edges: list[SigmaEdge]
    true_edges: set[tuple[int, str, int]]
    n_nodes: int


@dataclass
class LinkMetrics:
    mrr: float
    hit1: float
    hit3: float
    hit10: float
    pos_mean: float
    pos_std: float
    neg_mean: float
    neg_std: float
    t_stat: float
    p_value: float
    n_test: int

    def as_dict(self) -> dict[str, float]:
        return {
            "mrr": self.mrr, "hit1": self.hit1, "hit3": self.hit3,
            "hit10": self.hit10, "pos_mean": self.pos_mean,
            "pos_std": self.pos_std, "neg_mean": self.neg_mean,
            "neg_std": self.neg_std, "t_stat": self.t_stat,
            "p_value": self.p_value, "n_test": float(self.n_test),
        }


def sample_negative_dsts(
    u: int,
    etype: str,
    true_edges: set[tuple[int, str, int]],
    n_nodes: int,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Destination corruptions that never form a true edge (u, etype, *)."""
    out = np.empty(count, dtype=np.int64)
    for i in range(count):
        w = int(rng.integers(n_nodes))
        while (u, etype, w) in true_edges:
            w = int(rng.integers(n_nodes))
        out[i] = w
    return out


def link_eval(
    items: list[EvalItem],
    scorer: LinkScorer,
    negatives_per_edge: int = 200,
    seed: int = 0,
) -> LinkMetrics:
    """Rank every held-out edge against destination-corrupted negatives.

    rank = 1 + (# negatives scoring higher) + (# ties) / 2; reports
    MRR, Hit@{1,3,10}, score moments, and a Welch t-test separating
    positive from negative scores.
    """
    ranks: list[float] = []
    pos_scores: list[float] = []
    neg_scores: list[float] = []
    rng = np.random.default_rng((seed, 4))
    for item in items:
        for e in item.test_edges:
            negs = sample_negative_dsts(
                e.src, e.etype, item.true_edges, item.n_nodes,
                negatives_per_edge, rng,
            )
            pos = score_values(
                scorer, item.h, np.asarray([e.src]), np.asarray([e.dst]), e.etype
            )[0]
            neg = score_values(
                scorer, item.h, np.full(len(negs), e.src), negs, e.etype
            )
            rank = 1.0 + float((neg > pos).sum()) + float((neg == pos).sum()) / 2.0
            ranks.append(rank)
            pos_scores.append(float(pos))
            neg_scores.extend(float(s) for s in neg)
    if not ranks:
        raise NoTestEdges("no held-out edges to evaluate")
    ranks_arr = np.asarray(ranks)
    pos_arr = np.asarray(pos_scores)
    neg_arr = np.asarray(neg_scores)
    welch = stats.ttest_ind(pos_arr, neg_arr, equal_var=False)
    return LinkMetrics(
        mrr=float(np.mean(1.0 / ranks_arr)),
        hit1=float(np.mean(ranks_arr <= 1.0)),
        hit3=float(np.mean(ranks_arr <= 3.0)),
        hit10=float(np.mean(ranks_arr <= 10.0)),
        pos_mean=float(pos_arr.mean()),
        pos_std=float(pos_arr.std()),
        neg_mean=float(neg_arr.mean()),
        neg_std=float(neg_arr.std()),
        t_stat=float(welch.statistic),
        p_value=float(welch.pvalue),
        n_test=len(ranks),
    )


@dataclass
class LinkFinetuneConfig:
    scorer: str = "distmult"
    epochs: int = 20
    batch_size: int = 32           # graphs per step
    lr: float = 1e-3
    l2: float = 1e-4
    train_negatives: int = 5
    test_fraction: float = 0.1
    negatives_per_edge: int = 200
    mlp_hidden: int = 64


@dataclass
class LinkFinetuneResult:
    scorer: LinkScorer
    metrics: LinkMetrics


def _frozen_embeddings(graphs: list[SigmaGraph], encoder: EncoderState) -> list[np.ndarray]:
    out = []
    for g in graphs:
        batch = assemble_batch([g], encoder)
        out.append(encode_batch(batch, encoder).data)
    return out


def true_edge_set(g: SigmaGraph) -> set[tuple[int, str, int]]:
    return {(e.src, e.etype, e.dst) for e in g.edges}


def finetune_link(
    corpus,
    encoder: EncoderState,
    config: LinkFinetuneConfig,
    seed: int = 0,
) -> LinkFinetuneResult:
    """Train a scorer on train-split edges with the encoder frozen.

    Held-out edges come from test-split graphs; each such graph is
    re-encoded with its held-out edges (and their inverses) removed so
    message passing never sees them.
    """
    if corpus.splits:
        train_graphs = corpus.graphs_in_split("train")
        test_graphs = corpus.graphs_in_split("test")
    else:
        train_graphs = list(corpus.graphs)
        test_graphs = list(corpus.graphs)

    rng = np.random.default_rng((seed, 5))
    scorer = init_link_scorer(
        rng, config.scorer, encoder.d_out,
        sorted(SIGMA0_EDGE_KINDS), config.mlp_hidden,
    )
    params = scorer.named_params()
    adam = AdamState(lr=config.lr)

    train_aug = with_inverse_edges(train_graphs)
    train_h = _frozen_embeddings(train_aug, encoder)
    train_edges = [core_edges(g) for g in train_graphs]
    train_true = [true_edge_set(g) for g in train_graphs]

    for _ in range(config.epochs):
        order = [int(i) for i in rng.permutation(len(train_aug))]
        for start in range(0, len(order), config.batch_size):
            chunk = order[start:start + config.batch_size]
            loss = constant(0.0)
            n_terms = 0
            for gi in chunk:
                edges = train_edges[gi]
                if not edges:
                    continue
                h = constant(train_h[gi])
                n_nodes = train_h[gi].shape[0]
                src, dst, ets, labels = [], [], [], []
                for e in edges:
                    src.append(e.src)
                    dst.append(e.dst)
                    ets.append(e.etype)
                    labels.append(1.0)
                    negs = sample_negative_dsts(
                        e.src, e.etype, train_true[gi], n_nodes,
                        config.train_negatives, rng,
                    )
                    for w in negs:
                        src.append(e.src)
                        dst.append(int(w))
                        ets.append(e.etype)
                        labels.append(-1.0)
                z = score_logits(scorer, h, src, dst, ets)
                loss = loss + (z * constant(np.asarray(labels)) * -1.0).softplus().sum()
                n_terms += len(labels)
            if n_terms == 0:
                continue
            zero_grads(params)
            loss.backward()
            adam_step(params, adam, config.l2)

    items = build_eval_items(test_graphs, encoder, config.test_fraction, seed)
    metrics = link_eval(items, scorer, config.negatives_per_edge, seed)
    return LinkFinetuneResult(scorer, metrics)


def build_eval_items(
    graphs: list[SigmaGraph],
    encoder: EncoderState,
    test_fraction: float,
    seed: int,
) -> list[EvalItem]:
    """Held-out edges per graph, embedded with those edges removed."""
    items: list[EvalItem] = []
    for g in graphs:
        base = g
        if any(e.etype.startswith(INV_PREFIX) for e in g.edges):
            kept = [e for e in g.edges if not e.etype.startswith(INV_PREFIX)]
            base = SigmaGraph(g.method_id, g.flavor, list(g.nodes), kept)
        _, held_out = split_graph_edges(base, test_fraction, seed)
        if not held_out:
            continue
        reduced = drop_edges(base, held_out)
        reduced_aug = add_inverse_edges(reduced)
        h = _frozen_embeddings([reduced_aug], encoder)[0]
        items.append(EvalItem(h, held_out, true_edge_set(base), len(g.nodes)))
    return items
