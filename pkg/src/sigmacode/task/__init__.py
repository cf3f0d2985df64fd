"""Fine-tuning heads, evaluators, and embedding export."""

from .export import export_embeddings
from .linkpred import (
    EvalItem,
    LinkFinetuneConfig,
    LinkFinetuneResult,
    LinkMetrics,
    LinkScorer,
    NoTestEdges,
    SCORER_KINDS,
    build_eval_items,
    core_edges,
    distmult_score,
    drop_edges,
    finetune_link,
    init_link_scorer,
    link_eval,
    sample_negative_dsts,
    score_logits,
    score_values,
    split_graph_edges,
    true_edge_set,
)
from .naming import (
    NameFinetuneConfig,
    NameFinetuneResult,
    NameHead,
    NameVocab,
    PAD_ID,
    UNK_ID,
    UNK_TOKEN,
    VocabNotBuilt,
    build_name_vocab,
    decode_name,
    evaluate_name,
    finetune_name,
    init_name_head,
    method_name_from_id,
    micro_name_metrics,
    name_logits,
    name_loss,
    name_metrics,
    predict_name,
)
from .pooling import (
    AttentionParams,
    EmptyGraph,
    POOLINGS,
    attention_weights,
    init_attention,
    pool_batch,
    pool_graph,
)

__all__ = [
    "AttentionParams",
    "EmptyGraph",
    "EvalItem",
    "LinkFinetuneConfig",
    "LinkFinetuneResult",
    "LinkMetrics",
    "LinkScorer",
    "NameFinetuneConfig",
    "NameFinetuneResult",
    "NameHead",
    "NameVocab",
    "NoTestEdges",
    "PAD_ID",
    "POOLINGS",
    "SCORER_KINDS",
    "UNK_ID",
    "UNK_TOKEN",
    "VocabNotBuilt",
    "attention_weights",
    "build_eval_items",
    "build_name_vocab",
    "core_edges",
    "decode_name",
    "distmult_score",
    "drop_edges",
    "evaluate_name",
    "export_embeddings",
    "finetune_link",
    "finetune_name",
    "init_attention",
    "init_link_scorer",
    "init_name_head",
    "link_eval",
    "method_name_from_id",
    "micro_name_metrics",
    "name_logits",
    "name_loss",
    "name_metrics",
    "pool_batch",
    "pool_graph",
    "predict_name",
    "sample_negative_dsts",
    "score_logits",
    "score_values",
    "split_graph_edges",
    "true_edge_set",
]
