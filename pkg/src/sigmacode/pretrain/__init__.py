"""Self-supervised pre-training: walks, motifs, losses, and the trainer."""

from .losses import (
    DegenerateType,
    LossWeights,
    MissingDiagonal,
    combined_loss,
    gather_weak_groups,
    him_loss,
    init_mrw_diagonals,
    mrw_loss,
    mt_loss,
    nt_loss,
    sample_mrw_negatives,
)
from .motifs import (
    MOTIF_CLASSES,
    classify_subgraph,
    count_all_motifs,
    count_motifs,
    motif_targets,
    simple_adjacency,
)
from .trainer import (
    NonFiniteLoss,
    PretrainConfig,
    PretrainResult,
    PretrainState,
    TrainRecord,
    init_pretrain_state,
    pretrain_run,
    pretrain_state_to_tensors,
    pretrain_step,
    write_train_log,
)
from .walks import (
    DEFAULT_METAPATHS,
    EmptyMetapathSet,
    MrwConfig,
    Walk,
    sample_metapath_walks,
    typed_adjacency,
    walk_pairs,
)

__all__ = [
    "DEFAULT_METAPATHS",
    "DegenerateType",
    "EmptyMetapathSet",
    "LossWeights",
    "MOTIF_CLASSES",
    "MissingDiagonal",
    "MrwConfig",
    "NonFiniteLoss",
    "PretrainConfig",
    "PretrainResult",
    "PretrainState",
    "TrainRecord",
    "Walk",
    "classify_subgraph",
    "combined_loss",
    "count_all_motifs",
    "count_motifs",
    "gather_weak_groups",
    "him_loss",
    "init_mrw_diagonals",
    "init_pretrain_state",
    "motif_targets",
    "mrw_loss",
    "mt_loss",
    "nt_loss",
    "pretrain_run",
    "pretrain_state_to_tensors",
    "pretrain_step",
    "sample_metapath_walks",
    "sample_mrw_negatives",
    "simple_adjacency",
    "typed_adjacency",
    "walk_pairs",
    "write_train_log",
]
