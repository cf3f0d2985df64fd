"""Deterministic numeric core: autodiff tensors, RGCN, MLP, Adam."""

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .gradcheck import GradReport, grad_check
from .layers import (
    MlpParams,
    RgcnLayer,
    RgcnParams,
    dropout,
    encoder_forward,
    glorot,
    init_mlp,
    init_rgcn,
    mlp_forward,
    rgcn_layer_forward,
)
from .optim import AdamState, adam_step, zero_grads
from .tensor import (
    NotScalarLoss,
    ShapeMismatch,
    Tensor,
    concat,
    constant,
    gather_rows,
    parameter,
    rel_aggregate,
    scatter_rows,
    slice_rows,
    stack_rows,
)

__all__ = [
    "AdamState", "CheckpointError", "GradReport", "MlpParams", "NotScalarLoss",
    "RgcnLayer", "RgcnParams", "ShapeMismatch", "Tensor", "adam_step",
    "concat", "constant", "dropout", "encoder_forward", "gather_rows",
    "glorot", "grad_check", "init_mlp", "init_rgcn", "load_checkpoint",
    "mlp_forward", "parameter", "rel_aggregate", "rgcn_layer_forward",
    "save_checkpoint", "scatter_rows", "slice_rows", "stack_rows",
    "zero_grads",
]
