"""Relational graph convolution encoder, MLP, and dropout.

Layer update per node i:
    h_i' = phi( sum_r sum_{n in N_i^r} (1/c_{i,r}) h_n W_r + h_i W_self )
with c_{i,r} = |N_i^r| counting in-neighbors under relation r with
multiplicity. phi is a rectifier on hidden layers and identity at the
output. No bias terms. The self-loop term can be disabled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import ShapeMismatch, Tensor, constant, parameter, rel_aggregate


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


@dataclass
class RgcnLayer:
    rel_weights: dict[str, Tensor]
    self_weight: Tensor | None


@dataclass
class RgcnParams:
    layers: list[RgcnLayer]
    dims: list[int]                 # length L+1: input, hidden..., output
    relations: list[str]
    use_self_loop: bool = True

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def named(self, prefix: str = "encoder") -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for l, layer in enumerate(self.layers):
            for r in sorted(layer.rel_weights):
                out[f"{prefix}/layer{l}/rel/{r}"] = layer.rel_weights[r]
            if layer.self_weight is not None:
                out[f"{prefix}/layer{l}/self"] = layer.self_weight
        return out


def init_rgcn(rng: np.random.Generator, relations: list[str], dims: list[int],
              use_self_loop: bool = True) -> RgcnParams:
    layers = []
    for l in range(len(dims) - 1):
        d_in, d_out = dims[l], dims[l + 1]
        rel_weights = {r: parameter(glorot(rng, d_in, d_out)) for r in sorted(relations)}
        self_w = parameter(glorot(rng, d_in, d_out)) if use_self_loop else None
        layers.append(RgcnLayer(rel_weights, self_w))
    return RgcnParams(layers, list(dims), sorted(relations), use_self_loop)


RelEdges = dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]  # r -> (src, dst, 1/c)


def rgcn_layer_forward(h: Tensor, rel_edges: RelEdges, layer: RgcnLayer,
                       activation: str = "identity") -> Tensor:
    n = h.shape[0]
    acc: Tensor | None = None
    for r in sorted(rel_edges):
        src, dst, coef = rel_edges[r]
        if len(src) == 0:
            continue
        if r not in layer.rel_weights:
            raise ShapeMismatch(f"no weight matrix for relation {r!r}")
        w = layer.rel_weights[r]
        if h.shape[1] != w.shape[0]:
            raise ShapeMismatch(f"layer input {h.shape[1]} vs weight {w.shape}")
        term = rel_aggregate(h, src, dst, coef, n) @ w
        acc = term if acc is None else acc + term
    if layer.self_weight is not None:
        term = h @ layer.self_weight
        acc = term if acc is None else acc + term
    if acc is None:
        d_out = next(iter(layer.rel_weights.values())).shape[1]
        acc = constant(np.zeros((n, d_out)))
    if activation == "relu":
        return acc.relu()
    return acc


def dropout(t: Tensor, rate: float, rng: np.random.Generator | None,
            train_mode: bool) -> Tensor:
    if not train_mode or rate <= 0.0:
        return t
    if rng is None:
        raise ValueError("dropout in train mode needs a random generator")
    mask = (rng.random(t.shape) >= rate).astype(np.float64) / (1.0 - rate)
    return t * constant(mask)


def encoder_forward(x: Tensor, rel_edges: RelEdges, params: RgcnParams,
                    dropout_rate: float = 0.0, train_mode: bool = False,
                    rng: np.random.Generator | None = None) -> Tensor:
    if params.layers and x.shape[1] != params.dims[0]:
        raise ShapeMismatch(f"input width {x.shape[1]} vs expected {params.dims[0]}")
    h = x
    last = params.n_layers - 1
    for l, layer in enumerate(params.layers):
        hidden = l < last
        h = rgcn_layer_forward(h, rel_edges, layer, "relu" if hidden else "identity")
        if hidden:
            h = dropout(h, dropout_rate, rng, train_mode)
    return h


# ------------------------------------------------------------------------ MLP


@dataclass
class MlpParams:
    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor

    def named(self, prefix: str) -> dict[str, Tensor]:
        return {f"{prefix}/w1": self.w1, f"{prefix}/b1": self.b1,
                f"{prefix}/w2": self.w2, f"{prefix}/b2": self.b2}


def init_mlp(rng: np.random.Generator, d_in: int, d_hidden: int, d_out: int) -> MlpParams:
    return MlpParams(
        w1=parameter(glorot(rng, d_in, d_hidden)),
        b1=parameter(np.zeros(d_hidden)),
        w2=parameter(glorot(rng, d_hidden, d_out)),
        b2=parameter(np.zeros(d_out)),
    )


def mlp_forward(x: Tensor, p: MlpParams) -> Tensor:
    if x.shape[-1] != p.w1.shape[0]:
        raise ShapeMismatch(f"mlp input {x.shape} vs w1 {p.w1.shape}")
    return (x @ p.w1 + p.b1).relu() @ p.w2 + p.b2
