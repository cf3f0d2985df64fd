"""Run configuration: one flat key=value namespace for every knob.

A config file holds `key = value` lines (# comments allowed); command
line flags override file values. Unknown keys are rejected so typos
fail loudly rather than silently running defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

from .graphbuild import SIGMA0, SIGMA1
from .nn.optim import LR_MAX, LR_MIN
from .pretrain.losses import LossWeights
from .pretrain.trainer import PretrainConfig
from .pretrain.walks import DEFAULT_METAPATHS, MrwConfig
from .task.linkpred import LinkFinetuneConfig, SCORER_KINDS
from .task.naming import NameFinetuneConfig
from .task.pooling import POOLINGS

OUT_DIR_ENV = "SIGMACODE_OUT"


class ConfigError(Exception):
    """Raised for unknown keys, bad values, or violated ranges."""


def _default_out_dir() -> str:
    return os.environ.get(OUT_DIR_ENV, "sigmacode_out")


def format_metapaths(metapaths) -> str:
    return ";".join(",".join(mp) for mp in metapaths)


def parse_metapaths(text: str):
    paths = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        paths.append(tuple(s.strip() for s in part.split(",") if s.strip()))
    if not paths:
        raise ConfigError("metapaths must name at least one path")
    return tuple(paths)


@dataclass
class RunConfig:
    # paths and pipeline identity
    corpus_dir: str = "."
    out_dir: str = field(default_factory=_default_out_dir)
    flavor: str = SIGMA1
    seed: int = 0
    # encoder
    dims: tuple[int, ...] = (300, 300, 300)
    self_loop: bool = True
    embed_buckets: int = 2 ** 20
    embed_seed: int = 0
    vectors: str = ""                   # optional pretrained vector file
    # optimization (shared by pretrain and fine-tune loops)
    lr: float = 1e-3
    epochs: int = 10
    batch_size: int = 32
    dropout: float = 0.2
    l2: float = 1e-4
    # pre-training signals
    omega1: float = 1.0
    omega2: float = 1.0
    omega3: float = 1.0
    omega4: float = 1.0
    walks_per_node: int = 2
    negatives: int = 5
    metapaths: tuple[tuple[str, ...], ...] = DEFAULT_METAPATHS
    stop_gradient_centers: bool = False
    motif_hidden: int = 64
    # name task
    pooling: str = "attention"
    vocab_size: int = 1000
    name_max_len: int = 5
    freeze_encoder: bool = False
    # link task
    scorer: str = "distmult"
    train_negatives: int = 5
    test_fraction: float = 0.1
    negatives_per_edge: int = 200
    mlp_hidden: int = 64

    def validate(self) -> None:
        if self.flavor not in (SIGMA0, SIGMA1):
            raise ConfigError(f"flavor must be {SIGMA0} or {SIGMA1}")
        if not (LR_MIN <= self.lr <= LR_MAX):
            raise ConfigError(f"lr must lie in [{LR_MIN}, {LR_MAX}]")
        if len(self.dims) < 1 or any(d < 1 for d in self.dims):
            raise ConfigError("dims must be positive layer widths")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch_size >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must lie in [0, 1)")
        if self.pooling not in POOLINGS:
            raise ConfigError(f"pooling must be one of {POOLINGS}")
        if self.scorer not in SCORER_KINDS:
            raise ConfigError(f"scorer must be one of {SCORER_KINDS}")
        if self.negatives < 1 or self.train_negatives < 1:
            raise ConfigError("negative counts must be >= 1")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie in (0, 1)")
        try:
            self.loss_weights()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def loss_weights(self) -> LossWeights:
        return LossWeights(self.omega1, self.omega2, self.omega3, self.omega4)

    def mrw_config(self) -> MrwConfig:
        return MrwConfig(
            metapaths=self.metapaths,
            walks_per_start=self.walks_per_node,
            negatives=self.negatives,
        )

    def pretrain_config(self, checkpoint_dir=None, log_path=None) -> PretrainConfig:
        return PretrainConfig(
            dims=tuple(self.dims),
            use_self_loop=self.self_loop,
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            dropout=self.dropout,
            l2=self.l2,
            weights=self.loss_weights(),
            mrw=self.mrw_config(),
            stop_gradient_centers=self.stop_gradient_centers,
            motif_hidden=self.motif_hidden,
            embed_buckets=self.embed_buckets,
            embed_seed=self.embed_seed,
            checkpoint_dir=checkpoint_dir,
            log_path=log_path,
        )

    def name_config(self) -> NameFinetuneConfig:
        return NameFinetuneConfig(
            pooling=self.pooling,
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            dropout=self.dropout,
            l2=self.l2,
            freeze_encoder=self.freeze_encoder,
            vocab_size=self.vocab_size,
            max_len=self.name_max_len,
        )

    def link_config(self) -> LinkFinetuneConfig:
        return LinkFinetuneConfig(
            scorer=self.scorer,
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            l2=self.l2,
            train_negatives=self.train_negatives,
            test_fraction=self.test_fraction,
            negatives_per_edge=self.negatives_per_edge,
            mlp_hidden=self.mlp_hidden,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key == "metapaths":
        return parse_metapaths(raw)
    if key == "dims":
        try:
            return tuple(int(p) for p in raw.split(",") if p.strip())
        except ValueError as exc:
            raise ConfigError(f"dims needs comma-separated ints: {raw!r}") from exc
    kind = _FIELD_TYPES[key]
    if kind == "bool":
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{key} expects true/false, got {raw!r}")
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key} expects {kind}, got {raw!r}") from exc
    return raw


def apply_setting(config: RunConfig, key: str, raw: str) -> None:
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key: {key!r}")
    setattr(config, key, _parse_value(key, raw))


def load_config_file(path: str, config: RunConfig | None = None) -> RunConfig:
    """Parse `key = value` lines into a RunConfig; unknown keys fail."""
    config = config or RunConfig()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, raw = stripped.partition("=")
            try:
                apply_setting(config, key.strip(), raw)
            except ConfigError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return config


def config_lines(config: RunConfig) -> list[str]:
    """The full configuration as sorted `key = value` lines."""
    out = []
    for f in sorted(fields(RunConfig), key=lambda f: f.name):
        value = getattr(config, f.name)
        if f.name == "metapaths":
            value = format_metapaths(value)
        elif f.name == "dims":
            value = ",".join(str(d) for d in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        out.append(f"{f.name} = {value}")
    return out
