"""Central finite-difference gradient verification."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor


@dataclass
class GradReport:
    max_rel_error: float
    worst: tuple[str, tuple[int, ...]] | None
    per_param: dict[str, float] = field(default_factory=dict)
    tolerance: float = 1e-4

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def _coords(shape: tuple[int, ...], size: int, max_coords: int,
            rng: np.random.Generator):
    if size <= max_coords:
        return list(np.ndindex(shape)) if shape else [()]
    flat = rng.choice(size, size=max_coords, replace=False)
    return [np.unravel_index(int(f), shape) for f in sorted(flat)]


def grad_check(loss_fn, params: dict[str, Tensor], step: float = 1e-5,
               tolerance: float = 1e-4, max_coords: int = 10,
               rng: np.random.Generator | None = None) -> GradReport:
    """Compare backward() gradients to central differences.

    loss_fn must be a deterministic closure over `params` returning a
    scalar Tensor. Large tensors are spot-checked on max_coords sampled
    coordinates.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    for p in params.values():
        p.zero_grad()
    loss = loss_fn()
    loss.backward()
    analytic = {}
    for name, p in params.items():
        analytic[name] = p.grad.copy() if p.grad is not None else np.zeros_like(p.data)

    worst = None
    max_rel = 0.0
    per_param: dict[str, float] = {}
    for name in sorted(params):
        p = params[name]
        local_max = 0.0
        for idx in _coords(p.data.shape, p.data.size, max_coords, rng):
            original = p.data[idx]
            p.data[idx] = original + step
            f_plus = loss_fn().item()
            p.data[idx] = original - step
            f_minus = loss_fn().item()
            p.data[idx] = original
            fd = (f_plus - f_minus) / (2.0 * step)
            a = analytic[name][idx]
            rel = abs(a - fd) / max(abs(a), abs(fd), 1e-3)
            if rel > local_max:
                local_max = rel
            if rel > max_rel:
                max_rel = rel
                worst = (name, idx)
        per_param[name] = local_max
    return GradReport(max_rel, worst, per_param, tolerance)
