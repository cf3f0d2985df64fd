"""Reverse-mode automatic differentiation on float64 numpy arrays.

Every operation records its parents and a closure that routes the
output gradient back to them; backward() topologically sorts the tape
and accumulates exact gradients. All randomness stays outside this
module, so a forward pass is a pure function of its inputs.
"""

from __future__ import annotations

import numpy as np


class NotScalarLoss(Exception):
    pass


class ShapeMismatch(Exception):
    pass


def _as_array(value) -> np.ndarray:
    if isinstance(value, np.ndarray):
        return value.astype(np.float64, copy=False)
    return np.asarray(value, dtype=np.float64)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum grad down to `shape` (inverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False,
                 parents: tuple["Tensor", ...] = (), backward=None):
        self.data = _as_array(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents
        self._backward = backward

    # ----------------------------------------------------------- properties

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    # ------------------------------------------------------------- backward

    def backward(self) -> None:
        if self.data.size != 1:
            raise NotScalarLoss(f"loss has shape {self.shape}, expected a scalar")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # ------------------------------------------------------------ arithmetic

    def __add__(self, other):
        other = _wrap(other)
        out = Tensor(self.data + other.data, parents=(self, other))

        def bw(g):
            if self.requires_grad:
                self._accumulate(_unbroadcast(g, self.shape))
            if other.requires_grad:
                other._accumulate(_unbroadcast(g, other.shape))
        out._backward = bw
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Tensor(-self.data, parents=(self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(-g)
        out._backward = bw
        return out

    def __sub__(self, other):
        return self + (-_wrap(other))

    def __rsub__(self, other):
        return _wrap(other) + (-self)

    def __mul__(self, other):
        other = _wrap(other)
        out = Tensor(self.data * other.data, parents=(self, other))

        def bw(g):
            if self.requires_grad:
                self._accumulate(_unbroadcast(g * other.data, self.shape))
            if other.requires_grad:
                other._accumulate(_unbroadcast(g * self.data, other.shape))
        out._backward = bw
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _wrap(other)
        out = Tensor(self.data / other.data, parents=(self, other))

        def bw(g):
            if self.requires_grad:
                self._accumulate(_unbroadcast(g / other.data, self.shape))
            if other.requires_grad:
                other._accumulate(_unbroadcast(-g * self.data / (other.data ** 2), other.shape))
        out._backward = bw
        return out

    def __matmul__(self, other):
        other = _wrap(other)
        if self.data.shape[-1] != other.data.shape[0]:
            raise ShapeMismatch(f"matmul {self.shape} @ {other.shape}")
        out = Tensor(self.data @ other.data, parents=(self, other))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g @ other.data.T)
            if other.requires_grad:
                other._accumulate(self.data.T @ g)
        out._backward = bw
        return out

    # ------------------------------------------------------------ reductions

    def sum(self, axis=None, keepdims: bool = False):
        out = Tensor(self.data.sum(axis=axis, keepdims=keepdims), parents=(self,))

        def bw(g):
            if not self.requires_grad:
                return
            if axis is None:
                self._accumulate(np.broadcast_to(g, self.shape).copy())
            else:
                gg = g if keepdims else np.expand_dims(g, axis)
                self._accumulate(np.broadcast_to(gg, self.shape).copy())
        out._backward = bw
        return out

    def mean(self, axis=None, keepdims: bool = False):
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) / float(n)

    # --------------------------------------------------------------- unaries

    def relu(self):
        mask = self.data > 0
        out = Tensor(np.where(mask, self.data, 0.0), parents=(self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g * mask)
        out._backward = bw
        return out

    def sigmoid(self):
        # exp(-softplus(-x)) is stable for both signs of x
        val = np.exp(-np.logaddexp(0.0, -self.data))
        out = Tensor(val, parents=(self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g * val * (1.0 - val))
        out._backward = bw
        return out

    def softplus(self):
        out = Tensor(np.logaddexp(0.0, self.data), parents=(self,))
        sig = np.exp(-np.logaddexp(0.0, -self.data))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g * sig)
        out._backward = bw
        return out

    def log(self):
        out = Tensor(np.log(self.data), parents=(self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g / self.data)
        out._backward = bw
        return out

    def exp(self):
        val = np.exp(self.data)
        out = Tensor(val, parents=(self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g * val)
        out._backward = bw
        return out

    def log_softmax(self, axis: int = -1):
        m = self.data.max(axis=axis, keepdims=True)
        shifted = self.data - m
        lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
        val = shifted - lse
        out = Tensor(val, parents=(self,))
        soft = np.exp(val)

        def bw(g):
            if self.requires_grad:
                self._accumulate(g - soft * g.sum(axis=axis, keepdims=True))
        out._backward = bw
        return out

    def softmax(self, axis: int = -1):
        m = self.data.max(axis=axis, keepdims=True)
        e = np.exp(self.data - m)
        val = e / e.sum(axis=axis, keepdims=True)
        out = Tensor(val, parents=(self,))

        def bw(g):
            if self.requires_grad:
                inner = (g * val).sum(axis=axis, keepdims=True)
                self._accumulate(val * (g - inner))
        out._backward = bw
        return out

    def transpose(self):
        out = Tensor(self.data.T, parents=(self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g.T)
        out._backward = bw
        return out

    def reshape(self, *shape):
        out = Tensor(self.data.reshape(*shape), parents=(self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g.reshape(self.shape))
        out._backward = bw
        return out


def _wrap(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def constant(data) -> Tensor:
    return Tensor(data, requires_grad=False)


def parameter(data) -> Tensor:
    return Tensor(data, requires_grad=True)


# ---------------------------------------------------------------- structural


def gather_rows(t: Tensor, index) -> Tensor:
    idx = np.asarray(index, dtype=np.int64)
    out = Tensor(t.data[idx], parents=(t,))

    def bw(g):
        if t.requires_grad:
            acc = np.zeros_like(t.data)
            np.add.at(acc, idx, g)
            t._accumulate(acc)
    out._backward = bw
    return out


def scatter_rows(base: Tensor, index, rows: Tensor) -> Tensor:
    """Copy of `base` with base[index] replaced by `rows` (rows win)."""
    idx = np.asarray(index, dtype=np.int64)
    data = base.data.copy()
    data[idx] = rows.data
    out = Tensor(data, parents=(base, rows))

    def bw(g):
        if base.requires_grad:
            gb = g.copy()
            gb[idx] = 0.0
            base._accumulate(gb)
        if rows.requires_grad:
            rows._accumulate(g[idx])
    out._backward = bw
    return out


def slice_rows(t: Tensor, start: int, stop: int) -> Tensor:
    out = Tensor(t.data[start:stop], parents=(t,))

    def bw(g):
        if t.requires_grad:
            acc = np.zeros_like(t.data)
            acc[start:stop] = g
            t._accumulate(acc)
    out._backward = bw
    return out


def concat(tensors: list[Tensor], axis: int = 0) -> Tensor:
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis),
                 parents=tuple(tensors))
    sizes = [t.data.shape[axis] for t in tensors]

    def bw(g):
        offset = 0
        for t, size in zip(tensors, sizes):
            if t.requires_grad:
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(offset, offset + size)
                t._accumulate(g[tuple(sl)])
            offset += size
    out._backward = bw
    return out


def stack_rows(tensors: list[Tensor]) -> Tensor:
    """Stack (d,) vectors into an (n, d) matrix."""
    out = Tensor(np.stack([t.data for t in tensors]), parents=tuple(tensors))

    def bw(g):
        for i, t in enumerate(tensors):
            if t.requires_grad:
                t._accumulate(g[i])
    out._backward = bw
    return out


def rel_aggregate(h: Tensor, src, dst, coef, out_rows: int) -> Tensor:
    """out[i] = sum over edges e with dst[e]==i of coef[e] * h[src[e]].

    np.add.at makes the accumulation order-independent, so the result is
    deterministic for any edge ordering.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    coef = np.asarray(coef, dtype=np.float64)
    acc = np.zeros((out_rows, h.data.shape[1]), dtype=np.float64)
    np.add.at(acc, dst, h.data[src] * coef[:, None])
    out = Tensor(acc, parents=(h,))

    def bw(g):
        if h.requires_grad:
            gh = np.zeros_like(h.data)
            np.add.at(gh, src, g[dst] * coef[:, None])
            h._accumulate(gh)
    out._backward = bw
    return out
