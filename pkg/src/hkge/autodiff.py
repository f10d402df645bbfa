"""Minimal reverse-mode tape over numpy.

Just enough machinery to differentiate the scoring/loss graphs: broadcasting
binary ops, 2-D matmul, tanh, softplus, logsumexp, reductions and row
gathers.  Nodes hold their parents together with vector-Jacobian closures;
`backward` walks the graph in reverse topological order and accumulates
gradients into plain ndarrays.

The numerical contract is the central-finite-difference invariant exercised
in the tests, not any particular op inventory.
"""
from __future__ import annotations

import numpy as np

from .algebra import EPS_NORM


class Node:
    """One value in the computation graph.

    `parents` is a tuple of (parent_node, vjp) pairs where vjp maps the
    upstream gradient to this parent's gradient contribution.
    """

    __slots__ = ("value", "parents")

    def __init__(self, value, parents=()):
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = parents

    @property
    def shape(self):
        return self.value.shape

    # Operator sugar so graph code reads like the formulas it implements.
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


def const(value) -> Node:
    return Node(value)


def _wrap(x) -> Node:
    return x if isinstance(x, Node) else Node(x)


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Reduce a broadcasted gradient back to the original operand shape."""
    if grad.shape == tuple(shape):
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def add(a, b) -> Node:
    a, b = _wrap(a), _wrap(b)
    return Node(
        a.value + b.value,
        (
            (a, lambda g: _unbroadcast(g, a.shape)),
            (b, lambda g: _unbroadcast(g, b.shape)),
        ),
    )


def sub(a, b) -> Node:
    a, b = _wrap(a), _wrap(b)
    return Node(
        a.value - b.value,
        (
            (a, lambda g: _unbroadcast(g, a.shape)),
            (b, lambda g: _unbroadcast(-g, b.shape)),
        ),
    )


def mul(a, b) -> Node:
    a, b = _wrap(a), _wrap(b)
    return Node(
        a.value * b.value,
        (
            (a, lambda g: _unbroadcast(g * b.value, a.shape)),
            (b, lambda g: _unbroadcast(g * a.value, b.shape)),
        ),
    )


def div(a, b) -> Node:
    a, b = _wrap(a), _wrap(b)
    out = a.value / b.value
    return Node(
        out,
        (
            (a, lambda g: _unbroadcast(g / b.value, a.shape)),
            (b, lambda g: _unbroadcast(-g * out / b.value, b.shape)),
        ),
    )


def neg(a) -> Node:
    a = _wrap(a)
    return Node(-a.value, ((a, lambda g: -g),))


def matmul(a, b) -> Node:
    a, b = _wrap(a), _wrap(b)
    if a.value.ndim != 2 or b.value.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got {a.shape} @ {b.shape}")
    return Node(
        a.value @ b.value,
        (
            (a, lambda g: g @ b.value.T),
            (b, lambda g: a.value.T @ g),
        ),
    )


def tanh(a) -> Node:
    a = _wrap(a)
    out = np.tanh(a.value)
    return Node(out, ((a, lambda g: g * (1.0 - out * out)),))


def square(a) -> Node:
    a = _wrap(a)
    return Node(a.value * a.value, ((a, lambda g: g * 2.0 * a.value),))


def sqrt_clamped(a, eps: float = EPS_NORM) -> Node:
    """sqrt with the backward denominator floored at eps.

    Keeps the gradient finite at a (near-)zero radicand; exact elsewhere.
    """
    a = _wrap(a)
    out = np.sqrt(a.value)
    denom = np.maximum(out, eps)
    return Node(out, ((a, lambda g: g * 0.5 / denom),))


def clamp_min(a, floor: float) -> Node:
    """Elementwise max(a, floor); gradient passes only where a > floor."""
    a = _wrap(a)
    mask = a.value > floor
    return Node(np.maximum(a.value, floor), ((a, lambda g: g * mask),))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softplus(a) -> Node:
    """log(1 + exp(a)), stable at both tails."""
    a = _wrap(a)
    return Node(np.logaddexp(0.0, a.value), ((a, lambda g: g * _sigmoid(a.value)),))


def logsumexp(a, axis: int = -1) -> Node:
    a = _wrap(a)
    m = np.max(a.value, axis=axis, keepdims=True)
    shifted = np.exp(a.value - m)
    total = np.sum(shifted, axis=axis, keepdims=True)
    out = np.squeeze(m + np.log(total), axis=axis)
    softmax = shifted / total

    def vjp(g):
        return np.expand_dims(g, axis) * softmax

    return Node(out, ((a, vjp),))


def asum(a, axis=None, keepdims: bool = False) -> Node:
    a = _wrap(a)
    out = np.sum(a.value, axis=axis, keepdims=keepdims)

    def vjp(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return np.broadcast_to(g, a.shape).copy()

    return Node(out, ((a, vjp),))


def amean(a, axis=None, keepdims: bool = False) -> Node:
    a = _wrap(a)
    if axis is None:
        count = a.value.size
    else:
        count = a.shape[axis]
    return mul(asum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def reshape(a, shape) -> Node:
    a = _wrap(a)
    return Node(
        a.value.reshape(shape), ((a, lambda g: g.reshape(a.shape)),)
    )


def expand_dims(a, axis: int) -> Node:
    a = _wrap(a)
    return Node(
        np.expand_dims(a.value, axis), ((a, lambda g: np.squeeze(g, axis=axis)),)
    )


def gather(a, idx) -> Node:
    """Row gather along axis 0; idx may have any shape.

    Output shape is idx.shape + a.shape[1:]; the backward pass scatter-adds
    duplicate rows.
    """
    a = _wrap(a)
    idx = np.asarray(idx)

    def vjp(g):
        out = np.zeros(a.shape, dtype=np.float64)
        np.add.at(out, idx, g)
        return out

    return Node(a.value[idx], ((a, vjp),))


def pick(a, idx) -> Node:
    """Per-row pick: a has shape (B, K), idx (B,) -> output (B,)."""
    a = _wrap(a)
    idx = np.asarray(idx)
    rows = np.arange(a.shape[0])

    def vjp(g):
        out = np.zeros(a.shape, dtype=np.float64)
        np.add.at(out, (rows, idx), g)
        return out

    return Node(a.value[rows, idx], ((a, vjp),))


def backward(out: Node, wrt: list[Node]) -> list[np.ndarray]:
    """Gradient of the scalar `out` with respect to each node in `wrt`."""
    if out.value.ndim != 0:
        raise ValueError(f"backward expects a scalar output, got shape {out.shape}")
    order: list[Node] = []
    seen: set[int] = set()
    stack: list[tuple[Node, bool]] = [(out, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent, _ in node.parents:
            if id(parent) not in seen:
                stack.append((parent, False))

    grads: dict[int, np.ndarray] = {id(out): np.ones(())}
    for node in reversed(order):
        g = grads.get(id(node))
        if g is None:
            continue
        for parent, vjp in node.parents:
            contrib = vjp(g)
            pid = id(parent)
            if pid in grads:
                grads[pid] = grads[pid] + contrib
            else:
                grads[pid] = contrib
    return [grads.get(id(w), np.zeros(w.shape)) for w in wrt]
