"""Minimal reverse-mode automatic differentiation over numpy arrays.

Just enough engine for the models in this package: a Tensor wraps a
float64 ndarray, remembers its parents and a pullback closure when an op
produces it, and ``backward()`` walks the tape in reverse topological
order, accumulating gradients into every tensor that asked for them.
Broadcasting follows numpy; pullbacks sum gradients back down to each
parent's shape.
"""

from __future__ import annotations

import numpy as np


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a gradient over the axes numpy broadcast to produce it."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    t = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + t), t / (1.0 + t))


class Tensor:
    """Array node in the computation tape."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_pullback")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._pullback = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def detach(self) -> "Tensor":
        """Same values, no history: gradients stop here."""
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """Accumulate d(self)/d(leaf) into every requires_grad leaf.

        Interior node gradients are scratch space reset on every call;
        leaves keep accumulating until zeroed, so reusing a subgraph in a
        second backward adds into the same leaf grads.
        """
        if self.data.size != 1:
            raise ValueError("backward needs a scalar output")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        for node in topo:
            if node._pullback is not None:
                node.grad = None
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._pullback is None:
                continue
            for parent, g in zip(node._parents, node._pullback(node.grad)):
                if parent.requires_grad and g is not None:
                    g = _unbroadcast(np.asarray(g), parent.data.shape)
                    parent.grad = g if parent.grad is None else parent.grad + g

    # ---- operators ----

    def __add__(self, other):
        other = astensor(other)
        return _node(self.data + other.data, (self, other), lambda g: (g, g))

    __radd__ = __add__

    def __neg__(self):
        return _node(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other):
        other = astensor(other)
        return _node(self.data - other.data, (self, other), lambda g: (g, -g))

    def __rsub__(self, other):
        return astensor(other) - self

    def __mul__(self, other):
        other = astensor(other)
        a, b = self.data, other.data
        return _node(a * b, (self, other), lambda g: (g * b, g * a))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = astensor(other)
        a, b = self.data, other.data
        return _node(a / b, (self, other), lambda g: (g / b, -g * a / (b * b)))

    def __rtruediv__(self, other):
        return astensor(other) / self

    def __pow__(self, c):
        if not isinstance(c, (int, float)):
            raise TypeError("only constant exponents")
        a = self.data
        return _node(a ** c, (self,), lambda g: (g * c * a ** (c - 1),))

    def __matmul__(self, other):
        other = astensor(other)
        a, b = self.data, other.data
        if a.ndim < 2 or b.ndim < 2:
            raise ValueError("matmul needs tensors of rank >= 2")

        def pullback(g):
            return g @ b.swapaxes(-1, -2), a.swapaxes(-1, -2) @ g

        return _node(a @ b, (self, other), pullback)

    # ---- shape ops ----

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old = self.data.shape
        return _node(self.data.reshape(shape), (self,), lambda g: (g.reshape(old),))

    def transpose_last(self):
        """Swap the last two axes."""
        return _node(self.data.swapaxes(-1, -2), (self,), lambda g: (g.swapaxes(-1, -2),))

    def sum(self, axis=None, keepdims: bool = False):
        x = self.data

        def pullback(g):
            gg = g
            if axis is not None and not keepdims:
                gg = np.expand_dims(g, axis)
            return (np.broadcast_to(gg, x.shape),)

        return _node(x.sum(axis=axis, keepdims=keepdims), (self,), pullback)

    def mean(self, axis=None, keepdims: bool = False):
        x = self.data
        count = x.size if axis is None else np.prod(
            [x.shape[i] for i in (axis if isinstance(axis, tuple) else (axis,))]
        )

        def pullback(g):
            gg = g
            if axis is not None and not keepdims:
                gg = np.expand_dims(g, axis)
            return (np.broadcast_to(gg, x.shape) / count,)

        return _node(x.mean(axis=axis, keepdims=keepdims), (self,), pullback)

    # ---- elementwise functions as methods ----

    def exp(self):
        out = np.exp(self.data)
        return _node(out, (self,), lambda g: (g * out,))

    def log(self):
        a = self.data
        return _node(np.log(a), (self,), lambda g: (g / a,))

    def sqrt(self):
        out = np.sqrt(self.data)
        return _node(out, (self,), lambda g: (g * 0.5 / out,))

    def sin(self):
        a = self.data
        return _node(np.sin(a), (self,), lambda g: (g * np.cos(a),))

    def cos(self):
        a = self.data
        return _node(np.cos(a), (self,), lambda g: (-g * np.sin(a),))

    def relu(self):
        a = self.data
        return _node(np.maximum(a, 0.0), (self,), lambda g: (g * (a > 0),))

    def sigmoid(self):
        out = _stable_sigmoid(self.data)
        return _node(out, (self,), lambda g: (g * out * (1.0 - out),))

    def softplus(self):
        a = self.data
        out = np.maximum(a, 0.0) + np.log1p(np.exp(-np.abs(a)))
        return _node(out, (self,), lambda g: (g * _stable_sigmoid(a),))

    def __repr__(self) -> str:
        flag = ", grad" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"


def _node(data: np.ndarray, parents: tuple[Tensor, ...], pullback) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._pullback = pullback
    return out


def astensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def concat(tensors, axis: int) -> Tensor:
    """Concatenate along an existing axis; the pullback splits."""
    tensors = [astensor(t) for t in tensors]
    sizes = [t.data.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def pullback(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _node(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), pullback)


def narrow(x: Tensor, axis: int, start: int, length: int) -> Tensor:
    """Contiguous slice along one axis; the pullback zero-pads."""
    x = astensor(x)
    index = [slice(None)] * x.data.ndim
    index[axis] = slice(start, start + length)
    index = tuple(index)

    def pullback(g):
        full = np.zeros_like(x.data)
        full[index] = g
        return (full,)

    return _node(x.data[index], (x,), pullback)


def relu(x) -> Tensor:
    return astensor(x).relu()


def sigmoid(x) -> Tensor:
    return astensor(x).sigmoid()


def softplus(x) -> Tensor:
    return astensor(x).softplus()
