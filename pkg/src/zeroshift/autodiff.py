"""Dense float64 tensors with reverse-mode automatic differentiation.

Define-by-run: every operation whose inputs require gradients records its
parents and a backward closure on the result, so the chain of results forms
the tape. Calling ``backward()`` on a scalar loss walks that tape once in
reverse topological order and accumulates ``.grad`` on every tensor that
requires it.

Only the operations the adapter, prototype branch, and loss suite need are
provided: matmul (2-d, and stacked 3-d for per-sample attention),
elementwise arithmetic with numpy broadcasting, relu/exp/log/sqrt,
sum/mean reductions, reshape/transpose, row gathering, and numerically
stabilized softmax / log-softmax. Everything is computed in 64-bit floats.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateVectorError, ShapeError

Array = np.ndarray


def _sum_to(grad: Array, shape: tuple) -> Array:
    """Reduce a broadcast gradient back to the operand's shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """A value node on the tape.

    Tensors are immutable after construction; only the optimizer rebinds
    ``data`` between steps. ``grad`` accumulates across backward calls until
    cleared with ``zero_grad``.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # -- operator sugar -------------------------------------------------

    def __add__(self, other):
        return add(self, as_tensor(other))

    def __radd__(self, other):
        return add(as_tensor(other), self)

    def __sub__(self, other):
        return sub(self, as_tensor(other))

    def __rsub__(self, other):
        return sub(as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, as_tensor(other))

    def __rmul__(self, other):
        return mul(as_tensor(other), self)

    def __truediv__(self, other):
        return div(self, as_tensor(other))

    def __matmul__(self, other):
        return matmul(self, as_tensor(other))

    def __neg__(self):
        return neg(self)

    # -- backward pass ---------------------------------------------------

    def backward(self):
        """Reverse accumulation from a scalar loss.

        Visits each tape node exactly once, children before parents, and
        adds d(loss)/d(node) into ``node.grad``.
        """
        if self.data.shape != ():
            raise ShapeError(
                f"backward requires a scalar loss, got shape {self.data.shape}"
            )
        if not self.requires_grad:
            return
        order = _topo_order(self)
        self.grad = (np.ones(()) if self.grad is None else self.grad + np.ones(()))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)


def _topo_order(root: Tensor) -> list:
    """Topological order of the tape below ``root`` (parents precede children)."""
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            # requires_grad=False implies no differentiable ancestors
            if parent.requires_grad:
                stack.append((parent, False))
    return order


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data: Array, parents, backward_fn) -> Tensor:
    out = Tensor(data)
    tracked = tuple(p for p in parents if p.requires_grad)
    if tracked:
        out.requires_grad = True
        out._parents = tracked
        out._backward = backward_fn
    return out


def _accum(t: Tensor, grad: Array):
    if not t.requires_grad:
        return
    grad = _sum_to(np.asarray(grad, dtype=np.float64), t.data.shape)
    if t.grad is None:
        t.grad = np.zeros(t.data.shape)
    t.grad += grad


# -- elementwise arithmetic -----------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    def bwd(g):
        _accum(a, g)
        _accum(b, g)

    return _make(a.data + b.data, (a, b), bwd)


def sub(a: Tensor, b: Tensor) -> Tensor:
    def bwd(g):
        _accum(a, g)
        _accum(b, -g)

    return _make(a.data - b.data, (a, b), bwd)


def mul(a: Tensor, b: Tensor) -> Tensor:
    def bwd(g):
        _accum(a, g * b.data)
        _accum(b, g * a.data)

    return _make(a.data * b.data, (a, b), bwd)


def div(a: Tensor, b: Tensor) -> Tensor:
    def bwd(g):
        _accum(a, g / b.data)
        _accum(b, -g * a.data / (b.data * b.data))

    return _make(a.data / b.data, (a, b), bwd)


def neg(a: Tensor) -> Tensor:
    def bwd(g):
        _accum(a, -g)

    return _make(-a.data, (a,), bwd)


# -- matrix product --------------------------------------------------------


def _swap_last(x: Array) -> Array:
    return np.swapaxes(x, -1, -2)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product. Rank 2 operands multiply as usual; rank 3 operands
    multiply slice-by-slice along the leading axis (stacked samples)."""
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(
            f"matmul needs rank >= 2 operands, got {a.shape} x {b.shape}"
        )
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner dimensions disagree: {a.shape} x {b.shape}")

    def bwd(g):
        _accum(a, g @ _swap_last(b.data))
        _accum(b, _swap_last(a.data) @ g)

    return _make(a.data @ b.data, (a, b), bwd)


def transpose(a: Tensor) -> Tensor:
    if a.ndim != 2:
        raise ShapeError(f"transpose expects a matrix, got shape {a.shape}")

    def bwd(g):
        _accum(a, g.T)

    return _make(a.data.T, (a,), bwd)


def swap_last2(a: Tensor) -> Tensor:
    """Swap the last two axes (token-matrix transpose inside a batch)."""
    if a.ndim < 2:
        raise ShapeError(f"swap_last2 expects rank >= 2, got shape {a.shape}")

    def bwd(g):
        _accum(a, _swap_last(g))

    return _make(_swap_last(a.data), (a,), bwd)


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)

    def bwd(g):
        _accum(a, g.reshape(a.data.shape))

    return _make(a.data.reshape(shape), (a,), bwd)


# -- nonlinearities --------------------------------------------------------


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0

    def bwd(g):
        _accum(a, g * mask)

    return _make(np.where(mask, a.data, 0.0), (a,), bwd)


def exp(a: Tensor) -> Tensor:
    out_data = np.exp(a.data)

    def bwd(g):
        _accum(a, g * out_data)

    return _make(out_data, (a,), bwd)


def log(a: Tensor) -> Tensor:
    def bwd(g):
        _accum(a, g / a.data)

    return _make(np.log(a.data), (a,), bwd)


def sqrt(a: Tensor) -> Tensor:
    out_data = np.sqrt(a.data)

    def bwd(g):
        _accum(a, g * 0.5 / out_data)

    return _make(out_data, (a,), bwd)


def xlogx(a: Tensor) -> Tensor:
    """x * log(x) with the 0 * log(0) = 0 convention (entropy terms)."""
    positive = a.data > 0
    safe_log = np.log(np.where(positive, a.data, 1.0))

    def bwd(g):
        _accum(a, g * np.where(positive, safe_log + 1.0, 0.0))

    return _make(np.where(positive, a.data * safe_log, 0.0), (a,), bwd)


# -- reductions ------------------------------------------------------------


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    def bwd(g):
        gg = g
        if axis is not None and not keepdims:
            gg = np.expand_dims(g, axis)
        _accum(a, np.broadcast_to(gg, a.data.shape))

    return _make(a.data.sum(axis=axis, keepdims=keepdims), (a,), bwd)


def tmean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    count = a.data.size if axis is None else a.data.shape[axis]

    def bwd(g):
        gg = g
        if axis is not None and not keepdims:
            gg = np.expand_dims(g, axis)
        _accum(a, np.broadcast_to(gg, a.data.shape) / count)

    return _make(a.data.mean(axis=axis, keepdims=keepdims), (a,), bwd)


# -- softmax family ----------------------------------------------------------


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    """Shift-invariant softmax: the max is subtracted before exponentiation,
    so rows of any magnitude produce a valid probability vector."""
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def bwd(g):
        inner = (g * out_data).sum(axis=axis, keepdims=True)
        _accum(a, out_data * (g - inner))

    return _make(out_data, (a,), bwd)


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    """Stabilized log(softmax(x)); never composes log with softmax naively."""
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    out_data = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

    def bwd(g):
        _accum(a, g - np.exp(out_data) * g.sum(axis=axis, keepdims=True))

    return _make(out_data, (a,), bwd)


# -- indexing ----------------------------------------------------------------


def gather_rows(a: Tensor, indices) -> Tensor:
    """Select rows of a matrix by index; gradients scatter-add back."""
    idx = np.asarray(indices, dtype=np.intp)
    if a.ndim != 2:
        raise ShapeError(f"gather_rows expects a matrix, got shape {a.shape}")

    def bwd(g):
        if a.requires_grad:
            full = np.zeros(a.data.shape)
            np.add.at(full, idx, g)
            _accum(a, full)

    return _make(a.data[idx], (a,), bwd)


def pick(a: Tensor, indices) -> Tensor:
    """Per-row column selection: out[i] = a[i, indices[i]]."""
    idx = np.asarray(indices, dtype=np.intp)
    if a.ndim != 2:
        raise ShapeError(f"pick expects a matrix, got shape {a.shape}")
    if idx.shape != (a.shape[0],):
        raise ShapeError(
            f"pick needs one index per row: {idx.shape} vs {a.shape[0]} rows"
        )
    rows = np.arange(a.shape[0])

    def bwd(g):
        if a.requires_grad:
            full = np.zeros(a.data.shape)
            np.add.at(full, (rows, idx), g)
            _accum(a, full)

    return _make(a.data[rows, idx], (a,), bwd)


# -- composed vector helpers -------------------------------------------------


def dot(a: Tensor, b: Tensor) -> Tensor:
    return tsum(mul(a, b))


def normalize_rows(a: Tensor) -> Tensor:
    """Scale each trailing-axis vector to unit L2 norm."""
    norms = np.sqrt((a.data * a.data).sum(axis=-1))
    if not np.all(norms > 0):
        raise DegenerateVectorError("cannot normalize a zero-norm vector")
    return div(a, sqrt(tsum(mul(a, a), axis=-1, keepdims=True)))


def cosine(a: Tensor, b: Tensor) -> Tensor:
    """Cosine similarity of two vectors, in [-1, 1]."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 1 or b.ndim != 1:
        raise ShapeError(f"cosine expects vectors, got {a.shape} and {b.shape}")
    if a.shape != b.shape:
        raise ShapeError(f"cosine operands disagree: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a.data))
    nb = float(np.linalg.norm(b.data))
    if na == 0.0 or nb == 0.0:
        raise DegenerateVectorError("cosine of a zero-norm vector is undefined")
    return div(dot(a, b), mul(sqrt(tsum(mul(a, a))), sqrt(tsum(mul(b, b)))))


def gradients(loss: Tensor, params) -> list:
    """Backward from ``loss`` and return one gradient array per parameter.

    Parameter grads are cleared first, so the result is exactly
    d(loss)/d(param); parameters the loss never touched get zeros.
    """
    params = list(params)
    for p in params:
        p.zero_grad()
    loss.backward()
    return [
        p.grad.copy() if p.grad is not None else np.zeros(p.data.shape)
        for p in params
    ]
