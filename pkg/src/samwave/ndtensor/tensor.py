"""Dense tensors with tape-based reverse-mode differentiation.

Values live in row-major numpy arrays. Every differentiable op appends a
record to the active :class:`Tape`; :func:`backward` replays the tape in
reverse and accumulates adjoints into leaf tensors that require gradients.
"""

from __future__ import annotations

import threading
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import special

DTYPES = {"f32": np.dtype(np.float32), "f64": np.dtype(np.float64)}

CHECK_FINITE = True

_SQRT_HALF = float(np.sqrt(0.5))
_INV_SQRT_2PI = float(1.0 / np.sqrt(2.0 * np.pi))


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class ContractError(RuntimeError):
    """An API precondition was violated."""


class NonFiniteError(FloatingPointError):
    """An op produced NaN or Inf."""


def _as_array(data, dtype=None) -> np.ndarray:
    if isinstance(data, Tensor):
        data = data.data
    arr = np.array(data, dtype=dtype, copy=True, order="C")
    if arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(np.float64)
    return arr


class Tensor:
    """A real-valued dense array that can take part in differentiation.

    Parameters are leaf tensors created with ``requires_grad=True``; their
    ``grad`` field receives accumulated adjoints after :func:`backward`.
    """

    __slots__ = ("data", "requires_grad", "grad", "_is_leaf", "name", "__weakref__")

    def __init__(self, data, requires_grad: bool = False, dtype=None, name: str | None = None):
        if isinstance(dtype, str):
            dtype = DTYPES[dtype]
        self.data = _as_array(data, dtype)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._is_leaf = True
        self.name = name

    @classmethod
    def _wrap(cls, data: np.ndarray, requires_grad: bool) -> "Tensor":
        # internal constructor: no copy, result of an op
        if CHECK_FINITE and not np.isfinite(data).all():
            raise NonFiniteError("op produced non-finite values")
        t = cls.__new__(cls)
        t.data = data
        t.requires_grad = requires_grad
        t.grad = None
        t._is_leaf = False
        t.name = None
        return t

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._is_leaf

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError("item() requires a single-element tensor")
        return float(self.data.reshape(-1)[0])

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype.name}{flag})"

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    # arithmetic sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis, keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, axes or None)


class Tape:
    """Ordered record of differentiable ops.

    Use as a context manager; ops executed inside the ``with`` block on
    tensors that require gradients are recorded. A tape belongs to the
    thread that entered it.
    """

    _local = threading.local()

    def __init__(self):
        self.records: list[tuple[Tensor, tuple[Tensor, ...], Callable]] = []
        self._open = False

    def __enter__(self) -> "Tape":
        stack = Tape._stack()
        stack.append(self)
        self._open = True
        return self

    def __exit__(self, *exc) -> None:
        stack = Tape._stack()
        if stack and stack[-1] is self:
            stack.pop()
        self._open = False

    def __len__(self) -> int:
        return len(self.records)

    @staticmethod
    def _stack() -> list:
        if not hasattr(Tape._local, "stack"):
            Tape._local.stack = []
        return Tape._local.stack

    @staticmethod
    def current() -> "Tape | None":
        stack = Tape._stack()
        return stack[-1] if stack else None

    def backward(self, loss: Tensor, accumulate: bool = True) -> dict:
        return backward(loss, self, accumulate=accumulate)


def _record(out: np.ndarray, inputs: Sequence[Tensor], vjp: Callable) -> Tensor:
    needs = any(t.requires_grad for t in inputs)
    result = Tensor._wrap(out, needs)
    tape = Tape.current()
    if needs and tape is not None:
        tape.records.append((result, tuple(inputs), vjp))
    return result


def backward(loss: Tensor, tape: Tape, accumulate: bool = True) -> dict:
    """Propagate d(loss)/d(.) through ``tape`` and fill leaf ``grad`` fields.

    With ``accumulate=False`` each reached leaf's previous gradient is
    discarded first. Returns a mapping from leaf tensor to its gradient.
    """
    if loss.size != 1:
        raise ContractError(f"backward expects a scalar loss, got shape {loss.shape}")
    adj: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    leaves: dict[int, Tensor] = {}
    for out, inputs, vjp in reversed(tape.records):
        g = adj.pop(id(out), None)
        if g is None:
            continue
        grads = vjp(g)
        for inp, gi in zip(inputs, grads):
            if gi is None or not inp.requires_grad:
                continue
            key = id(inp)
            if key in adj:
                adj[key] = adj[key] + gi
            else:
                adj[key] = gi
            if inp._is_leaf:
                leaves[key] = inp
    if loss._is_leaf and loss.requires_grad:
        leaves[id(loss)] = loss
    result = {}
    for key, leaf in leaves.items():
        g = adj[key]
        if accumulate and leaf.grad is not None:
            leaf.grad = leaf.grad + g
        else:
            leaf.grad = np.array(g, dtype=leaf.dtype)
        result[leaf] = leaf.grad
    return result


# helpers ------------------------------------------------------------------


def tensor(data, requires_grad: bool = False, dtype=None) -> Tensor:
    return data if isinstance(data, Tensor) and not requires_grad else Tensor(data, requires_grad, dtype)


def _lift(x, like: Tensor | None = None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(x, dtype=dtype))


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _binary_operands(a, b):
    if isinstance(a, Tensor):
        return a, _lift(b, a)
    b = _lift(b)
    return _lift(a, b), b


# elementwise --------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = _binary_operands(a, b)
    try:
        out = a.data + b.data
    except ValueError as exc:
        raise DimensionError(str(exc)) from None
    sa, sb = a.shape, b.shape
    return _record(out, (a, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a, b) -> Tensor:
    a, b = _binary_operands(a, b)
    try:
        out = a.data - b.data
    except ValueError as exc:
        raise DimensionError(str(exc)) from None
    sa, sb = a.shape, b.shape
    return _record(out, (a, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def mul(a, b) -> Tensor:
    a, b = _binary_operands(a, b)
    try:
        out = a.data * b.data
    except ValueError as exc:
        raise DimensionError(str(exc)) from None
    ad, bd = a.data, b.data

    def vjp(g):
        ga = _unbroadcast(g * bd, ad.shape) if a.requires_grad else None
        gb = _unbroadcast(g * ad, bd.shape) if b.requires_grad else None
        return ga, gb

    return _record(out, (a, b), vjp)


def div(a, b) -> Tensor:
    a, b = _binary_operands(a, b)
    try:
        with np.errstate(divide="ignore", invalid="ignore"):  # non-finite results raise below
            out = a.data / b.data
    except ValueError as exc:
        raise DimensionError(str(exc)) from None
    ad, bd = a.data, b.data

    def vjp(g):
        ga = _unbroadcast(g / bd, ad.shape) if a.requires_grad else None
        gb = _unbroadcast(-g * ad / (bd * bd), bd.shape) if b.requires_grad else None
        return ga, gb

    return _record(out, (a, b), vjp)


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)
    return _record(out, (x,), lambda g: (g * out,))


def log(x: Tensor) -> Tensor:
    xd = x.data
    with np.errstate(divide="ignore"):
        out = np.log(xd)
    return _record(out, (x,), lambda g: (g / xd,))


def sigmoid(x: Tensor) -> Tensor:
    xd = x.data
    out = special.expit(xd).astype(xd.dtype, copy=False)
    return _record(out, (x,), lambda g: (g * out * (1.0 - out),))


def clip(x: Tensor, lo: float, hi: float) -> Tensor:
    xd = x.data
    out = np.clip(xd, lo, hi)
    inside = (xd >= lo) & (xd <= hi)
    return _record(out, (x,), lambda g: (g * inside,))


def gelu(x: Tensor) -> Tensor:
    """Exact GeLU: ``0.5 * x * (1 + erf(x / sqrt(2)))``."""
    xd = x.data
    cdf = 0.5 * (1.0 + special.erf(xd * _SQRT_HALF))
    out = (xd * cdf).astype(xd.dtype, copy=False)

    def vjp(g):
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * xd * xd)
        return (g * (cdf + xd * pdf),)

    return _record(out, (x,), vjp)


# reductions & shape -------------------------------------------------------


def sum_(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = np.sum(x.data, axis=axis, keepdims=keepdims)
    out = np.asarray(out, dtype=x.dtype)
    shape = x.shape

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return _record(out, (x,), vjp)


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    if axis is None:
        n = x.size
    else:
        axes = (axis,) if np.isscalar(axis) else tuple(axis)
        n = int(np.prod([x.shape[a] for a in axes]))
    return mul(sum_(x, axis, keepdims), 1.0 / n)


def reshape(x: Tensor, shape) -> Tensor:
    old = x.shape
    try:
        out = x.data.reshape(shape)
    except ValueError as exc:
        raise DimensionError(str(exc)) from None
    return _record(out, (x,), lambda g: (g.reshape(old),))


def transpose(x: Tensor, axes=None) -> Tensor:
    if axes is None:
        axes = tuple(reversed(range(x.ndim)))
    inv = tuple(np.argsort(axes))
    out = np.ascontiguousarray(np.transpose(x.data, axes))
    return _record(out, (x,), lambda g: (np.ascontiguousarray(np.transpose(g, inv)),))


def concat(xs: Sequence[Tensor], axis: int = -1) -> Tensor:
    xs = [_lift(x) for x in xs]
    out = np.concatenate([x.data for x in xs], axis=axis)
    sizes = np.cumsum([x.shape[axis] for x in xs])[:-1]

    def vjp(g):
        return tuple(np.split(g, sizes, axis=axis))

    return _record(out, tuple(xs), vjp)


# linear algebra -----------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product with numpy ``@`` semantics (leading batch dims allowed)."""
    a, b = _binary_operands(a, b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    try:
        out = a.data @ b.data
    except ValueError as exc:
        raise DimensionError(str(exc)) from None
    ad, bd = a.data, b.data

    def vjp(g):
        ga = _unbroadcast(g @ np.swapaxes(bd, -1, -2), ad.shape) if a.requires_grad else None
        gb = None
        if b.requires_grad:
            if ad.ndim > 2 and bd.ndim == 2:
                # fold the batch into rows: one GEMM instead of a batched one
                gb = ad.reshape(-1, ad.shape[-1]).T @ g.reshape(-1, g.shape[-1])
            else:
                gb = _unbroadcast(np.swapaxes(ad, -1, -2) @ g, bd.shape)
        return ga, gb

    return _record(out, (a, b), vjp)


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    y = matmul(x, w)
    return y if b is None else add(y, b)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    xd = x.data
    z = xd - xd.max(axis=axis, keepdims=True)
    e = np.exp(z)
    out = e / e.sum(axis=axis, keepdims=True)

    def vjp(g):
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)

    return _record(out, (x,), vjp)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalise over the last axis, then scale and shift."""
    xd = x.data
    mu = xd.mean(axis=-1, keepdims=True)
    xc = xd - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    rstd = 1.0 / np.sqrt(var + eps)
    xhat = xc * rstd
    out = xhat * gamma.data + beta.data
    def vjp(g):
        gx = None
        if x.requires_grad:
            gh = g * gamma.data
            gx = rstd * (gh - gh.mean(axis=-1, keepdims=True)
                         - xhat * (gh * xhat).mean(axis=-1, keepdims=True))
        gg = _unbroadcast(g * xhat, gamma.shape) if gamma.requires_grad else None
        gb = _unbroadcast(g, beta.shape) if beta.requires_grad else None
        return gx, gg, gb

    return _record(out, (x, gamma, beta), vjp)


def bilinear_matrix(n_in: int, n_out: int, dtype=np.float64) -> np.ndarray:
    """Interpolation matrix for half-pixel-centred bilinear resampling.

    Sample positions outside the source grid are clamped to the border.
    """
    m = np.zeros((n_out, n_in), dtype=dtype)
    scale = n_in / n_out
    for i in range(n_out):
        src = (i + 0.5) * scale - 0.5
        src = min(max(src, 0.0), n_in - 1.0)
        i0 = int(np.floor(src))
        i1 = min(i0 + 1, n_in - 1)
        t = src - i0
        m[i, i0] += 1.0 - t
        m[i, i1] += t
    return m


def resize_bilinear(x: Tensor, size: tuple[int, int]) -> Tensor:
    """Resize a ``[..., H, W, C]`` tensor spatially with bilinear weights."""
    h, w = x.shape[-3], x.shape[-2]
    ry = bilinear_matrix(h, size[0], x.dtype)
    rx = bilinear_matrix(w, size[1], x.dtype)
    xd = x.data
    out = np.einsum("ih,...hwc,jw->...ijc", ry, xd, rx, optimize=True)

    def vjp(g):
        return (np.einsum("ih,...ijc,jw->...hwc", ry, g, rx, optimize=True),)

    return _record(np.ascontiguousarray(out), (x,), vjp)


def parameters_of(tensors: Iterable) -> list[Tensor]:
    """Flatten tensors and complex tensors into their real leaf components."""
    out = []
    for t in tensors:
        if isinstance(t, Tensor):
            out.append(t)
        else:
            out.extend([t.re, t.im])
    return out
