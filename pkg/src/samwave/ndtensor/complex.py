"""Complex values as (re, im) pairs of real tensors.

Every complex op is composed from real ops, so gradients with respect to
the real and imaginary parts come out of the ordinary real tape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .tensor import DimensionError, Tensor


@dataclass(frozen=True, eq=False)
class ComplexTensor:
    re: Tensor
    im: Tensor

    def __post_init__(self):
        if self.re.shape != self.im.shape:
            raise DimensionError(f"re/im shape mismatch: {self.re.shape} vs {self.im.shape}")
        if self.re.dtype != self.im.dtype:
            raise DimensionError("re/im dtype mismatch")

    @classmethod
    def from_numpy(cls, z, requires_grad: bool = False, dtype=None) -> "ComplexTensor":
        z = np.asarray(z)
        return cls(Tensor(z.real, requires_grad, dtype), Tensor(z.imag, requires_grad, dtype))

    @classmethod
    def from_real(cls, x: Tensor) -> "ComplexTensor":
        return cls(x, Tensor(np.zeros_like(x.data)))

    @property
    def shape(self):
        return self.re.shape

    @property
    def dtype(self):
        return self.re.dtype

    def numpy(self) -> np.ndarray:
        return self.re.data + 1j * self.im.data

    def __add__(self, other) -> "ComplexTensor":
        return cadd(self, other)

    __radd__ = __add__

    def __matmul__(self, other) -> "ComplexTensor":
        return cmatmul(self, other)

    def reshape(self, *shape) -> "ComplexTensor":
        return ComplexTensor(self.re.reshape(*shape), self.im.reshape(*shape))

    def transpose(self, *axes) -> "ComplexTensor":
        return ComplexTensor(self.re.transpose(*axes), self.im.transpose(*axes))


def as_complex(x) -> ComplexTensor:
    if isinstance(x, ComplexTensor):
        return x
    if isinstance(x, Tensor):
        return ComplexTensor.from_real(x)
    return ComplexTensor.from_numpy(x)


def cadd(a, b) -> ComplexTensor:
    a, b = as_complex(a), as_complex(b)
    return ComplexTensor(T.add(a.re, b.re), T.add(a.im, b.im))


def cmatmul(a: ComplexTensor, b: ComplexTensor) -> ComplexTensor:
    """``(ar br - ai bi) + j (ar bi + ai br)`` from four real matmuls."""
    a, b = as_complex(a), as_complex(b)
    re = T.sub(T.matmul(a.re, b.re), T.matmul(a.im, b.im))
    im = T.add(T.matmul(a.re, b.im), T.matmul(a.im, b.re))
    return ComplexTensor(re, im)


def clinear(x, w: ComplexTensor, b: ComplexTensor | None = None) -> ComplexTensor:
    y = cmatmul(as_complex(x), w)
    return y if b is None else cadd(y, b)


def split_gelu(z: ComplexTensor) -> ComplexTensor:
    return ComplexTensor(T.gelu(z.re), T.gelu(z.im))


def cconcat(zs, axis: int = -1) -> ComplexTensor:
    zs = [as_complex(z) for z in zs]
    return ComplexTensor(T.concat([z.re for z in zs], axis), T.concat([z.im for z in zs], axis))
