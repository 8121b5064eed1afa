"""Level-1 dual-tree complex wavelet transform (2-D).

At the first level the two trees of each dimension are the even and odd
sample phases of one undecimated near-symmetric biorthogonal filtering.
The four separable (column-tree x row-tree) outputs of each detail band
are paired into two complex subbands with the usual ``(p -+ q)`` quad
combination, giving six orientations per image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .ndtensor import ComplexTensor, Tensor
from .wavelets import ConfigurationError, ShapeError

ORIENTATIONS = (15, 45, 75, -75, -45, -15)

# (analysis lowpass h0, analysis highpass h1, synthesis lowpass g0, synthesis highpass g1)
_NEAR_SYM = {
    "near_sym_a": (
        [-0.05, 0.25, 0.6, 0.25, -0.05],
        [0.010714285714285713, -0.05357142857142857, -0.26071428571428573,
         0.6071428571428571, -0.26071428571428573, -0.05357142857142857,
         0.010714285714285713],
        [-0.010714285714285713, -0.05357142857142857, 0.26071428571428573,
         0.6071428571428571, 0.26071428571428573, -0.05357142857142857,
         -0.010714285714285713],
        [-0.05, -0.25, 0.6, -0.25, -0.05],
    ),
    "near_sym_b": (
        [-0.0017578125, 0.0, 0.022265625, -0.046875, -0.0482421875, 0.296875,
         0.55546875, 0.296875, -0.0482421875, -0.046875, 0.022265625, 0.0,
         -0.0017578125],
        [-7.062639508928571e-05, 0.0, 0.0013419015066964285, -0.0018833705357142855,
         -0.007156808035714285, 0.023856026785714284, 0.05564313616071428,
         -0.05168805803571428, -0.29975760323660716, 0.5594308035714286,
         -0.29975760323660716, -0.05168805803571428, 0.05564313616071428,
         0.023856026785714284, -0.007156808035714285, -0.0018833705357142855,
         0.0013419015066964285, 0.0, -7.062639508928571e-05],
        [7.062639508928571e-05, 0.0, -0.0013419015066964285, -0.0018833705357142855,
         0.007156808035714285, 0.023856026785714284, -0.05564313616071428,
         -0.05168805803571428, 0.29975760323660716, 0.5594308035714286,
         0.29975760323660716, -0.05168805803571428, -0.05564313616071428,
         0.023856026785714284, 0.007156808035714285, -0.0018833705357142855,
         -0.0013419015066964285, 0.0, 7.062639508928571e-05],
        [-0.0017578125, 0.0, 0.022265625, 0.046875, -0.0482421875, -0.296875,
         0.55546875, -0.296875, -0.0482421875, 0.046875, 0.022265625, 0.0,
         -0.0017578125],
    ),
}

ALIASES = {
    "sy-a": "near_sym_a", "near_sym_a": "near_sym_a", "near-sym-a": "near_sym_a",
    "symmetric-a": "near_sym_a",
    "sy-b": "near_sym_b", "near_sym_b": "near_sym_b", "near-sym-b": "near_sym_b",
    "symmetric-b": "near_sym_b",
}

SUPPORTED = ("sy-a", "sy-b")


@dataclass(frozen=True, eq=False)
class DtcwtFilterSet:
    name: str
    tree_a_lo: np.ndarray
    tree_a_hi: np.ndarray
    tree_b_lo: np.ndarray
    tree_b_hi: np.ndarray
    synth_lo: np.ndarray
    synth_hi: np.ndarray


@dataclass(eq=False)
class ComplexSubbandSet:
    """``lowpass`` is ``(4, H/2, W/2, C)``: the four tree phases of the
    undecimated approximation. ``oriented`` is complex ``(6, H/2, W/2, C)``
    in :data:`ORIENTATIONS` order."""

    lowpass: np.ndarray
    oriented: np.ndarray
    source_shape: tuple[int, ...]
    filter_name: str

    def subband(self, angle: int) -> ComplexTensor:
        z = self.oriented[ORIENTATIONS.index(angle)]
        return ComplexTensor(Tensor(z.real), Tensor(z.imag))

    def oriented_energy(self) -> float:
        return float(np.sum(np.abs(self.oriented) ** 2))

    def lowpass_energy(self) -> float:
        return float(np.sum(self.lowpass ** 2))


def canonical_name(name: str) -> str:
    key = str(name).strip().lower()
    if key not in ALIASES:
        raise ConfigurationError(
            f"unknown complex wavelet {name!r}; supported: {', '.join(SUPPORTED)}"
        )
    return ALIASES[key]


def dtcwt_filters(name: str) -> DtcwtFilterSet:
    key = canonical_name(name)
    h0, h1, g0, g1 = (np.array(f, dtype=np.float64) for f in _NEAR_SYM[key])
    for f in (h0, h1, g0, g1):
        f.setflags(write=False)
    # tree b is tree a delayed by one sample
    b0 = np.concatenate([[0.0], h0])
    b1 = np.concatenate([[0.0], h1])
    b0.setflags(write=False)
    b1.setflags(write=False)
    return DtcwtFilterSet(key, h0, h1, b0, b1, g0, g1)


def _filt(x: np.ndarray, h: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(x, axis, 0)
    shape = moved.shape
    out = kernels.circular_filter(moved.reshape(shape[0], -1), h)
    return np.moveaxis(out.reshape(shape), 0, axis)


def _q2c(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.sqrt(0.5)
    a = y[0::2, 0::2]
    b = y[0::2, 1::2]
    c = y[1::2, 0::2]
    d = y[1::2, 1::2]
    p = (a + 1j * b) * s
    q = (d - 1j * c) * s
    return p - q, p + q


def dtcwt2_level1(image, filters: DtcwtFilterSet | str) -> ComplexSubbandSet:
    if isinstance(filters, str):
        filters = dtcwt_filters(filters)
    x = np.asarray(image, dtype=np.float64)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[:, :, None]
    if x.ndim != 3:
        raise ShapeError(f"expected H x W or H x W x C image, got shape {np.shape(image)}")
    h, w = x.shape[:2]
    if h % 2 or w % 2:
        raise ShapeError(f"dtcwt2_level1 needs even height and width, got {h}x{w}")
    h0, h1 = filters.tree_a_lo, filters.tree_a_hi
    lo = _filt(x, h0, 0)
    hi = _filt(x, h1, 0)
    ll = _filt(lo, h0, 1)
    lh = _filt(hi, h0, 1)   # horizontal pair: +15 / -15
    hl = _filt(lo, h1, 1)   # vertical pair: +75 / -75
    hh = _filt(hi, h1, 1)   # diagonal pair: +45 / -45
    z15, zm15 = _q2c(lh)
    z75, zm75 = _q2c(hl)
    z45, zm45 = _q2c(hh)
    oriented = np.stack([z15, z45, z75, zm75, zm45, zm15])
    lowpass = np.stack([ll[0::2, 0::2], ll[0::2, 1::2], ll[1::2, 0::2], ll[1::2, 1::2]])
    if squeeze:
        oriented = oriented[..., 0]
        lowpass = lowpass[..., 0]
    return ComplexSubbandSet(lowpass, oriented, tuple(np.shape(image)), filters.name)


def complex_hf_combine(subbands: ComplexSubbandSet) -> ComplexTensor:
    """Sum of the six oriented subbands."""
    z = subbands.oriented
    total = z[0] + z[1] + z[2] + z[3] + z[4] + z[5]
    return ComplexTensor(Tensor(total.real), Tensor(total.imag))
