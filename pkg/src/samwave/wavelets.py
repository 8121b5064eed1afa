"""Orthogonal filter banks and the single-level separable 2-D DWT.

Subbands are named by the filter applied along the width (row-wise)
followed by the filter applied along the height (column-wise):

* ``ll`` approximation,
* ``lh`` horizontal details (high-pass down the columns),
* ``hl`` vertical details (high-pass along the rows),
* ``hh`` diagonal details.

Boundaries are periodic, so an ``H x W`` image always yields four
``H/2 x W/2`` subbands and reconstruction is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


class ConfigurationError(ValueError):
    """Unknown or unsupported configuration value."""


class ShapeError(ValueError):
    """Input has an unsupported shape."""


class BankMismatchError(RuntimeError):
    """Subbands were produced by a different filter bank."""


_S = 1.0 / np.sqrt(2.0)

# Decomposition low-pass filters (correlation order). sym4 is Newton-refined
# against its orthonormality and vanishing-moment equations to ~1e-16.
_DEC_LO = {
    "haar": [_S, _S],
    "db2": [
        -0.12940952255126037, 0.2241438680420134, 0.8365163037378079, 0.48296291314453416,
    ],
    "coif2": [
        -0.000720549445520347, -0.0018232088709110323, 0.005611434819368834,
        0.02368017194684777, -0.05943441864643109, -0.07648859907828076,
        0.4170051844232391, 0.8127236354494135, 0.3861100668227629,
        -0.0673725547237256, -0.04146493678687178, 0.01638733646320364,
    ],
    "sym4": [
        -0.07576571478950221, -0.029635527646002493, 0.497618667632775,
        0.8037387518051321, 0.29785779560530606, -0.09921954357663353,
        -0.012603967262031304, 0.032223100604051466,
    ],
}

ALIASES = {
    "ha": "haar", "haar": "haar",
    "db": "db2", "db2": "db2", "daubechies": "db2",
    "cf": "coif2", "coif": "coif2", "coif2": "coif2", "coiflet": "coif2",
    "sym": "sym4", "sym4": "sym4", "symlet": "sym4",
}

SUPPORTED = tuple(_DEC_LO)
SUBBANDS = ("ll", "lh", "hl", "hh")


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WaveletFilterBank:
    name: str
    dec_lo: np.ndarray
    dec_hi: np.ndarray
    rec_lo: np.ndarray
    rec_hi: np.ndarray

    @property
    def length(self) -> int:
        return len(self.dec_lo)


@dataclass(eq=False)
class SubbandSet:
    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray
    source_shape: tuple[int, ...]
    bank_name: str

    def __getitem__(self, key: str) -> np.ndarray:
        if key not in SUBBANDS:
            raise KeyError(key)
        return getattr(self, key)

    def details(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.lh, self.hl, self.hh


def canonical_name(name: str) -> str:
    key = str(name).strip().lower()
    if key not in ALIASES:
        raise ConfigurationError(
            f"unknown wavelet {name!r}; supported: {', '.join(SUPPORTED)} "
            f"(aliases: {', '.join(sorted(k for k in ALIASES if k not in SUPPORTED))})"
        )
    return ALIASES[key]


def filter_bank(name: str) -> WaveletFilterBank:
    """Return the named orthogonal filter bank.

    Haar uses ``L = [1, 1]/sqrt(2)`` and ``H = [1, -1]/sqrt(2)``. The other
    families use the quadrature-mirror high-pass ``hi[k] = (-1)^(k+1) lo[N-1-k]``.
    Reconstruction filters are the time reverses of the decomposition ones.
    """
    key = canonical_name(name)
    lo = np.array(_DEC_LO[key])
    if key == "haar":
        hi = np.array([_S, -_S])
    else:
        n = len(lo)
        hi = np.array([(-1) ** (k + 1) * lo[n - 1 - k] for k in range(n)])
    return WaveletFilterBank(key, _readonly(lo), _readonly(hi), _readonly(lo[::-1]), _readonly(hi[::-1]))


def build_2d_kernels(bank: WaveletFilterBank) -> dict[str, np.ndarray]:
    """Stride-2 kernels ``K[m, n] = col_filter[m] * row_filter[n]``.

    ``m`` indexes height, ``n`` width; the first letter of each key is the
    row-wise filter, the second the column-wise one.
    """
    f = {"l": bank.dec_lo, "h": bank.dec_hi}
    return {key: np.outer(f[key[1]], f[key[0]]) for key in SUBBANDS}


def _along(x: np.ndarray, axis: int, fn, *args):
    moved = np.moveaxis(x, axis, 0)
    shape = moved.shape
    outs = fn(moved.reshape(shape[0], -1), *args)
    if isinstance(outs, tuple):
        return tuple(np.moveaxis(o.reshape((o.shape[0],) + shape[1:]), 0, axis) for o in outs)
    return np.moveaxis(outs.reshape((outs.shape[0],) + shape[1:]), 0, axis)


def _as_image(image) -> tuple[np.ndarray, bool]:
    x = np.asarray(image, dtype=np.float64)
    if x.ndim == 2:
        return x[:, :, None], True
    if x.ndim != 3:
        raise ShapeError(f"expected H x W or H x W x C image, got shape {x.shape}")
    return x, False


def dwt2(image, bank: WaveletFilterBank | str, boundary: str = "periodic") -> SubbandSet:
    """Single-level 2-D DWT, applied independently to each channel."""
    if boundary != "periodic":
        raise ConfigurationError(f"boundary {boundary!r} unsupported; only 'periodic'")
    if isinstance(bank, str):
        bank = filter_bank(bank)
    x, squeeze = _as_image(image)
    h, w = x.shape[:2]
    if h % 2 or w % 2:
        raise ShapeError(f"dwt2 needs even height and width, got {h}x{w}; resize first")
    col_lo, col_hi = _along(x, 0, kernels.analysis, bank.dec_lo, bank.dec_hi)
    ll, hl = _along(col_lo, 1, kernels.analysis, bank.dec_lo, bank.dec_hi)
    lh, hh = _along(col_hi, 1, kernels.analysis, bank.dec_lo, bank.dec_hi)
    bands = [ll, lh, hl, hh]
    if squeeze:
        bands = [b[:, :, 0] for b in bands]
    return SubbandSet(*bands, source_shape=tuple(np.shape(image)), bank_name=bank.name)


def iwt2(subbands: SubbandSet, bank: WaveletFilterBank | str) -> np.ndarray:
    """Inverse of :func:`dwt2` under periodic boundaries."""
    if isinstance(bank, str):
        bank = filter_bank(bank)
    if subbands.bank_name != bank.name:
        raise BankMismatchError(
            f"subbands were produced with {subbands.bank_name!r}, not {bank.name!r}"
        )
    shapes = {np.shape(subbands[k]) for k in SUBBANDS}
    if len(shapes) != 1:
        raise ShapeError(f"subband shapes differ: {sorted(shapes)}")
    bands = [np.asarray(subbands[k], dtype=np.float64) for k in SUBBANDS]
    squeeze = bands[0].ndim == 2
    if squeeze:
        bands = [b[:, :, None] for b in bands]
    ll, lh, hl, hh = bands
    col_lo = _along_pair(ll, hl, 1, bank)
    col_hi = _along_pair(lh, hh, 1, bank)
    x = _along_pair(col_lo, col_hi, 0, bank)
    return x[:, :, 0] if squeeze else x


def _along_pair(lo: np.ndarray, hi: np.ndarray, axis: int, bank: WaveletFilterBank) -> np.ndarray:
    a = np.moveaxis(lo, axis, 0)
    b = np.moveaxis(hi, axis, 0)
    shape = a.shape
    out = kernels.synthesis(a.reshape(shape[0], -1), b.reshape(shape[0], -1), bank.rec_lo, bank.rec_hi)
    return np.moveaxis(out.reshape((2 * shape[0],) + shape[1:]), 0, axis)


def check_bank(bank: WaveletFilterBank, tol: float = 1e-12) -> dict[str, float]:
    """Numeric defects of the QMF conditions; all should be below ``tol``."""
    lo, hi = bank.dec_lo, bank.dec_hi
    n = len(lo)
    shift = 0.0
    for m in range(-(n // 2), n // 2 + 1):
        acc = sum(lo[k] * lo[k + 2 * m] for k in range(n) if 0 <= k + 2 * m < n)
        shift = max(shift, abs(acc - (1.0 if m == 0 else 0.0)))
    return {
        "sum_lo_minus_sqrt2": abs(lo.sum() - np.sqrt(2.0)),
        "sum_hi": abs(hi.sum()),
        "shift_orthonormality": shift,
        "rec_is_reversed_dec": float(max(np.abs(bank.rec_lo - lo[::-1]).max(),
                                         np.abs(bank.rec_hi - hi[::-1]).max())),
    }
