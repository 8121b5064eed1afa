"""High-frequency feature maps: wavelet (WHF) and fixed Fourier masks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import cwt, wavelets
from .ndtensor import ComplexTensor, Tensor, bilinear_matrix
from .wavelets import ConfigurationError

REAL_WAVELETS = wavelets.SUPPORTED
COMPLEX_WAVELETS = cwt.SUPPORTED
WAVELET_NAMES = REAL_WAVELETS + COMPLEX_WAVELETS

DETAIL_BANDS = ("lh", "hl", "hh")


@dataclass(eq=False)
class WhfMap:
    values: np.ndarray
    wavelet_name: str
    is_complex: bool

    @property
    def shape(self):
        return self.values.shape

    def as_tensor(self) -> Tensor | ComplexTensor:
        if self.is_complex:
            return ComplexTensor(Tensor(self.values.real), Tensor(self.values.imag))
        return Tensor(self.values)

    def real_part(self) -> np.ndarray:
        """What real-only consumers receive."""
        return np.real(self.values)


@dataclass(frozen=True)
class FreqMaskConfig:
    tau: float = 0.25
    mode: str = "highpass"
    shape: str = "square"

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ConfigurationError(f"tau must lie in (0, 1), got {self.tau}")
        if self.mode not in ("highpass", "lowpass"):
            raise ConfigurationError(f"mode must be 'highpass' or 'lowpass', got {self.mode!r}")
        if self.shape not in ("square", "radial"):
            raise ConfigurationError(f"shape must be 'square' or 'radial', got {self.shape!r}")


def resize_bilinear_2x(image) -> np.ndarray:
    x = np.asarray(image, dtype=np.float64)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[:, :, None]
    h, w = x.shape[:2]
    out = np.einsum("ih,hwc,jw->ijc", bilinear_matrix(h, 2 * h), x, bilinear_matrix(w, 2 * w),
                    optimize=True)
    return out[:, :, 0] if squeeze else out


def resolve_wavelet(name: str) -> tuple[str, bool]:
    """Canonical name and whether the transform is complex."""
    key = str(name).strip().lower()
    if key in cwt.ALIASES:
        return ("sy-a" if cwt.ALIASES[key] == "near_sym_a" else "sy-b"), True
    if key in wavelets.ALIASES:
        return wavelets.ALIASES[key], False
    raise ConfigurationError(
        f"unknown wavelet {name!r}; supported: {', '.join(WAVELET_NAMES)}"
    )


def whf_extract(image, wavelet_name: str, bands: Sequence[str] = DETAIL_BANDS) -> WhfMap:
    """Resize x2, decompose one level, sum the selected subbands.

    ``bands`` picks which real subbands enter the sum (``ll`` included for
    ablations); complex wavelets always sum all six oriented subbands.
    """
    name, is_complex = resolve_wavelet(wavelet_name)
    up = resize_bilinear_2x(image)
    if is_complex:
        sub = cwt.dtcwt2_level1(up, name)
        values = sub.oriented.sum(axis=0)
    else:
        bad = [b for b in bands if b not in wavelets.SUBBANDS]
        if bad or not bands:
            raise ConfigurationError(f"invalid subband selection {list(bands)!r}")
        sub = wavelets.dwt2(up, name)
        values = np.zeros_like(sub.ll)
        for b in bands:
            values = values + sub[b]
    return WhfMap(values, name, is_complex)


def _lowfreq_mask(h: int, w: int, tau: float, shape: str = "square") -> np.ndarray:
    # |k| <= side // 2 around DC keeps the mask conjugate-symmetric
    side = int(np.floor(tau * min(h, w)))
    r = side // 2
    ky = np.fft.fftfreq(h) * h
    kx = np.fft.fftfreq(w) * w
    if shape == "radial":
        return np.hypot(ky[:, None], kx[None, :]) <= r
    return (np.abs(ky)[:, None] <= r) & (np.abs(kx)[None, :] <= r)


def fourier_filter(image, cfg: FreqMaskConfig, return_residue: bool = False):
    """Keep (lowpass) or remove (highpass) a centred low-frequency square or disc.

    The mask is built directly on unshifted frequency indices, which is the
    same as a centred region on the shifted spectrum.
    """
    x = np.asarray(image, dtype=np.float64)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[:, :, None]
    h, w = x.shape[:2]
    low = _lowfreq_mask(h, w, cfg.tau, cfg.shape)
    keep = low if cfg.mode == "lowpass" else ~low
    spec = np.fft.fft2(x, axes=(0, 1))
    back = np.fft.ifft2(spec * keep[:, :, None], axes=(0, 1))
    out = back.real
    if squeeze:
        out = out[:, :, 0]
    if return_residue:
        return out, float(np.abs(back.imag).max())
    return out


def hfreq(image, tau: float = 0.25) -> np.ndarray:
    return fourier_filter(image, FreqMaskConfig(tau, "highpass"))


def lfreq(image, tau: float = 0.25) -> np.ndarray:
    return fourier_filter(image, FreqMaskConfig(tau, "lowpass"))


def freq_analysis(*args, **kwargs):
    """Controlled two-extractor comparison; see :func:`samwave.experiments.freq_analysis`."""
    from .experiments import freq_analysis as run

    return run(*args, **kwargs)
