"""Procedural segmentation tasks at 64x64.

Every sample ``i`` of a dataset is generated from its own stream
``CounterRNG(seed + i)``, so samples are independent and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .rng import CounterRNG

TASKS = ("camouflage", "defocus", "shadow", "blobs")
FG_RANGE = (0.10, 0.50)
FEATHER = 2.0
DEFOCUS_SIGMA = 2.5
SHADOW_FACTOR = 0.45
# dominant wave-vector directions for camouflage textures (radians)
ORIENTATIONS = (0.0, np.pi / 2, 0.0, np.pi / 2, np.pi / 4, 3 * np.pi / 4)


@dataclass(eq=False)
class SynthDataset:
    task: str
    seed: int
    size: int
    images: np.ndarray          # [n, H, W, 3] float64 in [0, 1]
    gts: np.ndarray             # [n, H, W] uint8 in {0, 1}
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.images)

    def __getitem__(self, i):
        return self.images[i], self.gts[i]

    def subset(self, idx) -> "SynthDataset":
        idx = np.asarray(idx)
        return SynthDataset(self.task, self.seed, self.size, self.images[idx], self.gts[idx], dict(self.meta))


def blob_alpha(rng: CounterRNG, size: int) -> np.ndarray:
    """Soft mask of a random star-shaped blob with a 2-px linear feather."""
    while True:
        r0 = rng.uniform(0.18, 0.40) * size
        cy, cx = rng.uniform(0.3, 0.7, size=2) * size
        k = np.arange(2, 5)
        amp = rng.uniform(0.0, 0.22, size=3) / k * 2
        phase = rng.uniform(0.0, 2 * np.pi, size=3)
        yy, xx = np.mgrid[0:size, 0:size] + 0.5
        dy, dx = yy - cy, xx - cx
        phi = np.arctan2(dy, dx)
        radius = r0 * (1.0 + sum(a * np.cos(kk * phi + p) for a, kk, p in zip(amp, k, phase)))
        dist = np.hypot(dy, dx)
        alpha = np.clip((radius - dist) / FEATHER + 0.5, 0.0, 1.0)
        frac = float((alpha >= 0.5).mean())
        if FG_RANGE[0] <= frac <= FG_RANGE[1]:
            return alpha


def band_noise(rng: CounterRNG, size: int, f0: float, bw: float, theta: float = 0.0,
               kappa: float = 0.0) -> np.ndarray:
    """Zero-mean, unit-variance noise with a ring (optionally oriented) spectrum.

    ``f0``/``bw`` are in cycles per pixel; ``theta`` is the direction of the
    dominant wave vector and ``kappa`` its axial concentration.
    """
    white = rng.normal(size=(size, size))
    fy = np.fft.fftfreq(size)[:, None]
    fx = np.fft.fftfreq(size)[None, :]
    f = np.hypot(fy, fx)
    gain = np.exp(-0.5 * ((f - f0) / bw) ** 2)
    if kappa > 0:
        phi = np.arctan2(fy, fx)
        gain = gain * np.exp(kappa * (np.cos(2 * (phi - theta)) - 1.0))
    gain[0, 0] = 0.0
    t = np.fft.ifft2(np.fft.fft2(white) * gain).real
    t -= t.mean()
    return t / (t.std() + 1e-12)


def quantize(img: np.ndarray) -> np.ndarray:
    """Snap to the 8-bit grid so a PNG round trip is lossless."""
    return np.round(img * 255.0) / 255.0


def _region_stats(img, mask):
    fg = img[mask]
    bg = img[~mask]
    return fg.mean(axis=0), bg.mean(axis=0), fg.var(axis=0), bg.var(axis=0)


def _camouflage_sample(rng: CounterRNG, size: int) -> tuple[np.ndarray, np.ndarray]:
    while True:
        alpha = blob_alpha(rng, size)
        gt = alpha >= 0.5
        mu = rng.uniform(0.4, 0.6, size=3)
        sigma = rng.uniform(0.07, 0.10) * rng.uniform(0.8, 1.2, size=3)
        # both textures share one dominant orientation, usually axis-aligned;
        # the object's texture is the finer one
        theta = ORIENTATIONS[rng.integers(0, len(ORIENTATIONS))] + rng.uniform(-0.1, 0.1)
        lo_f, hi_f = rng.uniform(0.04, 0.09), rng.uniform(0.25, 0.40)
        kappa = rng.uniform(6.0, 10.0)
        t_bg = band_noise(rng, size, lo_f, 0.03, theta, kappa)
        t_fg = band_noise(rng, size, hi_f, 0.03, theta, kappa)
        illum = band_noise(rng, size, 0.0, 0.015) * rng.uniform(0.10, 0.16)
        # unit statistics inside each region before compositing
        t_fg = (t_fg - t_fg[gt].mean()) / (t_fg[gt].std() + 1e-12)
        t_bg = (t_bg - t_bg[~gt].mean()) / (t_bg[~gt].std() + 1e-12)
        tex = alpha * t_fg + (1.0 - alpha) * t_bg
        img = mu + sigma * tex[..., None] + illum[..., None]
        m_fg, m_bg, _, _ = _region_stats(img, gt)
        img = img + alpha[..., None] * (m_bg - m_fg)
        img = quantize(np.clip(img, 0.0, 1.0))
        m_fg, m_bg, v_fg, v_bg = _region_stats(img, gt)
        ratio = v_fg / np.maximum(v_bg, 1e-12)
        if np.all(np.abs(m_fg - m_bg) <= 0.02) and np.all((ratio >= 0.8) & (ratio <= 1.25)):
            return img, gt


def _detail_texture(rng: CounterRNG, size: int) -> np.ndarray:
    mu = rng.uniform(0.35, 0.65, size=3)
    sigma = rng.uniform(0.12, 0.18) * rng.uniform(0.8, 1.2, size=3)
    t = band_noise(rng, size, rng.uniform(0.22, 0.32), 0.06)
    base = band_noise(rng, size, 0.04, 0.02) * 0.5
    return np.clip(mu + sigma * (t + base)[..., None], 0.0, 1.0)


def _defocus_sample(rng: CounterRNG, size: int):
    alpha = blob_alpha(rng, size)
    sharp = _detail_texture(rng, size)
    blurred = ndimage.gaussian_filter(sharp, sigma=(DEFOCUS_SIGMA, DEFOCUS_SIGMA, 0), mode="wrap")
    img = alpha[..., None] * blurred + (1.0 - alpha[..., None]) * sharp
    return img, alpha >= 0.5


def _shadow_sample(rng: CounterRNG, size: int):
    gt = blob_alpha(rng, size) >= 0.5
    lit = _detail_texture(rng, size)
    img = np.where(gt[..., None], lit * SHADOW_FACTOR, lit)
    return img, gt


def _blobs_sample(rng: CounterRNG, size: int):
    alpha = blob_alpha(rng, size)
    bg = rng.uniform(0.0, 0.3, size=3)
    fg = rng.uniform(0.7, 1.0, size=3)
    noise = rng.normal(size=(size, size, 3)) * 0.03
    img = np.clip(alpha[..., None] * fg + (1.0 - alpha[..., None]) * bg + noise, 0.0, 1.0)
    return img, alpha >= 0.5


_SAMPLERS = {
    "camouflage": _camouflage_sample,
    "defocus": _defocus_sample,
    "shadow": _shadow_sample,
    "blobs": _blobs_sample,
}


def generate(task: str, seed: int, n: int, size: int = 64) -> SynthDataset:
    if task not in _SAMPLERS:
        raise ValueError(f"unknown task {task!r}; choose from {TASKS}")
    if n < 1:
        raise ValueError("n must be >= 1")
    images = np.empty((n, size, size, 3), dtype=np.float64)
    gts = np.empty((n, size, size), dtype=np.uint8)
    for i in range(n):
        img, gt = _SAMPLERS[task](CounterRNG(seed + i), size)
        images[i] = quantize(img)
        gts[i] = gt
    return SynthDataset(task, int(seed), int(size), images, gts,
                        {"prng": "philox4x64-10", "sample_seed": "seed + index"})


def gen_camouflage(seed: int, n: int, size: int = 64) -> SynthDataset:
    return generate("camouflage", seed, n, size)


def gen_defocus(seed: int, n: int, size: int = 64) -> SynthDataset:
    return generate("defocus", seed, n, size)


def gen_shadow(seed: int, n: int, size: int = 64) -> SynthDataset:
    return generate("shadow", seed, n, size)


def gen_blobs(seed: int, n: int, size: int = 64) -> SynthDataset:
    return generate("blobs", seed, n, size)


def threshold_oracle_iou(image: np.ndarray, gt: np.ndarray, levels: int = 64) -> float:
    """Best IoU of a global gray-level threshold (either polarity)."""
    gray = np.asarray(image).mean(axis=-1)
    g = np.asarray(gt).astype(bool)
    best = 0.0
    for t in np.linspace(gray.min(), gray.max(), levels):
        for pred in (gray >= t, gray < t):
            union = np.count_nonzero(pred | g)
            if union:
                best = max(best, np.count_nonzero(pred & g) / union)
    return best
