"""Counter-based random numbers with a fixed, documented bit layout.

The raw stream is Philox-4x64-10 (numpy's bit generator) keyed by the
seed with the counter starting at zero. Uniforms take the top 53 bits of
each 64-bit word; normals use the Box-Muller transform on consecutive
uniform pairs. Nothing depends on numpy's seeding or distribution code, so
the same seed yields the same bytes on every platform.
"""

from __future__ import annotations

import numpy as np

_TWO53 = 1.0 / 9007199254740992.0


class CounterRNG:
    def __init__(self, seed: int):
        seed = int(seed)
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = seed
        self._bits = np.random.Philox(key=seed, counter=0)

    def raw(self, n: int) -> np.ndarray:
        return np.asarray(self._bits.random_raw(int(n)), dtype=np.uint64)

    def uniform(self, lo=0.0, hi=1.0, size=None):
        n = 1 if size is None else int(np.prod(size))
        # (0, 1): shift by half an ulp so log() in Box-Muller never sees 0
        u = ((self.raw(n) >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO53
        out = lo + (hi - lo) * u
        return float(out[0]) if size is None else out.reshape(size)

    def normal(self, size=None, loc=0.0, scale=1.0):
        n = 1 if size is None else int(np.prod(size))
        m = (n + 1) // 2
        u1 = self.uniform(size=m)
        u2 = self.uniform(size=m)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])[:n]
        out = loc + scale * z
        return float(out[0]) if size is None else out.reshape(size)

    def integers(self, lo: int, hi: int, size=None):
        """Integers in ``[lo, hi)``."""
        u = self.uniform(size=size)
        out = lo + np.floor(np.asarray(u) * (hi - lo)).astype(np.int64)
        return int(out) if size is None else out

    def permutation(self, n: int) -> np.ndarray:
        return np.argsort(self.uniform(size=n), kind="stable")

    def numpy_generator(self) -> np.random.Generator:
        """A numpy Generator for parameter initialisation, keyed the same way."""
        return np.random.Generator(np.random.Philox(key=self.seed, counter=0))
