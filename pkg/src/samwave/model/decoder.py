"""Mask decoder: two learned 2x upsampling stages and a linear head."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .. import ndtensor as nd
from ..ndtensor import Tensor


@dataclass
class DecoderConfig:
    embed_dim: int = 64
    grid: int = 16
    image_size: int = 64
    hidden: tuple[int, int] = (32, 16)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d


@dataclass(eq=False)
class DecoderState:
    config: DecoderConfig
    params: dict = field(default_factory=dict)

    @classmethod
    def init(cls, config: DecoderConfig, rng: np.random.Generator, dtype="f64") -> "DecoderState":
        c1, c2 = config.hidden
        d = config.embed_dim

        def u(shape, fan_in):
            b = 1.0 / np.sqrt(fan_in)
            return Tensor(rng.uniform(-b, b, size=shape), True, dtype)

        params = {
            "up1.w": u((d, 4 * c1), d),
            "up1.b": Tensor(np.zeros(4 * c1), True, dtype),
            "up2.w": u((c1, 4 * c2), c1),
            "up2.b": Tensor(np.zeros(4 * c2), True, dtype),
            "head.w": u((c2, 1), c2),
            "head.b": Tensor(np.zeros(1), True, dtype),
        }
        return cls(config, params)

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())


def pixel_shuffle(x: Tensor) -> Tensor:
    """``[B, h, w, 4c] -> [B, 2h, 2w, c]``."""
    b, h, w, c4 = x.shape
    c = c4 // 4
    x = nd.reshape(x, (b, h, w, 2, 2, c))
    x = nd.transpose(x, (0, 1, 3, 2, 4, 5))
    return nd.reshape(x, (b, 2 * h, 2 * w, c))


def decoder_forward(tokens: Tensor, dec: DecoderState) -> Tensor:
    """Mask logits ``[B, H, W]`` from ``[B, N, D]`` tokens."""
    cfg = dec.config
    p = dec.params
    b, n, d = tokens.shape
    g = int(round(np.sqrt(n)))
    x = nd.reshape(tokens, (b, g, g, d))
    x = nd.gelu(pixel_shuffle(nd.linear(x, p["up1.w"], p["up1.b"])))
    x = nd.gelu(pixel_shuffle(nd.linear(x, p["up2.w"], p["up2.b"])))
    if x.shape[1] != cfg.image_size or x.shape[2] != cfg.image_size:
        x = nd.resize_bilinear(x, (cfg.image_size, cfg.image_size))
    logits = nd.linear(x, p["head.w"], p["head.b"])
    return nd.reshape(logits, (b, cfg.image_size, cfg.image_size))
