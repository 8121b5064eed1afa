"""Small pre-norm vision transformer used as the frozen backbone."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .. import ndtensor as nd
from ..adapters import AdapterStack, adapter_forward, adapter_input, embedding_tune, inject, patchify, whf_tune
from ..ndtensor import DimensionError, Tensor
from ..wavelets import ShapeError


@dataclass
class EncoderConfig:
    image_size: int = 64
    patch_size: int = 4
    embed_dim: int = 64
    depth: int = 4
    heads: int = 4
    mlp_ratio: int = 2
    in_channels: int = 3

    def __post_init__(self):
        if self.image_size % self.patch_size:
            raise ValueError("image_size must be divisible by patch_size")
        if self.embed_dim % self.heads:
            raise ValueError("embed_dim must be divisible by heads")

    @property
    def grid(self) -> int:
        return self.image_size // self.patch_size

    @property
    def num_tokens(self) -> int:
        return self.grid ** 2

    def to_dict(self) -> dict:
        return asdict(self)


def _uniform(rng, shape, fan_in):
    b = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-b, b, size=shape)


@dataclass(eq=False)
class EncoderState:
    config: EncoderConfig
    params: dict = field(default_factory=dict)
    frozen: bool = False

    @classmethod
    def init(cls, config: EncoderConfig, rng: np.random.Generator, dtype="f64") -> "EncoderState":
        d, p = config.embed_dim, config.patch_size
        pin = p * p * config.in_channels
        hid = config.mlp_ratio * d

        def t(a):
            return Tensor(a, True, dtype)

        params = {
            "patch.w": t(_uniform(rng, (pin, d), pin)),
            "patch.b": t(np.zeros(d)),
            "pos": t(rng.normal(0.0, 0.02, size=(config.num_tokens, d))),
        }
        for i in range(config.depth):
            pre = f"blk{i}."
            params[pre + "ln1.g"] = t(np.ones(d))
            params[pre + "ln1.b"] = t(np.zeros(d))
            for name in ("q", "k", "v", "o"):
                params[pre + name + ".w"] = t(_uniform(rng, (d, d), d))
                params[pre + name + ".b"] = t(np.zeros(d))
            params[pre + "ln2.g"] = t(np.ones(d))
            params[pre + "ln2.b"] = t(np.zeros(d))
            params[pre + "fc1.w"] = t(_uniform(rng, (d, hid), d))
            params[pre + "fc1.b"] = t(np.zeros(hid))
            params[pre + "fc2.w"] = t(_uniform(rng, (hid, d), hid))
            params[pre + "fc2.b"] = t(np.zeros(d))
        params["lnf.g"] = t(np.ones(d))
        params["lnf.b"] = t(np.zeros(d))
        return cls(config, params)

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def freeze(self) -> "EncoderState":
        for p in self.params.values():
            p.requires_grad = False
            p.grad = None
        self.frozen = True
        return self

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for name in sorted(self.params):
            h.update(name.encode())
            h.update(self.params[name].data.tobytes())
        return h.hexdigest()


def _check_images(images, cfg: EncoderConfig) -> np.ndarray:
    x = np.asarray(images)
    if x.ndim == 3:
        x = x[None]
    want = (cfg.image_size, cfg.image_size, cfg.in_channels)
    if x.ndim != 4 or x.shape[1:] != want:
        raise ShapeError(f"encoder expects images of shape [B, {want[0]}, {want[1]}, {want[2]}], got {np.shape(images)}")
    return x


def patch_embed(images, enc: EncoderState) -> Tensor:
    """F_emb: linear embedding of non-overlapping patches, before positions."""
    cfg = enc.config
    x = _check_images(images, cfg)
    w = enc.params["patch.w"]
    patches = Tensor(patchify(x, cfg.patch_size), dtype=w.dtype)
    return nd.linear(patches, w, enc.params["patch.b"])


def attention(x: Tensor, params: dict, pre: str, heads: int) -> Tensor:
    b, n, d = x.shape
    dh = d // heads

    def split(t):
        return nd.transpose(nd.reshape(t, (b, n, heads, dh)), (0, 2, 1, 3))

    q = split(nd.linear(x, params[pre + "q.w"], params[pre + "q.b"]))
    k = nd.transpose(nd.reshape(nd.linear(x, params[pre + "k.w"], params[pre + "k.b"]), (b, n, heads, dh)),
                     (0, 2, 3, 1))
    v = split(nd.linear(x, params[pre + "v.w"], params[pre + "v.b"]))
    att = nd.softmax(nd.mul(nd.matmul(q, k), 1.0 / np.sqrt(dh)), axis=-1)
    out = nd.reshape(nd.transpose(nd.matmul(att, v), (0, 2, 1, 3)), (b, n, d))
    return nd.linear(out, params[pre + "o.w"], params[pre + "o.b"])


def block_forward(x: Tensor, params: dict, i: int, heads: int) -> Tensor:
    pre = f"blk{i}."
    h = nd.layer_norm(x, params[pre + "ln1.g"], params[pre + "ln1.b"])
    x = nd.add(x, attention(h, params, pre, heads))
    h = nd.layer_norm(x, params[pre + "ln2.g"], params[pre + "ln2.b"])
    h = nd.gelu(nd.linear(h, params[pre + "fc1.w"], params[pre + "fc1.b"]))
    return nd.add(x, nd.linear(h, params[pre + "fc2.w"], params[pre + "fc2.b"]))


def encoder_forward(images, enc: EncoderState, adapters: AdapterStack | None = None,
                    whf=None, f_emb: Tensor | None = None) -> dict:
    """Run the encoder, optionally injecting adapter outputs before each block.

    ``whf`` is the ``[B, H, W, C]`` high-frequency map (required with
    adapters). ``f_emb`` may be passed to reuse a cached patch embedding.
    Returns ``{"emb", "blocks", "tokens"}``; ``blocks`` holds each block's
    (possibly injected) input.
    """
    cfg = enc.config
    if f_emb is None:
        f_emb = patch_embed(images, enc)
    x = nd.add(f_emb, enc.params["pos"])
    psi = None
    if adapters is not None:
        if adapters.config.num_layers != cfg.depth:
            raise DimensionError(f"{adapters.config.num_layers} adapters for a {cfg.depth}-block encoder")
        if whf is None:
            raise DimensionError("adapters need a high-frequency map")
        psi_whf = whf_tune(whf, adapters, cfg.patch_size, dtype=f_emb.dtype)
        psi = adapter_input(embedding_tune(f_emb, adapters), psi_whf)
    blocks = []
    for i in range(cfg.depth):
        if psi is not None:
            x = inject(x, adapter_forward(i, psi, adapters))
        blocks.append(x)
        x = block_forward(x, enc.params, i, cfg.heads)
    tokens = nd.layer_norm(x, enc.params["lnf.g"], enc.params["lnf.b"])
    return {"emb": f_emb, "blocks": blocks, "tokens": tokens}
