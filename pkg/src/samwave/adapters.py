"""Embedding Tune, WHF Tune and the per-layer real/complex adapters.

For each encoder layer ``i`` the adapter maps the concatenation
``Psi = [psi_pe, psi_whf]`` (``2 * gamma`` channels) through
``up_i(act(tune_i(Psi)))`` and the result is added to that layer's tokens.
Complex adapters use complex weights and split GeLU; their real and
imaginary outputs are both added to the (real) tokens.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import ndtensor as nd
from .ndtensor import ComplexTensor, ContractError, DimensionError, Tensor


@dataclass
class AdapterConfig:
    gamma: int = 16
    num_layers: int = 4
    layer_channels: list[int] | int = 64
    embed_dim: int = 64
    is_complex: bool = False
    patch_size: int = 4
    whf_channels: int = 3

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if isinstance(self.layer_channels, int):
            self.layer_channels = [self.layer_channels] * self.num_layers
        self.layer_channels = [int(c) for c in self.layer_channels]
        if len(self.layer_channels) != self.num_layers:
            raise ValueError("layer_channels must list one width per layer")

    @property
    def input_channels(self) -> int:
        return 2 * self.gamma

    def to_dict(self) -> dict:
        return asdict(self)


def _uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


@dataclass(eq=False)
class AdapterStack:
    config: AdapterConfig
    params: dict = field(default_factory=dict)

    @classmethod
    def init(cls, config: AdapterConfig, rng: np.random.Generator, dtype="f64") -> "AdapterStack":
        """Small-uniform tune/projection weights, zero up-projections."""
        g, d = config.gamma, config.embed_dim
        patch_in = config.patch_size ** 2 * config.whf_channels
        p: dict = {
            "pe.w": Tensor(_uniform(rng, (d, g), d), True, dtype),
            "pe.b": Tensor(np.zeros(g), True, dtype),
        }

        def make(shape, fan_in, zero=False):
            if config.is_complex:
                if zero:
                    return ComplexTensor(Tensor(np.zeros(shape), True, dtype),
                                         Tensor(np.zeros(shape), True, dtype))
                return ComplexTensor(Tensor(_uniform(rng, shape, fan_in), True, dtype),
                                     Tensor(_uniform(rng, shape, fan_in), True, dtype))
            if zero:
                return Tensor(np.zeros(shape), True, dtype)
            return Tensor(_uniform(rng, shape, fan_in), True, dtype)

        p["whf.w"] = make((patch_in, g), patch_in)
        p["whf.b"] = make((g,), patch_in, zero=True)
        for i, c in enumerate(config.layer_channels):
            p[f"tune{i}.w"] = make((2 * g, g), 2 * g)
            p[f"tune{i}.b"] = make((g,), 2 * g, zero=True)
            p[f"up{i}.w"] = make((g, c), g, zero=True)
            p[f"up{i}.b"] = make((c,), g, zero=True)
        return cls(config, p)

    def parameters(self) -> list[Tensor]:
        return nd.parameters_of(self.params.values())

    def named_tensors(self) -> dict[str, Tensor]:
        out = {}
        for name, t in self.params.items():
            if isinstance(t, ComplexTensor):
                out[name + ".re"] = t.re
                out[name + ".im"] = t.im
            else:
                out[name] = t
        return out

    def complex_flags(self) -> dict[str, bool]:
        return {name: isinstance(t, ComplexTensor) for name, t in self.params.items()}

    def __getitem__(self, name):
        return self.params[name]


def _dense(x, w, b):
    if isinstance(w, ComplexTensor):
        return nd.clinear(x, w, b)
    return nd.linear(x, w, b)


def embedding_tune(f_emb: Tensor, stack: AdapterStack) -> Tensor:
    """Pointwise projection of the frozen patch embeddings to gamma channels."""
    w = stack["pe.w"]
    if f_emb.shape[-1] != w.shape[0]:
        raise DimensionError(f"F_emb has {f_emb.shape[-1]} channels, Embedding Tune expects {w.shape[0]}")
    return nd.linear(f_emb, w, stack["pe.b"])


def patchify(x: np.ndarray, p: int) -> np.ndarray:
    """``[B, H, W, C] -> [B, (H/p)*(W/p), p*p*C]`` non-overlapping patches."""
    b, h, w, c = x.shape
    if h % p or w % p:
        raise DimensionError(f"spatial size {h}x{w} not divisible by patch size {p}")
    x = x.reshape(b, h // p, p, w // p, p, c).transpose(0, 1, 3, 2, 4, 5)
    return np.ascontiguousarray(x.reshape(b, (h // p) * (w // p), p * p * c))


def whf_tune(i_hf, stack: AdapterStack, patch_size: int | None = None, dtype=None):
    """Patchify the high-frequency map and project each patch to gamma channels.

    ``i_hf`` is a ``[B, H, W, C]`` (or ``[H, W, C]``) real or complex array.
    Returns ``[B, N, gamma]`` tokens, complex when the stack is complex.
    """
    p = patch_size or stack.config.patch_size
    arr = i_hf.values if hasattr(i_hf, "values") and not isinstance(i_hf, np.ndarray) else i_hf
    if isinstance(arr, ComplexTensor):
        arr = arr.numpy()
    elif isinstance(arr, Tensor):
        arr = arr.data
    arr = np.asarray(arr)
    if arr.ndim == 3:
        arr = arr[None]
    patches = patchify(arr, p)
    w, b = stack["whf.w"], stack["whf.b"]
    dtype = dtype or (w.dtype if isinstance(w, Tensor) else w.re.dtype)
    if isinstance(w, ComplexTensor):
        x = ComplexTensor(Tensor(patches.real, dtype=dtype), Tensor(np.imag(patches), dtype=dtype))
        return nd.clinear(x, w, b)
    return nd.linear(Tensor(np.real(patches), dtype=dtype), w, b)


def adapter_input(psi_pe: Tensor, psi_whf):
    if psi_pe.shape != psi_whf.shape:
        raise DimensionError(f"psi_pe {psi_pe.shape} and psi_whf {psi_whf.shape} must match")
    if isinstance(psi_whf, ComplexTensor):
        return nd.cconcat([psi_pe, psi_whf], axis=-1)
    return nd.concat([psi_pe, psi_whf], axis=-1)


def adapter_forward(i: int, psi, stack: AdapterStack):
    """``P_i = up_i(act(tune_i(Psi)))`` with GeLU or split GeLU."""
    if not 0 <= i < stack.config.num_layers:
        raise ContractError(f"layer index {i} out of range [0, {stack.config.num_layers})")
    h = _dense(psi, stack[f"tune{i}.w"], stack[f"tune{i}.b"])
    h = nd.split_gelu(h) if isinstance(h, ComplexTensor) else nd.gelu(h)
    return _dense(h, stack[f"up{i}.w"], stack[f"up{i}.b"])


def inject(f_img: Tensor, p) -> Tensor:
    """Add an adapter output to a layer's tokens (both parts if complex)."""
    if p.shape != f_img.shape:
        raise DimensionError(f"adapter output {p.shape} does not match features {f_img.shape}")
    if isinstance(p, ComplexTensor):
        return nd.add(nd.add(f_img, p.re), p.im)
    return nd.add(f_img, p)
