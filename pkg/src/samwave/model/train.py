"""Optimiser, pretraining and adaptation loops, prediction."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import ndtensor as nd
from ..adapters import AdapterConfig, AdapterStack
from ..freqfeat import WhfMap, fourier_filter, FreqMaskConfig, resolve_wavelet, whf_extract, DETAIL_BANDS
from ..ndtensor import ContractError, Tape, Tensor
from ..objectives import LOSSES, aggregate, task_loss
from ..wavelets import SUBBANDS, ConfigurationError
from ..synthdata import CounterRNG
from .decoder import DecoderConfig, DecoderState, decoder_forward
from .encoder import EncoderConfig, EncoderState, encoder_forward, patch_embed


@dataclass
class TrainConfig:
    seed: int = 0
    epochs: int = 20
    batch_size: int = 8
    lr: float = 1e-3
    weight_decay: float = 1e-4
    loss: str = "cod"
    wavelet_name: str = "haar"
    bands: tuple = DETAIL_BANDS
    adapter: bool = True
    is_complex: bool | None = None
    gamma: int = 16
    dtype: str = "f32"
    extractor: str | None = None
    fourier_tau: float = 0.25

    def __post_init__(self):
        self.bands = tuple(str(b).lower() for b in self.bands)
        if self.loss not in LOSSES:
            raise ConfigurationError(f"unknown loss {self.loss!r}; choose from {LOSSES}")
        if self.dtype not in ("f32", "f64"):
            raise ConfigurationError(f"dtype must be 'f32' or 'f64', got {self.dtype!r}")
        if self.extractor not in (None, "hfreq", "lfreq"):
            raise ConfigurationError(f"unknown extractor {self.extractor!r}")
        if not self.bands or any(b not in SUBBANDS for b in self.bands) or len(set(self.bands)) != len(self.bands):
            raise ConfigurationError(f"invalid subband combination {list(self.bands)!r}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigurationError("epochs and batch_size must be >= 1")
        resolve_wavelet(self.wavelet_name)
        if self.is_complex is None:
            self.is_complex = resolve_wavelet(self.wavelet_name)[1] if self.extractor is None else False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bands"] = list(self.bands)
        return d


class AdamW:
    """Adam with decoupled weight decay."""

    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8, weight_decay=1e-4):
        self.params = list(params)
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.wd = weight_decay
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self, lr: float | None = None) -> None:
        lr = self.lr if lr is None else lr
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            if p.grad is None:
                continue
            g = p.grad.astype(p.dtype, copy=False)
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            update = (m / c1) / (np.sqrt(v / c2) + self.eps) + self.wd * p.data
            p.data -= (lr * update).astype(p.dtype, copy=False)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None


def cosine_lr(step: int, total: int, base: float) -> float:
    if total <= 1:
        return base
    return 0.5 * base * (1.0 + math.cos(math.pi * min(step, total - 1) / (total - 1)))


def extract_features(images, cfg: TrainConfig) -> np.ndarray:
    """Per-image high-frequency maps for the configured extractor, ``[n, H, W, C]``."""
    out = []
    for img in images:
        if cfg.extractor in ("hfreq", "lfreq"):
            mode = "highpass" if cfg.extractor == "hfreq" else "lowpass"
            out.append(fourier_filter(img, FreqMaskConfig(cfg.fourier_tau, mode)))
            continue
        m: WhfMap = whf_extract(img, cfg.wavelet_name, cfg.bands)
        out.append(m.values if cfg.is_complex else m.real_part())
    return np.stack(out)


@dataclass(eq=False)
class SamwaveModel:
    encoder: EncoderState
    decoder: DecoderState
    adapters: AdapterStack | None
    config: TrainConfig

    def parameters(self) -> list[Tensor]:
        ps = self.decoder.parameters()
        if self.adapters is not None:
            ps = ps + self.adapters.parameters()
        return ps

    def features(self, images) -> np.ndarray | None:
        if self.adapters is None:
            return None
        return extract_features(images, self.config)

    def logits(self, images, whf=None, f_emb=None, tokens=None) -> Tensor:
        if tokens is None:
            out = encoder_forward(images, self.encoder, self.adapters, whf, f_emb)
            tokens = out["tokens"]
        return decoder_forward(tokens, self.decoder)


def _batches(n: int, batch: int, rng: CounterRNG):
    order = rng.permutation(n)
    return [order[i:i + batch] for i in range(0, n, batch)]


def _fit(model: SamwaveModel, params, images, gts, cfg: TrainConfig, train_encoder: bool,
         log_fn=None) -> list[dict]:
    n = len(images)
    rng = CounterRNG(cfg.seed + 1_000_003)
    steps_per_epoch = math.ceil(n / cfg.batch_size)
    total = cfg.epochs * steps_per_epoch
    opt = AdamW(params, cfg.lr, weight_decay=cfg.weight_decay)
    dt = np.float32 if cfg.dtype == "f32" else np.float64
    imgs = np.asarray(images, dtype=dt)
    targets = np.asarray(gts, dtype=dt)
    whf = model.features(images)
    if whf is not None:
        whf = whf.astype(np.complex64 if dt == np.float32 else np.complex128) if np.iscomplexobj(whf) \
            else whf.astype(dt)
    # the frozen parts of the forward pass are computed once
    f_emb_all = tokens_all = None
    if not train_encoder:
        f_emb_all = patch_embed(imgs, model.encoder).data
        if model.adapters is None:
            tokens_all = encoder_forward(imgs, model.encoder, f_emb=Tensor(f_emb_all))["tokens"].data
    log = []
    step = 0
    for epoch in range(cfg.epochs):
        for idx in _batches(n, cfg.batch_size, rng):
            lr = cosine_lr(step, total, cfg.lr)
            with Tape() as tape:
                if tokens_all is not None:
                    logits = model.logits(None, tokens=Tensor(tokens_all[idx]))
                elif f_emb_all is not None:
                    logits = model.logits(None, whf[idx] if whf is not None else None,
                                          f_emb=Tensor(f_emb_all[idx]))
                else:
                    logits = model.logits(imgs[idx], whf[idx] if whf is not None else None)
                loss = task_loss(cfg.loss, nd.sigmoid(logits), targets[idx])
            opt.zero_grad()
            tape.backward(loss)
            opt.step(lr)
            row = {"step": step, "epoch": epoch, "loss": float(loss.item()), "lr": lr}
            log.append(row)
            if log_fn is not None:
                log_fn(row)
            step += 1
    return log


@dataclass
class PretrainResult:
    encoder: EncoderState
    log: list = field(default_factory=list)
    source_metrics: dict | None = None


def pretrain_encoder(dataset, enc_cfg: EncoderConfig | None = None, cfg: TrainConfig | None = None,
                     holdout=None, log_fn=None) -> PretrainResult:
    """Train encoder and a throwaway decoder end-to-end, then freeze the encoder.

    With ``holdout`` the end-to-end model is scored on it before the
    decoder is discarded.
    """
    enc_cfg = enc_cfg or EncoderConfig()
    cfg = cfg or TrainConfig(adapter=False)
    if cfg.adapter:
        raise ContractError("pretraining trains no adapters; set adapter = false")
    gen = CounterRNG(cfg.seed).numpy_generator()
    enc = EncoderState.init(enc_cfg, gen, cfg.dtype)
    dec = DecoderState.init(DecoderConfig(enc_cfg.embed_dim, enc_cfg.grid, enc_cfg.image_size), gen, cfg.dtype)
    model = SamwaveModel(enc, dec, None, cfg)
    log = _fit(model, enc.parameters() + dec.parameters(), dataset.images, dataset.gts, cfg, True, log_fn)
    source = evaluate(model, holdout) if holdout is not None else None
    enc.freeze()
    return PretrainResult(enc, log, source)


def build_model(encoder: EncoderState, cfg: TrainConfig) -> SamwaveModel:
    ec = encoder.config
    gen = CounterRNG(cfg.seed).numpy_generator()
    dec = DecoderState.init(DecoderConfig(ec.embed_dim, ec.grid, ec.image_size), gen, cfg.dtype)
    adapters = None
    if cfg.adapter:
        acfg = AdapterConfig(gamma=cfg.gamma, num_layers=ec.depth, layer_channels=ec.embed_dim,
                             embed_dim=ec.embed_dim, is_complex=bool(cfg.is_complex),
                             patch_size=ec.patch_size, whf_channels=ec.in_channels)
        adapters = AdapterStack.init(acfg, gen, cfg.dtype)
    return SamwaveModel(encoder, dec, adapters, cfg)


@dataclass
class AdaptResult:
    model: SamwaveModel
    log: list = field(default_factory=list)
    seconds: float = 0.0


def adapt_train(dataset, encoder: EncoderState, cfg: TrainConfig, log_fn=None) -> AdaptResult:
    """Train decoder (+ adapters) on a frozen encoder."""
    if not encoder.frozen or any(p.requires_grad for p in encoder.parameters()):
        raise ContractError("adapt_train requires a frozen encoder")
    t0 = time.perf_counter()
    model = build_model(encoder, cfg)
    log = _fit(model, model.parameters(), dataset.images, dataset.gts, cfg, False, log_fn)
    return AdaptResult(model, log, time.perf_counter() - t0)


def predict_mask(images, model: SamwaveModel, batch_size: int = 16) -> np.ndarray:
    """Foreground probabilities ``[n, H, W]`` (or ``[H, W]`` for one image)."""
    x = np.asarray(images, dtype=np.float64)
    single = x.ndim == 3
    if single:
        x = x[None]
    dt = model.decoder.params["head.w"].dtype
    out = []
    for i in range(0, len(x), batch_size):
        chunk = x[i:i + batch_size]
        whf = model.features(chunk)
        if whf is not None and not np.iscomplexobj(whf):
            whf = whf.astype(dt)
        logits = model.logits(chunk.astype(dt), whf)
        out.append(nd.sigmoid(logits).data.astype(np.float64))
    probs = np.concatenate(out)
    return probs[0] if single else probs


def evaluate(model: SamwaveModel, dataset) -> dict:
    return aggregate(predict_mask(dataset.images, model), dataset.gts)
