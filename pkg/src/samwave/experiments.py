"""Controlled comparisons: extractor deltas and the subband ablation."""

from __future__ import annotations

import time
from dataclasses import replace

import numpy as np

from .freqfeat import resolve_wavelet
from .model.train import TrainConfig, adapt_train, evaluate
from .ndtensor import ContractError
from .objectives import METRIC_KEYS
from .wavelets import SUBBANDS, ConfigurationError

FOURIER_EXTRACTORS = ("hfreq", "lfreq")

ABLATION_VARIANTS = (
    ("decoder-only", None),
    ("LL", ("ll",)),
    ("HL", ("hl",)),
    ("LH", ("lh",)),
    ("HH", ("hh",)),
    ("HL+LH+HH", ("hl", "lh", "hh")),
)


def with_extractor(cfg: TrainConfig, name: str) -> TrainConfig:
    """``cfg`` with its high-frequency extractor swapped for ``name``."""
    key = str(name).strip().lower()
    if key in FOURIER_EXTRACTORS:
        return replace(cfg, extractor=key, is_complex=False, adapter=True)
    canon, is_complex = resolve_wavelet(key)
    return replace(cfg, extractor=None, wavelet_name=canon, is_complex=is_complex, adapter=True)


def _controlled(cfg: TrainConfig) -> dict:
    d = cfg.to_dict()
    for k in ("extractor", "wavelet_name", "is_complex", "bands"):
        d.pop(k)
    return d


def run_variant(train, test, encoder, cfg: TrainConfig) -> dict:
    t0 = time.perf_counter()
    result = adapt_train(train, encoder, cfg)
    scores = evaluate(result.model, test)
    scores["seconds"] = time.perf_counter() - t0
    return scores


def freq_analysis(train, test, encoder, extractor_a: str, extractor_b: str, train_cfg: TrainConfig,
                  train_cfg_b: TrainConfig | None = None, dataset_name: str | None = None) -> dict:
    """Two adaptation runs that differ only in the extractor; per-metric deltas.

    ``delta = value_a - value_b``. Passing ``train_cfg_b`` lets callers
    supply the second leg explicitly; any difference other than the
    extractor is rejected.
    """
    cfg_a = with_extractor(train_cfg, extractor_a)
    cfg_b = with_extractor(train_cfg_b or train_cfg, extractor_b)
    if _controlled(cfg_a) != _controlled(cfg_b):
        raise ContractError("freq_analysis legs differ in more than the extractor")
    a = run_variant(train, test, encoder, cfg_a)
    b = run_variant(train, test, encoder, cfg_b)
    name = dataset_name or getattr(test, "task", "dataset")
    rows = [{"dataset": name, "metric": k, "value_a": a[k], "value_b": b[k], "delta": a[k] - b[k]}
            for k in METRIC_KEYS]
    return {
        "extractor_a": extractor_a, "extractor_b": extractor_b,
        "rows": rows,
        "mean_abs_delta": float(np.mean([abs(r["delta"]) for r in rows])),
        "config": cfg_a.to_dict(),
    }


def _check_bands(bands) -> tuple:
    bands = tuple(str(b).lower() for b in bands)
    if not bands or len(set(bands)) != len(bands) or any(b not in SUBBANDS for b in bands):
        raise ConfigurationError(f"invalid subband combination {list(bands)!r}")
    return bands


def ablate(train, test, encoder, cfg: TrainConfig, wavelet: str = "coif2", seeds=(0,),
           variants=ABLATION_VARIANTS, progress=None) -> dict:
    """Subband-selection ablation plus a decoder-only baseline, per seed."""
    canon, is_complex = resolve_wavelet(wavelet)
    if is_complex:
        raise ConfigurationError("subband selection needs a real wavelet")
    checked = [(name, None if bands is None else _check_bands(bands)) for name, bands in variants]
    rows = []
    for name, bands in checked:
        per_seed = []
        for seed in seeds:
            if bands is None:
                vcfg = replace(cfg, seed=seed, adapter=False, extractor=None, is_complex=False)
            else:
                vcfg = replace(cfg, seed=seed, adapter=True, extractor=None, wavelet_name=canon,
                               is_complex=False, bands=bands)
            scores = run_variant(train, test, encoder, vcfg)
            per_seed.append({"seed": seed, **scores})
            if progress is not None:
                progress(name, seed, scores)
        median = {k: float(np.median([r[k] for r in per_seed])) for k in METRIC_KEYS}
        rows.append({"variant": name, "bands": list(bands) if bands else [], "per_seed": per_seed,
                     "median": median})
    schedule = _controlled(cfg)
    schedule.pop("seed")
    schedule.pop("adapter")
    return {"wavelet": canon, "seeds": list(seeds), "schedule": schedule, "rows": rows}
