"""Checkpoint directories: one WVT1 file per tensor plus ``manifest.json``."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..adapters import AdapterConfig, AdapterStack
from ..ndtensor import ComplexTensor, Tensor, wvt1
from .decoder import DecoderConfig, DecoderState
from .encoder import EncoderConfig, EncoderState
from .train import SamwaveModel, TrainConfig

MANIFEST = "manifest.json"
FORMAT = "samwave-ckpt-1"


class CheckpointError(RuntimeError):
    """Missing, incomplete or inconsistent checkpoint."""


def _write_tensors(d: Path, prefix: str, tensors: dict, table: dict) -> None:
    for name, t in tensors.items():
        fname = f"{prefix}{name}.wvt1"
        wvt1.save(d / fname, t.data)
        table[prefix + name] = fname


def _read(d: Path, table: dict, key: str) -> np.ndarray:
    if key not in table:
        raise CheckpointError(f"checkpoint {d} lacks tensor {key!r}")
    path = d / table[key]
    if not path.is_file():
        raise CheckpointError(f"missing tensor file {path}")
    return wvt1.load(path)


def _manifest(d: Path) -> dict:
    p = d / MANIFEST
    if not p.is_file():
        raise CheckpointError(f"no checkpoint at {d} (missing {MANIFEST})")
    m = json.loads(p.read_text())
    if m.get("format") != FORMAT:
        raise CheckpointError(f"{p} is not a {FORMAT} manifest")
    return m


def save_encoder(enc: EncoderState, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    table: dict = {}
    _write_tensors(d, "encoder.", enc.params, table)
    manifest = {"format": FORMAT, "kind": "encoder", "encoder": enc.config.to_dict(),
                "frozen": enc.frozen, "digest": enc.digest(), "tensors": table}
    (d / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return d


def _load_encoder(d: Path, m: dict) -> EncoderState:
    cfg = EncoderConfig(**m["encoder"])
    names = [k[len("encoder."):] for k in m["tensors"] if k.startswith("encoder.")]
    params = {n: Tensor(_read(d, m["tensors"], "encoder." + n)) for n in names}
    enc = EncoderState(cfg, params, frozen=False)
    if m.get("frozen", True):
        enc.freeze()
    return enc


def load_encoder(directory) -> EncoderState:
    d = Path(directory)
    m = _manifest(d)
    enc = _load_encoder(d, m)
    if m.get("digest") and enc.digest() != m["digest"]:
        raise CheckpointError(f"encoder tensors in {d} do not match the recorded digest")
    return enc


def save_model(model: SamwaveModel, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    table: dict = {}
    _write_tensors(d, "encoder.", model.encoder.params, table)
    _write_tensors(d, "decoder.", model.decoder.params, table)
    manifest = {
        "format": FORMAT, "kind": "model",
        "encoder": model.encoder.config.to_dict(), "frozen": model.encoder.frozen,
        "digest": model.encoder.digest(),
        "decoder": model.decoder.config.to_dict(),
        "train": model.config.to_dict(),
        "adapters": None, "is_complex": {},
    }
    if model.adapters is not None:
        _write_tensors(d, "adapters.", model.adapters.named_tensors(), table)
        manifest["adapters"] = model.adapters.config.to_dict()
        manifest["is_complex"] = model.adapters.complex_flags()
    manifest["tensors"] = table
    (d / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return d


def load_model(directory) -> SamwaveModel:
    d = Path(directory)
    m = _manifest(d)
    if m.get("kind") != "model":
        raise CheckpointError(f"{d} holds a {m.get('kind')!r} checkpoint, not a model")
    table = m["tensors"]
    enc = _load_encoder(d, m)
    dcfg = m["decoder"]
    dcfg["hidden"] = tuple(dcfg["hidden"])
    dec_cfg = DecoderConfig(**dcfg)
    dec_names = [k[len("decoder."):] for k in table if k.startswith("decoder.")]
    dec = DecoderState(dec_cfg, {n: Tensor(_read(d, table, "decoder." + n)) for n in dec_names})
    adapters = None
    if m.get("adapters"):
        acfg = AdapterConfig(**m["adapters"])
        params = {}
        for name, cplx in m["is_complex"].items():
            key = "adapters." + name
            if cplx:
                params[name] = ComplexTensor(Tensor(_read(d, table, key + ".re")),
                                             Tensor(_read(d, table, key + ".im")))
            else:
                params[name] = Tensor(_read(d, table, key))
        adapters = AdapterStack(acfg, params)
    tc = dict(m["train"])
    cfg = TrainConfig(**tc)
    return SamwaveModel(enc, dec, adapters, cfg)
