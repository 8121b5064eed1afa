"""TOML run configuration with strict keys and full defaults."""

from __future__ import annotations

import copy
import sys
from dataclasses import fields

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .model.encoder import EncoderConfig
from .model.train import TrainConfig
from .wavelets import ConfigurationError

_DATA_DEFAULTS = {
    "task": "camouflage",
    "train": "",        # dataset directory; empty means generate
    "test": "",
    "seed": 1,
    "test_seed": 100_000,
    "n_train": 200,
    "n_test": 50,
    "size": 64,
    "source_task": "blobs",
    "source_seed": 10_000,
    "source_test_seed": 20_000,
    "n_source": 200,
    "n_source_test": 50,
}
_ANALYSIS_DEFAULTS = {"extractor_a": "hfreq", "extractor_b": "lfreq"}
_ABLATE_DEFAULTS = {"wavelet": "coif2", "seeds": [0, 1, 2]}

SECTIONS = ("encoder", "train", "pretrain", "data", "analysis", "ablate")


def _dc_defaults(cls) -> dict:
    d = cls().to_dict()
    return {f.name: d[f.name] for f in fields(cls)}


def defaults() -> dict:
    train = _dc_defaults(TrainConfig)
    train["is_complex"] = None  # follow the wavelet unless set
    pre = dict(train, adapter=False)
    return {
        "encoder": _dc_defaults(EncoderConfig),
        "train": train,
        "pretrain": pre,
        "data": dict(_DATA_DEFAULTS),
        "analysis": dict(_ANALYSIS_DEFAULTS),
        "ablate": copy.deepcopy(_ABLATE_DEFAULTS),
    }


def merge(doc: dict) -> dict:
    """Overlay a parsed document on the defaults; unknown keys are errors."""
    cfg = defaults()
    for section, values in doc.items():
        if section not in cfg:
            raise ConfigurationError(f"unknown config section [{section}]; expected one of {SECTIONS}")
        if not isinstance(values, dict):
            raise ConfigurationError(f"[{section}] must be a table")
        for key, value in values.items():
            if key not in cfg[section]:
                raise ConfigurationError(f"unknown key {key!r} in [{section}]")
            cfg[section][key] = value
    # None-valued fields cannot be written in TOML; "" stands for unset
    for section in ("train", "pretrain"):
        for key in ("extractor", "is_complex"):
            if cfg[section][key] == "":
                cfg[section][key] = None
    return cfg


def load(path=None) -> dict:
    if path is None:
        return merge({})
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
    return merge(doc)


def encoder_config(cfg: dict) -> EncoderConfig:
    try:
        return EncoderConfig(**cfg["encoder"])
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"[encoder]: {exc}") from None


def train_config(cfg: dict, section: str = "train") -> TrainConfig:
    try:
        return TrainConfig(**cfg[section])
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"[{section}]: {exc}") from None
