"""Dataset directories: PNG images, 1-bit PNG masks and a checksummed manifest."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
from PIL import Image

from .generators import SynthDataset

MANIFEST = "manifest.json"


class IntegrityError(RuntimeError):
    """A dataset file is missing or does not match its recorded checksum."""


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def save_image(path, image: np.ndarray) -> None:
    arr = np.clip(np.round(np.asarray(image) * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr, "RGB").save(path, optimize=False)


def load_image(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0


def save_mask(path, mask: np.ndarray) -> None:
    Image.fromarray(np.asarray(mask).astype(bool)).convert("1").save(path, optimize=False)


def load_mask(path) -> np.ndarray:
    with Image.open(path) as im:
        return (np.asarray(im.convert("L")) > 127).astype(np.uint8)


def save_dataset(ds: SynthDataset, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = []
    for i, (img, gt) in enumerate(zip(ds.images, ds.gts)):
        ip, gp = d / f"img_{i:04d}.png", d / f"gt_{i:04d}.png"
        save_image(ip, img)
        save_mask(gp, gt)
        files.append({"image": ip.name, "gt": gp.name,
                      "image_sha256": _sha256(ip), "gt_sha256": _sha256(gp)})
    manifest = {"task": ds.task, "seed": ds.seed, "n": len(ds), "size": ds.size,
                "meta": ds.meta, "files": files}
    (d / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")
    return d


def load_dataset(directory) -> SynthDataset:
    d = Path(directory)
    mpath = d / MANIFEST
    if not mpath.is_file():
        raise IntegrityError(f"no {MANIFEST} in {d}")
    manifest = json.loads(mpath.read_text())
    images, gts = [], []
    for entry in manifest["files"]:
        for key in ("image", "gt"):
            p = d / entry[key]
            if not p.is_file():
                raise IntegrityError(f"missing dataset file {p}")
            if _sha256(p) != entry[key + "_sha256"]:
                raise IntegrityError(f"checksum mismatch for {p}")
        images.append(load_image(d / entry["image"]))
        gts.append(load_mask(d / entry["gt"]))
    if len(images) != manifest["n"]:
        raise IntegrityError(f"manifest says n={manifest['n']} but lists {len(images)} pairs")
    return SynthDataset(manifest["task"], manifest["seed"], manifest["size"],
                        np.stack(images), np.stack(gts), manifest.get("meta", {}))
