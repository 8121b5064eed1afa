"""Segmentation losses (differentiable) and evaluation metrics (numpy)."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import ndtensor as nd
from .ndtensor import DimensionError, Tensor

log = logging.getLogger(__name__)

EPS_CLIP = 1e-7
ZETA_EPS = 1e-6
THRESHOLD = 0.5
AUC_THRESHOLDS = np.arange(256) / 255.0

LOSSES = ("bce", "bbce", "iou", "cod")


def _pair(pred, gt) -> tuple[Tensor, np.ndarray]:
    p = pred if isinstance(pred, Tensor) else Tensor(pred)
    g = np.asarray(gt, dtype=p.dtype)
    if p.shape != g.shape:
        raise DimensionError(f"prediction {p.shape} and ground truth {g.shape} differ in shape")
    return p, g


def _batched(p: Tensor, g: np.ndarray):
    # [H, W] -> [1, H*W]; [B, H, W] -> [B, H*W]
    if p.ndim <= 2:
        n = p.size
        return nd.reshape(p, (1, n)), g.reshape(1, n)
    b = p.shape[0]
    return nd.reshape(p, (b, -1)), g.reshape(b, -1)


def _pixel_bce(p: Tensor, g: np.ndarray, pos_w=1.0, neg_w=1.0) -> Tensor:
    pc = nd.clip(p, EPS_CLIP, 1.0 - EPS_CLIP)
    pos = nd.mul(nd.log(pc), g * pos_w)
    neg = nd.mul(nd.log(nd.sub(1.0, pc)), (1.0 - g) * neg_w)
    return nd.mul(nd.add(pos, neg), -1.0)


def bce(pred, gt) -> Tensor:
    """Mean binary cross-entropy over all pixels (predictions clamped)."""
    p, g = _pair(pred, gt)
    return nd.mean(_pixel_bce(p, g))


def zeta(gt, eps: float = ZETA_EPS) -> float:
    g = np.asarray(gt, dtype=np.float64)
    pos = g.sum()
    return float((pos + eps) / (pos + (1.0 - g).sum() + eps))


def bbce(pred, gt, eps: float = ZETA_EPS, per_term_balanced: bool = False) -> Tensor:
    """Balanced BCE, averaged over images.

    Default: each image's mean BCE scaled by its positive fraction ``zeta``.
    ``per_term_balanced`` instead weights positive pixels by ``1 - zeta`` and
    negative pixels by ``zeta``.
    """
    p, g = _pair(pred, gt)
    pb, gb = _batched(p, g)
    z = np.array([zeta(row, eps) for row in gb], dtype=gb.dtype)
    if np.any(gb.sum(axis=1) == 0):
        log.warning("bbce: ground truth with no positive pixels; the balancing factor is ~0")
    if per_term_balanced:
        terms = _pixel_bce(pb, gb, pos_w=(1.0 - z)[:, None], neg_w=z[:, None])
        return nd.mean(terms)
    per_image = nd.mean(_pixel_bce(pb, gb), axis=1)
    return nd.mean(nd.mul(per_image, z))


def iou_loss(pred, gt) -> Tensor:
    """Soft IoU complement per image, averaged; two empty masks give 0."""
    p, g = _pair(pred, gt)
    pb, gb = _batched(p, g)
    inter = nd.sum_(nd.mul(pb, gb), axis=1)
    total = nd.add(nd.sum_(pb, axis=1), gb.sum(axis=1))
    union = nd.sub(total, inter)
    empty = union.data <= 0
    if np.any(empty):
        # 0/0: perfect-empty convention, loss 0 with zero gradient
        safe = nd.add(union, empty.astype(union.dtype))
        ratio = nd.div(nd.add(inter, empty.astype(union.dtype)), safe)
    else:
        ratio = nd.div(inter, union)
    return nd.mean(nd.sub(1.0, ratio))


def combined_cod_loss(pred, gt, eps: float = ZETA_EPS) -> Tensor:
    return nd.add(bbce(pred, gt, eps), iou_loss(pred, gt))


def task_loss(name: str, pred, gt) -> Tensor:
    if name == "bce":
        return bce(pred, gt)
    if name == "bbce":
        return bbce(pred, gt)
    if name == "iou":
        return iou_loss(pred, gt)
    if name == "cod":
        return combined_cod_loss(pred, gt)
    raise ValueError(f"unknown loss {name!r}; choose from {LOSSES}")


# metrics ------------------------------------------------------------------


def _ratio(num: float, den: float) -> float:
    return 1.0 if den == 0 else num / den


def confusion(pred, gt, threshold: float = THRESHOLD) -> tuple[int, int, int, int]:
    p = np.asarray(pred) >= threshold
    g = np.asarray(gt) >= 0.5
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = int(np.count_nonzero(~p & ~g))
    return tp, fp, fn, tn


def metrics(pred, gt, threshold: float = THRESHOLD) -> dict[str, float]:
    """Per-image mae/ber/dice/iou/f1; 0/0 ratios count as perfect."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise DimensionError(f"prediction {pred.shape} and ground truth {gt.shape} differ in shape")
    tp, fp, fn, tn = confusion(pred, gt, threshold)
    dice = _ratio(2 * tp, 2 * tp + fp + fn)
    return {
        "mae": float(np.mean(np.abs(pred - gt))),
        "ber": 100.0 * (1.0 - 0.5 * (_ratio(tp, tp + fn) + _ratio(tn, tn + fp))),
        "dice": dice,
        "iou": _ratio(tp, tp + fp + fn),
        "f1": dice,
    }


def auc(pred, gt) -> float:
    """Trapezoidal ROC area over thresholds k/255 plus the (0,0)/(1,1) ends.

    An image with a single class has no ROC; it scores 1.
    """
    p = np.asarray(pred, dtype=np.float64).ravel()
    g = np.asarray(gt).ravel() >= 0.5
    npos = int(g.sum())
    nneg = g.size - npos
    if npos == 0 or nneg == 0:
        return 1.0
    above = p[None, :] >= AUC_THRESHOLDS[::-1, None]
    tpr = (above & g).sum(axis=1) / npos
    fpr = (above & ~g).sum(axis=1) / nneg
    fpr = np.concatenate([[0.0], fpr, [1.0]])
    tpr = np.concatenate([[0.0], tpr, [1.0]])
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1])) / 2.0)


METRIC_KEYS = ("mae", "ber", "mdice", "miou", "f1", "auc")


def aggregate(preds, gts) -> dict[str, float]:
    """Dataset means of per-image metrics, summed in index order."""
    rows = []
    for p, g in zip(preds, gts):
        m = metrics(p, g)
        m["auc"] = auc(p, g)
        rows.append(m)
    if not rows:
        raise ValueError("empty dataset")
    n = len(rows)

    def avg(key):
        total = 0.0
        for r in rows:
            total += r[key]
        return total / n

    return {
        "mae": avg("mae"), "ber": avg("ber"), "mdice": avg("dice"),
        "miou": avg("iou"), "f1": avg("f1"), "auc": avg("auc"),
    }


@dataclass
class MetricsReport:
    datasets: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    seed: int | None = None

    def add(self, name: str, preds, gts) -> dict:
        row = {"name": name, "n_images": len(gts), **aggregate(preds, gts)}
        self.datasets.append(row)
        return row

    def to_dict(self) -> dict:
        return {"datasets": self.datasets, "config": self.config, "seed": self.seed}

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text
