import json
import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from samwave import ndtensor as nd
from samwave.ndtensor import DimensionError, Tensor, grad_check
from samwave.objectives import (
    METRIC_KEYS, MetricsReport, aggregate, auc, bbce, bce, combined_cod_loss, confusion, iou_loss, metrics,
    task_loss, zeta,
)


def brute_metrics(pred, gt):
    """Pixel-counting oracle written with plain loops."""
    tp = fp = fn = tn = 0
    abs_err = 0.0
    h, w = gt.shape
    for i in range(h):
        for j in range(w):
            p, g = pred[i, j] >= 0.5, gt[i, j] >= 0.5
            abs_err += abs(float(pred[i, j]) - float(gt[i, j]))
            tp += p and g
            fp += p and not g
            fn += (not p) and g
            tn += (not p) and not g

    def r(a, b):
        return 1.0 if b == 0 else a / b

    dice = r(2 * tp, 2 * tp + fp + fn)
    return (tp, fp, fn, tn), {
        "mae": abs_err / (h * w),
        "ber": 100 * (1 - 0.5 * (r(tp, tp + fn) + r(tn, tn + fp))),
        "dice": dice, "iou": r(tp, tp + fp + fn), "f1": dice,
    }


def brute_auc(pred, gt):
    pos = [p for p, g in zip(pred.ravel(), gt.ravel()) if g]
    neg = [p for p, g in zip(pred.ravel(), gt.ravel()) if not g]
    if not pos or not neg:
        return 1.0
    pts = [(0.0, 0.0)]
    for k in range(255, -1, -1):
        t = k / 255
        pts.append((sum(p >= t for p in neg) / len(neg), sum(p >= t for p in pos) / len(pos)))
    pts.append((1.0, 1.0))
    return sum((x1 - x0) * (y0 + y1) / 2 for (x0, y0), (x1, y1) in zip(pts, pts[1:]))


# losses -------------------------------------------------------------------------


def test_bce_examples():
    gt = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert bce(gt, gt).item() <= 1e-6
    assert abs(bce(np.full((2, 2), 0.5), gt).item() - math.log(2)) <= 1e-9
    assert abs(bce(np.array([0.25]), np.array([1.0])).item() - 1.386294) <= 1e-6


def test_shape_mismatch():
    for fn in (bce, bbce, iou_loss, combined_cod_loss):
        with pytest.raises(DimensionError):
            fn(np.zeros((2, 2)), np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        metrics(np.zeros((2, 2)), np.zeros(4))


def test_zeta_examples():
    assert zeta(np.ones((3, 3))) == 1.0
    assert abs(zeta(np.array([1, 1, 1, 0]), 1e-6) - 0.750000) <= 1e-6
    assert zeta(np.array([1, 1, 1, 0]), 1e-6) == (3 + 1e-6) / (4 + 1e-6)


def test_bbce_all_positive_equals_bce():
    pred = np.random.default_rng(0).uniform(0.05, 0.95, (4, 4))
    gt = np.ones((4, 4))
    assert abs(bbce(pred, gt).item() - bce(pred, gt).item()) <= 1e-12


def test_bbce_scales_by_zeta():
    rng = np.random.default_rng(1)
    pred = rng.uniform(0.05, 0.95, (3, 6, 6))
    gt = (rng.random((3, 6, 6)) > 0.6).astype(float)
    ref = np.mean([zeta(g) * bce(p, g).item() for p, g in zip(pred, gt)])
    assert abs(bbce(pred, gt).item() - ref) <= 1e-12


def test_bbce_empty_gt_is_degenerate_and_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="samwave.objectives"):
        v = bbce(np.full((4, 4), 0.3), np.zeros((4, 4))).item()
    assert v <= 1e-6
    assert any("no positive" in r.message for r in caplog.records)


def test_bbce_per_term_balanced():
    pred = np.array([[0.8, 0.3], [0.6, 0.1]])
    gt = np.array([[1.0, 0.0], [1.0, 0.0]])
    z = zeta(gt)
    ref = -np.mean(gt * (1 - z) * np.log(pred) + (1 - gt) * z * np.log(1 - pred))
    assert abs(bbce(pred, gt, per_term_balanced=True).item() - ref) <= 1e-12


def test_iou_loss_examples():
    gt = np.array([[1.0, 0.0], [1.0, 0.0]])
    assert iou_loss(gt, gt).item() == 0.0
    assert iou_loss(gt, 1 - gt).item() == 1.0
    assert abs(iou_loss(np.full((2, 2), 0.5), gt).item() - 2 / 3) <= 1e-12
    assert iou_loss(np.zeros((2, 2)), np.zeros((2, 2))).item() == 0.0


def test_combined_is_sum_and_perfect_is_zero():
    rng = np.random.default_rng(2)
    gt = (rng.random((2, 5, 5)) > 0.5).astype(float)
    pred = rng.uniform(0.01, 0.99, gt.shape)
    assert combined_cod_loss(pred, gt).item() == nd.add(bbce(pred, gt), iou_loss(pred, gt)).item()
    assert combined_cod_loss(gt, gt).item() <= 1e-6


@pytest.mark.parametrize("name", ["bce", "bbce", "iou", "cod"])
def test_loss_gradients(name):
    rng = np.random.default_rng(3)
    gt = (rng.random((2, 4, 4)) > 0.5).astype(float)
    logits = Tensor(rng.standard_normal(gt.shape), requires_grad=True)
    assert grad_check(lambda: task_loss(name, nd.sigmoid(logits), gt), [logits]) <= 1e-4


def test_unknown_loss():
    with pytest.raises(ValueError):
        task_loss("dice", np.zeros(2), np.zeros(2))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 16))
def test_losses_nonnegative_and_monotone_toward_gt(seed):
    rng = np.random.default_rng(seed)
    gt = (rng.random((5, 5)) > 0.5).astype(float)
    start = rng.uniform(0.0, 1.0, gt.shape)
    values = {"bce": [], "iou": []}
    for t in np.linspace(0, 1, 11):
        p = (1 - t) * start + t * gt
        values["bce"].append(bce(p, gt).item())
        values["iou"].append(iou_loss(p, gt).item())
        assert bbce(p, gt).item() >= 0 and combined_cod_loss(p, gt).item() >= 0
    for v in values.values():
        assert min(v) >= 0
        assert all(b <= a + 1e-12 for a, b in zip(v, v[1:]))
        assert v[-1] <= 1e-6


# metrics ------------------------------------------------------------------------


def test_perfect_and_inverted():
    gt = np.zeros((6, 6))
    gt[1:4, 2:5] = 1
    m = metrics(gt, gt)
    assert (m["mae"], m["ber"], m["dice"], m["iou"]) == (0.0, 0.0, 1.0, 1.0)
    assert auc(gt, gt) == 1.0
    m = metrics(1 - gt, gt)
    assert (m["ber"], m["dice"], m["iou"]) == (100.0, 0.0, 0.0)


def test_empty_class_conventions():
    z = np.zeros((4, 4))
    m = metrics(z, z)
    assert m["ber"] == 0.0 and m["iou"] == 1.0 and m["dice"] == 1.0
    assert auc(np.random.default_rng(0).random((4, 4)), z) == 1.0


def test_metric_oracle_1000_pairs():
    rng = np.random.default_rng(4)
    for k in range(1000):
        gt = (rng.random((16, 16)) > rng.uniform(0.05, 0.95)).astype(float)
        pred = rng.random((16, 16))
        if k % 3 == 0:
            pred = np.round(pred * 255) / 255  # exercise exact threshold ties
        counts, ref = brute_metrics(pred, gt)
        assert confusion(pred, gt) == counts
        got = metrics(pred, gt)
        for key in ref:
            assert abs(got[key] - ref[key]) <= 1e-12, key
        if k % 20 == 0:
            assert abs(auc(pred, gt) - brute_auc(pred, gt)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (6, 6), elements=st.floats(0, 1)), arrays(np.bool_, (6, 6)))
def test_metric_ranges_and_dice_ge_iou(pred, gt):
    m = metrics(pred, gt.astype(float))
    assert m["dice"] >= m["iou"] - 1e-15
    assert 0 <= m["mae"] <= 1 and 0 <= m["ber"] <= 100
    assert 0 <= m["iou"] <= 1 and 0 <= m["dice"] <= 1
    assert 0 <= auc(pred, gt) <= 1


def test_aggregate_is_mean_of_per_image():
    rng = np.random.default_rng(5)
    preds = rng.random((7, 8, 8))
    gts = (rng.random((7, 8, 8)) > 0.5).astype(np.uint8)
    agg = aggregate(preds, gts)
    assert set(agg) == set(METRIC_KEYS)
    per = [metrics(p, g) for p, g in zip(preds, gts)]
    assert abs(agg["miou"] - np.mean([m["iou"] for m in per])) <= 1e-15
    assert abs(agg["mdice"] - np.mean([m["dice"] for m in per])) <= 1e-15
    # order independence up to float summation
    perm = rng.permutation(7)
    assert abs(aggregate(preds[perm], gts[perm])["miou"] - agg["miou"]) <= 1e-12


def test_report_schema(tmp_path):
    rng = np.random.default_rng(6)
    report = MetricsReport(config={"a": 1}, seed=3)
    row = report.add("toy", rng.random((2, 4, 4)), (rng.random((2, 4, 4)) > 0.5))
    assert row["n_images"] == 2
    report.to_json(tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert set(doc) == {"datasets", "config", "seed"}
    assert set(doc["datasets"][0]) == {"name", "n_images", *METRIC_KEYS}
