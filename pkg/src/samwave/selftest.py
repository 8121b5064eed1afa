"""Fast invariant checks behind ``samwave selftest``."""

from __future__ import annotations

import math

import numpy as np

from . import cwt, wavelets
from .adapters import AdapterConfig, AdapterStack, adapter_forward, adapter_input, embedding_tune, whf_tune
from .freqfeat import WAVELET_NAMES, whf_extract
from .kernels import backends
from .ndtensor import Tensor, grad_check, mean, mul
from .objectives import bce, confusion, iou_loss, metrics, zeta


def check_reconstruction():
    rng = np.random.default_rng(0)
    worst = 0.0
    for name in wavelets.SUPPORTED:
        for _ in range(10):
            x = rng.random((16, 16, 3))
            worst = max(worst, float(np.max(np.abs(wavelets.iwt2(wavelets.dwt2(x, name), name) - x))))
    return worst <= 1e-10, f"max reconstruction error {worst:.2e}"


def check_haar():
    bank = wavelets.filter_bank("haar")
    s = math.sqrt(0.5)
    err = max(np.max(np.abs(bank.dec_lo - [s, s])), np.max(np.abs(bank.dec_hi - [s, -s])))
    return err <= 1e-12, f"haar filter error {err:.2e}"


def check_energy():
    rng = np.random.default_rng(1)
    worst = 0.0
    for name in wavelets.SUPPORTED:
        x = rng.standard_normal((16, 16))
        sub = wavelets.dwt2(x, name)
        e = sum(float(np.sum(sub[b] ** 2)) for b in wavelets.SUBBANDS)
        worst = max(worst, abs(e - float(np.sum(x ** 2))) / float(np.sum(x ** 2)))
    return worst <= 1e-10, f"relative energy defect {worst:.2e}"


def check_whf_constant():
    img = np.full((16, 16, 3), 0.37)
    worst = 0.0
    for name in WAVELET_NAMES:
        m = whf_extract(img, name)
        if m.values.shape != img.shape:
            return False, f"{name}: output shape {m.values.shape}"
        worst = max(worst, float(np.max(np.abs(m.values))))
    return worst <= 1e-10, f"max constant-image response {worst:.2e}"


def check_dtcwt_shape():
    sub = cwt.dtcwt2_level1(np.random.default_rng(2).random((16, 16)), "sy-a")
    return sub.oriented.shape == (6, 8, 8), f"oriented shape {sub.oriented.shape}"


def check_losses():
    p = np.full((4, 4), 0.5)
    g = (np.arange(16).reshape(4, 4) % 2).astype(float)
    d1 = abs(bce(p, g).item() - math.log(2.0))
    d2 = abs(zeta(np.array([1, 1, 1, 0])) - 0.75)
    disjoint = iou_loss(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])).item()
    ok = d1 <= 1e-9 and d2 <= 1e-6 and disjoint == 1.0
    return ok, f"bce defect {d1:.1e}, zeta defect {d2:.1e}, disjoint iou loss {disjoint}"


def check_metrics():
    rng = np.random.default_rng(3)
    for _ in range(50):
        pred = rng.random((8, 8)) > 0.5
        gt = rng.random((8, 8)) > 0.5
        tp, fp, fn, tn = confusion(pred.astype(float), gt)
        if (tp, fp, fn, tn) != (int(np.sum(pred & gt)), int(np.sum(pred & ~gt)),
                                int(np.sum(~pred & gt)), int(np.sum(~pred & ~gt))):
            return False, "confusion counts disagree with brute force"
        m = metrics(pred.astype(float), gt)
        union = tp + fp + fn
        if union and abs(m["iou"] - tp / union) > 1e-12:
            return False, "iou disagrees with brute force"
    return True, "50 random mask pairs"


def check_adapter_gradients():
    cfg = AdapterConfig(gamma=2, num_layers=1, layer_channels=3, embed_dim=3, patch_size=2, whf_channels=1)
    stack = AdapterStack.init(cfg, np.random.default_rng(4))
    for i in range(cfg.num_layers):
        stack.params[f"up{i}.w"].data[:] = 0.1
    rng = np.random.default_rng(5)
    f_emb = Tensor(rng.standard_normal((1, 4, 3)))
    i_hf = rng.standard_normal((1, 4, 4, 1))

    def f():
        psi = adapter_input(embedding_tune(f_emb, stack), whf_tune(i_hf, stack))
        out = adapter_forward(0, psi, stack)
        return mean(mul(out, out))

    err = grad_check(f, stack.parameters())
    return err <= 1e-4, f"max relative gradient error {err:.2e}"


def check_backends():
    found = backends()
    x = np.random.default_rng(6).random((12, 5))
    h = np.array([0.1, 0.5, -0.3, 0.2])
    outs = [impl.circular_filter(np.ascontiguousarray(x), h) for impl in found.values()]
    err = max(float(np.max(np.abs(o - outs[0]))) for o in outs)
    return err <= 1e-12, f"backends {sorted(found)} agree to {err:.1e}"


CHECKS = (
    ("perfect reconstruction", check_reconstruction),
    ("haar filters", check_haar),
    ("energy conservation", check_energy),
    ("whf constant image", check_whf_constant),
    ("dt-cwt layout", check_dtcwt_shape),
    ("loss units", check_losses),
    ("metric oracle", check_metrics),
    ("adapter gradients", check_adapter_gradients),
    ("kernel backends", check_backends),
)


def run_all(verbose: bool = True) -> int:
    failures = 0
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # report, keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failures += not ok
        if verbose or not ok:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return failures
