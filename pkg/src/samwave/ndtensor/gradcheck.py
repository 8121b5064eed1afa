"""Finite-difference verification of tape gradients."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tape, Tensor, backward, parameters_of


def numeric_grad(f: Callable[[], Tensor], p: Tensor, h: float = 1e-5,
                 indices: np.ndarray | None = None) -> np.ndarray:
    """Central differences ``(f(p+h) - f(p-h)) / 2h`` for entries of ``p``."""
    flat = p.data.reshape(-1)
    idx = np.arange(flat.size) if indices is None else indices
    out = np.zeros(flat.size)
    for i in idx:
        orig = flat[i]
        flat[i] = orig + h
        fp = f().item()
        flat[i] = orig - h
        fm = f().item()
        flat[i] = orig
        out[i] = (fp - fm) / (2.0 * h)
    return out.reshape(p.shape)


def grad_check(f: Callable[[], Tensor], params: Sequence, h: float = 1e-5,
               max_entries: int | None = None, seed: int = 0) -> float:
    """Worst relative error between tape and central-difference gradients.

    ``f`` takes no arguments and returns a scalar built from ``params``
    (tensors or complex tensors; the real and imaginary parts of complex
    ones are checked separately). Per parameter the error is
    ``max|g_tape - g_fd| / max(max|g_tape|, 1e-8)``; the worst is returned.
    ``max_entries`` subsamples large parameters.
    """
    leaves = parameters_of(params)
    saved = [p.grad for p in leaves]
    flags = [p.requires_grad for p in leaves]
    for p in leaves:
        p.requires_grad = True
        p.grad = None
    try:
        with Tape() as tape:
            loss = f()
        backward(loss, tape, accumulate=False)
        analytic = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in leaves]
    finally:
        for p, g, fl in zip(leaves, saved, flags):
            p.grad = g
            p.requires_grad = fl

    rng = np.random.default_rng(seed)
    worst = 0.0
    for p, ga in zip(leaves, analytic):
        idx = None
        if max_entries is not None and p.size > max_entries:
            idx = np.sort(rng.choice(p.size, size=max_entries, replace=False))
        gn = numeric_grad(f, p, h, idx)
        ga = np.asarray(ga, dtype=np.float64).reshape(-1)
        gn = gn.reshape(-1)
        if idx is not None:
            ga, gn = ga[idx], gn[idx]
        denom = max(float(np.max(np.abs(ga))) if ga.size else 0.0, 1e-8)
        err = float(np.max(np.abs(ga - gn))) / denom if ga.size else 0.0
        worst = max(worst, err)
    return worst
