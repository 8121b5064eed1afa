"""Pure-numpy versions of the periodic filtering loops.

Same contracts as the compiled module: inputs are C-contiguous float64
2-D arrays filtered along axis 0. Taps are accumulated in index order so
results do not depend on the output position.
"""

import numpy as np


def analysis(x, lo, hi):
    n = x.shape[0]
    base = 2 * np.arange(n // 2)
    lo_out = np.zeros((n // 2, x.shape[1]))
    hi_out = np.zeros((n // 2, x.shape[1]))
    for k, w in enumerate(lo):
        lo_out += w * x[(base + k) % n]
    for k, w in enumerate(hi):
        hi_out += w * x[(base + k) % n]
    return lo_out, hi_out


def synthesis(c_lo, c_hi, rec_lo, rec_hi):
    half, m = c_lo.shape
    n = 2 * half
    base = 2 * np.arange(half)
    out = np.zeros((n, m))
    # within one tap the targets (2i + const) % n are distinct
    for k, w in enumerate(rec_lo):
        out[(base + len(rec_lo) - 1 - k) % n] += w * c_lo
    for k, w in enumerate(rec_hi):
        out[(base + len(rec_hi) - 1 - k) % n] += w * c_hi
    return out


def circular_filter(x, h):
    n = x.shape[0]
    c = (len(h) - 1) // 2
    rows = np.arange(n)
    out = np.zeros_like(x, dtype=np.float64)
    for k, w in enumerate(h):
        out += w * x[(rows + k - c) % n]
    return out
