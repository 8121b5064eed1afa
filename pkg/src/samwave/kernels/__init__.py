"""Periodic filtering kernels.

The compiled Cython module is used when it was built; otherwise the numpy
implementation is loaded. Set ``SAMWAVE_KERNELS=python`` to force the
fallback.
"""

import os

import numpy as np

if os.environ.get("SAMWAVE_KERNELS", "").lower() == "python":
    from . import _pykernels as _impl
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _pykernels as _impl
        BACKEND = "python"


def _prep(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def _taps(h):
    return np.ascontiguousarray(h, dtype=np.float64)


def analysis(x, lo, hi, impl=None):
    """Stride-2 periodic correlation along axis 0: ``out[i] = sum_k f[k] x[(2i+k) % N]``."""
    impl = impl or _impl
    return impl.analysis(_prep(x), _taps(lo), _taps(hi))


def synthesis(c_lo, c_hi, rec_lo, rec_hi, impl=None):
    """Adjoint-style upsampling synthesis matching :func:`analysis`."""
    impl = impl or _impl
    return impl.synthesis(_prep(c_lo), _prep(c_hi), _taps(rec_lo), _taps(rec_hi))


def circular_filter(x, h, impl=None):
    """Undecimated centred circular filtering along axis 0."""
    impl = impl or _impl
    return impl.circular_filter(_prep(x), _taps(h))


def backends():
    """Available implementations keyed by name."""
    from . import _pykernels

    found = {"python": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
