"""WVT1 binary tensor files.

Layout: ``b"WVT1"``, u8 dtype code (1 = f32, 2 = f64), u8 ndim,
ndim x u32 little-endian dims, then the row-major little-endian payload.
"""

from __future__ import annotations

import os
import struct

import numpy as np

MAGIC = b"WVT1"
_CODES = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_CODE_OF = {np.dtype(np.float32): 1, np.dtype(np.float64): 2}


class WVT1FormatError(ValueError):
    pass


def encode(array) -> bytes:
    arr = np.asarray(array)
    if arr.dtype not in _CODE_OF:
        arr = arr.astype(np.float64)
    code = _CODE_OF[arr.dtype]
    if arr.ndim > 255:
        raise WVT1FormatError("too many dimensions")
    head = MAGIC + struct.pack("<BB", code, arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape)
    return head + np.ascontiguousarray(arr, dtype=_CODES[code]).tobytes()


def decode(buf: bytes) -> np.ndarray:
    if len(buf) < 6 or buf[:4] != MAGIC:
        raise WVT1FormatError("bad magic; not a WVT1 tensor")
    code, ndim = struct.unpack_from("<BB", buf, 4)
    if code not in _CODES:
        raise WVT1FormatError(f"unknown dtype code {code}")
    off = 6 + 4 * ndim
    if len(buf) < off:
        raise WVT1FormatError("truncated header")
    dims = struct.unpack_from(f"<{ndim}I", buf, 6)
    dt = _CODES[code]
    n = int(np.prod(dims, dtype=np.int64)) if ndim else 1
    if len(buf) != off + n * dt.itemsize:
        raise WVT1FormatError(f"payload size mismatch: expected {n * dt.itemsize} bytes")
    arr = np.frombuffer(buf, dtype=dt, count=n, offset=off).reshape(dims)
    return arr.astype(dt.newbyteorder("="), copy=True)


def save(path: str | os.PathLike, array) -> None:
    with open(path, "wb") as fh:
        fh.write(encode(array))


def load(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode(fh.read())
