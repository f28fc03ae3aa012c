"""Bit-exact JSON encoding for numpy arrays (base64 of little-endian buffers)."""

from __future__ import annotations

import base64

import numpy as np

_DTYPES = {"f8": np.dtype("<f8"), "i8": np.dtype("<i8")}


def array_to_json(arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(arr)
    if arr.dtype.kind == "f":
        dtype = "f8"
    elif arr.dtype.kind in "iu":
        dtype = "i8"
    else:
        raise TypeError(f"unsupported dtype {arr.dtype}")
    data = arr.astype(_DTYPES[dtype], copy=False).tobytes(order="C")
    return {
        "dtype": dtype,
        "shape": list(arr.shape),
        "data": base64.b64encode(data).decode("ascii"),
    }


def array_from_json(obj: dict) -> np.ndarray:
    raw = base64.b64decode(obj["data"])
    arr = np.frombuffer(raw, dtype=_DTYPES[obj["dtype"]]).copy()
    return arr.reshape(obj["shape"])
