"""Input validation helpers.

All public entry points funnel their array arguments through these checks,
mirroring the check_array idiom: coerce to the canonical dtype, validate
shape and value invariants, and return a clean 2D numpy array.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "check_binary_image",
    "check_gray_image",
    "check_label_image",
    "check_same_shape",
    "unit_vector",
]


def _as_2d(arr, name: str) -> np.ndarray:
    out = np.asarray(arr)
    if out.ndim != 2:
        raise ValueError(f"{name} must be a 2D array, got shape {out.shape}")
    if out.shape[0] < 1 or out.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {out.shape}")
    return out


def check_binary_image(img, name: str = "img") -> np.ndarray:
    """Validate a binary page; returns a 2D bool array (True = foreground)."""
    out = _as_2d(img, name)
    if out.dtype == bool:
        return out
    if np.issubdtype(out.dtype, np.integer):
        if out.min() < 0 or out.max() > 1:
            raise ValueError(f"{name} has non-binary integer values")
        return out.astype(bool)
    raise ValueError(f"{name} must be bool or 0/1 integers, got dtype {out.dtype}")


def check_gray_image(gray, name: str = "gray") -> np.ndarray:
    """Validate an 8-bit grayscale page; returns a 2D uint8 array."""
    out = _as_2d(gray, name)
    if out.dtype == np.uint8:
        return out
    if np.issubdtype(out.dtype, np.integer):
        if out.min() < 0 or out.max() > 255:
            raise ValueError(f"{name} values outside [0, 255]")
        return out.astype(np.uint8)
    raise ValueError(f"{name} must be 8-bit integers, got dtype {out.dtype}")


def check_label_image(labels, name: str = "labels") -> np.ndarray:
    """Validate a label raster (0 = background); returns a 2D int32 array."""
    out = _as_2d(labels, name)
    if not np.issubdtype(out.dtype, np.integer):
        raise ValueError(f"{name} must be an integer array, got dtype {out.dtype}")
    if out.size and out.min() < 0:
        raise ValueError(f"{name} contains negative label ids")
    return out.astype(np.int32, copy=False)


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "inputs") -> None:
    if a.shape != b.shape:
        raise ValueError(f"{what} must share dimensions: {a.shape} vs {b.shape}")


def unit_vector(v, name: str = "direction") -> np.ndarray:
    """Normalize a 2-vector to unit length; rejects the zero vector."""
    out = np.asarray(v, dtype=float).reshape(-1)
    if out.shape != (2,):
        raise ValueError(f"{name} must be a 2-vector")
    n = float(np.hypot(out[0], out[1]))
    if n == 0.0:
        raise ValueError(f"{name} must be non-zero")
    return out / n
