"""Raster primitives: PNG-backed I/O, binarization, component labeling.

Pages are plain 2D numpy arrays: bool for binary images (True = foreground
ink after inversion), non-negative integers for per-pixel line labels
(0 = background). Binary pages are stored as 8-bit grayscale PNG with
foreground = 255; label rasters as 16-bit grayscale PNG. All functions are
pure and never mutate their inputs.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.ndimage as ndi
from PIL import Image, UnidentifiedImageError
from skimage.filters import threshold_otsu, threshold_sauvola

from .errors import LabelRangeError, RasterFormatError
from .validation import check_binary_image, check_gray_image, check_label_image

__all__ = [
    "LABEL_MAX",
    "Component",
    "binarize",
    "binary_from_png_bytes",
    "binary_to_png_bytes",
    "connected_components",
    "label_components",
    "load_binary",
    "load_gray",
    "load_label_raster",
    "save_binary",
    "write_label_raster",
]

LABEL_MAX = 0xFFFF

_STRUCTURES = {
    4: ndi.generate_binary_structure(2, 1),
    8: ndi.generate_binary_structure(2, 2),
}


@dataclass(frozen=True, eq=False)
class Component:
    """A maximal set of mutually connected foreground pixels.

    ``pixels`` is an (n, 2) int array of (x, y) coordinates in raster order;
    ``bbox`` is inclusive (x0, y0, x1, y1).
    """

    id: int
    pixels: np.ndarray
    bbox: tuple[int, int, int, int]
    area: int
    centroid: tuple[float, float]


def _open_image(path) -> Image.Image:
    try:
        with Image.open(path) as im:
            im.load()
            return im
    except (UnidentifiedImageError, OSError) as exc:
        raise RasterFormatError(f"cannot read image {path}: {exc}") from exc


def _binary_from_image(im: Image.Image, origin: str) -> np.ndarray:
    if im.mode != "L":
        raise RasterFormatError(
            f"{origin}: expected 8-bit single-channel grayscale, got mode {im.mode!r}"
        )
    return np.asarray(im, dtype=np.uint8) >= 128


def load_gray(path) -> np.ndarray:
    """Load an 8-bit grayscale PNG as a uint8 array."""
    im = _open_image(path)
    if im.mode != "L":
        raise RasterFormatError(
            f"{path}: expected 8-bit single-channel grayscale, got mode {im.mode!r}"
        )
    return np.asarray(im, dtype=np.uint8)


def load_binary(path) -> np.ndarray:
    """Load an 8-bit grayscale PNG as a binary page (value >= 128 -> foreground)."""
    return _binary_from_image(_open_image(path), str(path))


def save_binary(img, path) -> None:
    """Write a binary page as 8-bit grayscale PNG, foreground = 255."""
    img = check_binary_image(img)
    Image.fromarray(np.where(img, 255, 0).astype(np.uint8)).save(Path(path), format="PNG")


def binary_to_png_bytes(img) -> bytes:
    """Encode a binary page to in-memory PNG (the predictor wire format)."""
    img = check_binary_image(img)
    buf = io.BytesIO()
    Image.fromarray(np.where(img, 255, 0).astype(np.uint8)).save(buf, format="PNG")
    return buf.getvalue()


def binary_from_png_bytes(data: bytes, origin: str = "<bytes>") -> np.ndarray:
    """Decode an in-memory PNG to a binary page."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
    except (UnidentifiedImageError, OSError) as exc:
        raise RasterFormatError(f"cannot decode PNG from {origin}: {exc}") from exc
    return _binary_from_image(im, origin)


def load_label_raster(path) -> np.ndarray:
    """Load a 16-bit grayscale PNG as an int32 label raster."""
    im = _open_image(path)
    if im.mode not in ("I", "I;16", "I;16B", "I;16L"):
        raise RasterFormatError(
            f"{path}: expected 16-bit single-channel grayscale, got mode {im.mode!r}"
        )
    arr = np.asarray(im)
    if arr.ndim != 2 or arr.min() < 0 or arr.max() > LABEL_MAX:
        raise RasterFormatError(f"{path}: label values outside the 16-bit range")
    return arr.astype(np.int32)


def write_label_raster(labels, path) -> None:
    """Write a label raster as 16-bit grayscale PNG; ids must fit in 16 bits."""
    labels = check_label_image(labels)
    top = int(labels.max()) if labels.size else 0
    if top > LABEL_MAX:
        raise LabelRangeError(f"label id {top} exceeds {LABEL_MAX}")
    Image.fromarray(labels.astype(np.uint16)).save(Path(path), format="PNG")


def binarize(gray, method: str = "otsu", *, window: int = 31, k: float = 0.2) -> np.ndarray:
    """Threshold a grayscale page so ink becomes foreground True.

    ``otsu`` is a global threshold, ``sauvola`` a local one (odd ``window``,
    weight ``k``). A constant page yields all background.
    """
    gray = check_gray_image(gray)
    if gray.min() == gray.max():
        return np.zeros(gray.shape, dtype=bool)
    if method == "otsu":
        return gray <= threshold_otsu(gray)
    if method == "sauvola":
        if window < 3 or window % 2 == 0:
            raise ValueError(f"sauvola window must be odd and >= 3, got {window}")
        return gray < threshold_sauvola(gray, window_size=window, k=k)
    raise ValueError(f"unknown binarization method {method!r}")


def label_components(img, connectivity: int = 8) -> np.ndarray:
    """Label connected foreground regions 1..K, background 0.

    Ids are assigned in raster order of each component's first foreground
    pixel, so the labeling is deterministic across runs and platforms.
    """
    img = check_binary_image(img)
    if connectivity not in _STRUCTURES:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    raw, count = ndi.label(img, structure=_STRUCTURES[connectivity])
    raw = raw.astype(np.int32, copy=False)
    if count == 0:
        return raw
    flat = raw.ravel()
    fg = np.flatnonzero(flat)
    ids, first = np.unique(flat[fg], return_index=True)
    remap = np.zeros(count + 1, dtype=np.int32)
    remap[ids[np.argsort(first)]] = np.arange(1, count + 1, dtype=np.int32)
    return remap[raw]


def connected_components(img, connectivity: int = 8) -> list[Component]:
    """Extract components partitioning the foreground, in deterministic id order."""
    lab = label_components(img, connectivity)
    count = int(lab.max())
    if count == 0:
        return []
    ys, xs = np.nonzero(lab)
    vals = lab[ys, xs]
    order = np.argsort(vals, kind="stable")
    ys, xs, vals = ys[order], xs[order], vals[order]
    ids = np.arange(1, count + 1)
    lo = np.searchsorted(vals, ids, side="left")
    hi = np.searchsorted(vals, ids, side="right")
    comps = []
    for cid, a, b in zip(ids, lo, hi):
        cx = xs[a:b]
        cy = ys[a:b]
        comps.append(
            Component(
                id=int(cid),
                pixels=np.column_stack([cx, cy]).astype(np.int32),
                bbox=(int(cx.min()), int(cy.min()), int(cx.max()), int(cy.max())),
                area=int(b - a),
                centroid=(float(cx.mean()), float(cy.mean())),
            )
        )
    return comps
