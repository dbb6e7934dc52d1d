"""Patch sampling and sliding-window prediction with central-core stitching.

Prediction slides a window over the page in steps of the core size and keeps
only each window's central core block, so the cores tile the page exactly
once. The page is first padded on all four sides by (window - core) / 2
background pixels, then on the right/bottom up to a multiple of the core.
Predictors are pluggable: a callable patch -> mask, an object with
``predict(patch)``, or one with ``predict_window(patch, origin)`` when the
window's position (original-page coordinates) matters.
"""

from __future__ import annotations

import math
import shlex
import struct
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import PredictorContractError
from .raster import binary_from_png_bytes, binary_to_png_bytes, label_components
from .validation import check_binary_image, check_label_image, check_same_shape

__all__ = [
    "PatchSet",
    "ReplayPredictor",
    "SubprocessPredictor",
    "WindowSpec",
    "masks_to_lines",
    "sample_patches",
    "stitch_predict",
]


@dataclass(frozen=True)
class WindowSpec:
    """Sliding window geometry: a square window and its retained core."""

    window: int = 320
    core: int = 100

    def __post_init__(self) -> None:
        if not 0 < self.core <= self.window:
            raise ValueError(f"require 0 < core <= window, got {self.core}, {self.window}")
        if (self.window - self.core) % 2 != 0:
            raise ValueError(
                f"window - core must be even, got {self.window} - {self.core}"
            )

    @property
    def margin(self) -> int:
        return (self.window - self.core) // 2


@dataclass(frozen=True, eq=False)
class PatchSet:
    """Seeded random window crops over a page/label pair.

    Patches are materialized lazily as views over the (zero-padded) source
    arrays, so even very large draws stay cheap; ``manifest()`` records the
    provenance needed to reproduce every crop.
    """

    page: np.ndarray
    labels: np.ndarray
    offsets: np.ndarray  # (n, 2) window origins, columns (x, y)
    window: int
    seed: int
    source: str = ""

    def __len__(self) -> int:
        return len(self.offsets)

    def __getitem__(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        x, y = self.offsets[i]
        sl = (slice(y, y + self.window), slice(x, x + self.window))
        return self.page[sl], self.labels[sl]

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def manifest(self) -> dict:
        return {
            "source": self.source,
            "window": self.window,
            "seed": self.seed,
            "count": len(self.offsets),
            "page_size": [int(self.page.shape[1]), int(self.page.shape[0])],
            "patches": [
                {"index": i, "x": int(x), "y": int(y)}
                for i, (x, y) in enumerate(self.offsets)
            ],
        }


def sample_patches(
    page, labels, count: int, window: int = 320, seed: int = 0, source: str = ""
) -> PatchSet:
    """Draw ``count`` uniformly random window crops with aligned label crops.

    Pages smaller than the window are zero-padded at the right/bottom first.
    Reproducible: equal seeds yield byte-identical patches and manifests.
    """
    page = check_binary_image(page, "page")
    labels = check_label_image(labels, "labels")
    check_same_shape(page, labels, "page and labels")
    if count <= 0:
        raise ValueError(f"count must be positive, got {count}")
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    pad_y = max(0, window - page.shape[0])
    pad_x = max(0, window - page.shape[1])
    if pad_y or pad_x:
        page = np.pad(page, ((0, pad_y), (0, pad_x)))
        labels = np.pad(labels, ((0, pad_y), (0, pad_x)))
    rng = np.random.default_rng(seed)
    xs = rng.integers(0, page.shape[1] - window + 1, size=count)
    ys = rng.integers(0, page.shape[0] - window + 1, size=count)
    return PatchSet(
        page=page,
        labels=labels,
        offsets=np.column_stack([xs, ys]).astype(np.int64),
        window=window,
        seed=seed,
        source=source,
    )


def _call_predictor(predictor, patch: np.ndarray, origin: tuple[int, int]) -> np.ndarray:
    if hasattr(predictor, "predict_window"):
        return predictor.predict_window(patch, origin)
    if hasattr(predictor, "predict"):
        return predictor.predict(patch)
    return predictor(patch)


def _to_mask(raw, window: int, origin: tuple[int, int], threshold: float) -> np.ndarray:
    out = np.asarray(raw)
    if out.ndim != 2 or out.shape != (window, window):
        raise PredictorContractError(
            f"predictor returned shape {getattr(out, 'shape', None)} for window "
            f"{window}x{window} at origin {origin}"
        )
    if out.dtype == bool:
        return out
    return out >= threshold


def stitch_predict(
    page,
    predictor,
    spec: WindowSpec | None = None,
    *,
    threshold: float = 0.5,
    workers: int = 1,
) -> np.ndarray:
    """Predict a full page through the pad/slide/core-stitch protocol.

    Each output pixel is written by exactly one window core; probability
    outputs are thresholded at ``threshold``. Window evaluation order does
    not affect the result (cores are disjoint); ``workers > 1`` runs windows
    in threads unless the predictor sets ``serial_only``.
    """
    page = check_binary_image(page, "page")
    spec = spec or WindowSpec()
    h, w = page.shape
    m = spec.margin
    ny = math.ceil(h / spec.core)
    nx = math.ceil(w / spec.core)
    padded = np.zeros((2 * m + ny * spec.core, 2 * m + nx * spec.core), dtype=bool)
    padded[m : m + h, m : m + w] = page
    out = np.zeros((ny * spec.core, nx * spec.core), dtype=bool)

    def run(idx: tuple[int, int]) -> None:
        i, j = idx
        y0, x0 = i * spec.core, j * spec.core
        patch = padded[y0 : y0 + spec.window, x0 : x0 + spec.window]
        origin = (x0 - m, y0 - m)
        mask = _to_mask(
            _call_predictor(predictor, patch, origin), spec.window, origin, threshold
        )
        out[y0 : y0 + spec.core, x0 : x0 + spec.core] = mask[
            m : m + spec.core, m : m + spec.core
        ]

    grid = [(i, j) for i in range(ny) for j in range(nx)]
    if workers > 1 and not getattr(predictor, "serial_only", False):
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, grid))
    else:
        for idx in grid:
            run(idx)
    return out[:h, :w].copy()


def masks_to_lines(mask, connectivity: int = 8) -> np.ndarray:
    """Label each connected blob of a mask as one extracted line."""
    return label_components(mask, connectivity)


class ReplayPredictor:
    """Returns crops of a fixed reference mask, ignoring patch content.

    Isolates the stitching bookkeeping from model quality: stitching a page
    with the ground-truth mask as reference must reproduce it exactly.
    """

    def __init__(self, reference) -> None:
        self.reference = check_binary_image(reference, "reference")

    def predict_window(self, patch: np.ndarray, origin: tuple[int, int]) -> np.ndarray:
        window = patch.shape[0]
        x0, y0 = origin
        out = np.zeros((window, window), dtype=bool)
        h, w = self.reference.shape
        ry0, ry1 = max(0, y0), min(h, y0 + window)
        rx0, rx1 = max(0, x0), min(w, x0 + window)
        if ry0 < ry1 and rx0 < rx1:
            out[ry0 - y0 : ry1 - y0, rx0 - x0 : rx1 - x0] = self.reference[ry0:ry1, rx0:rx1]
        return out


class SubprocessPredictor:
    """Drives an external predictor over the stdin/stdout PNG protocol.

    One-shot mode spawns the command per patch: the patch PNG is written to
    its standard input and the mask PNG read from its standard output.
    Streaming mode keeps one process alive and frames each PNG with a
    4-byte big-endian length prefix, both directions.
    """

    serial_only = True

    def __init__(self, command: str, stream: bool = False) -> None:
        self.argv = shlex.split(command)
        if not self.argv:
            raise ValueError("empty predictor command")
        self.stream = stream
        self._proc: subprocess.Popen | None = None

    def predict(self, patch: np.ndarray) -> np.ndarray:
        data = binary_to_png_bytes(patch)
        if self.stream:
            reply = self._stream_round_trip(data)
        else:
            result = subprocess.run(
                self.argv, input=data, stdout=subprocess.PIPE, check=False
            )
            if result.returncode != 0:
                raise PredictorContractError(
                    f"predictor command exited with status {result.returncode}"
                )
            reply = result.stdout
        return binary_from_png_bytes(reply, origin=f"predictor {self.argv[0]}")

    def _stream_round_trip(self, data: bytes) -> bytes:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE
            )
        proc = self._proc
        proc.stdin.write(struct.pack(">I", len(data)) + data)
        proc.stdin.flush()
        header = proc.stdout.read(4)
        if len(header) != 4:
            raise PredictorContractError("streaming predictor closed its output")
        (length,) = struct.unpack(">I", header)
        reply = proc.stdout.read(length)
        if len(reply) != length:
            raise PredictorContractError("streaming predictor sent a short frame")
        return reply

    def close(self) -> None:
        if self._proc is not None:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.wait(timeout=10)
            self._proc = None

    def __enter__(self) -> "SubprocessPredictor":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
