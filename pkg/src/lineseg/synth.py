"""Synthetic dashed-line pages with exact line-mask ground truth.

Each line is a sequence of small rectangles ("dashes") oriented along the
local tangent of a straight, skewed, or sinusoidal path; the ground-truth
mask is the thickened continuous path united with the dashes, so every dash
is contained in its own line's mask by construction. Pages exercise the
post-processor and the metric at desk scale with known answers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi

from .errors import GenerationError

__all__ = ["LineSpec", "SynthPage", "generate", "line_spec_from_dict"]

_KINDS = ("straight", "skewed", "curved")


@dataclass(frozen=True)
class LineSpec:
    """One dashed text line.

    ``start`` is the path origin (x, y); the path runs ``length`` pixels.
    ``phase_jitter`` (0..1) randomizes the dash phase by up to that fraction
    of one segment+gap period, drawn from the page seed.
    """

    kind: str = "straight"
    start: tuple[float, float] = (0.0, 0.0)
    length: float = 100.0
    segment_length: float = 12.0
    gap: float = 5.0
    stroke_thickness: int = 3
    angle_deg: float = 0.0
    amplitude: float = 0.0
    period: float = 120.0
    phase_jitter: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.length <= 0:
            raise ValueError("length must be positive")
        if self.segment_length <= 0:
            raise ValueError("segment_length must be positive")
        if self.gap < 0:
            raise ValueError("gap must be >= 0")
        if self.stroke_thickness < 1:
            raise ValueError("stroke_thickness must be >= 1")
        if self.kind == "curved" and not self.amplitude < self.period / 2:
            raise ValueError("curved lines require amplitude < period / 2")
        if not 0.0 <= self.phase_jitter <= 1.0:
            raise ValueError("phase_jitter must be in [0, 1]")

    def point(self, t: float) -> tuple[float, float]:
        x0, y0 = self.start
        if self.kind == "straight":
            return (x0 + t, y0)
        if self.kind == "skewed":
            a = math.radians(self.angle_deg)
            return (x0 + t * math.cos(a), y0 + t * math.sin(a))
        return (x0 + t, y0 + self.amplitude * math.sin(2.0 * math.pi * t / self.period))

    def tangent(self, t: float) -> tuple[float, float]:
        if self.kind == "straight":
            return (1.0, 0.0)
        if self.kind == "skewed":
            a = math.radians(self.angle_deg)
            return (math.cos(a), math.sin(a))
        dy = self.amplitude * 2.0 * math.pi / self.period * math.cos(
            2.0 * math.pi * t / self.period
        )
        n = math.hypot(1.0, dy)
        return (1.0 / n, dy / n)


@dataclass(frozen=True, eq=False)
class SynthPage:
    page: np.ndarray  # bool; the dashed "text"
    gt_masks: np.ndarray  # int32; continuous line masks, one label per line


def line_spec_from_dict(obj: dict) -> LineSpec:
    """Build a LineSpec from its JSON form (see the synth CLI)."""
    known = {f for f in LineSpec.__dataclass_fields__}
    unknown = set(obj) - known
    if unknown:
        raise ValueError(f"unknown line spec fields: {sorted(unknown)}")
    if "start" in obj:
        obj = dict(obj, start=tuple(obj["start"]))
    return LineSpec(**obj)


def _dash_intervals(spec: LineSpec, phase: float) -> list[tuple[float, float]]:
    period = spec.segment_length + spec.gap
    out = []
    t0 = phase
    while t0 + spec.segment_length <= spec.length + 1e-9:
        out.append((t0, t0 + spec.segment_length))
        t0 += period
    return out


def _stamp_rectangle(canvas: np.ndarray, center, direction, length, thickness) -> None:
    """Paint pixels whose centers fall inside an oriented rectangle; raises
    when the rectangle does not fit on the canvas."""
    h, w = canvas.shape
    cx, cy = center
    ux, uy = direction
    reach = math.hypot(length, thickness)
    x_lo, x_hi = int(math.floor(cx - reach)), int(math.ceil(cx + reach))
    y_lo, y_hi = int(math.floor(cy - reach)), int(math.ceil(cy + reach))
    ys, xs = np.mgrid[y_lo : y_hi + 1, x_lo : x_hi + 1]
    rx = xs - cx
    ry = ys - cy
    along = rx * ux + ry * uy
    perp = -rx * uy + ry * ux
    inside = (
        (along >= -length / 2.0)
        & (along < length / 2.0)
        & (np.abs(perp) <= (thickness - 1) / 2.0 + 1e-9)
    )
    iy, ix = np.nonzero(inside)
    py = ys[iy, ix]
    px = xs[iy, ix]
    if py.size == 0:
        return
    if px.min() < 0 or py.min() < 0 or px.max() >= w or py.max() >= h:
        raise GenerationError(
            f"line does not fit inside the page near ({cx:.0f}, {cy:.0f})"
        )
    canvas[py, px] = True


def _band_mask(spec: LineSpec, shape: tuple[int, int]) -> np.ndarray:
    """Continuous path thickened to a band; contains the stroke with margin."""
    h, w = shape
    samples = max(2, int(math.ceil(spec.length / 0.5)) + 1)
    ts = np.linspace(0.0, spec.length, samples)
    pts = np.array([spec.point(t) for t in ts])
    xs = np.rint(pts[:, 0]).astype(int)
    ys = np.rint(pts[:, 1]).astype(int)
    if xs.min() < 0 or ys.min() < 0 or xs.max() >= w or ys.max() >= h:
        raise GenerationError("line path leaves the page")
    skeleton = np.zeros(shape, dtype=bool)
    skeleton[ys, xs] = True
    radius = spec.stroke_thickness / 2.0 + 1.0
    r = int(math.ceil(radius))
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    disk = xx * xx + yy * yy <= radius * radius + 1e-9
    band = ndi.binary_dilation(skeleton, structure=disk)
    if band[0, :].any() or band[-1, :].any() or band[:, 0].any() or band[:, -1].any():
        raise GenerationError("line mask touches the page border")
    return band


def generate(specs, size: tuple[int, int], seed: int = 0) -> SynthPage:
    """Render dashed lines and their ground-truth masks on a (w, h) page.

    Deterministic for a given seed. Masks of distinct lines must stay
    separated; masks that overlap (or touch within one pixel, which would
    merge text components) raise GenerationError — space the lines out.
    """
    w, h = int(size[0]), int(size[1])
    if w < 1 or h < 1:
        raise GenerationError(f"page size must be positive, got {size}")
    specs = list(specs)
    rng = np.random.default_rng(seed)
    page = np.zeros((h, w), dtype=bool)
    gt = np.zeros((h, w), dtype=np.int32)
    claimed = np.zeros((h, w), dtype=bool)  # 1-px-dilated union of earlier masks
    for idx, spec in enumerate(specs, start=1):
        period = spec.segment_length + spec.gap
        phase = float(rng.uniform(0.0, spec.phase_jitter * period))
        dashes = np.zeros((h, w), dtype=bool)
        for t0, t1 in _dash_intervals(spec, phase):
            tc = (t0 + t1) / 2.0
            _stamp_rectangle(
                dashes, spec.point(tc), spec.tangent(tc), t1 - t0, spec.stroke_thickness
            )
        mask = _band_mask(spec, (h, w)) | dashes
        if (claimed & mask).any():
            raise GenerationError(
                f"mask of line {idx} overlaps or touches an earlier line; space lines out"
            )
        claimed |= ndi.binary_dilation(mask, structure=np.ones((3, 3), dtype=bool))
        gt[mask] = idx
        page |= dashes
    return SynthPage(page=page, gt_masks=gt)
