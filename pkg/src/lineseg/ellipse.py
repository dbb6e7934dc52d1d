"""Direct least-squares ellipse fitting with a moment-based fallback.

The direct path solves the constrained conic problem (minimize the algebraic
residual subject to 4AC - B^2 = 1) through the numerically stable 3x3 block
reduction of the 6x6 generalized eigenproblem; exactly one eigenvector
satisfies the ellipse constraint and is converted to geometric parameters.
Points are normalized to zero mean and unit RMS radius before the scatter
matrices are built, which keeps the eigenproblem well conditioned, and the
geometry is mapped back afterwards (similarity transforms preserve it).

Degenerate inputs (collinear points, fewer than 6 points) fall back to the
principal axes of the second central moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi

from .errors import DegenerateInputError
from .raster import Component

__all__ = [
    "EllipseFit",
    "boundary_pixels",
    "conic_coefficients",
    "fit_component",
    "fit_ellipse",
]

# Keeps the elongation confidence strictly below 1 for exactly collinear input.
_MIN_AXIS_RATIO = 1e-9

# Variance of a unit-square pixel; spreads point-mass pixel coordinates so a
# 1-px-thick stroke still has a positive minor axis.
_PIXEL_VARIANCE = 1.0 / 12.0


def _canonical_unit(v: np.ndarray) -> tuple[float, float]:
    vx, vy = float(v[0]), float(v[1])
    n = math.hypot(vx, vy)
    vx, vy = vx / n, vy / n
    if vy < 0.0 or (vy == 0.0 and vx < 0.0):
        vx, vy = -vx, -vy
    return vx, abs(vy)


@dataclass(frozen=True)
class EllipseFit:
    """Geometric ellipse parameters with a canonical orientation.

    ``theta`` is the unit vector along the major axis, canonicalized to the
    y >= 0 half-plane (x > 0 when y = 0) since orientation is only defined
    up to sign. ``alpha`` = r_major / (r_major + r_minor) is the elongation
    confidence in [0.5, 1).
    """

    center: tuple[float, float]
    r_major: float
    r_minor: float
    theta: tuple[float, float]
    method: str = "direct"

    def __post_init__(self) -> None:
        if not (self.r_major >= self.r_minor > 0.0):
            raise ValueError(
                f"require r_major >= r_minor > 0, got {self.r_major}, {self.r_minor}"
            )
        object.__setattr__(self, "theta", _canonical_unit(np.asarray(self.theta, float)))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def alpha(self) -> float:
        return self.r_major / (self.r_major + self.r_minor)


def _direct_conic(q: np.ndarray) -> np.ndarray | None:
    """Constrained conic fit on normalized points; returns [A..F] or None."""
    x, y = q[:, 0], q[:, 1]
    d1 = np.column_stack([x * x, x * y, y * y])
    d2 = np.column_stack([x, y, np.ones_like(x)])
    s1 = d1.T @ d1
    s2 = d1.T @ d2
    s3 = d2.T @ d2
    try:
        t = -np.linalg.solve(s3, s2.T)
    except np.linalg.LinAlgError:
        return None
    m = s1 + s2 @ t
    reduced = np.array([m[2] / 2.0, -m[1], m[0] / 2.0])
    try:
        w, vecs = np.linalg.eig(reduced)
    except np.linalg.LinAlgError:
        return None
    real = np.abs(w.imag) < 1e-8 * (1.0 + np.abs(w.real))
    cond = 4.0 * vecs[0].real * vecs[2].real - vecs[1].real ** 2
    admissible = np.flatnonzero(real & (cond > 0.0))
    if admissible.size == 0:
        return None
    best = admissible[np.argmax(cond[admissible])]
    a1 = vecs[:, best].real
    return np.concatenate([a1, t @ a1])


def _conic_geometry(conic: np.ndarray) -> tuple | None:
    """Conic [A..F] -> (center, r_major, r_minor, theta), or None if not an ellipse."""
    a, b, c, d, e, f = (float(v) for v in conic)
    disc = b * b - 4.0 * a * c
    if disc >= 0.0:
        return None
    x0 = (2.0 * c * d - b * e) / disc
    y0 = (2.0 * a * e - b * d) / disc
    # Center form A u^2 + B uv + C v^2 = s, with s = -conic(center).
    s = -(a * x0 * x0 + b * x0 * y0 + c * y0 * y0 + d * x0 + e * y0 + f)
    if a + c < 0.0:
        a, b, c, s = -a, -b, -c, -s
    if s <= 0.0:
        return None
    quad = np.array([[a, b / 2.0], [b / 2.0, c]])
    lam, axes = np.linalg.eigh(quad)
    if lam[0] <= 0.0:
        return None
    r_major = math.sqrt(s / lam[0])
    r_minor = math.sqrt(s / lam[1])
    return (x0, y0), r_major, r_minor, axes[:, 0]


def _moment_geometry(pts: np.ndarray, extra_variance: float = 0.0) -> tuple:
    """Principal axes of the second central moments (radii = 2 sqrt(lambda))."""
    mean = pts.mean(axis=0)
    centered = pts - mean
    cov = centered.T @ centered / len(pts)
    cov[0, 0] += extra_variance
    cov[1, 1] += extra_variance
    lam, axes = np.linalg.eigh(cov)
    r_major = 2.0 * math.sqrt(max(float(lam[1]), 0.0))
    r_minor = 2.0 * math.sqrt(max(float(lam[0]), 0.0))
    r_minor = max(r_minor, _MIN_AXIS_RATIO * r_major)
    return (float(mean[0]), float(mean[1])), r_major, r_minor, axes[:, 1]


def fit_ellipse(points, fallback: bool = True) -> EllipseFit:
    """Fit an ellipse to (x, y) points.

    Uses the direct constrained fit for >= 6 points; when the eigenproblem
    admits no ellipse (or with fewer points) and ``fallback`` is set, uses
    the moment axes instead. Fewer than 2 distinct points is an error.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(np.unique(pts, axis=0)) < 2:
        raise DegenerateInputError("ellipse fit needs at least 2 distinct points")
    mean = pts.mean(axis=0)
    scale = math.sqrt(float(np.mean(np.sum((pts - mean) ** 2, axis=1))))
    q = (pts - mean) / scale

    geometry = None
    if len(pts) >= 6:
        conic = _direct_conic(q)
        if conic is not None:
            geometry = _conic_geometry(conic)
    method = "direct"
    if geometry is None:
        if not fallback:
            raise DegenerateInputError("no admissible ellipse and fallback disabled")
        geometry = _moment_geometry(q)
        method = "moments"

    (cx, cy), r_major, r_minor, theta = geometry
    return EllipseFit(
        center=(cx * scale + mean[0], cy * scale + mean[1]),
        r_major=r_major * scale,
        r_minor=r_minor * scale,
        theta=tuple(theta),
        method=method,
    )


def boundary_pixels(component: Component) -> np.ndarray:
    """(x, y) pixels of the component having a background pixel among their 8 neighbors."""
    x0, y0, x1, y1 = component.bbox
    mask = np.zeros((y1 - y0 + 3, x1 - x0 + 3), dtype=bool)
    mask[component.pixels[:, 1] - y0 + 1, component.pixels[:, 0] - x0 + 1] = True
    interior = ndi.binary_erosion(mask, structure=np.ones((3, 3), dtype=bool))
    ys, xs = np.nonzero(mask & ~interior)
    return np.column_stack([xs + x0 - 1, ys + y0 - 1]).astype(np.int32)


def fit_component(component: Component, boundary_only: bool = True) -> EllipseFit:
    """Fit an ellipse to a component's pixels.

    Fits on the 8-boundary pixels by default (filled strokes bias the conic
    fit); set ``boundary_only=False`` to fit every pixel. Single-pixel
    components get the degenerate convention fit: theta = (1, 0), alpha 0.5.
    """
    if component.area < 1:
        raise DegenerateInputError("component has no pixels")
    if component.area == 1:
        x, y = component.pixels[0]
        return EllipseFit(
            center=(float(x), float(y)), r_major=0.5, r_minor=0.5, theta=(1.0, 0.0),
            method="point",
        )
    pts = boundary_pixels(component) if boundary_only else component.pixels
    pts = pts.astype(float)
    if len(pts) >= 6:
        try:
            return fit_ellipse(pts, fallback=False)
        except DegenerateInputError:
            pass
    (cx, cy), r_major, r_minor, theta = _moment_geometry(pts, _PIXEL_VARIANCE)
    return EllipseFit(
        center=(cx, cy), r_major=r_major, r_minor=r_minor, theta=tuple(theta),
        method="moments",
    )


def conic_coefficients(fit: EllipseFit) -> np.ndarray:
    """Unit-norm conic [A, B, C, D, E, F] of the fitted ellipse (= 0 on the curve)."""
    tx, ty = fit.theta
    inv_a2 = 1.0 / (fit.r_major * fit.r_major)
    inv_b2 = 1.0 / (fit.r_minor * fit.r_minor)
    a = tx * tx * inv_a2 + ty * ty * inv_b2
    b = 2.0 * tx * ty * (inv_a2 - inv_b2)
    c = ty * ty * inv_a2 + tx * tx * inv_b2
    x0, y0 = fit.center
    d = -2.0 * a * x0 - b * y0
    e = -b * x0 - 2.0 * c * y0
    f = a * x0 * x0 + b * x0 * y0 + c * y0 * y0 - 1.0
    coeffs = np.array([a, b, c, d, e, f])
    return coeffs / np.linalg.norm(coeffs)
