"""Orientation-aware morphological repair of predicted line masks.

Disconnected mask fragments are regrouped: every component's fitted-ellipse
orientation is tested against N probe directions, each matching subset is
dilated with a narrow line-shaped kernel along the subset's common major-axis
direction (perpendicular to the probe), and the dilated layers are OR-combined
with the original mask. The output therefore always contains the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi

from .ellipse import EllipseFit, fit_component
from .raster import Component, connected_components
from .validation import check_binary_image, unit_vector

__all__ = [
    "OrientationSubset",
    "PostprocessParams",
    "directional_dilate",
    "fit_components",
    "line_kernel",
    "orientation_subsets",
    "postprocess_mask",
    "probe_direction",
]


@dataclass(frozen=True)
class PostprocessParams:
    """Repair parameters; defaults are the shipped operating point."""

    n_subsets: int = 10
    epsilon: float = 0.2
    kernel_length: int = 21
    kernel_thickness: int = 3
    connectivity: int = 8

    def __post_init__(self) -> None:
        if self.n_subsets < 1:
            raise ValueError(f"n_subsets must be >= 1, got {self.n_subsets}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.kernel_length < 1 or self.kernel_thickness < 1:
            raise ValueError("kernel length and thickness must be >= 1")
        if self.connectivity not in (4, 8):
            raise ValueError(f"connectivity must be 4 or 8, got {self.connectivity}")


@dataclass(frozen=True)
class OrientationSubset:
    """Components whose orientation is near-perpendicular to probe ``v``."""

    j: int
    v: tuple[float, float]
    kernel_direction: tuple[float, float]
    members: tuple[int, ...]


def probe_direction(j: int, n_subsets: int) -> tuple[float, float]:
    """Probe vector (cos(j*pi/N), sin(j*pi/N)) for subset j in 1..N."""
    angle = j * math.pi / n_subsets
    return (math.cos(angle), math.sin(angle))


def _perpendicular(v: tuple[float, float]) -> tuple[float, float]:
    px, py = -v[1], v[0]
    if py < 0.0 or (py == 0.0 and px < 0.0):
        px, py = -px, -py
    return (px, abs(py))


def fit_components(mask, connectivity: int = 8) -> list[tuple[Component, EllipseFit]]:
    """Components of a mask paired with their ellipse fits."""
    return [(c, fit_component(c)) for c in connected_components(mask, connectivity)]


def orientation_subsets(
    fitted: list[tuple[Component, EllipseFit]], params: PostprocessParams
) -> list[OrientationSubset]:
    """Partition-like grouping: subset j holds every component c with
    alpha(c)^2 * |v_j . theta(c)| < epsilon. Subsets may intersect, and a
    near-isotropic component can fall in none of them.
    """
    subsets = []
    for j in range(1, params.n_subsets + 1):
        v = probe_direction(j, params.n_subsets)
        members = tuple(
            comp.id
            for comp, fit in fitted
            if fit.alpha**2 * abs(v[0] * fit.theta[0] + v[1] * fit.theta[1])
            < params.epsilon
        )
        subsets.append(
            OrientationSubset(j=j, v=v, kernel_direction=_perpendicular(v), members=members)
        )
    return subsets


def line_kernel(direction, length: int, thickness: int) -> np.ndarray:
    """Line-segment structuring element: integer offsets inside the oriented
    rectangle of along-axis extent ``length`` and perpendicular width
    ``thickness``, both Euclidean. Odd values are exact for axis-aligned
    kernels (length x thickness pixels); the kernel is always odd-sized and
    symmetric with the origin at its center.
    """
    if length < 1 or thickness < 1:
        raise ValueError("kernel length and thickness must be >= 1")
    d = unit_vector(direction)
    half = (length - 1) / 2.0
    radius = thickness / 2.0
    reach = int(math.ceil(math.hypot(half, radius)))
    ys, xs = np.mgrid[-reach : reach + 1, -reach : reach + 1]
    along = xs * d[0] + ys * d[1]
    perp = -xs * d[1] + ys * d[0]
    se = (np.abs(along) <= half + 1e-9) & (np.abs(perp) <= radius + 1e-9)
    keep_y = np.flatnonzero(se.any(axis=1))
    keep_x = np.flatnonzero(se.any(axis=0))
    se = se[keep_y[0] : keep_y[-1] + 1, keep_x[0] : keep_x[-1] + 1]
    assert se.shape[0] % 2 == 1 and se.shape[1] % 2 == 1  # rectangle is symmetric
    return se


def directional_dilate(layer, direction, length: int, thickness: int = 1) -> np.ndarray:
    """Binary dilation with the line kernel; output is a superset of the input."""
    layer = check_binary_image(layer)
    if not layer.any():
        return layer.copy()
    return ndi.binary_dilation(layer, structure=line_kernel(direction, length, thickness))


def postprocess_mask(
    mask, params: PostprocessParams | None = None, return_details: bool = False
):
    """Repair a predicted line mask.

    Computes components and their fits, dilates each orientation subset's
    layer along the subset's major-axis direction, and ORs all layers with
    the original mask. With ``return_details`` also returns the per-component
    fit record used by the debug dump (id, center, radii, theta, alpha,
    subset memberships).
    """
    mask = check_binary_image(mask)
    params = params or PostprocessParams()
    fitted = fit_components(mask, params.connectivity)
    subsets = orientation_subsets(fitted, params)
    out = mask.copy()
    for subset in subsets:
        if not subset.members:
            continue
        layer = np.zeros_like(mask)
        for comp, _fit in fitted:
            if comp.id in subset.members:
                layer[comp.pixels[:, 1], comp.pixels[:, 0]] = True
        out |= directional_dilate(
            layer, subset.kernel_direction, params.kernel_length, params.kernel_thickness
        )
    if not return_details:
        return out
    membership: dict[int, list[int]] = {comp.id: [] for comp, _ in fitted}
    for subset in subsets:
        for cid in subset.members:
            membership[cid].append(subset.j)
    details = [
        {
            "id": comp.id,
            "center": list(fit.center),
            "r_major": fit.r_major,
            "r_minor": fit.r_minor,
            "theta": list(fit.theta),
            "alpha": fit.alpha,
            "method": fit.method,
            "subsets": membership[comp.id],
        }
        for comp, fit in fitted
    ]
    return out, details
