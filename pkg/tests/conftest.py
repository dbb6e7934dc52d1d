from __future__ import annotations

import numpy as np
import pytest


def make_dashed_row(
    width: int,
    height: int,
    y_top: int,
    n_segments: int = 5,
    seg_w: int = 10,
    seg_h: int = 3,
    gap: int = 4,
    x0: int = 10,
) -> np.ndarray:
    """Horizontal dashed line: n segments of seg_w x seg_h with gap columns between."""
    page = np.zeros((height, width), dtype=bool)
    for i in range(n_segments):
        x = x0 + i * (seg_w + gap)
        page[y_top : y_top + seg_h, x : x + seg_w] = True
    return page


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240809)


def ellipse_points(
    center=(0.0, 0.0), a=10.0, b=4.0, phi=0.0, n=12, jitter=0.0, rng=None
) -> np.ndarray:
    """Parametric samples of an ellipse with semi-axes a >= b rotated by phi."""
    ts = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    x = a * np.cos(ts)
    y = b * np.sin(ts)
    c, s = np.cos(phi), np.sin(phi)
    px = center[0] + c * x - s * y
    py = center[1] + s * x + c * y
    pts = np.column_stack([px, py])
    if jitter and rng is not None:
        pts = pts + rng.normal(scale=jitter, size=pts.shape)
    return pts
