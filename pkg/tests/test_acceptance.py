"""Acceptance suite: one test per shipping criterion, each printing a
[PASS]/[FAIL] line (run with ``pytest tests/test_acceptance.py -v -s``).

Tolerances are pinned here and nowhere else: metric equality is exact
rational arithmetic, ellipse recovery is 1e-6 (axes, center) and 0.01 deg
(orientation), stitching is byte-exact, and the end-to-end oracle demands
aggregate F == 1 exactly.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from lineseg.ellipse import fit_ellipse
from lineseg.metric import (
    MetricConfig,
    evaluate,
    line_precision,
    line_recall,
)
from lineseg.pipeline import (
    ReplayPredictor,
    WindowSpec,
    masks_to_lines,
    sample_patches,
    stitch_predict,
)
from lineseg.postprocess import PostprocessParams, postprocess_mask
from lineseg.raster import connected_components
from lineseg.synth import LineSpec, generate

from conftest import ellipse_points, make_dashed_row
from oracles import brute_line_precision, brute_line_recall, random_line_sets


def _report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{status}] {name}{suffix}")
    assert ok, f"{name}{suffix}"


def test_metric_oracle_equivalence():
    rng = np.random.default_rng(1234)
    start = time.perf_counter()
    checked = 0
    mismatches = 0
    for _ in range(1000):
        gt, ex = random_line_sets(rng, max_components=12, max_gt=4, max_extracted=5)
        es = list(ex.values())
        for G in gt.values():
            if line_recall(G, es) != brute_line_recall(G, es):
                mismatches += 1
            if line_precision(G, es) != brute_line_precision(G, es):
                mismatches += 1
            checked += 1
    elapsed = time.perf_counter() - start
    _report(
        "metric oracle equivalence",
        mismatches == 0 and elapsed < 10.0,
        f"{checked} lines over 1000 instances, exact match, {elapsed:.2f}s",
    )


def test_metric_worked_examples():
    over_r = line_recall({1, 2, 3, 4}, [{1, 2}, {3, 4}])
    over_p = line_precision({1, 2, 3, 4}, [{1, 2}, {3, 4}])
    merged = [{1, 2, 3, 4, 5, 6}]
    under_r = line_recall({1, 2, 3}, merged)
    under_p = line_precision({1, 2, 3}, merged)
    ok = (
        over_r == Fraction(2, 3)
        and over_p == Fraction(1)
        and under_r == Fraction(1)
        and under_p == Fraction(2, 5)
    )
    _report(
        "metric worked examples",
        ok,
        f"over-segmentation R={over_r} P={over_p}, under-segmentation R={under_r} P={under_p}",
    )


def test_ellipse_fit_accuracy():
    rng = np.random.default_rng(99)
    start = time.perf_counter()
    worst_geom = 0.0
    worst_angle = 0.0
    for k in range(100):
        a = float(rng.uniform(3.0, 60.0))
        b = float(rng.uniform(1.0, a * 0.95))
        phi = float(rng.uniform(0.0, math.pi))
        center = tuple(rng.uniform(-200.0, 200.0, size=2))
        pts = ellipse_points(center=center, a=a, b=b, phi=phi, n=int(rng.integers(8, 40)))
        fit = fit_ellipse(pts)
        worst_geom = max(
            worst_geom,
            abs(fit.r_major - a),
            abs(fit.r_minor - b),
            abs(fit.center[0] - center[0]),
            abs(fit.center[1] - center[1]),
        )
        expected = (math.cos(phi), math.sin(phi))
        dot = min(1.0, abs(fit.theta[0] * expected[0] + fit.theta[1] * expected[1]))
        worst_angle = max(worst_angle, math.degrees(math.acos(dot)))
        if k < 10:  # translation / rotation / scale properties
            shifted = fit_ellipse(pts + np.array([31.0, -17.0]))
            scaled = fit_ellipse(pts * 2.0)
            rot = math.radians(25.0)
            c, s = math.cos(rot), math.sin(rot)
            rotated = fit_ellipse(pts @ np.array([[c, s], [-s, c]]))
            worst_geom = max(
                worst_geom,
                abs(shifted.center[0] - fit.center[0] - 31.0),
                abs(shifted.center[1] - fit.center[1] + 17.0),
                abs(shifted.r_major - fit.r_major),
                abs(scaled.r_major - 2.0 * fit.r_major),
                abs(scaled.r_minor - 2.0 * fit.r_minor),
                abs(rotated.r_major - fit.r_major),
                abs(rotated.r_minor - fit.r_minor),
            )
    elapsed = time.perf_counter() - start
    ok = worst_geom < 1e-6 and worst_angle < 0.01 and elapsed < 5.0
    _report(
        "ellipse fit accuracy",
        ok,
        f"worst geometry error {worst_geom:.2e}, worst angle {worst_angle:.2e} deg, {elapsed:.2f}s",
    )


def test_postprocess_fixture():
    start = time.perf_counter()
    params = PostprocessParams(n_subsets=10, epsilon=0.2, kernel_length=9, kernel_thickness=3)
    single = make_dashed_row(100, 24, y_top=10)
    n_before = len(connected_components(single, 8))
    n_after = len(connected_components(postprocess_mask(single, params), 8))

    double = make_dashed_row(100, 60, y_top=10) | make_dashed_row(100, 60, y_top=30)
    n_double = len(connected_components(postprocess_mask(double, params), 8))

    identity = postprocess_mask(
        single, PostprocessParams(n_subsets=10, epsilon=0.0, kernel_length=9)
    )
    elapsed = time.perf_counter() - start
    ok = (
        n_before == 5
        and n_after == 1
        and n_double == 2
        and np.array_equal(identity, single)
        and elapsed < 2.0
    )
    _report(
        "post-processing fixture",
        ok,
        f"5 dashes -> {n_after} component, parallel 20px lines -> {n_double}, "
        f"eps=0 identity {np.array_equal(identity, single)}, {elapsed:.2f}s",
    )


def test_stitching_identity():
    rng = np.random.default_rng(7)
    spec = WindowSpec(window=320, core=100)
    ok = True
    for w, h in ((37, 41), (320, 320), (700, 450)):
        page = rng.random((h, w)) < 0.35
        out = stitch_predict(page, lambda p: p, spec)
        ok = ok and out.tobytes() == page.tobytes() and out.dtype == page.dtype
    _report("stitching identity", ok, "pages 37x41, 320x320, 700x450 byte-exact")


def _oracle_page(seed: int):
    specs = [
        LineSpec(kind="straight", start=(40.0, 45.0), length=420.0,
                 segment_length=12.0, gap=5.0, stroke_thickness=3, phase_jitter=1.0),
        LineSpec(kind="skewed", start=(40.0, 130.0), length=420.0, angle_deg=6.0,
                 segment_length=12.0, gap=5.0, stroke_thickness=3, phase_jitter=1.0),
        LineSpec(kind="curved", start=(40.0, 250.0), length=420.0, amplitude=12.0,
                 period=210.0, segment_length=12.0, gap=5.0, stroke_thickness=3,
                 phase_jitter=1.0),
    ]
    return generate(specs, size=(560, 320), seed=seed)


class _DroppingReplay:
    """Replay predictor that blanks every other core block (checkerboard)."""

    def __init__(self, reference, spec: WindowSpec):
        self._replay = ReplayPredictor(reference)
        self._spec = spec

    def predict_window(self, patch, origin):
        j = (origin[0] + self._spec.margin) // self._spec.core
        i = (origin[1] + self._spec.margin) // self._spec.core
        if (i + j) % 2:
            return np.zeros_like(patch)
        return self._replay.predict_window(patch, origin)


def test_end_to_end_synthetic_oracle():
    spec = WindowSpec(window=320, core=100)
    params = PostprocessParams()
    cfg = MetricConfig()
    clean_ok = True
    corrupt_ok = True
    details = []
    for seed in range(10):
        page = _oracle_page(seed)
        comps = connected_components(page.page, 8)
        gt_mask = page.gt_masks > 0

        predicted = stitch_predict(page.page, ReplayPredictor(gt_mask), spec)
        extracted = masks_to_lines(postprocess_mask(predicted, params))
        report = evaluate(comps, page.gt_masks, extracted, cfg)
        clean_ok = clean_ok and report.aggregate_f == 1

        dropped = stitch_predict(page.page, _DroppingReplay(gt_mask, spec), spec)
        extracted_bad = masks_to_lines(postprocess_mask(dropped, params))
        bad = evaluate(comps, page.gt_masks, extracted_bad, cfg)
        corrupt_ok = corrupt_ok and bad.aggregate_f < 1 and bad.aggregate_recall < report.aggregate_recall
        details.append(float(bad.aggregate_f))
    _report(
        "end-to-end synthetic oracle",
        clean_ok and corrupt_ok,
        f"10 seeded pages F=1 exactly; corrupted F in [{min(details):.2f}, {max(details):.2f}]",
    )


def test_patch_sampler_50k():
    start = time.perf_counter()
    specs = [
        LineSpec(kind="straight", start=(100.0, 300.0 + 450.0 * i), length=2800.0,
                 segment_length=30.0, gap=12.0, stroke_thickness=7, phase_jitter=1.0)
        for i in range(8)
    ]
    page = generate(specs, size=(3000, 4000), seed=0)
    patches = sample_patches(page.page, page.gt_masks, count=50_000, window=320, seed=11)
    shapes_ok = all(
        img.shape == (320, 320) and lab.shape == (320, 320) for img, lab in patches
    )
    again = sample_patches(page.page, page.gt_masks, count=50_000, window=320, seed=11)
    reproducible = patches.manifest() == again.manifest() and np.array_equal(
        patches.offsets, again.offsets
    )
    first_img, _ = patches[0]
    identical_first = np.array_equal(first_img, again[0][0])
    elapsed = time.perf_counter() - start
    _report(
        "patch sampler 50k",
        shapes_ok and reproducible and identical_first,
        f"50000 patches of 320x320, seed-reproducible manifest, {elapsed:.2f}s",
    )
