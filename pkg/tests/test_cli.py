from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner
from PIL import Image

from lineseg.cli import label_color, main, overlay
from lineseg.raster import (
    load_binary,
    load_label_raster,
    save_binary,
    write_label_raster,
)

from conftest import make_dashed_row

PREDICTOR_SCRIPT = Path(__file__).parent / "predictor_script.py"


@pytest.fixture
def runner():
    return CliRunner()


def _synth_spec(path: Path, jitter: float = 0.0) -> None:
    spec = {
        "size": [220, 170],
        "lines": [
            {
                "kind": "straight", "start": [20, 24], "length": 150,
                "segment_length": 10, "gap": 4, "stroke_thickness": 3,
                "phase_jitter": jitter,
            },
            {
                "kind": "skewed", "start": [20, 70], "length": 150, "angle_deg": 12,
                "segment_length": 10, "gap": 4, "stroke_thickness": 3,
            },
            {
                "kind": "curved", "start": [20, 130], "length": 150,
                "amplitude": 10, "period": 90,
                "segment_length": 10, "gap": 4, "stroke_thickness": 3,
            },
        ],
    }
    path.write_text(json.dumps(spec))


class TestVersionAndUsage:
    def test_version_prints_schema(self, runner):
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert "report schema 1" in result.output

    def test_unknown_flag_exits_2(self, runner):
        result = runner.invoke(main, ["lines", "--bogus", "x"])
        assert result.exit_code == 2

    def test_missing_input_exits_1_with_path(self, runner, tmp_path):
        result = runner.invoke(
            main, ["lines", "--in", str(tmp_path / "missing.png"), "--out", str(tmp_path / "o.png")]
        )
        assert result.exit_code == 1
        assert "error:" in result.output
        assert "missing.png" in result.output

    def test_invalid_param_exits_2(self, runner, tmp_path):
        mask = tmp_path / "m.png"
        save_binary(np.zeros((5, 5), dtype=bool), mask)
        result = runner.invoke(
            main,
            ["postprocess", "--in", str(mask), "--out", str(tmp_path / "o.png"), "--epsilon", "3"],
        )
        assert result.exit_code == 2


class TestSynthAndBinarize:
    def test_synth_writes_page_and_gt(self, runner, tmp_path):
        spec = tmp_path / "spec.json"
        _synth_spec(spec)
        page, gt = tmp_path / "page.png", tmp_path / "gt.png"
        result = runner.invoke(
            main,
            ["synth", "--spec", str(spec), "--out-page", str(page), "--out-gt", str(gt), "--seed", "1"],
        )
        assert result.exit_code == 0, result.output
        assert load_binary(page).any()
        assert load_label_raster(gt).max() == 3

    def test_synth_determinism(self, runner, tmp_path):
        spec = tmp_path / "spec.json"
        _synth_spec(spec, jitter=1.0)
        outs = []
        for name in ("a", "b"):
            page, gt = tmp_path / f"{name}.png", tmp_path / f"{name}_gt.png"
            result = runner.invoke(
                main,
                ["synth", "--spec", str(spec), "--out-page", str(page), "--out-gt", str(gt), "--seed", "7"],
            )
            assert result.exit_code == 0
            outs.append(page.read_bytes() + gt.read_bytes())
        assert outs[0] == outs[1]

    def test_binarize(self, runner, tmp_path):
        gray = np.full((30, 30), 240, dtype=np.uint8)
        gray[10:20, 5:25] = 15
        src = tmp_path / "gray.png"
        Image.fromarray(gray).save(src)
        out = tmp_path / "bin.png"
        result = runner.invoke(main, ["binarize", "--in", str(src), "--out", str(out)])
        assert result.exit_code == 0
        img = load_binary(out)
        assert img[15, 10] and not img[0, 0]


class TestPostprocessLinesEvaluate:
    def test_end_to_end_identity_f1(self, runner, tmp_path):
        spec = tmp_path / "spec.json"
        _synth_spec(spec)
        page, gt = tmp_path / "page.png", tmp_path / "gt.png"
        runner.invoke(
            main, ["synth", "--spec", str(spec), "--out-page", str(page), "--out-gt", str(gt)]
        )
        fixed = tmp_path / "fixed.png"
        dump = tmp_path / "ellipses.json"
        result = runner.invoke(
            main,
            [
                "postprocess", "--in", str(page), "--out", str(fixed),
                "--n", "10", "--epsilon", "0.2", "--kernel-length", "11",
                "--dump-ellipses", str(dump),
            ],
        )
        assert result.exit_code == 0, result.output
        lines = tmp_path / "lines.png"
        result = runner.invoke(main, ["lines", "--in", str(fixed), "--out", str(lines)])
        assert result.exit_code == 0
        assert load_label_raster(lines).max() == 3

        report = tmp_path / "report.json"
        result = runner.invoke(
            main,
            [
                "evaluate", "--gt", str(gt), "--pred", str(lines), "--page", str(page),
                "--averaging", "macro", "--report", str(report),
            ],
        )
        assert result.exit_code == 0, result.output
        assert "f-measure 1.0000" in result.output
        payload = json.loads(report.read_text())
        assert payload["aggregate_f"] == 1.0
        assert payload["aggregates"]["micro"]["f_measure"] == 1.0
        assert payload["effective_config"]["n_subsets"] == 10
        assert payload["params"]["singleton_policy"] == "beginning_of_line"

        ellipses = json.loads(dump.read_text())
        assert len(ellipses["components"]) > 0
        assert all(0.5 <= c["alpha"] < 1 for c in ellipses["components"])

    def test_postprocess_deterministic_bytes(self, runner, tmp_path):
        mask_path = tmp_path / "mask.png"
        save_binary(make_dashed_row(100, 24, y_top=10), mask_path)
        outs = []
        for name in ("a.png", "b.png"):
            out = tmp_path / name
            result = runner.invoke(
                main,
                ["postprocess", "--in", str(mask_path), "--out", str(out), "--kernel-length", "9"],
            )
            assert result.exit_code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_config_file_and_flag_override(self, runner, tmp_path):
        cfg = tmp_path / "lineseg.cfg"
        cfg.write_text("epsilon = 0.0\nkernel_length = 9\n# comment\n")
        mask_path = tmp_path / "mask.png"
        mask = make_dashed_row(100, 24, y_top=10)
        save_binary(mask, mask_path)
        out = tmp_path / "out.png"
        # epsilon 0 from file -> identity.
        result = runner.invoke(
            main, ["-c", str(cfg), "postprocess", "--in", str(mask_path), "--out", str(out)]
        )
        assert result.exit_code == 0
        assert np.array_equal(load_binary(out), mask)
        # flag overrides file -> dashes reconnect.
        result = runner.invoke(
            main,
            ["-c", str(cfg), "postprocess", "--in", str(mask_path), "--out", str(out),
             "--epsilon", "0.2"],
        )
        assert result.exit_code == 0
        assert load_binary(out).sum() > mask.sum()

    def test_bad_config_key_exits_2(self, runner, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("epsilonn = 0.1\n")
        result = runner.invoke(main, ["-c", str(cfg), "lines", "--in", "x", "--out", "y"])
        assert result.exit_code == 2


class TestPatchesAndPredict:
    def test_patches_writes_pairs_and_manifest(self, runner, tmp_path):
        page, labels = tmp_path / "p.png", tmp_path / "l.png"
        save_binary(make_dashed_row(400, 400, y_top=100), page)
        lab = np.zeros((400, 400), dtype=np.int32)
        lab[90:110, :] = 1
        write_label_raster(lab, labels)
        out_dir = tmp_path / "patches"
        result = runner.invoke(
            main,
            [
                "patches", "--page", str(page), "--labels", str(labels),
                "--count", "3", "--window", "64", "--seed", "5", "--out", str(out_dir),
            ],
        )
        assert result.exit_code == 0, result.output
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["count"] == 3
        assert manifest["effective_config"]["seed"] == 5
        for entry in manifest["patches"]:
            img = load_binary(out_dir / entry["page_file"])
            lab_patch = load_label_raster(out_dir / entry["labels_file"])
            assert img.shape == (64, 64) and lab_patch.shape == (64, 64)

    def test_predict_identity_subprocess(self, runner, tmp_path):
        page_path = tmp_path / "p.png"
        page = make_dashed_row(60, 40, y_top=12, n_segments=3)
        save_binary(page, page_path)
        out = tmp_path / "mask.png"
        cmd = f"cmd:{sys.executable} {PREDICTOR_SCRIPT} --stream"
        result = runner.invoke(
            main,
            [
                "predict", "--page", str(page_path), "--predictor", cmd, "--stream",
                "--window", "32", "--core", "16", "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        assert np.array_equal(load_binary(out), page)

    def test_predict_rejects_bad_scheme(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["predict", "--page", "x.png", "--predictor", "http://x", "--out", "y.png"],
        )
        assert result.exit_code == 2


class TestOverlay:
    def test_two_labels_two_colors(self):
        page = np.zeros((10, 10), dtype=np.uint8)
        labels = np.zeros((10, 10), dtype=np.int32)
        labels[2, 2] = 1
        labels[7, 7] = 2
        img = overlay(page, labels)
        c1, c2 = tuple(img[2, 2]), tuple(img[7, 7])
        assert c1 != c2
        assert tuple(img[0, 0]) == (0, 0, 0)

    def test_empty_labels_keep_page(self):
        page = np.arange(100, dtype=np.uint8).reshape(10, 10)
        img = overlay(page, np.zeros((10, 10), dtype=np.int32))
        assert np.array_equal(img[..., 0], page)
        assert np.array_equal(img[..., 1], page)

    def test_permuted_ids_keep_palette(self):
        page = np.zeros((10, 10), dtype=np.uint8)
        labels = np.zeros((10, 10), dtype=np.int32)
        labels[2, 2] = 1
        labels[7, 7] = 2
        swapped = np.where(labels == 1, 2, np.where(labels == 2, 1, 0)).astype(np.int32)
        a = overlay(page, labels)
        b = overlay(page, swapped)
        assert tuple(a[2, 2]) == tuple(b[7, 7])  # color follows the id
        assert tuple(a[2, 2]) == tuple(label_color(1))

    def test_mismatch_rejected(self):
        with pytest.raises(ValueError, match="dimensions"):
            overlay(np.zeros((5, 5), dtype=np.uint8), np.zeros((6, 6), dtype=np.int32))

    def test_overlay_cli(self, runner, tmp_path):
        page, labels, out = tmp_path / "p.png", tmp_path / "l.png", tmp_path / "o.png"
        save_binary(np.zeros((8, 8), dtype=bool), page)
        lab = np.zeros((8, 8), dtype=np.int32)
        lab[3, 3] = 1
        write_label_raster(lab, labels)
        result = runner.invoke(
            main, ["overlay", "--page", str(page), "--labels", str(labels), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        img = np.asarray(Image.open(out))
        assert img.shape == (8, 8, 3)
        assert tuple(img[3, 3]) == tuple(label_color(1))
