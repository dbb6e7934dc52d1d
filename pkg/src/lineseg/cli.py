"""Unified command-line entry point.

Subcommands: binarize, patches, predict, postprocess, lines, evaluate,
synth, overlay. A flat key=value config file (``-c``) supplies defaults;
explicit flags win. Every subcommand is a pure function of (inputs, config,
seed): re-running writes byte-identical outputs. Usage and invariant
violations exit 2; I/O failures exit 1 with a machine-readable error line
on stderr.
"""

from __future__ import annotations

import colorsys
import functools
import json
from pathlib import Path

import click
import numpy as np
from PIL import Image

from . import __version__
from .config import ToolConfig
from .errors import PredictorContractError, RasterFormatError
from .metric import SCHEMA_VERSION, evaluate
from .pipeline import SubprocessPredictor, masks_to_lines, sample_patches, stitch_predict
from .postprocess import postprocess_mask
from .raster import (
    binarize,
    connected_components,
    load_binary,
    load_gray,
    load_label_raster,
    save_binary,
    write_label_raster,
)
from .synth import generate, line_spec_from_dict
from .validation import check_gray_image, check_label_image, check_same_shape

__all__ = ["main", "overlay"]


def label_color(line_id: int) -> np.ndarray:
    """Deterministic distinct RGB color for a line id (golden-angle palette)."""
    hue = (line_id * 0.6180339887498949) % 1.0
    sat = (0.9, 0.65)[line_id % 2]
    val = (0.95, 0.8, 0.65)[line_id % 3]
    r, g, b = colorsys.hsv_to_rgb(hue, sat, val)
    return np.array([round(r * 255), round(g * 255), round(b * 255)], dtype=np.uint8)


def overlay(page, labels) -> np.ndarray:
    """Paint each line id in its own color over the grayscale page."""
    page = np.asarray(page)
    if page.dtype == bool:
        page = np.where(page, 255, 0).astype(np.uint8)
    gray = check_gray_image(page, "page")
    labels = check_label_image(labels, "labels")
    check_same_shape(gray, labels, "page and labels")
    out = np.stack([gray, gray, gray], axis=-1)
    for lid in np.unique(labels):
        if lid > 0:
            out[labels == lid] = label_color(int(lid))
    return out


def _fail(exc: BaseException, path=None) -> None:
    payload = {"error": str(exc)}
    if path is not None:
        payload["path"] = str(path)
    click.echo("error: " + json.dumps(payload, sort_keys=True), err=True)
    raise SystemExit(1)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except ValueError as exc:
            raise click.UsageError(str(exc))
        except (RasterFormatError, PredictorContractError, OSError) as exc:
            _fail(exc)

    return wrapper


def _write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _config(ctx, **overrides) -> ToolConfig:
    base: ToolConfig = ctx.obj
    return base.merged(**overrides)


@click.group()
@click.option(
    "-c", "--config", "config_path", type=click.Path(), default=None,
    help="Flat key=value config file; flags override its values.",
)
@click.version_option(
    version=__version__,
    message=f"lineseg %(version)s (report schema {SCHEMA_VERSION})",
)
@click.pass_context
def main(ctx, config_path) -> None:
    """Text line segmentation toolkit."""
    try:
        ctx.obj = ToolConfig.from_file(config_path) if config_path else ToolConfig()
    except ValueError as exc:
        raise click.UsageError(str(exc))
    except OSError as exc:
        _fail(exc, path=config_path)


@main.command("binarize")
@click.option("--in", "in_path", required=True, help="8-bit grayscale PNG.")
@click.option("--out", "out_path", required=True, help="Binary page PNG (ink = 255).")
@click.option("--method", type=click.Choice(["otsu", "sauvola"]), default="otsu")
@click.option("--sauvola-window", type=int, default=31, show_default=True)
@click.option("--sauvola-k", type=float, default=0.2, show_default=True)
@_guarded
def cmd_binarize(in_path, out_path, method, sauvola_window, sauvola_k) -> None:
    """Threshold a grayscale page so ink becomes foreground."""
    gray = load_gray(in_path)
    save_binary(binarize(gray, method, window=sauvola_window, k=sauvola_k), out_path)


@main.command("patches")
@click.option("--page", "page_path", required=True)
@click.option("--labels", "labels_path", required=True)
@click.option("--count", type=int, required=True)
@click.option("--window", type=int, default=None, help="Patch side (default: config).")
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", required=True)
@click.pass_context
@_guarded
def cmd_patches(ctx, page_path, labels_path, count, window, seed, out_dir) -> None:
    """Sample seeded random training patches (PNG pairs + manifest.json)."""
    cfg = _config(ctx, seed=seed)
    eff_window = cfg.window if window is None else window  # core plays no role here
    page = load_binary(page_path)
    labels = load_label_raster(labels_path)
    patches = sample_patches(
        page, labels, count, window=eff_window, seed=cfg.seed, source=str(page_path)
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = patches.manifest()
    for i, (img, lab) in enumerate(patches):
        entry = manifest["patches"][i]
        entry["page_file"] = f"patch_{i:05d}_page.png"
        entry["labels_file"] = f"patch_{i:05d}_labels.png"
        save_binary(img, out / entry["page_file"])
        write_label_raster(lab, out / entry["labels_file"])
    manifest["effective_config"] = {**cfg.to_dict(), "window": eff_window}
    manifest["tool_version"] = __version__
    manifest["schema_version"] = SCHEMA_VERSION
    _write_json(out / "manifest.json", manifest)


@main.command("predict")
@click.option("--page", "page_path", required=True)
@click.option(
    "--predictor", "predictor_arg", required=True,
    help='Predictor spec, e.g. cmd:"python serve.py model.ckpt".',
)
@click.option("--stream", is_flag=True, help="Length-prefixed streaming protocol.")
@click.option("--window", type=int, default=None)
@click.option("--core", type=int, default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--out", "out_path", required=True)
@click.pass_context
@_guarded
def cmd_predict(ctx, page_path, predictor_arg, stream, window, core, threshold, out_path) -> None:
    """Predict a page's line mask through a subprocess predictor."""
    cfg = _config(ctx, window=window, core=core, threshold=threshold)
    if not predictor_arg.startswith("cmd:"):
        raise click.UsageError("--predictor must look like cmd:\"<command>\"")
    page = load_binary(page_path)
    with SubprocessPredictor(predictor_arg[4:], stream=stream) as predictor:
        mask = stitch_predict(
            page, predictor, cfg.window_spec(), threshold=cfg.threshold
        )
    save_binary(mask, out_path)


@main.command("postprocess")
@click.option("--in", "in_path", required=True)
@click.option("--out", "out_path", required=True)
@click.option("--n", "n_subsets", type=int, default=None, help="Orientation subsets N.")
@click.option("--epsilon", type=float, default=None)
@click.option("--kernel-length", type=int, default=None)
@click.option("--kernel-thickness", type=int, default=None)
@click.option("--dump-ellipses", "dump_path", default=None)
@click.pass_context
@_guarded
def cmd_postprocess(
    ctx, in_path, out_path, n_subsets, epsilon, kernel_length, kernel_thickness, dump_path
) -> None:
    """Reconnect broken line masks by orientation-aware dilation."""
    cfg = _config(
        ctx,
        n_subsets=n_subsets,
        epsilon=epsilon,
        kernel_length=kernel_length,
        kernel_thickness=kernel_thickness,
    )
    mask = load_binary(in_path)
    fixed, details = postprocess_mask(mask, cfg.postprocess_params(), return_details=True)
    save_binary(fixed, out_path)
    if dump_path:
        _write_json(
            dump_path,
            {
                "schema_version": SCHEMA_VERSION,
                "tool_version": __version__,
                "components": details,
                "effective_config": cfg.to_dict(),
            },
        )


@main.command("lines")
@click.option("--in", "in_path", required=True)
@click.option("--out", "out_path", required=True)
@click.pass_context
@_guarded
def cmd_lines(ctx, in_path, out_path) -> None:
    """Label each blob of a mask as one extracted line."""
    cfg = _config(ctx)
    write_label_raster(masks_to_lines(load_binary(in_path), cfg.connectivity), out_path)


@main.command("evaluate")
@click.option("--gt", "gt_path", required=True, help="Ground-truth label raster PNG.")
@click.option("--pred", "pred_path", required=True, help="Extracted label raster PNG.")
@click.option("--page", "page_path", required=True, help="Binarized page PNG.")
@click.option("--averaging", type=click.Choice(["macro", "micro"]), default=None)
@click.option("--report", "report_path", required=True)
@click.pass_context
@_guarded
def cmd_evaluate(ctx, gt_path, pred_path, page_path, averaging, report_path) -> None:
    """Score extracted line masks against ground truth."""
    cfg = _config(ctx, averaging=averaging)
    page = load_binary(page_path)
    gt = load_label_raster(gt_path)
    pred = load_label_raster(pred_path)
    components = connected_components(page, cfg.connectivity)
    report = evaluate(components, gt, pred, cfg.metric_config())
    payload = report.to_dict()
    payload["effective_config"] = cfg.to_dict()
    _write_json(report_path, payload)
    agg = payload["aggregates"][cfg.averaging]
    click.echo(
        f"recall {agg['recall']:.4f} precision {agg['precision']:.4f} "
        f"f-measure {agg['f_measure']:.4f} ({cfg.averaging})"
    )


@main.command("synth")
@click.option("--spec", "spec_path", required=True, help="JSON page spec.")
@click.option("--out-page", "page_path", required=True)
@click.option("--out-gt", "gt_path", required=True)
@click.option("--seed", type=int, default=None)
@click.pass_context
@_guarded
def cmd_synth(ctx, spec_path, page_path, gt_path, seed) -> None:
    """Generate a synthetic dashed-line page with ground-truth masks."""
    cfg = _config(ctx, seed=seed)
    try:
        spec = json.loads(Path(spec_path).read_text())
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"{spec_path}: {exc}")
    if not isinstance(spec, dict) or "size" not in spec or "lines" not in spec:
        raise click.UsageError(f"{spec_path}: expected an object with 'size' and 'lines'")
    lines = [line_spec_from_dict(entry) for entry in spec["lines"]]
    page = generate(lines, size=tuple(spec["size"]), seed=cfg.seed)
    save_binary(page.page, page_path)
    write_label_raster(page.gt_masks, gt_path)


@main.command("overlay")
@click.option("--page", "page_path", required=True, help="Grayscale or binary page PNG.")
@click.option("--labels", "labels_path", required=True)
@click.option("--out", "out_path", required=True)
@_guarded
def cmd_overlay(page_path, labels_path, out_path) -> None:
    """Render labeled lines in color over the page."""
    img = overlay(load_gray(page_path), load_label_raster(labels_path))
    Image.fromarray(img).save(Path(out_path), format="PNG")


if __name__ == "__main__":
    main()
