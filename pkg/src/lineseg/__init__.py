"""Text line segmentation toolkit.

Orientation-aware morphological repair of predicted line masks, a
connectivity-based line extraction accuracy metric, sliding-window
prediction with central-core stitching over pluggable patch predictors,
and a synthetic dashed-line page generator for oracle-backed testing.
"""

__version__ = "0.1.0"

from .config import ToolConfig
from .ellipse import EllipseFit, fit_component, fit_ellipse
from .errors import (
    DegenerateInputError,
    GenerationError,
    LabelRangeError,
    LinesegError,
    PredictorContractError,
    RasterFormatError,
)
from .estimators import ComponentLineLabeler, LineMaskRepairer, SlidingWindowSegmenter
from .metric import EvalReport, LineScore, LineSets, MetricConfig, evaluate
from .pipeline import (
    PatchSet,
    ReplayPredictor,
    SubprocessPredictor,
    WindowSpec,
    masks_to_lines,
    sample_patches,
    stitch_predict,
)
from .postprocess import (
    OrientationSubset,
    PostprocessParams,
    directional_dilate,
    orientation_subsets,
    postprocess_mask,
)
from .raster import (
    Component,
    binarize,
    connected_components,
    label_components,
    load_binary,
    load_gray,
    load_label_raster,
    save_binary,
    write_label_raster,
)
from .synth import LineSpec, SynthPage, generate

__all__ = [
    "Component",
    "ComponentLineLabeler",
    "DegenerateInputError",
    "EllipseFit",
    "EvalReport",
    "GenerationError",
    "LabelRangeError",
    "LineMaskRepairer",
    "LineScore",
    "LineSets",
    "LineSpec",
    "LinesegError",
    "MetricConfig",
    "OrientationSubset",
    "PatchSet",
    "PostprocessParams",
    "PredictorContractError",
    "RasterFormatError",
    "ReplayPredictor",
    "SlidingWindowSegmenter",
    "SubprocessPredictor",
    "SynthPage",
    "ToolConfig",
    "WindowSpec",
    "binarize",
    "connected_components",
    "directional_dilate",
    "evaluate",
    "fit_component",
    "fit_ellipse",
    "generate",
    "label_components",
    "load_binary",
    "load_gray",
    "load_label_raster",
    "masks_to_lines",
    "orientation_subsets",
    "postprocess_mask",
    "sample_patches",
    "save_binary",
    "stitch_predict",
    "write_label_raster",
]
