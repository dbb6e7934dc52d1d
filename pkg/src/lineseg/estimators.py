"""scikit-learn style wrappers so the pipeline composes with the ecosystem.

All estimators are stateless (fit validates and returns self) and accept
either a single 2D page or a sequence of pages, returning the matching
shape. Construction stores parameters verbatim, so get_params/set_params
and clone() behave as sklearn expects; a typical composition is

    Pipeline([("segment", SlidingWindowSegmenter(predictor)),
              ("repair", LineMaskRepairer()),
              ("label", ComponentLineLabeler())])
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .pipeline import WindowSpec, masks_to_lines, stitch_predict
from .postprocess import PostprocessParams, postprocess_mask

__all__ = ["ComponentLineLabeler", "LineMaskRepairer", "SlidingWindowSegmenter"]


def _map_pages(X, fn):
    if isinstance(X, np.ndarray) and X.ndim == 2:
        return fn(X)
    return [fn(np.asarray(page)) for page in X]


class LineMaskRepairer(BaseEstimator, TransformerMixin):
    """Transformer applying the orientation-subset mask repair."""

    def __init__(
        self,
        n_subsets: int = 10,
        epsilon: float = 0.2,
        kernel_length: int = 21,
        kernel_thickness: int = 3,
        connectivity: int = 8,
    ):
        self.n_subsets = n_subsets
        self.epsilon = epsilon
        self.kernel_length = kernel_length
        self.kernel_thickness = kernel_thickness
        self.connectivity = connectivity

    def _params(self) -> PostprocessParams:
        return PostprocessParams(
            n_subsets=self.n_subsets,
            epsilon=self.epsilon,
            kernel_length=self.kernel_length,
            kernel_thickness=self.kernel_thickness,
            connectivity=self.connectivity,
        )

    def __sklearn_is_fitted__(self) -> bool:
        return True  # stateless

    def fit(self, X=None, y=None):
        self._params()
        return self

    def transform(self, X):
        params = self._params()
        return _map_pages(X, lambda page: postprocess_mask(page, params))


class SlidingWindowSegmenter(BaseEstimator):
    """Predictor wrapper running the pad/slide/core-stitch protocol."""

    def __init__(
        self,
        predictor=None,
        window: int = 320,
        core: int = 100,
        threshold: float = 0.5,
        workers: int = 1,
    ):
        self.predictor = predictor
        self.window = window
        self.core = core
        self.threshold = threshold
        self.workers = workers

    def _spec(self) -> WindowSpec:
        return WindowSpec(window=self.window, core=self.core)

    def __sklearn_is_fitted__(self) -> bool:
        return True  # stateless

    def fit(self, X=None, y=None):
        self._spec()
        if self.predictor is None:
            raise ValueError("SlidingWindowSegmenter requires a predictor")
        return self

    def predict(self, X):
        if self.predictor is None:
            raise ValueError("SlidingWindowSegmenter requires a predictor")
        spec = self._spec()
        return _map_pages(
            X,
            lambda page: stitch_predict(
                page, self.predictor, spec, threshold=self.threshold, workers=self.workers
            ),
        )

    def transform(self, X):
        return self.predict(X)


class ComponentLineLabeler(BaseEstimator, TransformerMixin):
    """Transformer labeling each mask blob as one extracted line."""

    def __init__(self, connectivity: int = 8):
        self.connectivity = connectivity

    def __sklearn_is_fitted__(self) -> bool:
        return True  # stateless

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return _map_pages(X, lambda mask: masks_to_lines(mask, self.connectivity))
