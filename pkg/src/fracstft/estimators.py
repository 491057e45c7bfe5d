"""Estimator-style interface to the fixed and adaptive transforms.

Both estimators treat one 1-D signal as the fittable object: ``fit``
learns a frame layout for the signal and ``transform`` applies that
layout, returning one row per frame.  ``Spectrogram`` uses a fixed
integer grid; ``AdaptiveSpectrogram`` runs the gradient-ascent adapter
and exposes the optimization trace.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_support
from .objectives import ObjectiveValue
from .optimize import OptimizerConfig, init_uniform, run
from .transform import FrameLayout, as_signal, dstft_forward

__all__ = ["Spectrogram", "AdaptiveSpectrogram"]


def _transform_with(layout: FrameLayout, X, magnitude: bool,
                    threads) -> np.ndarray:
    spec = dstft_forward(as_signal(X), layout, threads=threads)
    return np.abs(spec) if magnitude else spec


class Spectrogram(TransformerMixin, BaseEstimator):
    """Classical fixed-grid short-time Fourier magnitude transformer.

    Parameters
    ----------
    support : int, default 256
        Window support and DFT size ``N``.
    hop : int, default 128
        Integer spacing between frame starts.
    window : str, default 'hann'
        Tapering kernel, 'hann' or 'gauss'.
    magnitude : bool, default True
        Return magnitudes; set False for the complex transform.
    threads : int, optional
        Thread count for per-frame work.

    Attributes
    ----------
    layout_ : FrameLayout
        Integer grid learned from the signal length at fit time.
    n_frames_ : int
        Number of frames on that grid.
    """

    def __init__(self, support: int = 256, hop: int = 128,
                 window: str = "hann", magnitude: bool = True,
                 threads: int | None = None):
        self.support = support
        self.hop = hop
        self.window = window
        self.magnitude = magnitude
        self.threads = threads

    def fit(self, X, y=None):
        sig = as_signal(X)
        n = check_support(self.support)
        hop = int(self.hop)
        if hop <= 0:
            raise ValueError("hop must be a positive integer")
        if sig.n_samples < n:
            raise ValueError(
                f"signal has {sig.n_samples} samples, fewer than the "
                f"support {n}"
            )
        count = (sig.n_samples - n) // hop + 1
        positions = np.arange(count, dtype=np.float64) * hop
        self.layout_ = FrameLayout(
            positions, np.full(count, float(n)), n, self.window
        )
        self.n_frames_ = count
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "layout_")
        return _transform_with(self.layout_, X, self.magnitude, self.threads)


class AdaptiveSpectrogram(TransformerMixin, BaseEstimator):
    """Transformer whose frame layout is adapted to the fitted signal.

    ``fit`` starts from the uniform full-length layout and ascends the
    combined concentration/coverage objective; ``transform`` applies
    the adapted layout.

    Parameters
    ----------
    support : int, default 256
        Window support and DFT size ``N``.
    n_frames : int, default 16
        Number of frames to place.
    window : str, default 'hann'
        Tapering kernel.
    lr_position, lr_length : float, default 0.1
        Ascent rates for positions and lengths.
    max_iters : int, default 500
        Iteration budget.
    tolerance : float, default 1e-12
        Relative combined-objective change that counts as converged.
    combiner : {'weighted', 'min_norm'}, default 'weighted'
        Gradient combination rule.
    alpha : float, default 0.5
        Kurtosis weight for the weighted combiner.
    share_parameters : bool, default False
        Adapt one shared hop and one shared length.
    lambda_min : float, default 2.0
        Smallest allowed window length.
    magnitude : bool, default True
        Return magnitudes from transform.
    threads : int, optional
        Thread count for per-frame work.

    Attributes
    ----------
    layout_ : FrameLayout
        Adapted layout.
    init_layout_ : FrameLayout
        Uniform initialization the adapter started from.
    trace_ : OptimizationTrace
        Per-iteration objectives and layout snapshots.
    objective_ : ObjectiveValue
        Objectives of the final layout.
    n_iterations_ : int
        Number of update steps actually taken.
    """

    def __init__(self, support: int = 256, n_frames: int = 16,
                 window: str = "hann", lr_position: float = 0.1,
                 lr_length: float = 0.1, max_iters: int = 500,
                 tolerance: float = 1e-12, combiner: str = "weighted",
                 alpha: float = 0.5, share_parameters: bool = False,
                 lambda_min: float = 2.0, magnitude: bool = True,
                 threads: int | None = None):
        self.support = support
        self.n_frames = n_frames
        self.window = window
        self.lr_position = lr_position
        self.lr_length = lr_length
        self.max_iters = max_iters
        self.tolerance = tolerance
        self.combiner = combiner
        self.alpha = alpha
        self.share_parameters = share_parameters
        self.lambda_min = lambda_min
        self.magnitude = magnitude
        self.threads = threads

    def _config(self) -> OptimizerConfig:
        return OptimizerConfig(
            support=self.support,
            window=self.window,
            lr_position=self.lr_position,
            lr_length=self.lr_length,
            max_iters=self.max_iters,
            tolerance=self.tolerance,
            combiner=self.combiner,
            alpha=self.alpha,
            share_parameters=self.share_parameters,
            lambda_min=self.lambda_min,
            threads=self.threads,
        )

    def fit(self, X, y=None):
        sig = as_signal(X)
        config = self._config()
        self.init_layout_ = init_uniform(
            sig.n_samples, int(self.n_frames), config.support, config.window
        )
        self.layout_, self.trace_ = run(sig, config, int(self.n_frames))
        final = self.trace_[-1]
        self.objective_ = ObjectiveValue(
            final.kurtosis, final.coverage, final.combined
        )
        self.n_iterations_ = final.iteration
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "layout_")
        return _transform_with(self.layout_, X, self.magnitude, self.threads)
