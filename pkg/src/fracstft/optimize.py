"""Gradient-ascent adaptation of frame positions and window lengths.

Starting from a uniform, full-length layout (the classical fixed-grid
transform), the optimizer repeatedly evaluates the two objectives,
combines their gradients into one ascent direction, applies fixed
learning-rate updates, and projects the result back onto the feasible
set: lengths in ``[lambda_min, N]``, positions in ``[-N/2, M)`` and
strictly increasing with a minimum hop of 1e-3 samples.

The loop is deterministic: there is no randomness here, and per-frame
gradient work is independent of thread count, so repeated runs on the
same signal produce identical traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_support, normalize_window_kind
from .objectives import (
    combine_objectives,
    coverage_objective,
    kurtosis_objective,
    min_norm_gamma,
    normalize_combiner,
    objective_gradients,
    ObjectiveValue,
)
from .transform import FrameLayout, GradientSet, as_signal, dstft_forward

__all__ = [
    "MIN_HOP",
    "CONVERGENCE_WINDOW",
    "OptimizerConfig",
    "TraceRecord",
    "OptimizationTrace",
    "init_uniform",
    "step",
    "run",
]

# Smallest allowed spacing between consecutive frame positions, and the
# number of consecutive small relative objective changes that counts as
# convergence.
MIN_HOP = 1e-3
CONVERGENCE_WINDOW = 10


@dataclass
class OptimizerConfig:
    """Settings for the layout adapter.

    Parameters
    ----------
    support : int
        Window support and DFT size ``N``.
    window : str, default 'hann'
        Tapering kernel.
    lr_position : float, default 0.1
        Ascent rate for frame positions, in samples per unit gradient.
    lr_length : float, default 0.1
        Ascent rate for window lengths.
    max_iters : int, default 500
        Maximum number of update steps.
    tolerance : float, default 1e-12
        Relative combined-objective change below which an iteration
        counts toward convergence; CONVERGENCE_WINDOW consecutive such
        iterations stop the run.  May be ``inf`` to stop as early as
        possible.
    combiner : {'weighted', 'min_norm'}, default 'weighted'
        Gradient combination rule.  The weighted sum with ``alpha=0.5``
        keeps ascending concentration even when coverage sits at its
        saturated optimum, where the min-norm rule returns the zero
        direction; min_norm is available for a conservative
        two-objective direction.
    alpha : float, default 0.5
        Kurtosis weight for the weighted combiner, in [0, 1].
    share_parameters : bool, default False
        Adapt a single shared hop and a single shared length instead of
        per-frame values; the first frame position stays fixed.
    lambda_min : float, default 2.0
        Lower bound for window lengths; at least 2 samples.
    threads : int, optional
        Thread count for per-frame transform work.
    """

    support: int
    window: str = "hann"
    lr_position: float = 0.1
    lr_length: float = 0.1
    max_iters: int = 500
    tolerance: float = 1e-12
    combiner: str = "weighted"
    alpha: float = 0.5
    share_parameters: bool = False
    lambda_min: float = 2.0
    threads: int | None = None

    def __post_init__(self):
        self.support = check_support(self.support)
        self.window = normalize_window_kind(self.window)
        self.combiner = normalize_combiner(self.combiner)
        self.lr_position = float(self.lr_position)
        self.lr_length = float(self.lr_length)
        if self.lr_position < 0.0 or self.lr_length < 0.0:
            raise ValueError("learning rates must be non-negative")
        self.max_iters = int(self.max_iters)
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        self.tolerance = float(self.tolerance)
        if not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")
        self.alpha = float(self.alpha)
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        self.lambda_min = float(self.lambda_min)
        if self.lambda_min < 2.0:
            raise ValueError("lambda_min must be at least 2 samples")
        if self.lambda_min > self.support:
            raise ValueError("lambda_min cannot exceed the support")
        if self.threads is not None and int(self.threads) < 1:
            raise ValueError("threads must be a positive integer")


@dataclass
class TraceRecord:
    """State recorded at the start of one iteration."""

    iteration: int
    layout: FrameLayout
    kurtosis: float
    coverage: float
    combined: float
    grad_t_norm: float
    grad_lambda_norm: float


@dataclass
class OptimizationTrace:
    """Sequence of per-iteration records, one per evaluated layout."""

    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, index):
        return self.records[index]


def init_uniform(signal_length: int, n_frames: int, support: int,
                 window: str = "hann") -> FrameLayout:
    """Uniform full-length layout matching a classical fixed-grid STFT.

    The signal is split into ``n_frames`` equal tiles and one window of
    length ``support`` is centered on each tile midpoint: frame ``i``
    gets ``t_i = (i + 0.5) * M / T - (N - 1) / 2``.  A single frame is
    centered on the whole signal.

    Parameters
    ----------
    signal_length : int
        Number of signal samples ``M``.
    n_frames : int
        Frame count ``T``; at most ``M``.
    support : int
        Window support ``N``; at most ``M``.
    window : str, default 'hann'
        Tapering kernel.
    """
    m = int(signal_length)
    t_count = int(n_frames)
    n = check_support(support)
    if m <= 0:
        raise ValueError("signal_length must be positive")
    if t_count < 1:
        raise ValueError("n_frames must be at least 1")
    if t_count > m:
        raise ValueError(
            f"cannot place {t_count} frames on a {m}-sample signal"
        )
    if n > m:
        raise ValueError("support cannot exceed the signal length")
    centers = (np.arange(t_count, dtype=np.float64) + 0.5) * (m / t_count)
    positions = centers - 0.5 * (n - 1)
    lengths = np.full(t_count, float(n))
    return FrameLayout(positions, lengths, n, window)


def _evaluate(sig, layout: FrameLayout, config: OptimizerConfig):
    """Objectives, combined value, and combined ascent direction."""
    spec = dstft_forward(sig, layout, threads=config.threads)
    kurt = kurtosis_objective(spec, layout)
    cov = coverage_objective(layout, sig.n_samples)
    grad_k, grad_c = objective_gradients(
        sig, layout, spectrogram=spec, threads=config.threads
    )
    if config.combiner == "weighted":
        gamma = config.alpha
    else:
        gamma = min_norm_gamma(grad_k, grad_c)
    direction = combine_objectives(
        grad_k, grad_c, mode=config.combiner, alpha=config.alpha
    )
    for name, arr in (("d_t", direction.d_t), ("d_lambda", direction.d_lambda)):
        if not np.all(np.isfinite(arr)):
            raise RuntimeError(
                f"non-finite {name} gradient at layout positions "
                f"{layout.positions!r}; aborting"
            )
    value = ObjectiveValue(kurt, cov, gamma * kurt + (1.0 - gamma) * cov)
    return value, direction


def _project_positions(t: np.ndarray, lam: np.ndarray, support: int,
                       signal_length: int):
    """Sort frames by position and enforce bounds and the minimum hop."""
    lo = -0.5 * support
    hi = signal_length - MIN_HOP
    order = np.argsort(t, kind="stable")
    t = np.clip(t[order], lo, hi)
    lam = lam[order]
    for i in range(1, t.shape[0]):
        if t[i] < t[i - 1] + MIN_HOP:
            t[i] = t[i - 1] + MIN_HOP
    if t[-1] > hi:
        t[-1] = hi
        for i in range(t.shape[0] - 2, -1, -1):
            if t[i] > t[i + 1] - MIN_HOP:
                t[i] = t[i + 1] - MIN_HOP
    return t, lam


def _apply_update(layout: FrameLayout, direction: GradientSet,
                  config: OptimizerConfig, signal_length: int) -> FrameLayout:
    n = layout.support
    t = layout.positions.copy()
    lam = layout.lengths.copy()
    n_frames = t.shape[0]

    if config.share_parameters:
        # One shared hop and one shared length; the first position is
        # not a free parameter.  The hop gradient of a uniform grid
        # t_i = t_0 + i*H is sum_i i * d_t[i]; dividing by the hop
        # count makes it an average per-hop update.
        pos_hi = signal_length - MIN_HOP
        t0 = min(max(t[0], -0.5 * n), pos_hi)
        shared_lam = float(lam.mean())
        shared_lam += config.lr_length * float(direction.d_lambda.mean())
        shared_lam = min(max(shared_lam, config.lambda_min), float(n))
        if n_frames > 1:
            hops = n_frames - 1
            hop = (t[-1] - t[0]) / hops
            idx = np.arange(n_frames, dtype=np.float64)
            hop += config.lr_position * float(idx @ direction.d_t) / hops
            hop = min(max(hop, MIN_HOP), max(MIN_HOP, (pos_hi - t0) / hops))
            t = t0 + idx * hop
        else:
            t = np.array([t0])
        lam = np.full(n_frames, shared_lam)
    else:
        t += config.lr_position * direction.d_t
        lam += config.lr_length * direction.d_lambda
        lam = np.clip(lam, config.lambda_min, float(n))
        t, lam = _project_positions(t, lam, n, signal_length)

    return FrameLayout(t, lam, n, layout.window)


def step(signal, layout: FrameLayout, config: OptimizerConfig):
    """One projected ascent step.

    Evaluates the objectives and the combined direction at ``layout``,
    applies the learning-rate updates, and projects back onto the
    feasible set.

    Returns
    -------
    (FrameLayout, ObjectiveValue)
        The updated layout and the objectives of the input layout.
    """
    sig = as_signal(signal)
    value, direction = _evaluate(sig, layout, config)
    return _apply_update(layout, direction, config, sig.n_samples), value


def run(signal, config: OptimizerConfig, n_frames: int):
    """Adapt a uniform initialization for up to ``max_iters`` steps.

    Iterates ``step`` from ``init_uniform`` until the iteration budget
    is spent or the relative change of the combined objective stays
    below ``config.tolerance`` for CONVERGENCE_WINDOW consecutive
    iterations.  Record ``i`` of the trace holds the layout entering
    iteration ``i`` together with its objectives and the infinity norms
    of the combined direction; the returned layout is the one of the
    last record.

    Returns
    -------
    (FrameLayout, OptimizationTrace)
    """
    sig = as_signal(signal)
    layout = init_uniform(sig.n_samples, n_frames, config.support,
                          config.window)
    trace = OptimizationTrace()
    streak = 0
    prev = None
    iteration = 0
    while True:
        value, direction = _evaluate(sig, layout, config)
        trace.records.append(TraceRecord(
            iteration=iteration,
            layout=layout.copy(),
            kurtosis=value.kurtosis,
            coverage=value.coverage,
            combined=value.combined,
            grad_t_norm=float(np.abs(direction.d_t).max()),
            grad_lambda_norm=float(np.abs(direction.d_lambda).max()),
        ))
        if prev is not None:
            rel = abs(value.combined - prev) / max(abs(prev), 1e-300)
            streak = streak + 1 if rel < config.tolerance else 0
        prev = value.combined
        if iteration >= config.max_iters or streak >= CONVERGENCE_WINDOW:
            break
        layout = _apply_update(layout, direction, config, sig.n_samples)
        iteration += 1
    return layout, trace
