"""Short-time Fourier analysis with continuous frame parameters.

Frame temporal positions and window lengths are real-valued parameters
of the transform, with analytic gradients for both, so a frame layout
can be adapted to a signal by gradient ascent on spectral energy
concentration under a coverage constraint.
"""

from ._validation import WINDOW_KINDS
from .windows import WindowEval, window_eval
from .transform import (
    FrameLayout,
    GradientSet,
    Signal,
    as_signal,
    classical_stft,
    dstft_backward,
    dstft_forward,
    true_hop_lengths,
)
from .objectives import (
    POWER_FLOOR,
    ObjectiveValue,
    combine_objectives,
    coverage_objective,
    frame_weights,
    kurtosis_objective,
    min_norm_gamma,
    objective_gradients,
)
from .optimize import (
    CONVERGENCE_WINDOW,
    MIN_HOP,
    OptimizationTrace,
    OptimizerConfig,
    TraceRecord,
    init_uniform,
    run,
    step,
)
from .signal_io import (
    SegmentSpec,
    generate_piecewise_sine,
    read_signal,
    read_spectrogram_csv,
    write_layout,
    write_signal,
    write_spectrogram,
    write_trace,
)
from .estimators import AdaptiveSpectrogram, Spectrogram

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "WINDOW_KINDS",
    "WindowEval",
    "window_eval",
    "Signal",
    "as_signal",
    "FrameLayout",
    "GradientSet",
    "classical_stft",
    "dstft_forward",
    "dstft_backward",
    "true_hop_lengths",
    "POWER_FLOOR",
    "ObjectiveValue",
    "frame_weights",
    "kurtosis_objective",
    "coverage_objective",
    "objective_gradients",
    "combine_objectives",
    "min_norm_gamma",
    "MIN_HOP",
    "CONVERGENCE_WINDOW",
    "OptimizerConfig",
    "TraceRecord",
    "OptimizationTrace",
    "init_uniform",
    "step",
    "run",
    "SegmentSpec",
    "generate_piecewise_sine",
    "read_signal",
    "write_signal",
    "write_spectrogram",
    "read_spectrogram_csv",
    "write_trace",
    "write_layout",
    "Spectrogram",
    "AdaptiveSpectrogram",
]
