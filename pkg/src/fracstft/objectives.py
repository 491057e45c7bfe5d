"""Adaptation criteria for frame layouts and their analytic gradients.

Two scalar objectives drive the layout adapter:

* Weighted spectral kurtosis ``K``: per frame, the ratio of the fourth
  to the squared second moment of the magnitude spectrum, averaged over
  frames with weights proportional to the local frame spacing.  High
  values mean energy concentrated in few bins.
* Coverage ``C``: the fraction of the signal overlapped by at least one
  analysis window, computed from effective window extents and hop
  lengths and clamped to [0, 1].

Both are differentiable in the frame positions ``t`` and window lengths
``lambda`` away from a measure-zero set of ties (min arguments equal,
clamp boundary, silent-frame power floor), where the subgradient 0 is
used.  The kurtosis gradient flows through the spectrogram (via the
transform's backward pass) and through the spacing weights, which
depend on ``t`` directly.
"""

from __future__ import annotations

import math

import numpy as np

from .transform import (
    FrameLayout,
    GradientSet,
    as_signal,
    dstft_backward,
    dstft_forward,
    true_hop_lengths,
)

__all__ = [
    "POWER_FLOOR",
    "ObjectiveValue",
    "frame_weights",
    "kurtosis_objective",
    "coverage_objective",
    "objective_gradients",
    "combine_objectives",
    "min_norm_gamma",
]

# Frames whose mean spectral power falls below this floor contribute
# kurtosis 1 with zero spectrogram gradient, avoiding 0/0 on silence.
POWER_FLOOR = 1e-30

_COMBINER_ALIASES = {
    "weighted": "weighted",
    "weighted_sum": "weighted",
    "min_norm": "min_norm",
    "minnorm": "min_norm",
}


def normalize_combiner(mode: str) -> str:
    try:
        return _COMBINER_ALIASES[str(mode).lower()]
    except KeyError:
        raise ValueError(
            f"unknown combiner {mode!r}; expected 'weighted' or 'min_norm'"
        ) from None


class ObjectiveValue:
    """Bundle of the two objectives and their combined scalar."""

    __slots__ = ("kurtosis", "coverage", "combined")

    def __init__(self, kurtosis: float, coverage: float, combined: float):
        self.kurtosis = float(kurtosis)
        self.coverage = float(coverage)
        self.combined = float(combined)

    def __repr__(self):
        return (
            f"ObjectiveValue(kurtosis={self.kurtosis!r}, "
            f"coverage={self.coverage!r}, combined={self.combined!r})"
        )


def frame_weights(layout: FrameLayout) -> np.ndarray:
    """Per-frame spacing weights used by the weighted kurtosis.

    End frames weigh their single adjacent hop; interior frames weigh
    half the span between their neighbors:

        w[0] = t_1 - t_0
        w[i] = (t_{i+1} - t_{i-1}) / 2      for 0 < i < T - 1
        w[T-1] = t_{T-1} - t_{T-2}

    A single-frame layout has no spacing to weigh; its weight is 1.
    """
    t = layout.positions
    if t.shape[0] == 1:
        return np.ones(1, dtype=np.float64)
    w = np.empty_like(t)
    w[0] = t[1] - t[0]
    w[-1] = t[-1] - t[-2]
    if t.shape[0] > 2:
        w[1:-1] = 0.5 * (t[2:] - t[:-2])
    return w


def _kurtosis_stats(power: np.ndarray, weights: np.ndarray):
    # power is |S|^2, shape (T, F); means taken over all F bins.
    m2 = power.mean(axis=1)
    m4 = (power * power).mean(axis=1)
    live = m2 >= POWER_FLOOR
    kurt = np.ones_like(m2)
    kurt[live] = m4[live] / (m2[live] * m2[live])
    total = float(weights.sum())
    value = float((weights * kurt).sum() / total)
    return value, kurt, m2, m4, live, total


def kurtosis_objective(spectrogram, layout: FrameLayout) -> float:
    """Spacing-weighted mean of per-frame spectral kurtosis.

    Per frame, kurtosis is ``mean_f(|S|^4) / mean_f(|S|^2)^2`` over all
    frequency bins, which is 1 for a flat magnitude spectrum and F for
    a one-hot spectrum of F bins.  Frames with mean power below
    POWER_FLOOR contribute the floor value 1.
    """
    spec = np.asarray(spectrogram, dtype=np.complex128)
    if spec.ndim != 2 or spec.shape[0] != layout.n_frames:
        raise ValueError(
            f"spectrogram shape {spec.shape} does not match the "
            f"{layout.n_frames}-frame layout"
        )
    power = np.abs(spec) ** 2
    value, _, _, _, _, _ = _kurtosis_stats(power, frame_weights(layout))
    return value


def _effective_extents(layout: FrameLayout, n_samples: int):
    # Window i occupies [a_i, b_i]; only the part inside [0, M) counts.
    t, lam = layout.positions, layout.lengths
    a = t + 0.5 * (layout.support - lam)
    b = a + lam
    eff = np.maximum(0.0, np.minimum(b, float(n_samples)) - np.maximum(a, 0.0))
    return a, b, eff


def coverage_objective(layout: FrameLayout, n_samples: int) -> float:
    """Fraction of the signal overlapped by at least one window.

    Each window contributes its effective (in-signal) length, capped by
    the following frame's corrected hop so overlapped stretches are not
    double counted; the last window is uncapped.  The normalized sum is
    clamped to [0, 1].
    """
    n_samples = int(n_samples)
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    _, _, eff = _effective_extents(layout, n_samples)
    caps = np.full(layout.n_frames, np.inf)
    if layout.n_frames > 1:
        caps[:-1] = true_hop_lengths(layout)[1:]
    raw = float(np.minimum(eff, caps).sum()) / n_samples
    return min(max(raw, 0.0), 1.0)


def _kurtosis_gradients(signal, layout, spec, threads) -> GradientSet:
    power = np.abs(spec) ** 2
    weights = frame_weights(layout)
    value, kurt, m2, m4, live, total = _kurtosis_stats(power, weights)

    # Spectrogram path: dK/dP[i,f] for live frames, then cot = dK/dP * S.
    n_bins = spec.shape[1]
    coef = np.zeros_like(m2)
    coef[live] = 2.0 * weights[live] / (total * n_bins * m2[live] ** 2)
    center = np.zeros_like(m2)
    center[live] = m4[live] / m2[live]
    cot = (coef[:, None] * (power - center[:, None])) * spec
    grads = dstft_backward(signal, layout, cot, threads=threads)

    # Weight path: the spacing weights depend on t directly.
    t = layout.positions
    n_frames = t.shape[0]
    if n_frames > 1:
        gw = (kurt - value) / total
        d_t = grads.d_t
        d_t[1] += gw[0]
        d_t[0] -= gw[0]
        d_t[-1] += gw[-1]
        d_t[-2] -= gw[-1]
        d_t[2:] += 0.5 * gw[1:-1]
        d_t[:-2] -= 0.5 * gw[1:-1]
    return grads


def _coverage_gradients(layout: FrameLayout, n_samples: int) -> GradientSet:
    t = layout.positions
    n_frames = t.shape[0]
    g_t = np.zeros(n_frames)
    g_lam = np.zeros(n_frames)
    a, b, eff = _effective_extents(layout, n_samples)
    caps = np.full(n_frames, np.inf)
    if n_frames > 1:
        caps[:-1] = true_hop_lengths(layout)[1:]
    raw = float(np.minimum(eff, caps).sum()) / n_samples
    if not 0.0 < raw < 1.0:
        # Clamped (or exactly at the boundary): subgradient 0.
        return GradientSet(g_t, g_lam)

    m = float(n_samples)
    for i in range(n_frames):
        if eff[i] < caps[i]:
            if eff[i] <= 0.0:
                continue
            # d eff / d t and d eff / d lambda via the boundary indicators;
            # exact ties with the signal edges take subgradient 0.
            upper = 1.0 if b[i] < m else 0.0
            lower = 1.0 if a[i] > 0.0 else 0.0
            g_t[i] += (upper - lower) / m
            g_lam[i] += 0.5 * (upper + lower) / m
        elif caps[i] < eff[i]:
            # Cap branch: the corrected hop of frame i+1.
            g_t[i + 1] += 1.0 / m
            g_t[i] -= 1.0 / m
            g_lam[i + 1] += 0.5 / m
            g_lam[i] -= 0.5 / m
    return GradientSet(g_t, g_lam)


def objective_gradients(signal, layout: FrameLayout, *, spectrogram=None,
                        threads: int | None = None):
    """Gradients of kurtosis and coverage w.r.t. positions and lengths.

    Parameters
    ----------
    signal : Signal or array_like
        Input samples.
    layout : FrameLayout
        Layout at which to differentiate.
    spectrogram : array_like of complex, optional
        Precomputed forward transform of (signal, layout); recomputed
        when omitted.
    threads : int, optional
        Thread count for the per-frame transform work.

    Returns
    -------
    (GradientSet, GradientSet)
        Kurtosis gradients and coverage gradients.  Both are exact
        derivatives away from the ties of min/clamp/floor, where the
        subgradient 0 is used.
    """
    sig = as_signal(signal)
    if spectrogram is None:
        spectrogram = dstft_forward(sig, layout, threads=threads)
    else:
        spectrogram = np.asarray(spectrogram, dtype=np.complex128)
        if spectrogram.shape != (layout.n_frames, layout.support):
            raise ValueError(
                "precomputed spectrogram shape does not match the layout"
            )
    grad_k = _kurtosis_gradients(sig, layout, spectrogram, threads)
    grad_c = _coverage_gradients(layout, sig.n_samples)
    return grad_k, grad_c


def min_norm_gamma(grad_a: GradientSet, grad_b: GradientSet) -> float:
    """Convex weight of grad_a in the minimum-norm combination.

    Over the segment ``gamma * g1 + (1 - gamma) * g2`` the squared norm
    is quadratic in gamma; its minimizer clamped to [0, 1] is
    ``<g2 - g1, g2> / |g1 - g2|^2``.  Coincident gradients return 1.
    """
    g1 = np.concatenate([grad_a.d_t, grad_a.d_lambda])
    g2 = np.concatenate([grad_b.d_t, grad_b.d_lambda])
    diff = g1 - g2
    denom = float(diff @ diff)
    if math.sqrt(denom) < 1e-12:
        return 1.0
    return min(max(float(-diff @ g2) / denom, 0.0), 1.0)


def combine_objectives(grad_kurtosis: GradientSet, grad_coverage: GradientSet,
                       mode: str = "min_norm",
                       alpha: float = 0.5) -> GradientSet:
    """Merge the two objective gradients into one ascent direction.

    Parameters
    ----------
    grad_kurtosis, grad_coverage : GradientSet
        Gradients of the two objectives, equal shapes.
    mode : {'min_norm', 'weighted'}, default 'min_norm'
        'weighted' returns ``alpha * g_K + (1 - alpha) * g_C``.
        'min_norm' returns the minimum-norm convex combination of the
        two gradients, which is a common ascent direction whenever one
        exists; its norm never exceeds either input's.
    alpha : float, default 0.5
        Kurtosis weight for 'weighted'; must lie in [0, 1].

    Returns
    -------
    GradientSet
    """
    if grad_kurtosis.d_t.shape != grad_coverage.d_t.shape:
        raise ValueError("gradient sets must have equal shapes")
    mode = normalize_combiner(mode)
    if mode == "weighted":
        alpha = float(alpha)
        if not 0.0 <= alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        gamma = alpha
    else:
        gamma = min_norm_gamma(grad_kurtosis, grad_coverage)
    return GradientSet(
        gamma * grad_kurtosis.d_t + (1.0 - gamma) * grad_coverage.d_t,
        gamma * grad_kurtosis.d_lambda + (1.0 - gamma) * grad_coverage.d_lambda,
    )
