"""Short-time Fourier analysis with continuous frame positions.

The transform computed here generalizes the classical fixed-grid STFT:
frame ``i`` carries a real-valued temporal position ``t_i`` and a
real-valued window length ``lambda_i``.  With ``p = floor(t_i)`` and
``delta = t_i - p``, frame ``i`` reads samples ``s[p + k]`` (reads
outside the signal return zero) and computes

    S[i, f] = sum_k w(k - delta) * s[p + k] * exp(-2j pi (k - delta) f / N)

over the ``N`` two-sided frequency bins ``f = 0 .. N - 1``.  Both the
window argument and the phase carry the fractional part ``delta``, so
``S`` stays continuous and differentiable in ``t_i`` across integer
sample boundaries.  The tap index ``k`` runs over ``0 .. N`` inclusive:
one tap past the nominal support, so the sample set under the window
changes only where the raised-cosine window has already decayed to zero.
Stopping at ``k = N - 1`` would clip a nonzero tap whenever
``lambda_i > N - 1`` and ``delta > 1/2`` and reintroduce a jump at
integer positions.

``classical_stft`` is the fixed-grid baseline, computed by direct
summation against an explicit DFT kernel so it can serve as an
independent cross-check of the FFT-factored path.

Gradients follow the convention for real scalar losses ``L``: with the
cotangent ``cot[i, f] = (dL/dRe S[i,f] + 1j * dL/dIm S[i,f]) / 2``,

    d_t[i] = sum_f 2 * Re( conj(cot[i, f]) * dS[i, f] / dt_i )

and likewise for ``lambda_i``.  Under this pairing, ``L = sum |S|**2``
has ``cot = S``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from ._validation import (
    as_float_array,
    check_length,
    check_support,
    normalize_window_kind,
)
from .windows import window_eval

__all__ = [
    "Signal",
    "as_signal",
    "FrameLayout",
    "GradientSet",
    "classical_stft",
    "dstft_forward",
    "dstft_backward",
    "true_hop_lengths",
]


@dataclass
class Signal:
    """A finite one-dimensional real signal.

    Parameters
    ----------
    samples : array_like
        Real amplitudes; coerced to a 1-D float64 array.
    sample_rate : float, default 1.0
        Sampling rate in Hz.  Metadata only; the transform works in
        sample units throughout.
    """

    samples: np.ndarray
    sample_rate: float = 1.0

    def __post_init__(self):
        self.samples = as_float_array(self.samples, "samples")
        rate = float(self.sample_rate)
        if not math.isfinite(rate) or rate <= 0.0:
            raise ValueError("sample_rate must be a positive finite number")
        self.sample_rate = rate

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate


def as_signal(obj, sample_rate: float = 1.0) -> Signal:
    """Coerce an array-like or Signal into a Signal."""
    if isinstance(obj, Signal):
        return obj
    return Signal(np.asarray(obj), sample_rate)


@dataclass
class FrameLayout:
    """Per-frame analysis geometry: positions, lengths, shared support.

    Parameters
    ----------
    positions : array_like of shape (T,)
        Strictly increasing frame positions ``t_i`` in samples.  The
        integer part selects the first sample read; the fractional part
        shifts the window and the phase continuously.
    lengths : array_like of shape (T,)
        Window lengths ``lambda_i`` in samples, each in ``(0, support]``.
    support : int
        Shared integer window support ``N``; also the DFT size, so the
        transform has ``N`` frequency bins.
    window : str, default 'hann'
        Tapering kernel, 'hann' or 'gauss'.
    """

    positions: np.ndarray
    lengths: np.ndarray
    support: int
    window: str = "hann"

    def __post_init__(self):
        self.support = check_support(self.support)
        self.window = normalize_window_kind(self.window)
        self.positions = as_float_array(self.positions, "positions")
        self.lengths = as_float_array(self.lengths, "lengths")
        if self.positions.shape != self.lengths.shape:
            raise ValueError("positions and lengths must have the same length")
        if self.positions.shape[0] < 1:
            raise ValueError("a layout needs at least one frame")
        if np.any(np.diff(self.positions) <= 0.0):
            raise ValueError("frame positions must be strictly increasing")
        if np.any(self.lengths <= 0.0) or np.any(self.lengths > self.support):
            raise ValueError(
                f"window lengths must lie in (0, {self.support}]"
            )

    @property
    def n_frames(self) -> int:
        return self.positions.shape[0]

    def copy(self) -> "FrameLayout":
        return replace(
            self, positions=self.positions.copy(), lengths=self.lengths.copy()
        )


class GradientSet(NamedTuple):
    """Per-frame loss gradients for positions and window lengths."""

    d_t: np.ndarray
    d_lambda: np.ndarray


def _check_layout_against(signal: Signal, layout: FrameLayout) -> None:
    # Each frame must overlap the signal: t in [-N, M).
    t = layout.positions
    if t[0] < -float(layout.support) or t[-1] >= signal.n_samples:
        raise ValueError(
            "frame positions must lie in [-support, n_samples) "
            "so every frame overlaps the signal"
        )


def _padded_slice(samples: np.ndarray, start: int, count: int) -> np.ndarray:
    """Read count samples from start, substituting zero outside the signal."""
    out = np.zeros(count, dtype=np.float64)
    lo = max(start, 0)
    hi = min(start + count, samples.shape[0])
    if hi > lo:
        out[lo - start : hi - start] = samples[lo:hi]
    return out


def _fold_dft(y: np.ndarray, n: int) -> np.ndarray:
    # The k = n tap has exp(-2j pi n f / n) = 1, so it folds onto k = 0.
    z = y[:n].copy()
    z[0] += y[n]
    return np.fft.fft(z)


def _map_frames(fn, n_frames: int, threads):
    if threads is not None and int(threads) > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            return list(pool.map(fn, range(n_frames)))
    return [fn(i) for i in range(n_frames)]


def classical_stft(
    signal,
    start_indices,
    support: int,
    window: str = "hann",
    length: float | None = None,
) -> np.ndarray:
    """Fixed-grid STFT baseline computed by direct summation.

    Frame ``i`` starts at the integer sample ``start_indices[i]`` and
    computes ``S[i, f] = sum_{k=0}^{N-1} w[k] s[b_i + k] e^{-2j pi k f / N}``
    with the window evaluated at the integer taps ``k``.  No fast
    transform is used; the sum is evaluated against an explicit DFT
    kernel, which makes this the brute-force reference for the
    FFT-factored path.

    Parameters
    ----------
    signal : Signal or array_like
        Input samples.
    start_indices : sequence of int
        Integer frame start samples; slices reaching past either end of
        the signal are zero-padded.
    support : int
        Window support and DFT size ``N``.
    window : str, default 'hann'
        Tapering kernel.
    length : float, optional
        Window length shared by all frames; defaults to ``support``.

    Returns
    -------
    numpy.ndarray of complex128, shape (T, N)
    """
    sig = as_signal(signal)
    n = check_support(support)
    kind = normalize_window_kind(window)
    lam = float(n) if length is None else check_length(length, n)
    starts = np.asarray(start_indices)
    if starts.ndim != 1 or starts.size == 0:
        raise ValueError("start_indices must be a non-empty 1-D sequence")
    if not np.issubdtype(starts.dtype, np.integer):
        if not np.all(starts == np.floor(starts)):
            raise ValueError("start_indices must be integers")
        starts = starts.astype(np.int64)

    k = np.arange(n, dtype=np.float64)
    taps = window_eval(kind, k, n, lam).value
    # Explicit DFT kernel; O(N^2) per frame by design.
    kernel = np.exp(-2j * math.pi * np.outer(k, k) / n)
    out = np.empty((starts.size, n), dtype=np.complex128)
    for i, b in enumerate(starts):
        out[i] = (taps * _padded_slice(sig.samples, int(b), n)) @ kernel
    return out


def _frame_forward(samples, t, lam, n, kind, method):
    p = math.floor(t)
    delta = t - p
    k = np.arange(n + 1, dtype=np.float64)
    w = window_eval(kind, k - delta, n, lam).value
    y = w * _padded_slice(samples, p, n + 1)
    if method == "fft":
        f = np.arange(n, dtype=np.float64)
        return np.exp(2j * math.pi * delta * f / n) * _fold_dft(y, n)
    expo = np.exp(-2j * math.pi * np.outer(k - delta, np.arange(n)) / n)
    return y @ expo


def dstft_forward(signal, layout: FrameLayout, *, method: str = "fft",
                  threads: int | None = None) -> np.ndarray:
    """Transform a signal under a fractional-position frame layout.

    Parameters
    ----------
    signal : Signal or array_like
        Input samples.
    layout : FrameLayout
        Frame positions, window lengths, support, and window kind.
    method : {'fft', 'direct'}, default 'fft'
        'fft' evaluates the factored form
        ``exp(+2j pi delta f / N) * DFT_N(windowed slice)``; 'direct'
        sums the defining expression term by term.  Both agree to
        roundoff and exist so each can check the other.
    threads : int, optional
        Evaluate frames concurrently with this many threads.  Frames
        are independent, so results are identical for any thread count.

    Returns
    -------
    numpy.ndarray of complex128, shape (T, N)
    """
    sig = as_signal(signal)
    if method not in ("fft", "direct"):
        raise ValueError("method must be 'fft' or 'direct'")
    _check_layout_against(sig, layout)
    n = layout.support
    t, lam, kind = layout.positions, layout.lengths, layout.window

    rows = _map_frames(
        lambda i: _frame_forward(sig.samples, t[i], lam[i], n, kind, method),
        layout.n_frames,
        threads,
    )
    return np.asarray(rows, dtype=np.complex128)


def _frame_backward(samples, t, lam, n, kind, cot_row, method):
    p = math.floor(t)
    delta = t - p
    k = np.arange(n + 1, dtype=np.float64)
    we = window_eval(kind, k - delta, n, lam)
    sl = _padded_slice(samples, p, n + 1)
    f = np.arange(n, dtype=np.float64)
    # d/dt of the phase exponent -2j pi (k - delta) f / N is +2j pi f / N,
    # so the position kernel is -w'(k - delta) plus (2j pi f / N) * w.
    jf = 2j * math.pi * f / n
    if method == "fft":
        phase = np.exp(delta * jf)
        spec = phase * _fold_dft(we.value * sl, n)
        ds_dt = phase * _fold_dft(-we.d_du * sl, n) + jf * spec
        ds_dlam = phase * _fold_dft(we.d_dlambda * sl, n)
    else:
        expo = np.exp(-2j * math.pi * np.outer(k - delta, f) / n)
        spec = (we.value * sl) @ expo
        ds_dt = (-we.d_du * sl) @ expo + jf * spec
        ds_dlam = (we.d_dlambda * sl) @ expo
    grad_t = 2.0 * np.sum(np.real(np.conj(cot_row) * ds_dt))
    grad_lam = 2.0 * np.sum(np.real(np.conj(cot_row) * ds_dlam))
    return grad_t, grad_lam


def dstft_backward(signal, layout: FrameLayout, cotangent, *,
                   method: str = "fft",
                   threads: int | None = None) -> GradientSet:
    """Analytic gradients of a real loss w.r.t. frame positions and lengths.

    Parameters
    ----------
    signal : Signal or array_like
        The same signal given to the forward pass.
    layout : FrameLayout
        The same layout given to the forward pass.
    cotangent : array_like of complex, shape (T, N)
        Loss sensitivity per spectrogram entry,
        ``(dL/dRe S + 1j * dL/dIm S) / 2`` for a real scalar loss L.
    method : {'fft', 'direct'}, default 'fft'
        Evaluation route, as in dstft_forward.
    threads : int, optional
        Thread count for per-frame evaluation.

    Returns
    -------
    GradientSet
        ``d_t[i] = dL/dt_i`` and ``d_lambda[i] = dL/dlambda_i``, each of
        shape (T,), exact derivatives of L as a function of
        ``(Re S, Im S)``.
    """
    sig = as_signal(signal)
    if method not in ("fft", "direct"):
        raise ValueError("method must be 'fft' or 'direct'")
    _check_layout_against(sig, layout)
    n = layout.support
    cot = np.asarray(cotangent, dtype=np.complex128)
    if cot.shape != (layout.n_frames, n):
        raise ValueError(
            f"cotangent shape {cot.shape} does not match the "
            f"({layout.n_frames}, {n}) forward output"
        )
    if not np.all(np.isfinite(cot.real)) or not np.all(np.isfinite(cot.imag)):
        raise ValueError("cotangent entries must be finite")
    t, lam, kind = layout.positions, layout.lengths, layout.window

    pairs = _map_frames(
        lambda i: _frame_backward(
            sig.samples, t[i], lam[i], n, kind, cot[i], method
        ),
        layout.n_frames,
        threads,
    )
    arr = np.asarray(pairs, dtype=np.float64)
    return GradientSet(arr[:, 0].copy(), arr[:, 1].copy())


def true_hop_lengths(layout: FrameLayout) -> np.ndarray:
    """Hop lengths corrected for window-length changes, in samples.

    A window of length ``lambda_i`` inside support ``N`` effectively
    occupies ``t_i + (N - lambda_i)/2 .. t_i + (N + lambda_i)/2``.  The
    first entry is the
    effective start of frame 0 measured from sample 0; later entries
    are the spacings between consecutive effective window ends:

        h[0] = t_0 + (N - lambda_0) / 2
        h[i] = (t_i - t_{i-1}) + (lambda_i - lambda_{i-1}) / 2,  i >= 1

    Returns
    -------
    numpy.ndarray of shape (T,)
    """
    t, lam = layout.positions, layout.lengths
    out = np.empty_like(t)
    out[0] = t[0] + 0.5 * (layout.support - lam[0])
    if t.shape[0] > 1:
        out[1:] = np.diff(t) + 0.5 * np.diff(lam)
    return out
