"""Signal synthesis, ingestion, and artifact export.

Formats, all deterministic (identical inputs give byte-identical files):

* ``csv_float`` signal: optional ``# sample_rate=<float>`` header, then
  one float per line, 17 significant digits.
* ``wav_pcm16_mono``: 16-bit PCM mono WAV; integer samples map to
  ``[-1, 1)`` through division by 32768.
* ``csv_mag`` spectrogram: ``# N=<int> T=<int>`` header, then ``F``
  rows of ``T`` comma-separated magnitudes (row ``f``, column ``i``).
* ``pgm_logmag`` spectrogram: binary PGM (P5), width ``T``, height
  ``F``, maxval 255, pixel = scaled ``log10(|S| + 1e-12)`` with row 0
  the highest frequency bin.
* trace CSV: header ``iter,frame,t,lambda,K,C,combined``, one row per
  (iteration, frame).
* layout CSV: header ``frame,t,lambda``, one row per frame.
"""

from __future__ import annotations

import math
import wave
from dataclasses import dataclass

import numpy as np

from .transform import FrameLayout, Signal, as_signal

__all__ = [
    "SegmentSpec",
    "generate_piecewise_sine",
    "read_signal",
    "write_signal",
    "write_spectrogram",
    "read_spectrogram_csv",
    "write_trace",
    "write_layout",
]

_LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class SegmentSpec:
    """One constant-frequency stretch of a synthetic signal."""

    frequency: float
    duration: float
    amplitude: float

    def __post_init__(self):
        for name in ("frequency", "duration", "amplitude"):
            object.__setattr__(self, name, float(getattr(self, name)))
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"segment {name} must be finite")
        if self.duration <= 0.0:
            raise ValueError("segment duration must be positive")
        if self.frequency < 0.0:
            raise ValueError("segment frequency must be non-negative")


def generate_piecewise_sine(segments, sample_rate: float,
                            phase_continuous: bool = True,
                            noise_amplitude: float = 0.0,
                            seed: int = 0) -> Signal:
    """Concatenate sinusoidal segments into one test signal.

    Parameters
    ----------
    segments : sequence of SegmentSpec
        Frequency (Hz), duration (s) and amplitude per stretch; every
        frequency must stay below the Nyquist rate.
    sample_rate : float
        Sampling rate in Hz.
    phase_continuous : bool, default True
        Start each segment at the accumulated phase of the previous
        one, so tone changes produce no amplitude jump.
    noise_amplitude : float, default 0.0
        Adds uniform noise from ``[-noise_amplitude, noise_amplitude]``
        drawn with the given seed.
    seed : int, default 0
        Noise generator seed.

    Returns
    -------
    Signal
        Segment ``j`` spans ``round(duration_j * sample_rate)`` samples.
    """
    segments = list(segments)
    if not segments:
        raise ValueError("need at least one segment")
    fs = float(sample_rate)
    if not math.isfinite(fs) or fs <= 0.0:
        raise ValueError("sample_rate must be a positive finite number")
    noise_amplitude = float(noise_amplitude)
    if noise_amplitude < 0.0:
        raise ValueError("noise_amplitude must be non-negative")

    parts = []
    phase = 0.0
    for seg in segments:
        if not isinstance(seg, SegmentSpec):
            seg = SegmentSpec(*seg)
        if seg.frequency >= 0.5 * fs:
            raise ValueError(
                f"segment frequency {seg.frequency} Hz reaches the "
                f"Nyquist rate {0.5 * fs} Hz"
            )
        count = round(seg.duration * fs)
        if count <= 0:
            raise ValueError(
                f"segment duration {seg.duration} s is shorter than "
                "one sample"
            )
        step = 2.0 * math.pi * seg.frequency / fs
        parts.append(
            seg.amplitude * np.sin(phase + step * np.arange(count))
        )
        if phase_continuous:
            phase = math.fmod(phase + step * count, 2.0 * math.pi)

    samples = np.concatenate(parts)
    if noise_amplitude > 0.0:
        rng = np.random.default_rng(seed)
        samples = samples + noise_amplitude * rng.uniform(
            -1.0, 1.0, samples.shape[0]
        )
    return Signal(samples, fs)


def _infer_format(path) -> str:
    return "wav_pcm16_mono" if str(path).lower().endswith(".wav") else "csv_float"


def _read_csv_signal(path) -> Signal:
    sample_rate = 1.0
    values = []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                body = text[1:].strip()
                if body.startswith("sample_rate="):
                    raw = body[len("sample_rate="):].strip()
                    try:
                        sample_rate = float(raw)
                    except ValueError:
                        raise ValueError(
                            f"{path}: line {lineno}: could not parse "
                            f"sample rate {raw!r}"
                        ) from None
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: could not parse {text!r} "
                    "as a float"
                ) from None
    if not values:
        raise ValueError(f"{path}: empty signal")
    return Signal(np.asarray(values), sample_rate)


def _read_wav_signal(path) -> Signal:
    try:
        with wave.open(str(path), "rb") as wf:
            channels = wf.getnchannels()
            if channels != 1:
                raise ValueError(
                    f"{path}: expected mono, found {channels} channels"
                )
            if wf.getcomptype() != "NONE":
                raise ValueError(
                    f"{path}: compressed wav ({wf.getcomptype()}) is "
                    "not supported; expected 16-bit PCM"
                )
            width = wf.getsampwidth()
            if width != 2:
                raise ValueError(
                    f"{path}: expected 16-bit PCM, found "
                    f"{8 * width}-bit samples"
                )
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise ValueError(f"{path}: malformed wav: {exc}") from None
    if len(raw) % 2 != 0:
        raise ValueError(
            f"{path}: truncated sample data at byte {len(raw)}"
        )
    if not raw:
        raise ValueError(f"{path}: empty signal")
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return Signal(samples, float(rate))


def read_signal(path, format: str | None = None) -> Signal:
    """Read a signal file.

    Parameters
    ----------
    path : str or path-like
        File to read.
    format : {'csv_float', 'wav_pcm16_mono'}, optional
        Defaults to 'wav_pcm16_mono' for a ``.wav`` suffix and
        'csv_float' otherwise.
    """
    if format is None:
        format = _infer_format(path)
    if format in ("csv", "csv_float"):
        return _read_csv_signal(path)
    if format in ("wav", "wav_pcm16_mono"):
        return _read_wav_signal(path)
    raise ValueError(
        f"unknown signal format {format!r}; expected 'csv_float' or "
        "'wav_pcm16_mono'"
    )


def write_signal(signal, path) -> None:
    """Write a signal as csv_float with a sample-rate header."""
    sig = as_signal(signal)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# sample_rate={sig.sample_rate:.17g}\n")
        for value in sig.samples:
            fh.write(f"{value:.17g}\n")


def _check_spectrogram(spectrogram, layout: FrameLayout) -> np.ndarray:
    spec = np.asarray(spectrogram, dtype=np.complex128)
    if spec.shape != (layout.n_frames, layout.support):
        raise ValueError(
            f"spectrogram shape {spec.shape} does not match the layout "
            f"({layout.n_frames} frames, {layout.support} bins)"
        )
    return spec


def write_spectrogram(spectrogram, layout: FrameLayout, path,
                      format: str = "csv_mag") -> None:
    """Export spectrogram magnitudes as CSV or as a PGM image.

    csv_mag holds raw magnitudes, one frequency bin per row in natural
    bin order.  pgm_logmag is a binary P5 image of the log-magnitude
    range scaled to 0..255, highest frequency bin on top; a constant
    spectrogram maps to all-zero pixels.
    """
    spec = _check_spectrogram(spectrogram, layout)
    mag = np.abs(spec)
    if format == "csv_mag":
        with open(path, "w", newline="\n") as fh:
            fh.write(f"# N={layout.support} T={layout.n_frames}\n")
            for row in mag.T:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return
    if format == "pgm_logmag":
        log = np.log10(mag + _LOG_FLOOR)
        lmin = float(log.min())
        lmax = float(log.max())
        if lmax == lmin:
            pixels = np.zeros(mag.shape, dtype=np.uint8)
        else:
            pixels = np.rint(
                255.0 * (log - lmin) / (lmax - lmin)
            ).astype(np.uint8)
        image = np.flipud(pixels.T)
        with open(path, "wb") as fh:
            fh.write(
                f"P5\n{layout.n_frames} {layout.support}\n255\n".encode()
            )
            fh.write(np.ascontiguousarray(image).tobytes())
        return
    raise ValueError(
        f"unknown spectrogram format {format!r}; expected 'csv_mag' or "
        "'pgm_logmag'"
    )


def read_spectrogram_csv(path) -> np.ndarray:
    """Read a csv_mag file back into an (F, T) magnitude array."""
    expected = None
    rows = []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                fields = dict(
                    part.split("=", 1)
                    for part in text[1:].split()
                    if "=" in part
                )
                if "N" in fields and "T" in fields:
                    expected = (int(fields["N"]), int(fields["T"]))
                continue
            try:
                rows.append([float(v) for v in text.split(",")])
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: could not parse magnitudes"
                ) from None
    if not rows:
        raise ValueError(f"{path}: empty spectrogram")
    mag = np.asarray(rows, dtype=np.float64)
    if expected is not None and mag.shape != expected:
        raise ValueError(
            f"{path}: header promises shape {expected}, found {mag.shape}"
        )
    return mag


def write_trace(trace, path) -> None:
    """Write per-iteration optimizer records as CSV.

    One row per (iteration, frame); the objective columns repeat across
    the frames of an iteration.
    """
    with open(path, "w", newline="\n") as fh:
        fh.write("iter,frame,t,lambda,K,C,combined\n")
        for rec in trace:
            layout = rec.layout
            for j in range(layout.n_frames):
                fh.write(
                    f"{rec.iteration},{j},"
                    f"{layout.positions[j]:.17g},{layout.lengths[j]:.17g},"
                    f"{rec.kurtosis:.17g},{rec.coverage:.17g},"
                    f"{rec.combined:.17g}\n"
                )


def write_layout(layout: FrameLayout, path) -> None:
    """Write a frame layout as CSV with header frame,t,lambda."""
    with open(path, "w", newline="\n") as fh:
        fh.write("frame,t,lambda\n")
        for j in range(layout.n_frames):
            fh.write(
                f"{j},{layout.positions[j]:.17g},{layout.lengths[j]:.17g}\n"
            )
