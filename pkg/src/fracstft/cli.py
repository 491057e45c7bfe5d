"""Command-line interface.

Subcommands: ``gen`` synthesizes piecewise-sine test signals, ``stft``
computes the fixed-grid transform, ``adapt`` runs the layout adapter,
and ``gradcheck`` validates the analytic gradients against central
finite differences.

Exit codes: 0 on success, 1 on runtime/IO/validation failures, 2 on
usage errors.  Every run starts with a one-line reproducibility banner
listing the package version and all resolved flag values.  Outputs are
deterministic for identical flags and inputs, independent of the
thread count.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .objectives import normalize_combiner
from .optimize import OptimizerConfig, run
from .signal_io import (
    SegmentSpec,
    generate_piecewise_sine,
    read_signal,
    write_layout,
    write_signal,
    write_spectrogram,
    write_trace,
)
from .transform import FrameLayout, dstft_backward, dstft_forward

__all__ = ["main"]


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not value > 0.0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _non_negative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if value < 0.0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _segments(text: str) -> list[SegmentSpec]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError(
            "expected freq:dur:amp[,freq:dur:amp...]"
        )
    out = []
    for part in parts:
        fields = part.split(":")
        if len(fields) != 3:
            raise argparse.ArgumentTypeError(
                f"segment {part!r} is not freq:dur:amp"
            )
        try:
            out.append(SegmentSpec(*(float(v) for v in fields)))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(
                f"segment {part!r}: {exc}"
            ) from None
    return out


def _combiner(text: str) -> tuple[str, float]:
    name, _, tail = text.partition(":")
    try:
        mode = normalize_combiner(name)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    alpha = 0.5
    if tail:
        if mode != "weighted":
            raise argparse.ArgumentTypeError(
                "only the weighted combiner takes a weight"
            )
        try:
            alpha = float(tail)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"{tail!r} is not a number"
            ) from None
        if not 0.0 <= alpha <= 1.0:
            raise argparse.ArgumentTypeError("weight must lie in [0, 1]")
    return mode, alpha


def _fmt(value) -> str:
    if isinstance(value, list):
        return ",".join(
            f"{s.frequency:g}:{s.duration:g}:{s.amplitude:g}"
            if isinstance(s, SegmentSpec) else str(s)
            for s in value
        )
    if isinstance(value, tuple):
        return ":".join(str(v) for v in value)
    return str(value)


def _banner(args: argparse.Namespace) -> None:
    skip = {"func", "command"}
    pairs = " ".join(
        f"{key}={_fmt(val)}"
        for key, val in sorted(vars(args).items())
        if key not in skip
    )
    print(f"fracstft {__version__} | {args.command} | {pairs}")


def _cmd_gen(args) -> int:
    signal = generate_piecewise_sine(
        args.segments, args.fs,
        noise_amplitude=args.noise, seed=args.seed,
    )
    write_signal(signal, args.out)
    print(
        f"M={signal.n_samples} duration={signal.duration:.17g}s "
        f"-> {args.out}"
    )
    return 0


def _integer_grid(signal, support: int, hop: int, window: str) -> FrameLayout:
    if signal.n_samples < support:
        raise ValueError(
            f"signal has {signal.n_samples} samples, fewer than the "
            f"support {support}"
        )
    count = (signal.n_samples - support) // hop + 1
    positions = np.arange(count, dtype=np.float64) * hop
    return FrameLayout(positions, np.full(count, float(support)),
                       support, window)


def _cmd_stft(args) -> int:
    signal = read_signal(args.infile)
    layout = _integer_grid(signal, args.support, args.hop, args.window)
    spec = dstft_forward(signal, layout, threads=args.threads)
    print(f"T={layout.n_frames} frames, N={layout.support} bins")
    if args.out_spec:
        write_spectrogram(spec, layout, args.out_spec, "csv_mag")
        print(f"wrote {args.out_spec}")
    if args.out_img:
        write_spectrogram(spec, layout, args.out_img, "pgm_logmag")
        print(f"wrote {args.out_img}")
    return 0


def _cmd_adapt(args) -> int:
    signal = read_signal(args.infile)
    mode, alpha = args.combiner
    config = OptimizerConfig(
        support=args.support,
        window=args.window,
        lr_position=args.lr_pos,
        lr_length=args.lr_len,
        max_iters=args.iters,
        tolerance=args.tol,
        combiner=mode,
        alpha=alpha,
        share_parameters=args.share,
        threads=args.threads,
    )
    layout, trace = run(signal, config, args.frames)
    first, last = trace[0], trace[-1]
    print(
        f"initial K={first.kurtosis:.17g} C={first.coverage:.17g} "
        f"combined={first.combined:.17g}"
    )
    print(
        f"final K={last.kurtosis:.17g} C={last.coverage:.17g} "
        f"combined={last.combined:.17g} iterations={last.iteration}"
    )
    spec = dstft_forward(signal, layout, threads=args.threads)
    if args.out_spec:
        write_spectrogram(spec, layout, args.out_spec, "csv_mag")
        print(f"wrote {args.out_spec}")
    if args.out_img:
        write_spectrogram(spec, layout, args.out_img, "pgm_logmag")
        print(f"wrote {args.out_img}")
    if args.out_trace:
        write_trace(trace, args.out_trace)
        print(f"wrote {args.out_trace}")
    if args.out_layout:
        write_layout(layout, args.out_layout)
        print(f"wrote {args.out_layout}")
    return 0


def _gradcheck_case(base_seed: int, case: int, step: float):
    """Worst relative FD error of d_t and d_lambda on one random instance."""
    rng = np.random.default_rng([base_seed, case])
    support = int(rng.choice([16, 32]))
    n_frames = int(rng.integers(2, 5))
    m = support * (n_frames + 1)
    samples = rng.normal(0.0, 1.0, m)
    starts = rng.choice(m - support, size=n_frames, replace=False)
    starts.sort()
    # Keep the FD stencil away from integer positions and the length
    # bounds so the probe stays inside one smooth piece.
    t = starts + rng.uniform(1e-2, 1.0 - 1e-2, n_frames)
    lam = rng.uniform(4.0, support - 1e-2, n_frames)
    kind = "hann" if rng.uniform() < 0.5 else "gauss"
    bin_weights = rng.uniform(0.5, 1.5, (n_frames, support))

    def loss(positions, lengths) -> float:
        layout = FrameLayout(positions, lengths, support, kind)
        spec = dstft_forward(samples, layout)
        return float(np.sum(bin_weights * np.abs(spec) ** 2))

    layout = FrameLayout(t, lam, support, kind)
    spec = dstft_forward(samples, layout)
    grads = dstft_backward(samples, layout, bin_weights * spec)

    worst_t = 0.0
    worst_lam = 0.0
    for i in range(n_frames):
        for arr, grad, is_pos in (
            (t, grads.d_t[i], True),
            (lam, grads.d_lambda[i], False),
        ):
            plus = arr.copy()
            minus = arr.copy()
            plus[i] += step
            minus[i] -= step
            if is_pos:
                fd = (loss(plus, lam) - loss(minus, lam)) / (2.0 * step)
            else:
                fd = (loss(t, plus) - loss(t, minus)) / (2.0 * step)
            rel = abs(grad - fd) / max(abs(grad), abs(fd), 1e-9)
            if is_pos:
                worst_t = max(worst_t, rel)
            else:
                worst_lam = max(worst_lam, rel)
    return worst_t, worst_lam


def _cmd_gradcheck(args) -> int:
    if args.cases == 0:
        print("warning: 0 cases requested; vacuous pass")
        return 0
    worst_t = (0.0, -1)
    worst_lam = (0.0, -1)
    for case in range(args.cases):
        rel_t, rel_lam = _gradcheck_case(args.seed, case, args.step)
        if rel_t > worst_t[0]:
            worst_t = (rel_t, case)
        if rel_lam > worst_lam[0]:
            worst_lam = (rel_lam, case)
    print(
        f"worst d_t relative error {worst_t[0]:.3e} "
        f"(case {worst_t[1]} of seed {args.seed})"
    )
    print(
        f"worst d_lambda relative error {worst_lam[0]:.3e} "
        f"(case {worst_lam[1]} of seed {args.seed})"
    )
    failed = [
        (name, rel, case)
        for name, (rel, case) in (("d_t", worst_t), ("d_lambda", worst_lam))
        if rel >= args.rtol
    ]
    if failed:
        for name, rel, case in failed:
            print(
                f"FAIL {name}: relative error {rel:.3e} >= rtol "
                f"{args.rtol} at case {case} of seed {args.seed}",
                file=sys.stderr,
            )
        return 1
    print(f"OK: both parameter classes below rtol {args.rtol}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracstft",
        description=(
            "Short-time Fourier analysis with continuous frame positions "
            "and window lengths, plus a gradient-ascent layout adapter."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"fracstft {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    threads_default = os.cpu_count() or 1

    gen = sub.add_parser(
        "gen", help="synthesize a piecewise-sine test signal"
    )
    gen.add_argument(
        "--segments", type=_segments, required=True,
        help="comma-separated freq:dur:amp triples (Hz, seconds, unitless)",
    )
    gen.add_argument(
        "--fs", type=_positive_float, default=1000.0,
        help="sampling rate in Hz (default 1000)",
    )
    gen.add_argument(
        "--noise", type=_non_negative_float, default=0.0,
        help="uniform noise amplitude, unitless (default 0)",
    )
    gen.add_argument(
        "--seed", type=int, default=0,
        help="noise generator seed (default 0)",
    )
    gen.add_argument(
        "--out", required=True, help="output csv_float signal path"
    )
    gen.set_defaults(func=_cmd_gen)

    stft = sub.add_parser(
        "stft", help="fixed-grid short-time Fourier transform"
    )
    stft.add_argument(
        "--in", dest="infile", required=True,
        help="input signal path (.wav is 16-bit PCM mono, otherwise csv_float)",
    )
    stft.add_argument(
        "--support", type=_positive_int, default=256,
        help="window support and DFT size in samples (default 256)",
    )
    stft.add_argument(
        "--hop", type=_positive_int, default=128,
        help="hop between frame starts in samples (default 128)",
    )
    stft.add_argument(
        "--window", choices=("hann", "gauss"), default="hann",
        help="tapering window (default hann)",
    )
    stft.add_argument(
        "--threads", type=_positive_int, default=threads_default,
        help="worker threads for per-frame work (default: all cores)",
    )
    stft.add_argument("--out-spec", help="csv_mag magnitude output path")
    stft.add_argument("--out-img", help="pgm_logmag image output path")
    stft.set_defaults(func=_cmd_stft)

    adapt = sub.add_parser(
        "adapt", help="adapt frame positions and window lengths"
    )
    adapt.add_argument(
        "--in", dest="infile", required=True,
        help="input signal path (.wav is 16-bit PCM mono, otherwise csv_float)",
    )
    adapt.add_argument(
        "--support", type=_positive_int, default=256,
        help="window support and DFT size in samples (default 256)",
    )
    adapt.add_argument(
        "--frames", type=_positive_int, default=16,
        help="number of frames to place (default 16)",
    )
    adapt.add_argument(
        "--iters", type=_non_negative_int, default=500,
        help="maximum ascent steps (default 500)",
    )
    adapt.add_argument(
        "--lr-pos", type=_non_negative_float, default=0.1,
        help="position learning rate in samples (default 0.1)",
    )
    adapt.add_argument(
        "--lr-len", type=_non_negative_float, default=0.1,
        help="length learning rate in samples (default 0.1)",
    )
    adapt.add_argument(
        "--window", choices=("hann", "gauss"), default="hann",
        help="tapering window (default hann)",
    )
    adapt.add_argument(
        "--combiner", type=_combiner, default=("weighted", 0.5),
        help=(
            "gradient combiner: weighted[:alpha] or minnorm "
            "(default weighted:0.5)"
        ),
    )
    adapt.add_argument(
        "--share", action="store_true",
        help="share a single hop and window length across frames",
    )
    adapt.add_argument(
        "--tol", type=_positive_float, default=1e-12,
        help="relative objective-change convergence tolerance (default 1e-12)",
    )
    adapt.add_argument(
        "--threads", type=_positive_int, default=threads_default,
        help="worker threads for per-frame work (default: all cores)",
    )
    adapt.add_argument("--out-spec", help="csv_mag magnitude output path")
    adapt.add_argument("--out-img", help="pgm_logmag image output path")
    adapt.add_argument("--out-trace", help="per-iteration trace CSV path")
    adapt.add_argument("--out-layout", help="final layout CSV path")
    adapt.set_defaults(func=_cmd_adapt)

    gradcheck = sub.add_parser(
        "gradcheck",
        help="validate analytic gradients against finite differences",
    )
    gradcheck.add_argument(
        "--seed", type=int, default=0,
        help="base seed for the random instances (default 0)",
    )
    gradcheck.add_argument(
        "--cases", type=_non_negative_int, default=100,
        help="number of random instances (default 100)",
    )
    gradcheck.add_argument(
        "--step", type=_positive_float, default=1e-4,
        help="central finite-difference step in samples (default 1e-4)",
    )
    gradcheck.add_argument(
        "--rtol", type=_non_negative_float, default=1e-4,
        help="maximum allowed relative error (default 1e-4)",
    )
    gradcheck.set_defaults(func=_cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _banner(args)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
