import numpy as np
import pytest

from fracstft import (
    FrameLayout,
    GradientSet,
    combine_objectives,
    coverage_objective,
    dstft_forward,
    frame_weights,
    kurtosis_objective,
    min_norm_gamma,
    objective_gradients,
)
from fracstft.objectives import _kurtosis_stats, normalize_combiner


def _layout(t, lam, n, kind="hann"):
    return FrameLayout(np.asarray(t, float), np.asarray(lam, float), n, kind)


# ------------------------------------------------------------ frame_weights


def test_frame_weights_single_frame():
    assert np.array_equal(frame_weights(_layout([3.0], [8.0], 16)), [1.0])


def test_frame_weights_trapezoid_rule():
    # Endpoints take one-sided gaps, interior frames half of the
    # two-sided gap.
    w = frame_weights(_layout([0.0, 10.0, 40.0], [8.0, 8.0, 8.0], 16))
    assert np.allclose(w, [10.0, 20.0, 30.0])
    w = frame_weights(_layout([0.0, 1.0, 4.0], [8.0, 8.0, 8.0], 16))
    assert np.allclose(w, [1.0, 2.0, 3.0])


def test_frame_weights_uniform_spacing():
    w = frame_weights(_layout([0.0, 5.0, 10.0, 15.0], [8.0] * 4, 16))
    assert np.allclose(w, [5.0, 5.0, 5.0, 5.0])


# ------------------------------------------------------- kurtosis objective


def test_kurtosis_flat_row_is_one():
    spec = np.full((3, 16), 2.0 + 0j)
    assert kurtosis_objective(
        spec, _layout([0.0, 20.0, 40.0], [16.0] * 3, 16)
    ) == pytest.approx(1.0, abs=1e-12)


def test_kurtosis_one_hot_row_is_bin_count():
    for f_bins in (8, 16, 32):
        spec = np.zeros((2, f_bins), complex)
        spec[0, 3] = 1.7
        spec[1, 5] = 0.2
        k = kurtosis_objective(
            spec, _layout([0.0, 40.0], [float(f_bins)] * 2, f_bins)
        )
        assert k == pytest.approx(float(f_bins), rel=1e-12)


def test_kurtosis_weighted_mean_white_box():
    # Two-frame layouts always get equal weights, so the weighting is
    # pinned on the raw statistics helper: rows with per-frame kurtosis
    # 1 (flat) and F (one-hot) under weights (1, 3) average to
    # (1 + 3F) / 4.
    f_bins = 16
    power = np.zeros((2, f_bins))
    power[0, :] = 2.0
    power[1, 7] = 5.0
    value, kurt, m2, m4, live, total = _kurtosis_stats(
        power, np.array([1.0, 3.0])
    )
    assert np.allclose(kurt, [1.0, float(f_bins)])
    assert value == pytest.approx((1.0 + 3.0 * f_bins) / 4.0, rel=1e-12)
    assert total == pytest.approx(4.0)
    assert live.all()


def test_kurtosis_three_frame_weighting():
    # t = (0, 1, 4) gives weights (1, 2, 3); rows flat / one-hot / flat.
    f_bins = 8
    spec = np.zeros((3, f_bins), complex)
    spec[0, :] = 1.0
    spec[1, 2] = 3.0
    spec[2, :] = 0.5
    k = kurtosis_objective(
        spec, _layout([0.0, 1.0, 4.0], [8.0] * 3, f_bins)
    )
    expected = (1.0 * 1 + 2.0 * f_bins + 3.0 * 1) / 6.0
    assert k == pytest.approx(expected, rel=1e-12)


def test_kurtosis_scale_invariance():
    rng = np.random.default_rng(11)
    layout = _layout([0.0, 30.0, 55.0], [16.0, 12.0, 9.0], 16)
    spec = rng.normal(size=(3, 16)) + 1j * rng.normal(size=(3, 16))
    base = kurtosis_objective(spec, layout)
    for alpha in (1e-6, 1e-3, 1.0, 1e3, 1e6):
        scaled = kurtosis_objective(alpha * spec, layout)
        assert abs(scaled - base) <= 1e-10 * abs(base)


def test_kurtosis_bin_permutation_invariance():
    rng = np.random.default_rng(23)
    layout = _layout([0.0, 30.0], [16.0, 16.0], 16)
    spec = rng.normal(size=(2, 16)) + 1j * rng.normal(size=(2, 16))
    base = kurtosis_objective(spec, layout)
    shuffled = spec.copy()
    for row in shuffled:
        rng.shuffle(row)
    assert kurtosis_objective(shuffled, layout) == pytest.approx(
        base, rel=1e-12
    )


def test_kurtosis_bounds_fuzz():
    rng = np.random.default_rng(31)
    layout = _layout([0.0, 25.0, 60.0], [16.0] * 3, 16)
    for _ in range(200):
        spec = rng.normal(size=(3, 16)) * rng.uniform(0, 10)
        k = kurtosis_objective(spec.astype(complex), layout)
        assert 1.0 <= k <= 16.0 + 1e-9


def test_kurtosis_dead_frames_floor_to_one():
    spec = np.zeros((2, 16), complex)
    layout = _layout([0.0, 30.0], [16.0, 16.0], 16)
    assert kurtosis_objective(spec, layout) == 1.0
    spec[1, 4] = 2.0  # one live frame, one dead
    k = kurtosis_objective(spec, layout)
    assert k == pytest.approx((1.0 + 16.0) / 2.0, rel=1e-12)


# ------------------------------------------------------- coverage objective


def test_coverage_single_frame_interior():
    # Effective extent lambda sits fully inside the signal.
    layout = _layout([10.0], [16.0], 16)
    assert coverage_objective(layout, 160) == pytest.approx(0.1)
    layout = _layout([10.0], [8.0], 16)
    assert coverage_objective(layout, 160) == pytest.approx(0.05)


def test_coverage_full_signal_is_one():
    layout = _layout([0.0], [64.0], 64)
    assert coverage_objective(layout, 64) == 1.0


def test_coverage_clips_at_signal_edges():
    # Half of the window hangs off each edge.
    n = 20
    left = _layout([-10.0], [20.0], n)
    assert coverage_objective(left, 100) == pytest.approx(0.10)
    right = _layout([90.0], [20.0], n)
    assert coverage_objective(right, 100) == pytest.approx(0.10)


def test_coverage_caps_overlapping_frames():
    # Frames 5 apart with extent 20 each: the first frame only counts
    # up to the next effective start.
    layout = _layout([0.0, 5.0], [20.0, 20.0], 20)
    assert coverage_objective(layout, 200) == pytest.approx(25.0 / 200.0)


def test_coverage_clamps_to_unit_interval():
    layout = _layout([0.0, 0.5], [2.0, 10.0], 10)
    # Raw covered length is 12 over 11 samples.
    assert coverage_objective(layout, 11) == 1.0


def test_coverage_fuzz_stays_in_unit_interval():
    rng = np.random.default_rng(47)
    for _ in range(2000):
        n = int(rng.choice([8, 16, 32]))
        m = int(rng.integers(n, 8 * n))
        frames = int(rng.integers(1, 6))
        t = np.sort(rng.uniform(-n, m - 1e-6, frames))
        t += np.arange(frames) * 1e-9
        lam = rng.uniform(1e-3, n, frames)
        c = coverage_objective(_layout(t, lam, n), m)
        assert 0.0 <= c <= 1.0


# ------------------------------------------------------ objective gradients


def test_kurtosis_gradient_matches_finite_differences():
    rng = np.random.default_rng(53)
    n, h = 16, 1e-4
    sig = rng.normal(size=8 * n)

    def value(t, lam, kind):
        layout = _layout(t, lam, n, kind)
        return kurtosis_objective(dstft_forward(sig, layout), layout)

    for trial in range(12):
        kind = "hann" if trial % 2 == 0 else "gauss"
        frames = int(rng.integers(2, 5))
        t = np.sort(
            rng.choice(6 * n, size=frames, replace=False)
        ).astype(float) + rng.uniform(1e-2, 1 - 1e-2, frames)
        lam = rng.uniform(4.0, n - 0.01, frames)
        layout = _layout(t, lam, n, kind)
        grad_k, _ = objective_gradients(sig, layout)
        for i in range(frames):
            tp, tm = t.copy(), t.copy()
            tp[i] += h
            tm[i] -= h
            fd = (value(tp, lam, kind) - value(tm, lam, kind)) / (2 * h)
            scale = max(abs(grad_k.d_t[i]), abs(fd), 1e-9)
            assert abs(grad_k.d_t[i] - fd) / scale < 1e-4
            lp, lm = lam.copy(), lam.copy()
            lp[i] += h
            lm[i] -= h
            fd = (value(t, lp, kind) - value(t, lm, kind)) / (2 * h)
            scale = max(abs(grad_k.d_lambda[i]), abs(fd), 1e-9)
            assert abs(grad_k.d_lambda[i] - fd) / scale < 1e-4


def test_kurtosis_gradient_zero_for_zero_signal():
    layout = _layout([5.0, 40.0], [12.0, 16.0], 16)
    grad_k, _ = objective_gradients(np.zeros(128), layout)
    assert np.all(grad_k.d_t == 0) and np.all(grad_k.d_lambda == 0)


def test_coverage_gradient_matches_finite_differences():
    rng = np.random.default_rng(59)
    h, checked = 1e-6, 0
    while checked < 100:
        n = int(rng.choice([8, 16, 32]))
        m = int(rng.integers(2 * n, 8 * n))
        frames = int(rng.integers(1, 5))
        t = np.sort(rng.uniform(-n / 2, m - n / 2, frames))
        lam = rng.uniform(1.0, n, frames)
        if np.any(np.diff(t) <= 1e-3):
            continue
        layout = _layout(t, lam, n)
        c = coverage_objective(layout, m)
        if not 1e-3 < c < 1 - 1e-3:
            continue
        # Skip layouts near any non-smooth point of the piecewise form:
        # extent endpoints on a signal edge or extents tying their caps.
        a = t + (n - lam) / 2.0
        b = a + lam
        eff = np.minimum(b, m) - np.maximum(a, 0.0)
        caps = np.empty(frames)
        caps[:-1] = np.diff(b)  # spacing of extent end points
        caps[-1] = np.inf
        margin = 1e-2
        if np.any(np.abs(a) < margin) or np.any(np.abs(b - m) < margin):
            continue
        if np.any(np.abs(eff - caps) < margin):
            continue
        if np.any(eff < margin):
            continue
        _, grad_c = objective_gradients(np.zeros(m), layout)
        for i in range(frames):
            tp, tm = t.copy(), t.copy()
            tp[i] += h
            tm[i] -= h
            fd = (
                coverage_objective(_layout(tp, lam, n), m)
                - coverage_objective(_layout(tm, lam, n), m)
            ) / (2 * h)
            assert abs(grad_c.d_t[i] - fd) < 1e-6
            lp, lm = lam.copy(), lam.copy()
            lp[i] += h
            lm[i] -= h
            fd = (
                coverage_objective(_layout(t, lp, n), m)
                - coverage_objective(_layout(t, lm, n), m)
            ) / (2 * h)
            assert abs(grad_c.d_lambda[i] - fd) < 1e-6
        checked += 1


def test_coverage_gradient_last_length_uncapped():
    # With the preceding frame far away (its extent under its cap), only
    # the last frame's own extent responds to its length.
    m = 100
    layout = _layout([20.0, 45.0], [10.0, 10.0], 20)
    _, grad_c = objective_gradients(np.zeros(m), layout)
    assert grad_c.d_lambda[1] == pytest.approx(1.0 / m, rel=1e-12)


def test_coverage_gradient_zero_when_clamped():
    # Saturated coverage has no useful ascent direction.
    layout = _layout([0.0, 0.5], [2.0, 10.0], 10)
    _, grad_c = objective_gradients(np.zeros(11), layout)
    assert np.all(grad_c.d_t == 0) and np.all(grad_c.d_lambda == 0)


def test_objective_gradients_rejects_wrong_spectrogram_shape():
    layout = _layout([5.0], [8.0], 8)
    with pytest.raises(ValueError):
        objective_gradients(
            np.zeros(32), layout, spectrogram=np.zeros((2, 8), complex)
        )


# --------------------------------------------------------------- combiners


def _gset(t, lam):
    return GradientSet(np.asarray(t, float), np.asarray(lam, float))


def test_min_norm_pinned_orthogonal_pair():
    g1 = _gset([1.0], [0.0])
    g2 = _gset([0.0], [1.0])
    assert min_norm_gamma(g1, g2) == pytest.approx(0.5)
    out = combine_objectives(g1, g2, mode="min_norm")
    assert np.allclose(out.d_t, [0.5]) and np.allclose(out.d_lambda, [0.5])


def test_min_norm_coincident_gradients():
    g = _gset([0.3, -0.1], [0.2, 0.0])
    assert min_norm_gamma(g, g) == 1.0
    out = combine_objectives(g, g, mode="min_norm")
    assert np.allclose(out.d_t, g.d_t)


def test_min_norm_clamps_to_endpoints():
    # g2 already has the smaller norm along the segment: gamma = 0.
    g1 = _gset([2.0], [0.0])
    g2 = _gset([1.0], [0.0])
    assert min_norm_gamma(g1, g2) == 0.0
    g1, g2 = g2, g1
    assert min_norm_gamma(g1, g2) == 1.0


def test_min_norm_matches_grid_search():
    rng = np.random.default_rng(61)
    grid = np.linspace(0.0, 1.0, 10001)
    for _ in range(50):
        size = int(rng.integers(1, 6))
        g1 = _gset(rng.normal(size=size), rng.normal(size=size))
        g2 = _gset(rng.normal(size=size), rng.normal(size=size))
        gamma = min_norm_gamma(g1, g2)
        v1 = np.concatenate([g1.d_t, g1.d_lambda])
        v2 = np.concatenate([g2.d_t, g2.d_lambda])
        norms = np.linalg.norm(
            grid[:, None] * v1 + (1 - grid)[:, None] * v2, axis=1
        )
        best = grid[int(np.argmin(norms))]
        assert abs(gamma - best) <= 1e-3
        # Norm property: never exceeds either endpoint.
        combined = gamma * v1 + (1 - gamma) * v2
        assert np.linalg.norm(combined) <= min(
            np.linalg.norm(v1), np.linalg.norm(v2)
        ) + 1e-12


def test_weighted_combination():
    g1 = _gset([1.0, 0.0], [2.0, 0.0])
    g2 = _gset([0.0, 1.0], [0.0, 4.0])
    out = combine_objectives(g1, g2, mode="weighted", alpha=0.25)
    assert np.allclose(out.d_t, [0.25, 0.75])
    assert np.allclose(out.d_lambda, [0.5, 3.0])
    with pytest.raises(ValueError):
        combine_objectives(g1, g2, mode="weighted", alpha=1.5)


def test_combiner_aliases_and_rejection():
    assert normalize_combiner("weighted_sum") == "weighted"
    assert normalize_combiner("MINNORM") == "min_norm"
    assert normalize_combiner("min_norm") == "min_norm"
    with pytest.raises(ValueError):
        normalize_combiner("geometric")


def test_combine_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        combine_objectives(
            _gset([1.0], [1.0]), _gset([1.0, 2.0], [1.0, 2.0])
        )
