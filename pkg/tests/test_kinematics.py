import numpy as np
import pytest

from softwhip import (BELL_SHAPED, MONOTONIC_DECAY, OTHER, ClassifierThresholds,
                      DegenerateFieldError, DegenerateProfileError,
                      InvalidArgumentError, Midline, MidlineSequence, bend_point,
                      bend_velocity, classify_profile, curvature_field,
                      normalize_profile, overlay_profile, propagation_metrics)

from helpers import circle_points, curve_from_kappa, gaussian_bump


def line_midline(x0, y0=0.0, t=0.0, n=10):
    pts = np.column_stack([x0 + np.linspace(0, 0.5, n), np.full(n, y0)])
    return Midline(pts, t)


def track_from_speeds(speeds, dt=1.0):
    """Build a sequence whose bend point moves with the given speeds (+x)."""
    x = np.concatenate([[0.0], np.cumsum(np.asarray(speeds, dtype=float) * dt)])
    frames = []
    for i, xi in enumerate(x):
        # v-shaped midline with its minimum-x vertex at (-1 - xi, 0); the
        # vertex displacement per frame equals speeds[i] exactly
        pts = np.array([[0.0, -1.0], [-1.0 - xi, 0.0], [0.0, 1.0]])
        frames.append(Midline(pts, i * dt))
    return bend_velocity(MidlineSequence(tuple(frames), dt))


class TestMidlineSequence:
    def test_rejects_bad_dt(self):
        with pytest.raises(InvalidArgumentError):
            MidlineSequence((line_midline(0.0),), 0.0)

    def test_rejects_off_grid_timestamps(self):
        frames = (line_midline(0, t=0.0), line_midline(0.1, t=0.013))
        with pytest.raises(InvalidArgumentError):
            MidlineSequence(frames, 0.02)

    def test_allows_gap_multiples(self):
        frames = (line_midline(0, t=0.0), line_midline(0.1, t=0.04))
        seq = MidlineSequence(frames, 0.02)
        assert list(seq.frame_indices) == [0, 2]


class TestBendPoint:
    def test_argmin_x(self):
        m = Midline([[1, 0], [0.5, 1], [0.2, 2], [0.7, 3]])
        bp = bend_point(m)
        assert np.allclose(bp.point, [0.2, 2])
        assert bp.index == 2
        assert not bp.boundary

    def test_monotone_x_flags_boundary(self):
        bp = bend_point(line_midline(0.0))
        assert bp.index == 0
        assert bp.boundary

    def test_tie_breaks_to_smaller_index(self):
        pts = np.ones((10, 2))
        pts[:, 0] = [5, 4, 3, 1, 2, 2, 3, 1, 4, 5]
        pts[:, 1] = np.arange(10)
        assert bend_point(Midline(pts)).index == 3

    def test_translation_and_scale_invariance_of_index(self):
        rng = np.random.default_rng(3)
        pts = np.column_stack([rng.uniform(-1, 1, 20), np.arange(20) * 0.1])
        base = bend_point(Midline(pts)).index
        assert bend_point(Midline(pts + [0.0, 5.0])).index == base
        assert bend_point(Midline(pts * 3.7)).index == base


class TestBendVelocity:
    def test_two_frame_arithmetic(self):
        f0 = Midline([[1, 0], [0.2, 2.0], [1, 4]], 0.0)
        f1 = Midline([[1, 0], [0.1, 2.0], [1, 4]], 0.02)
        track = bend_velocity(MidlineSequence((f0, f1), 0.02))
        assert np.isclose(track.vx[0], -5.0)
        assert np.isclose(track.speed[0], 5.0)

    def test_stationary_bend(self):
        f = [Midline([[1, 0], [0, 1], [1, 2]], 0.02 * i) for i in range(4)]
        track = bend_velocity(MidlineSequence(tuple(f), 0.02))
        assert np.all(track.vx == 0)
        assert np.all(track.speed == 0)

    def test_rigid_translation_velocity_exact(self):
        rng = np.random.default_rng(5)
        base = np.column_stack([rng.uniform(0, 1, 15), np.linspace(0, 1, 15)])
        v = np.array([-0.35, 0.2])
        dt = 0.05
        frames = tuple(Midline(base + v * (i * dt), i * dt) for i in range(8))
        track = bend_velocity(MidlineSequence(frames, dt))
        assert np.abs(track.vx - v[0]).max() < 1e-9
        assert np.abs(track.speed - np.linalg.norm(v)).max() < 1e-9

    def test_needs_two_frames(self):
        with pytest.raises(InvalidArgumentError):
            bend_velocity(MidlineSequence((line_midline(0),), 0.02))


class TestNormalizeProfile:
    def test_simple_ratios(self):
        track = track_from_speeds([4, 2, 1])
        out = normalize_profile(track)
        assert np.allclose(out.v_norm, [1.0, 0.5, 0.25])
        assert out.v_norm[0] == 1.0
        assert np.allclose(out.t_norm, [0.0, 0.5, 1.0])

    def test_symmetric_triangle_peak_centered(self):
        track = normalize_profile(track_from_speeds([1, 2, 3, 4, 3, 2, 1]))
        assert track.t_norm[np.argmax(track.v_norm)] == 0.5

    def test_gaussian_peak_at_nearest_sample(self):
        t = np.linspace(0, 1, 41)
        speeds = np.exp(-((t - 0.37) ** 2) / (2 * 0.1 ** 2))
        track = normalize_profile(track_from_speeds(speeds))
        peak_t = track.t_norm[np.argmax(track.v_norm)]
        # samples sit at i/40; the Gaussian mean 0.37 rounds to 0.375
        assert np.isclose(peak_t, t[np.argmin(np.abs(t - 0.37))])
        assert track.v_norm.max() == 1.0

    def test_all_zero_rejected(self):
        with pytest.raises(DegenerateProfileError):
            normalize_profile(track_from_speeds([0, 0, 0, 0]))

    def test_overlay_grid(self):
        track = normalize_profile(track_from_speeds([4, 2, 1, 0.5]))
        grid, v = overlay_profile(track)
        assert grid.size == 101
        assert v[0] == 1.0
        assert np.all(np.diff(v) <= 1e-12)


class TestClassifyProfile:
    def test_strictly_decreasing_is_decay(self):
        track = normalize_profile(track_from_speeds(np.linspace(3, 0.1, 40)))
        label, diag = classify_profile(track)
        assert label == MONOTONIC_DECAY
        assert diag.peak_index == 0
        assert diag.fall_fraction == 1.0

    def test_symmetric_triangle_is_bell(self):
        speeds = np.concatenate([np.linspace(0.1, 2, 20), np.linspace(2, 0.1, 20)[1:]])
        label, diag = classify_profile(normalize_profile(track_from_speeds(speeds)))
        assert label == BELL_SHAPED

    def test_late_peak_is_other(self):
        speeds = np.concatenate([np.linspace(0.1, 2, 36), [1.5, 1.0, 0.5, 0.2]])
        label, _ = classify_profile(normalize_profile(track_from_speeds(speeds)))
        assert label == OTHER

    def test_oscillatory_is_other(self):
        t = np.arange(60)
        speeds = 1.5 + np.sin(t)
        label, _ = classify_profile(normalize_profile(track_from_speeds(speeds)))
        assert label == OTHER

    def test_invariance_under_speed_scaling(self):
        rng = np.random.default_rng(9)
        speeds = np.linspace(2, 0.05, 50) + rng.normal(0, 0.01, 50)
        speeds = np.abs(speeds)
        ref = classify_profile(normalize_profile(track_from_speeds(speeds)))[0]
        for c in (0.01, 7.0, 1000.0):
            lab = classify_profile(normalize_profile(track_from_speeds(speeds * c)))[0]
            assert lab == ref

    def test_invariance_under_time_rescaling(self):
        speeds = np.concatenate([np.linspace(0.1, 2, 10), np.linspace(2, 0.1, 10)[1:]])
        ref = classify_profile(normalize_profile(track_from_speeds(speeds, dt=1.0)))[0]
        fast = classify_profile(normalize_profile(track_from_speeds(speeds, dt=0.01)))[0]
        assert ref == fast == BELL_SHAPED

    def test_custom_thresholds(self):
        speeds = np.concatenate([[1.0, 3.0], np.linspace(2.9, 0.1, 18)])
        th = ClassifierThresholds(early_peak=0.01)
        label, _ = classify_profile(normalize_profile(track_from_speeds(speeds)), th)
        assert label == OTHER

    def test_requires_normalization(self):
        with pytest.raises(InvalidArgumentError):
            classify_profile(track_from_speeds([3, 2, 1]))


def bump_sequence(drift_rate, dt=0.1, n_frames=11, amp=12.0, amp_decay=0.0,
                  c0=0.2, n_pts=600, length=0.4):
    """Frames whose curvature is a Gaussian bump advected at ``drift_rate``."""
    frames = []
    for i in range(n_frames):
        t = i * dt
        c = c0 + drift_rate * t
        a = amp * np.exp(-amp_decay * t)
        pts = curve_from_kappa(gaussian_bump(c, a, 0.06), length, n_pts)
        frames.append(Midline(pts, t))
    return MidlineSequence(tuple(frames), dt)


class TestCurvatureField:
    def test_straight_sequence_all_zero(self):
        frames = tuple(line_midline(0, t=0.02 * i, n=30) for i in range(5))
        field = curvature_field(MidlineSequence(frames, 0.02), 50)
        assert np.abs(field.kappa).max() < 1e-9

    def test_static_arc_constant_field(self):
        pts = circle_points(0.5, 600, span=1.2)
        frames = tuple(Midline(pts, 0.1 * i) for i in range(4))
        field = curvature_field(MidlineSequence(frames, 0.1), 40)
        interior = field.kappa[:, 2:-2]
        assert np.abs(interior - 2.0).max() / 2.0 < 0.01
        assert np.ptp(interior) / 2.0 < 0.02

    def test_rows_match_per_frame_profiles(self):
        from softwhip import curvature_profile, resample_uniform, smooth
        seq = bump_sequence(0.5, n_frames=4)
        field = curvature_field(seq, 64, smooth_window=5)
        for i, f in enumerate(seq.frames):
            prof = curvature_profile(resample_uniform(smooth(f, 5), 64))
            assert np.array_equal(field.kappa[i], prof.kappa)

    def test_traveling_bump_argmax_advances_linearly(self):
        seq = bump_sequence(0.5)  # bump center runs 0.2 -> 0.7, stays interior
        field = curvature_field(seq, 100)
        peaks = field.stations[np.argmax(field.kappa, axis=1)]
        slope, _ = np.polyfit(field.t, peaks, 1)
        assert abs(slope - 0.5) < 0.02
        assert np.all(np.diff(peaks) > -1e-9)


class TestPropagationMetrics:
    def test_known_drift_rate_recovered(self):
        field = curvature_field(bump_sequence(0.5), 100)
        metrics = propagation_metrics(field)
        assert abs(metrics.drift_rate - 0.5) / 0.5 < 0.02

    def test_static_arc_zero_drift(self):
        pts = circle_points(0.5, 600, span=1.2)
        frames = tuple(Midline(pts, 0.1 * i) for i in range(5))
        metrics = propagation_metrics(curvature_field(MidlineSequence(frames, 0.1), 60))
        assert abs(metrics.drift_rate) < 1e-9

    def test_extent_stops_at_decay_threshold(self):
        # bump center hits s/L0 = 0.6 at frame 10 carrying 12% of the initial
        # amplitude; one frame later it is down to 9.7%, below the 10%
        # threshold, so the extent is the frame-10 peak station
        rate = 0.4
        c0 = 0.24
        dt = 0.09
        lam = -np.log(0.12) / 0.9
        seq = bump_sequence(rate, dt=dt, n_frames=14, amp_decay=lam, c0=c0)
        field = curvature_field(seq, 100)
        metrics = propagation_metrics(field)
        spacing = field.stations[1] - field.stations[0]
        assert abs(metrics.extent - 0.6) <= spacing + 1e-9

    def test_zero_field_rejected(self):
        frames = tuple(line_midline(0, t=0.02 * i, n=30) for i in range(3))
        field = curvature_field(MidlineSequence(frames, 0.02), 40)
        with pytest.raises(DegenerateFieldError):
            propagation_metrics(field)
