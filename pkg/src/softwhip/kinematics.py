"""Bend-point tracking, velocity profiles, curvature fields, profile classification.

This is where the analysis quantities live: per-frame bend point (minimum-x
midline location), its velocity series, peak-normalized profiles, the
frame-by-station curvature matrix, and the monotonic-decay / bell-shaped
profile classifier.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateFieldError,
    DegenerateProfileError,
    InvalidArgumentError,
)
from .midline import Midline, curvature_profile, resample_uniform, smooth

MONOTONIC_DECAY = "monotonic-decay"
BELL_SHAPED = "bell-shaped"
OTHER = "other"

OVERLAY_POINTS = 101  # common grid for profile overlays (percent resolution)


@dataclass(frozen=True)
class MidlineSequence:
    """Time-sampled midlines; timestamps are integer multiples of ``dt``.

    Contiguous sequences have t = 0, dt, 2*dt, ...; extraction gaps show up
    as missing multiples, never as off-grid timestamps.
    """

    frames: tuple[Midline, ...]
    dt: float

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise InvalidArgumentError("sequence needs at least one frame")
        dt = float(self.dt)
        if dt <= 0.0:
            raise InvalidArgumentError("dt must be positive")
        last = -np.inf
        for f in frames:
            k = round(f.t / dt)
            if abs(f.t - k * dt) > 1e-9:
                raise InvalidArgumentError(
                    f"frame timestamp {f.t} is not a multiple of dt={dt}")
            if f.t <= last:
                raise InvalidArgumentError("frame timestamps must be strictly increasing")
            last = f.t
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "dt", dt)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def times(self) -> np.ndarray:
        return np.array([f.t for f in self.frames])

    @property
    def frame_indices(self) -> np.ndarray:
        return np.array([round(f.t / self.dt) for f in self.frames], dtype=int)


class BendPoint(NamedTuple):
    point: np.ndarray
    index: int
    boundary: bool  # argmin fell on the base or tip endpoint


@dataclass(frozen=True)
class BendTrack:
    """Bend-point positions and velocities; normalized profile once filled.

    ``vx`` and ``speed`` have one sample per frame interval (length n-1);
    ``t_norm``/``v_norm`` stay None until :func:`normalize_profile`.
    """

    t: np.ndarray          # (n,) frame times
    positions: np.ndarray  # (n, 2) bend-point coordinates, meters
    indices: np.ndarray    # (n,) station index of the bend point
    boundary: np.ndarray   # (n,) bool, bend pinned at an endpoint
    vx: np.ndarray         # (n-1,) signed x-velocity, m/s
    speed: np.ndarray      # (n-1,) displacement speed, m/s
    t_norm: np.ndarray | None = None
    v_norm: np.ndarray | None = None


@dataclass(frozen=True)
class CurvatureField:
    """Frame-by-station curvature matrix over normalized arc length."""

    t: np.ndarray         # (n_frames,)
    stations: np.ndarray  # (n_stations,) nominal s/L0 grid
    kappa: np.ndarray     # (n_frames, n_stations), 1/m

    def __post_init__(self):
        if self.kappa.shape != (self.t.size, self.stations.size):
            raise InvalidArgumentError("field dimensions inconsistent")
        if not np.all(np.isfinite(self.kappa)) or np.any(self.kappa < 0.0):
            raise InvalidArgumentError("field entries must be finite and non-negative")


@dataclass(frozen=True)
class ClassifierThresholds:
    """Profile-shape classifier knobs (fractions of the sample count / peak)."""

    early_peak: float = 0.10       # peak position for a decay profile
    bell_low: float = 0.20         # bell peak window
    bell_high: float = 0.80
    monotone_fraction: float = 0.90  # post-peak falling share for decay
    bell_fraction: float = 0.80      # rising/falling shares for bell
    noise_tolerance: float = 0.02    # fraction of peak speed treated as jitter


@dataclass(frozen=True)
class ProfileDiagnostics:
    peak_index: int
    peak_fraction: float
    rise_fraction: float
    fall_fraction: float
    n_samples: int


@dataclass(frozen=True)
class PropagationMetrics:
    """Per-frame curvature-peak summary plus scalar propagation measures."""

    peak_kappa: np.ndarray    # (n_frames,)
    peak_station: np.ndarray  # (n_frames,)
    extent: float             # farthest station reached while above threshold
    drift_rate: float         # mean peak drift, (s/L0) per second
    global_peak: float


def bend_point(m: Midline) -> BendPoint:
    """Midline point with minimum x; ties go to the smallest station index."""
    i = int(np.argmin(m.points[:, 0]))
    return BendPoint(m.points[i].copy(), i, i == 0 or i == len(m) - 1)


def bend_velocity(seq: MidlineSequence) -> BendTrack:
    """Track the bend point across frames and difference it in time.

    ``vx`` is the signed x-velocity (the rig's propagation direction is
    negative x), ``speed`` the displacement magnitude per interval.
    """
    if len(seq) < 2:
        raise InvalidArgumentError("bend velocity needs at least 2 frames")
    bps = [bend_point(f) for f in seq.frames]
    pos = np.array([bp.point for bp in bps])
    t = seq.times
    dt_pairs = np.diff(t)
    disp = np.diff(pos, axis=0)
    vx = disp[:, 0] / dt_pairs
    speed = np.hypot(disp[:, 0], disp[:, 1]) / dt_pairs
    return BendTrack(
        t=t,
        positions=pos,
        indices=np.array([bp.index for bp in bps], dtype=int),
        boundary=np.array([bp.boundary for bp in bps], dtype=bool),
        vx=vx,
        speed=speed,
    )


def normalize_profile(track: BendTrack) -> BendTrack:
    """Fill ``v_norm`` (speed over peak speed) and ``t_norm`` (affine [0, 1]).

    Samples stay at their original times, so the peak value is exactly 1 at
    its own sample; overlay resampling is a separate step.
    """
    if track.speed.size < 3:
        raise InvalidArgumentError("normalization needs at least 3 velocity samples")
    vmax = float(track.speed.max())
    if vmax <= 0.0:
        raise DegenerateProfileError("all-zero velocity profile")
    ts = track.t[:-1]
    t_norm = (ts - ts[0]) / (ts[-1] - ts[0])
    return replace(track, t_norm=t_norm, v_norm=track.speed / vmax)


def overlay_profile(track: BendTrack, n: int = OVERLAY_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """Resample a normalized profile onto the common n-point [0, 1] grid."""
    if track.v_norm is None or track.t_norm is None:
        raise InvalidArgumentError("normalize_profile must run before overlay")
    grid = np.linspace(0.0, 1.0, n)
    return grid, np.interp(grid, track.t_norm, track.v_norm)


def classify_profile(
    track: BendTrack,
    thresholds: ClassifierThresholds = ClassifierThresholds(),
) -> tuple[str, ProfileDiagnostics]:
    """Label a normalized profile monotonic-decay, bell-shaped, or other.

    Decay: peak within the first ``early_peak`` fraction of samples and at
    least ``monotone_fraction`` of post-peak differences non-increasing within
    the noise tolerance. Bell: peak in the middle window with high rising and
    falling shares on either side.
    """
    if track.v_norm is None:
        raise InvalidArgumentError("normalize_profile must run before classification")
    v = track.v_norm
    m = v.size
    j = int(np.argmax(v))
    peak_frac = j / (m - 1)
    eps = thresholds.noise_tolerance * float(v.max())
    d = np.diff(v)
    post = d[j:]
    pre = d[:j]
    fall = float(np.mean(post <= eps)) if post.size else 1.0
    rise = float(np.mean(pre >= -eps)) if pre.size else 1.0
    diag = ProfileDiagnostics(j, peak_frac, rise, fall, m)
    if peak_frac <= thresholds.early_peak and fall >= thresholds.monotone_fraction:
        return MONOTONIC_DECAY, diag
    if (thresholds.bell_low <= peak_frac <= thresholds.bell_high
            and rise >= thresholds.bell_fraction
            and fall >= thresholds.bell_fraction):
        return BELL_SHAPED, diag
    return OTHER, diag


def curvature_field(seq: MidlineSequence, n_stations: int = 100,
                    smooth_window: int = 5) -> CurvatureField:
    """Per-frame smooth + uniform resample + curvature, stacked on one grid.

    Rows equal the per-frame :func:`curvature_profile` output by construction;
    the reported station grid is the nominal uniform spacing of the resampler.
    """
    rows = []
    for f in seq.frames:
        window = min(smooth_window, len(f) if len(f) % 2 == 1 else len(f) - 1)
        prof = curvature_profile(resample_uniform(smooth(f, window), n_stations))
        rows.append(prof.kappa)
    return CurvatureField(
        t=seq.times,
        stations=np.linspace(0.0, 1.0, n_stations),
        kappa=np.array(rows),
    )


def propagation_metrics(field: CurvatureField,
                        threshold_fraction: float = 0.10) -> PropagationMetrics:
    """Peak curvature per frame, how far the peak travels, and how fast.

    Frames whose peak exceeds ``threshold_fraction`` of the global maximum
    count toward the propagation extent; the drift rate is the least-squares
    slope of peak station vs time over those frames.
    """
    peak_kappa = field.kappa.max(axis=1)
    global_peak = float(peak_kappa.max())
    if global_peak <= 0.0:
        raise DegenerateFieldError("curvature field is identically zero")
    peak_station = field.stations[np.argmax(field.kappa, axis=1)]
    qual = peak_kappa >= threshold_fraction * global_peak
    extent = float(peak_station[qual].max())
    if int(qual.sum()) >= 2:
        drift = float(np.polyfit(field.t[qual], peak_station[qual], 1)[0])
    else:
        drift = 0.0
    return PropagationMetrics(peak_kappa, peak_station, extent, drift, global_peak)
