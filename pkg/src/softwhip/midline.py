"""Midline geometry: arc length, smoothing, uniform resampling, three-point curvature.

All functions are pure; a :class:`Midline` is an immutable ordered polyline of
one frame's arm centerline (base first), in meters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, InvalidArgumentError


@dataclass(frozen=True)
class Midline:
    """Ordered base-to-tip centerline of one frame, points in meters."""

    points: np.ndarray  # (n, 2) float64
    t: float = 0.0      # frame timestamp, seconds

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidArgumentError("midline points must form an (n, 2) array")
        if pts.shape[0] < 3:
            raise InvalidArgumentError("midline needs at least 3 points")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgumentError("midline points must be finite")
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if np.any(seg == 0.0):
            raise DegenerateGeometryError("coincident consecutive midline points")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "t", float(self.t))

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class CurvatureProfile:
    """Curvature vs normalized arc length (s/L0) for one frame."""

    stations: np.ndarray  # s/L0 in [0, 1], strictly increasing
    kappa: np.ndarray     # 1/m, finite and non-negative

    def __post_init__(self):
        st = np.asarray(self.stations, dtype=np.float64)
        ka = np.asarray(self.kappa, dtype=np.float64)
        if st.shape != ka.shape or st.ndim != 1:
            raise InvalidArgumentError("stations and kappa must be 1-d arrays of equal length")
        if np.any(np.diff(st) <= 0.0):
            raise InvalidArgumentError("stations must be strictly increasing")
        if not np.all(np.isfinite(ka)) or np.any(ka < 0.0):
            raise InvalidArgumentError("kappa must be finite and non-negative")
        object.__setattr__(self, "stations", st)
        object.__setattr__(self, "kappa", ka)


def _cumulative_length(pts: np.ndarray) -> np.ndarray:
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    out = np.empty(pts.shape[0])
    out[0] = 0.0
    np.cumsum(seg, out=out[1:])
    return out


def arc_length(m: Midline) -> float:
    """Total polyline length in meters."""
    return float(_cumulative_length(m.points)[-1])


def resample_uniform(m: Midline, n: int) -> Midline:
    """Resample to ``n`` points at equal arc-length spacing along the polyline.

    Endpoints are preserved exactly; interior points are linear interpolants,
    so total length is preserved up to corner-cutting at the input vertices.
    """
    if n < 3:
        raise InvalidArgumentError("resample needs n >= 3 stations")
    cum = _cumulative_length(m.points)
    targets = np.linspace(0.0, cum[-1], int(n))
    x = np.interp(targets, cum, m.points[:, 0])
    y = np.interp(targets, cum, m.points[:, 1])
    out = np.column_stack([x, y])
    out[0] = m.points[0]
    out[-1] = m.points[-1]
    return Midline(out, m.t)


def smooth(m: Midline, window: int) -> Midline:
    """Centered moving average per coordinate.

    The window shrinks symmetrically toward the ends, so both endpoints are
    preserved exactly. ``window`` must be odd and no larger than the point count.
    """
    n = len(m)
    if window % 2 == 0 or window < 1 or window > n:
        raise InvalidArgumentError(f"window must be odd and in [1, {n}], got {window}")
    if window == 1:
        return Midline(m.points.copy(), m.t)
    idx = np.arange(n)
    half = np.minimum(window // 2, np.minimum(idx, n - 1 - idx))
    cs = np.vstack([np.zeros((1, 2)), np.cumsum(m.points, axis=0)])
    lo = idx - half
    hi = idx + half + 1
    out = (cs[hi] - cs[lo]) / (hi - lo)[:, None]
    out[0] = m.points[0]
    out[-1] = m.points[-1]
    return Midline(out, m.t)


def curvature_profile(m: Midline) -> CurvatureProfile:
    """Three-point circumcircle curvature at every station.

    Each interior point gets the inverse circumradius of itself and its two
    neighbors (collinear triples give exactly zero); endpoints copy the nearest
    interior value. Stations are cumulative arc length over total length.
    Intended for midlines that were already uniformly resampled.
    """
    pts = m.points
    p0, p1, p2 = pts[:-2], pts[1:-1], pts[2:]
    d01 = p1 - p0
    d02 = p2 - p0
    d12 = p2 - p1
    a = np.hypot(d12[:, 0], d12[:, 1])
    b = np.hypot(d02[:, 0], d02[:, 1])
    c = np.hypot(d01[:, 0], d01[:, 1])
    if np.any(b == 0.0):
        raise DegenerateGeometryError("coincident points two stations apart")
    cross = d01[:, 0] * d02[:, 1] - d01[:, 1] * d02[:, 0]
    # kappa = 4 * triangle_area / (a*b*c); area = |cross| / 2
    interior = 2.0 * np.abs(cross) / (a * b * c)
    kappa = np.empty(pts.shape[0])
    kappa[1:-1] = interior
    kappa[0] = interior[0]
    kappa[-1] = interior[-1]
    cum = _cumulative_length(pts)
    return CurvatureProfile(cum / cum[-1], kappa)
