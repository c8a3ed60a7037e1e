"""Shared test utilities: independent oracles and synthetic data builders.

Everything here is deliberately built from plain numpy so expected values do
not flow through the code paths under test.
"""

from __future__ import annotations

import numpy as np


def circle_points(radius, n, span=2.0 * np.pi, center=(0.0, 0.0), phase=0.0):
    th = np.linspace(phase, phase + span, n)
    return np.column_stack([center[0] + radius * np.cos(th),
                            center[1] + radius * np.sin(th)])


def circumcircle(p1, p2, p3):
    """Direct circumcircle solve (center, radius) by equidistance equations."""
    p1, p2, p3 = (np.asarray(p, dtype=float) for p in (p1, p2, p3))
    a = np.array([2.0 * (p2 - p1), 2.0 * (p3 - p2)])
    b = np.array([p2 @ p2 - p1 @ p1, p3 @ p3 - p2 @ p2])
    center = np.linalg.solve(a, b)
    return center, float(np.linalg.norm(p1 - center))


def curve_from_kappa(kappa, length, n, base=(0.0, 0.0), heading0=0.0):
    """Integrate a curvature profile into planar points (trapezoid rule).

    ``kappa`` may be a callable of s or an array of n samples over [0, L].
    """
    s = np.linspace(0.0, length, n)
    k = kappa(s) if callable(kappa) else np.asarray(kappa, dtype=float)
    ds = s[1] - s[0]
    theta = heading0 + np.concatenate(
        [[0.0], np.cumsum(0.5 * (k[1:] + k[:-1]) * ds)])
    cx = np.concatenate([[0.0], np.cumsum(0.5 * (np.cos(theta[1:]) + np.cos(theta[:-1])) * ds)])
    cy = np.concatenate([[0.0], np.cumsum(0.5 * (np.sin(theta[1:]) + np.sin(theta[:-1])) * ds)])
    return np.column_stack([base[0] + cx, base[1] + cy])


def gaussian_bump(center, amplitude, sigma):
    """Curvature profile callable: Gaussian bump over normalized arc length."""
    def kappa(s):
        u = s / s[-1] if s[-1] > 0 else s
        return amplitude * np.exp(-((u - center) ** 2) / (2.0 * sigma ** 2))
    return kappa


def rasterize_polyline(points_m, pitch, width_px, shape):
    """Stamp disks of ``width_px`` diameter along a dense resampling."""
    h, w = shape
    grid = np.zeros((h, w), dtype=bool)
    pts = np.asarray(points_m) / pitch  # to pixel coordinates (x, y)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    total = seg.sum()
    n_dense = max(2, int(total / 0.4))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, total, n_dense)
    dense = np.column_stack([np.interp(targets, cum, pts[:, 0]),
                             np.interp(targets, cum, pts[:, 1])])
    r = width_px / 2.0
    ir = int(np.ceil(r))
    dy, dx = np.mgrid[-ir:ir + 1, -ir:ir + 1]
    disk = dy * dy + dx * dx <= r * r
    offs = np.argwhere(disk) - ir  # (k, 2) row/col offsets
    rows = np.round(dense[:, 1]).astype(int)[:, None] + offs[:, 0][None, :]
    cols = np.round(dense[:, 0]).astype(int)[:, None] + offs[:, 1][None, :]
    keep = (rows >= 0) & (rows < h) & (cols >= 0) & (cols < w)
    grid[rows[keep], cols[keep]] = True
    return grid


def mean_distance_to_curve(points, curve, n_dense=4000):
    """Mean distance from each point to a densely resampled reference curve."""
    curve = np.asarray(curve, dtype=float)
    seg = np.linalg.norm(np.diff(curve, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, cum[-1], n_dense)
    dense = np.column_stack([np.interp(targets, cum, curve[:, 0]),
                             np.interp(targets, cum, curve[:, 1])])
    dists = []
    for p in np.asarray(points, dtype=float):
        dists.append(np.min(np.hypot(dense[:, 0] - p[0], dense[:, 1] - p[1])))
    return float(np.mean(dists))
