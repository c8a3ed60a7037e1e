"""Plot-ready CSV emission and parsing.

All floats are written with 9 significant digits and a '.' decimal separator
regardless of locale, which makes re-reading and re-emitting byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .kinematics import BendTrack, CurvatureField, MidlineSequence
from .midline import Midline


def fmt(x) -> str:
    return "%.9g" % float(x)


def _write(path: str | Path, header: str, rows: list[str]) -> None:
    Path(path).write_text(header + "\n" + "".join(rows))


def write_midlines(path: str | Path, seq: MidlineSequence) -> None:
    rows = []
    for frame, mid in zip(seq.frame_indices, seq.frames):
        t = fmt(mid.t)
        for idx, (x, y) in enumerate(mid.points):
            rows.append(f"{frame},{t},{idx},{fmt(x)},{fmt(y)}\n")
    _write(path, "frame,t,idx,x,y", rows)


def read_midlines(path: str | Path) -> MidlineSequence:
    """Rebuild a sequence from midlines.csv; dt is inferred from timestamps."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "frame,t,idx,x,y":
        raise InvalidArgumentError(f"{path} is not a midlines CSV")
    per_frame: dict[int, tuple[float, list]] = {}
    for line in lines[1:]:
        if not line:
            continue
        frame_s, t_s, _idx, x_s, y_s = line.split(",")
        entry = per_frame.setdefault(int(frame_s), (float(t_s), []))
        entry[1].append((float(x_s), float(y_s)))
    if not per_frame:
        raise InvalidArgumentError(f"{path} has no midline rows")
    frames = []
    for frame in sorted(per_frame):
        t, pts = per_frame[frame]
        frames.append(Midline(np.array(pts), t))
    times = np.array([f.t for f in frames])
    if len(frames) == 1:
        dt = times[0] if times[0] > 0 else 1.0
    else:
        dt = float(np.diff(times).min())
    return MidlineSequence(tuple(frames), dt)


def write_curvature(path: str | Path, field: CurvatureField, frame_indices) -> None:
    rows = []
    for i, frame in enumerate(frame_indices):
        t = fmt(field.t[i])
        for j, s in enumerate(field.stations):
            rows.append(f"{frame},{t},{j},{fmt(s)},{fmt(field.kappa[i, j])}\n")
    _write(path, "frame,t,station,s_over_L,kappa", rows)


def write_bend(path: str | Path, track: BendTrack, frame_indices) -> None:
    """One row per frame; the last row has no interval quantities."""
    n = track.t.size
    rows = []
    for i in range(n):
        frame = frame_indices[i]
        x, y = track.positions[i]
        if i < n - 1:
            vx, speed = fmt(track.vx[i]), fmt(track.speed[i])
            vn = fmt(track.v_norm[i]) if track.v_norm is not None else ""
            tn = fmt(track.t_norm[i]) if track.t_norm is not None else ""
        else:
            vx = speed = vn = tn = ""
        rows.append(f"{frame},{fmt(track.t[i])},{fmt(x)},{fmt(y)},{vx},{speed},{vn},{tn}\n")
    _write(path, "frame,t,x,y,vx,speed,v_norm,t_norm", rows)


def read_bend(path: str | Path) -> BendTrack:
    """Rebuild a BendTrack (without station indices) from bend.csv."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "frame,t,x,y,vx,speed,v_norm,t_norm":
        raise InvalidArgumentError(f"{path} is not a bend CSV")
    t, pos, vx, speed, vn, tn = [], [], [], [], [], []
    for line in lines[1:]:
        if not line:
            continue
        _frame, t_s, x_s, y_s, vx_s, sp_s, vn_s, tn_s = line.split(",")
        t.append(float(t_s))
        pos.append((float(x_s), float(y_s)))
        if vx_s:
            vx.append(float(vx_s))
            speed.append(float(sp_s))
            if vn_s:
                vn.append(float(vn_s))
                tn.append(float(tn_s))
    if len(t) < 2:
        raise InvalidArgumentError(f"{path} has fewer than 2 frames")
    n = len(t)
    return BendTrack(
        t=np.array(t),
        positions=np.array(pos),
        indices=np.zeros(n, dtype=int),
        boundary=np.zeros(n, dtype=bool),
        vx=np.array(vx),
        speed=np.array(speed),
        t_norm=np.array(tn) if len(tn) == n - 1 else None,
        v_norm=np.array(vn) if len(vn) == n - 1 else None,
    )


def write_gaps(path: str | Path, gaps) -> None:
    rows = [f"{g.frame},{g.kind},\"{g.detail}\"\n" for g in gaps]
    _write(path, "frame,error,detail", rows)


def write_overlay(path: str | Path, grid: np.ndarray, va: np.ndarray,
                  vb: np.ndarray) -> None:
    rows = [f"{fmt(g)},{fmt(a)},{fmt(b)}\n" for g, a, b in zip(grid, va, vb)]
    _write(path, "t_norm,v_a,v_b", rows)


SUMMARY_COLUMNS = ("material", "rpm", "medium", "status", "classification",
                   "peak_kappa", "propagation_extent", "drift_rate", "detail")


def write_summary(path: str | Path, rows: list[dict]) -> None:
    out = []
    for row in rows:
        cells = []
        for col in SUMMARY_COLUMNS:
            val = row.get(col, "")
            if isinstance(val, float):
                val = fmt(val)
            cells.append(str(val))
        out.append(",".join(cells) + "\n")
    _write(path, ",".join(SUMMARY_COLUMNS), out)


def read_summary(path: str | Path) -> list[dict]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != ",".join(SUMMARY_COLUMNS):
        raise InvalidArgumentError(f"{path} is not a sweep summary CSV")
    rows = []
    for line in lines[1:]:
        if line:
            rows.append(dict(zip(SUMMARY_COLUMNS, line.split(","))))
    return rows
