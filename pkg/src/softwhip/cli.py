"""Command-line entry point: simulate, extract, analyze, compare, sweep.

Exit codes: 0 success, 1 config/input error, 2 runtime failure (partial
outputs are still written where possible).
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import csvio
from .config import (RunConfig, SweepConfig, format_value, load_run_config,
                     load_sweep_config, resolved_values, to_drive, to_rod_model,
                     write_manifest)
from .errors import (ConfigError, EmptySequenceError, SimulationDivergedError,
                     SoftwhipError)
from .kinematics import (MidlineSequence, bend_velocity, classify_profile,
                         curvature_field, normalize_profile, overlay_profile,
                         propagation_metrics)
from .maskio import read_mask
from .maskpipe import BASE_HINTS, extract_sequence
from .rodsim import simulate, stability_dt


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as config errors (exit code 1)."""

    def error(self, message):
        raise ConfigError(message)


def _analysis(seq: MidlineSequence, stations: int, smooth_window: int) -> dict:
    """Field, normalized bend track, classification, propagation metrics."""
    out = {"field": curvature_field(seq, stations, smooth_window)}
    try:
        track = normalize_profile(bend_velocity(seq))
        label, diag = classify_profile(track)
        out.update(track=track, classification=label, diagnostics=diag)
    except SoftwhipError as exc:
        out.update(track=None, classification="unavailable", skip_reason=str(exc))
    try:
        out["metrics"] = propagation_metrics(out["field"])
    except SoftwhipError as exc:
        out["metrics"] = None
        out.setdefault("skip_reason", str(exc))
    return out


def _result_entries(analysis: dict) -> dict:
    extra = {"result.classification": analysis["classification"]}
    diag = analysis.get("diagnostics")
    if diag is not None:
        extra["result.peak_fraction"] = diag.peak_fraction
        extra["result.fall_fraction"] = diag.fall_fraction
        extra["result.rise_fraction"] = diag.rise_fraction
    metrics = analysis.get("metrics")
    if metrics is not None:
        extra["result.peak_kappa"] = metrics.global_peak
        extra["result.propagation_extent"] = metrics.extent
        extra["result.drift_rate"] = metrics.drift_rate
    if "skip_reason" in analysis:
        extra["result.skipped"] = analysis["skip_reason"]
    return extra


def _write_run_outputs(outdir: Path, seq: MidlineSequence, analysis: dict) -> None:
    idx = seq.frame_indices
    csvio.write_midlines(outdir / "midlines.csv", seq)
    csvio.write_curvature(outdir / "curvature.csv", analysis["field"], idx)
    if analysis["track"] is not None:
        csvio.write_bend(outdir / "bend.csv", analysis["track"], idx)


def _run_one(cfg: RunConfig, outdir: Path, config_dir: Path | None = None) -> dict:
    """Simulate one config into ``outdir``; returns the analysis bundle."""
    outdir.mkdir(parents=True, exist_ok=True)
    model = to_rod_model(cfg)
    drive = to_drive(cfg, config_dir)
    diverged = None
    try:
        seq = simulate(model, drive, cfg.duration, cfg.output_dt)
    except SimulationDivergedError as exc:
        if exc.partial is None or len(exc.partial) < 4:
            raise
        seq = exc.partial
        diverged = exc
    analysis = _analysis(seq, cfg.stations, cfg.smooth_window)
    _write_run_outputs(outdir, seq, analysis)
    extra = _result_entries(analysis)
    extra["derived.omega_rad_s"] = cfg.rpm * 2.0 * math.pi / 60.0
    extra["derived.stability_dt"] = stability_dt(model)
    extra["derived.frames"] = len(seq)
    if diverged is not None:
        extra["result.diverged_at"] = diverged.diagnostics.get("time", -1.0)
    write_manifest(outdir / "manifest", cfg, extra)
    analysis["diverged"] = diverged
    analysis["sequence"] = seq
    return analysis


def cmd_simulate(args) -> int:
    cfg = load_run_config(args.config)
    analysis = _run_one(cfg, Path(args.out), Path(args.config).parent)
    if analysis["diverged"] is not None:
        print(f"simulate: diverged, partial outputs in {args.out}", file=sys.stderr)
        return 2
    print(f"simulate: {len(analysis['sequence'])} frames, "
          f"classification {analysis['classification']}")
    return 0


def cmd_extract(args) -> int:
    mask_dir = Path(args.masks)
    if not mask_dir.is_dir():
        raise ConfigError(f"mask directory {mask_dir} not found")
    paths = sorted(p for p in mask_dir.iterdir() if p.is_file())
    if not paths:
        raise ConfigError(f"mask directory {mask_dir} is empty")
    masks = [read_mask(p, args.pitch) for p in paths]
    fixture = read_mask(args.fixture, args.pitch) if args.fixture else None
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        result = extract_sequence(masks, fixture, args.dt, args.pitch, args.base_hint)
    except EmptySequenceError as exc:
        csvio.write_gaps(outdir / "gaps.csv", [])
        print(f"extract: {exc}", file=sys.stderr)
        return 2
    csvio.write_midlines(outdir / "midlines.csv", result.sequence)
    csvio.write_gaps(outdir / "gaps.csv", result.gaps)
    print(f"extract: {len(result.sequence)} midlines, {len(result.gaps)} gaps")
    return 0


def cmd_analyze(args) -> int:
    seq = csvio.read_midlines(args.midlines)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    analysis = _analysis(seq, args.stations, args.smooth_window)
    idx = seq.frame_indices
    csvio.write_curvature(outdir / "curvature.csv", analysis["field"], idx)
    if analysis["track"] is not None:
        csvio.write_bend(outdir / "bend.csv", analysis["track"], idx)
    lines = [f"{k} = {format_value(v)}\n" for k, v in sorted(_result_entries(analysis).items())]
    (outdir / "analysis").write_text("".join(lines))
    print(f"analyze: {len(seq)} frames, classification {analysis['classification']}")
    return 0


def cmd_compare(args) -> int:
    track_a = normalize_profile(csvio.read_bend(args.a))
    track_b = normalize_profile(csvio.read_bend(args.b))
    grid, va = overlay_profile(track_a)
    _, vb = overlay_profile(track_b)
    rmse = float(np.sqrt(np.mean((va - vb) ** 2)))
    peak_diff = float(abs(grid[np.argmax(va)] - grid[np.argmax(vb)]))
    label_a, _ = classify_profile(track_a)
    label_b, _ = classify_profile(track_b)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    csvio.write_overlay(outdir / "overlay.csv", grid, va, vb)
    (outdir / "compare").write_text(
        f"rmse = {csvio.fmt(rmse)}\n"
        f"peak_position_difference = {csvio.fmt(peak_diff)}\n"
        f"classification_a = {label_a}\n"
        f"classification_b = {label_b}\n")
    print(f"compare: rmse {csvio.fmt(rmse)}, peak diff {csvio.fmt(peak_diff)}, "
          f"{label_a} vs {label_b}")
    return 0


def _sweep_cell(cell) -> dict:
    cfg, rundir = cell
    row = {"material": cfg.material, "rpm": csvio.fmt(cfg.rpm), "medium": cfg.medium}
    try:
        analysis = _run_one(cfg, rundir)
        metrics = analysis["metrics"]
        row.update(
            status="diverged" if analysis["diverged"] is not None else "ok",
            classification=analysis["classification"],
            peak_kappa=metrics.global_peak if metrics else "",
            propagation_extent=metrics.extent if metrics else "",
            drift_rate=metrics.drift_rate if metrics else "",
            detail="",
        )
    except SoftwhipError as exc:
        row.update(status="error", classification="", peak_kappa="",
                   propagation_extent="", drift_rate="", detail=str(exc))
    return row


def cmd_sweep(args) -> int:
    sweep = load_sweep_config(args.config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    cells = []
    for mat, rpm, med in sweep.grid():
        cfg = sweep.cell_config(mat, rpm, med)
        rundir = outdir / "runs" / f"{mat}_{csvio.fmt(rpm)}rpm_{med}"
        cells.append((cfg, rundir))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(cell) for cell in cells]
    csvio.write_summary(outdir / "summary.csv", rows)
    failed = sum(1 for r in rows if r["status"] != "ok")
    print(f"sweep: {len(rows)} runs, {failed} failed")
    return 0 if failed == 0 else 2


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="softwhip",
                     description="Soft-arm whip simulation and bend-propagation analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(name="simulate", help="run the rod simulator from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(name="extract", help="extract midlines from mask frames")
    p.add_argument("--masks", required=True, help="directory of mask files, frame order = name order")
    p.add_argument("--fixture", default=None, help="mask of the rigid support to exclude")
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--pitch", type=float, required=True, help="meters per pixel")
    p.add_argument("--base-hint", choices=BASE_HINTS, default="top")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser(name="analyze", help="curvature field and bend track from a midlines CSV")
    p.add_argument("--midlines", required=True)
    p.add_argument("--stations", type=int, default=100)
    p.add_argument("--smooth-window", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser(name="compare", help="overlay two bend CSVs on the common grid")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser(name="sweep", help="run a material x rpm x medium grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SoftwhipError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
