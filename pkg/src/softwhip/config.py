"""Flat key=value run configs, sweep grids, and run manifests.

A config file is plain text: ``key = value`` per line, ``#`` comments. Keys
mirror the rod/drive/analysis parameters in SI units (rpm for the drive,
converted internally). Manifests are valid config files with extra
``derived.*`` / ``result.*`` keys that the parser ignores, so a run can be
reproduced directly from its manifest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .rodsim import MATERIALS, WATER_DENSITY, DriveProfile, RodModel

MEDIA = ("water", "air")


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("on", "true", "1", "yes"):
        return True
    if low in ("off", "false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class RunConfig:
    """One resolved simulation + analysis run."""

    material: str = "gel2"
    medium: str = "water"
    n_nodes: int = 60
    length: float = 0.45
    r_base: float = 0.008
    r_tip: float = 0.002
    density: float | None = None          # None: taken from the material preset
    young_modulus: float | None = None    # None: taken from the material preset
    internal_damping: float = 0.01
    drag_normal: float = 1.5
    drag_tangent: float = 0.05
    fluid_density: float | None = None    # None: taken from the medium
    gravity: bool = False
    gravity_angle_deg: float = 0.0
    axial_scale: float = 50.0
    dt_safety: float = 0.1
    rpm: float = 150.0
    sweep_angle_deg: float = 120.0
    ramp_time: float = 0.12
    drive_path: str | None = None         # CSV of t,x,y,theta overrides the sweep
    duration: float = 4.0
    output_dt: float = 0.02
    stations: int = 100
    smooth_window: int = 5


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_SWEEP_KEYS = ("materials", "rpms", "media")


@dataclass(frozen=True)
class SweepConfig:
    base: RunConfig
    materials: tuple[str, ...]
    rpms: tuple[float, ...]
    media: tuple[str, ...]

    def grid(self):
        """Deterministic (material, rpm, medium) cells in declared order."""
        for mat in self.materials:
            for rpm in self.rpms:
                for med in self.media:
                    yield mat, rpm, med

    def cell_config(self, material: str, rpm: float, medium: str) -> RunConfig:
        # grid cells get preset/medium values, dropping any explicit overrides
        return replace(self.base, material=material, rpm=rpm, medium=medium,
                       young_modulus=None, density=None, fluid_density=None)


def parse_keyvalues(path: str | Path) -> dict[str, tuple[str, int]]:
    """Read ``key = value`` lines into {key: (raw value, line number)}."""
    out: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"empty key or value in {raw.strip()!r}", lineno)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        out[key] = (value, lineno)
    return out


def _convert(key: str, raw: str, lineno: int):
    ftype = _FIELD_TYPES[key]
    try:
        if ftype == "int":
            return int(raw)
        if ftype == "bool":
            return _parse_bool(raw)
        if ftype in ("str", "str | None"):
            return raw
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}", lineno) from exc


def _resolve(entries: dict[str, tuple[str, int]], allow_sweep: bool) -> tuple[RunConfig, dict]:
    run_kwargs = {}
    sweep_kwargs = {}
    for key, (raw, lineno) in entries.items():
        if key.startswith(("derived.", "result.")):
            continue  # manifest annotations
        if key in _SWEEP_KEYS:
            if not allow_sweep:
                raise ConfigError(f"{key} is only valid in sweep configs", lineno)
            sweep_kwargs[key] = ([v.strip() for v in raw.split(",") if v.strip()], lineno)
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}", lineno)
        run_kwargs[key] = _convert(key, raw, lineno)

    cfg = RunConfig(**run_kwargs)
    if cfg.material not in MATERIALS and (
            cfg.young_modulus is None or cfg.density is None):
        raise ConfigError(
            f"unknown material {cfg.material!r}: set young_modulus and density "
            f"explicitly or pick one of {sorted(MATERIALS)}")
    if cfg.medium not in MEDIA:
        raise ConfigError(f"medium must be one of {MEDIA}, got {cfg.medium!r}")
    return cfg, sweep_kwargs


def load_run_config(path: str | Path) -> RunConfig:
    cfg, _ = _resolve(parse_keyvalues(path), allow_sweep=False)
    return cfg


def load_sweep_config(path: str | Path) -> SweepConfig:
    cfg, sweep_kwargs = _resolve(parse_keyvalues(path), allow_sweep=True)
    materials = tuple(sweep_kwargs.get("materials", ([cfg.material], 0))[0])
    media = tuple(sweep_kwargs.get("media", ([cfg.medium], 0))[0])
    if "rpms" in sweep_kwargs:
        raw, lineno = sweep_kwargs["rpms"]
        try:
            rpms = tuple(float(v) for v in raw)
        except ValueError as exc:
            raise ConfigError(f"bad rpm list: {exc}", lineno) from exc
    else:
        rpms = (cfg.rpm,)
    if not materials or not rpms or not media:
        raise ConfigError("sweep grid must be non-empty")
    for mat in materials:
        if mat not in MATERIALS:
            raise ConfigError(f"unknown material {mat!r} in sweep grid")
    for med in media:
        if med not in MEDIA:
            raise ConfigError(f"unknown medium {med!r} in sweep grid")
    return SweepConfig(cfg, materials, rpms, media)


# -- resolution into simulator objects --------------------------------------

def resolved_values(cfg: RunConfig) -> dict:
    """Config with preset/medium defaults filled in (still flat keys)."""
    out = {}
    preset = MATERIALS.get(cfg.material, {})
    for f in fields(RunConfig):
        val = getattr(cfg, f.name)
        if val is None and f.name in ("young_modulus", "density"):
            val = preset.get(f.name)
        if val is None and f.name == "fluid_density":
            val = WATER_DENSITY if cfg.medium == "water" else 0.0
        out[f.name] = val
    return out


def to_rod_model(cfg: RunConfig) -> RodModel:
    vals = resolved_values(cfg)
    return RodModel(
        n_nodes=vals["n_nodes"], length=vals["length"],
        r_base=vals["r_base"], r_tip=vals["r_tip"],
        density=vals["density"], young_modulus=vals["young_modulus"],
        internal_damping=vals["internal_damping"],
        drag_normal=vals["drag_normal"], drag_tangent=vals["drag_tangent"],
        fluid_density=vals["fluid_density"],
        gravity_buoyancy=vals["gravity"],
        gravity_angle_deg=vals["gravity_angle_deg"],
        axial_scale=vals["axial_scale"], dt_safety=vals["dt_safety"],
    )


def to_drive(cfg: RunConfig, base_dir: Path | None = None) -> DriveProfile:
    if cfg.drive_path is not None:
        path = Path(cfg.drive_path)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        rows = []
        for lineno, line in enumerate(path.read_text().splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#") or line.lower().startswith("t,"):
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ConfigError(f"drive path row needs t,x,y,theta", lineno)
            rows.append([float(v) for v in parts])
        return DriveProfile.from_path(np.array(rows))
    return DriveProfile.from_rpm(cfg.rpm, math.radians(cfg.sweep_angle_deg),
                                 cfg.ramp_time)


def format_value(val) -> str:
    if isinstance(val, bool):
        return "on" if val else "off"
    if isinstance(val, float):
        return repr(val)
    return str(val)


def write_manifest(path: str | Path, cfg: RunConfig, extra: dict) -> None:
    """Resolved config plus derived./result. annotations, reloadable as config."""
    lines = []
    vals = resolved_values(cfg)
    for f in fields(RunConfig):
        val = vals[f.name]
        if val is None:
            continue
        lines.append(f"{f.name} = {format_value(val)}\n")
    for key in sorted(extra):
        lines.append(f"{key} = {format_value(extra[key])}\n")
    Path(path).write_text("".join(lines))
