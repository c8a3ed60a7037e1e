"""Planar tapered elastic-rod simulator with quadratic fluid drag.

Lumped-mass chain: stiff axial springs enforce near-inextensibility, discrete
bending moments act at interior joints with EI(s) from the local tapered
cross-section, and each segment feels resistive quadratic drag decomposed into
normal/tangential components. The base is driven kinematically (rotary sweep
about a fixed pivot, or imported pose samples); integration is semi-implicit
Euler with the time step derived from the axial stiffness bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidArgumentError, SimulationDivergedError
from .kinematics import MidlineSequence
from .midline import Midline

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency, keep a slow path
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap

WATER_DENSITY = 1000.0  # kg/m^3

# Order-of-magnitude soft-silicone moduli; the source conditions never state
# these, so the presets are deliberately non-authoritative and only their
# relative ordering (soft < medium < hard) is relied on.
MATERIALS = {
    "gel2": {"young_modulus": 2.5e4, "density": 1070.0},
    "ecoflex10": {"young_modulus": 7.0e4, "density": 1070.0},
    "dragonskin10": {"young_modulus": 2.5e5, "density": 1070.0},
}

DT_SAFETY_MAX = 0.1  # dt <= DT_SAFETY_MAX * sqrt(m_min / k_axial_max)


@dataclass(frozen=True)
class RodModel:
    """Tapered rod discretization plus material, drag, and environment knobs."""

    n_nodes: int = 60
    length: float = 0.45             # rest length L0, meters
    r_base: float = 0.008            # base radius, meters (linear taper)
    r_tip: float = 0.002             # tip radius, meters
    density: float = 1070.0          # kg/m^3
    young_modulus: float = 2.5e4     # Pa
    internal_damping: float = 0.01   # N*s/m per node
    drag_normal: float = 1.5         # dimensionless
    drag_tangent: float = 0.05       # dimensionless
    fluid_density: float = WATER_DENSITY  # 0 selects air mode (drag off)
    gravity_buoyancy: bool = False
    gravity_angle_deg: float = 0.0   # rig tilt, rotates the gravity vector
    axial_scale: float = 50.0        # penalty factor on EA/ds for inextensibility
    dt_safety: float = DT_SAFETY_MAX

    def __post_init__(self):
        if self.n_nodes < 10:
            raise InvalidArgumentError("rod needs at least 10 nodes")
        if not self.length > 0.0:
            raise InvalidArgumentError("length must be positive")
        if not (self.r_base >= self.r_tip > 0.0):
            raise InvalidArgumentError("taper requires r_base >= r_tip > 0")
        if not (self.young_modulus > 0.0 and self.density > 0.0):
            raise InvalidArgumentError("modulus and density must be positive")
        if min(self.drag_normal, self.drag_tangent, self.fluid_density,
               self.internal_damping) < 0.0:
            raise InvalidArgumentError("drag, damping and fluid density must be >= 0")
        if not (0.0 < self.dt_safety <= DT_SAFETY_MAX):
            raise InvalidArgumentError(f"dt_safety must be in (0, {DT_SAFETY_MAX}]")
        if not self.axial_scale >= 1.0:
            raise InvalidArgumentError("axial_scale must be >= 1")


@dataclass(frozen=True)
class DriveProfile:
    """Kinematic base drive: rotary sweep about a fixed pivot, or pose samples.

    Rotary mode ramps the angular rate from zero to ``omega`` with a cosine
    profile over ``ramp_time``, holds it until ``sweep_angle`` is reached, and
    stops there. Path mode linearly interpolates ``(t, x, y, theta)`` rows and
    holds the last pose.
    """

    mode: str = "rotary-sweep"       # or "path-samples"
    omega: float = 0.0               # peak angular rate, rad/s
    sweep_angle: float = 0.0         # total swept angle, rad
    ramp_time: float = 0.0           # seconds
    path: np.ndarray | None = None   # (k, 4) rows of t, x, y, theta

    def __post_init__(self):
        if self.mode not in ("rotary-sweep", "path-samples"):
            raise InvalidArgumentError(f"unknown drive mode {self.mode!r}")
        if self.omega < 0.0 or self.ramp_time < 0.0 or self.sweep_angle < 0.0:
            raise InvalidArgumentError("omega, sweep_angle and ramp_time must be >= 0")
        if self.mode == "path-samples":
            if self.path is None:
                raise InvalidArgumentError("path-samples drive needs a path array")
            path = np.ascontiguousarray(np.asarray(self.path, dtype=np.float64))
            if path.ndim != 2 or path.shape[1] != 4 or path.shape[0] < 2:
                raise InvalidArgumentError("path must be a (k>=2, 4) array of t,x,y,theta")
            if np.any(np.diff(path[:, 0]) <= 0.0):
                raise InvalidArgumentError("path timestamps must be strictly increasing")
            object.__setattr__(self, "path", path)

    @classmethod
    def rotary(cls, omega: float, sweep_angle: float, ramp_time: float = 0.0):
        return cls("rotary-sweep", omega, sweep_angle, ramp_time)

    @classmethod
    def from_rpm(cls, rpm: float, sweep_angle: float, ramp_time: float = 0.0):
        return cls.rotary(rpm * 2.0 * math.pi / 60.0, sweep_angle, ramp_time)

    @classmethod
    def from_path(cls, path: np.ndarray):
        return cls("path-samples", path=path)

    def end_time(self) -> float:
        """Time at which the drive stops moving (0 for a static base)."""
        if self.mode == "path-samples":
            return float(self.path[-1, 0])
        if self.omega <= 0.0 or self.sweep_angle <= 0.0:
            return 0.0
        ramp_angle = 0.5 * self.omega * self.ramp_time
        if ramp_angle < self.sweep_angle:
            return self.ramp_time + (self.sweep_angle - ramp_angle) / self.omega
        # sweep completes during the ramp: bisect the closed-form ramp angle
        lo, hi = 0.0, self.ramp_time
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            ang = 0.5 * self.omega * (
                mid - self.ramp_time / math.pi * math.sin(math.pi * mid / self.ramp_time))
            if ang < self.sweep_angle:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


@dataclass
class RodState:
    """Node positions/velocities at a simulation time."""

    pos: np.ndarray   # (n, 2) meters
    vel: np.ndarray   # (n, 2) m/s
    time: float = 0.0

    def copy(self) -> "RodState":
        return RodState(self.pos.copy(), self.vel.copy(), self.time)


class RodArrays(NamedTuple):
    node_mass: np.ndarray   # (n,)
    k_axial: np.ndarray     # (n-1,)
    rest: np.ndarray        # (n-1,)
    bend_b: np.ndarray      # (n,) EI/ds at joints, zero at the two ends
    drag_n: np.ndarray      # (n-1,) premultiplied 0.5*rho*Cn*d*ds
    drag_t: np.ndarray      # (n-1,)
    grav: tuple[float, float]


def material_model(name: str, **overrides) -> RodModel:
    """Build a RodModel from a named material preset plus overrides."""
    if name not in MATERIALS:
        raise InvalidArgumentError(f"unknown material {name!r}; presets: {sorted(MATERIALS)}")
    params = dict(MATERIALS[name])
    params.update(overrides)
    return RodModel(**params)


def _radius(model: RodModel, s: np.ndarray) -> np.ndarray:
    return model.r_base + (model.r_tip - model.r_base) * s / model.length


def assemble(model: RodModel) -> RodArrays:
    """Discretize the tapered rod into per-node/per-segment arrays.

    Segment masses are the exact integral of rho*pi*r(s)^2 over each segment
    (closed form for a linear taper), split half to each adjacent node.
    """
    n = model.n_nodes
    ds = model.length / (n - 1)
    s_nodes = np.arange(n) * ds
    r_nodes = _radius(model, s_nodes)
    r_a, r_b = r_nodes[:-1], r_nodes[1:]
    seg_mass = model.density * math.pi * ds * (r_a**2 + r_a * r_b + r_b**2) / 3.0
    node_mass = np.zeros(n)
    node_mass[:-1] += 0.5 * seg_mass
    node_mass[1:] += 0.5 * seg_mass

    r_mid = _radius(model, s_nodes[:-1] + 0.5 * ds)
    k_axial = model.axial_scale * model.young_modulus * math.pi * r_mid**2 / ds
    rest = np.full(n - 1, ds)

    bend_b = np.zeros(n)
    ei = model.young_modulus * math.pi * r_nodes**4 / 4.0
    bend_b[1:-1] = ei[1:-1] / ds

    rho_f = model.fluid_density
    diam = 2.0 * r_mid
    drag_n = 0.5 * rho_f * model.drag_normal * diam * ds
    drag_t = 0.5 * rho_f * model.drag_tangent * diam * ds

    if model.gravity_buoyancy:
        g_eff = 9.81 * (1.0 - rho_f / model.density)
        tilt = math.radians(model.gravity_angle_deg)
        grav = (g_eff * math.sin(tilt), -g_eff * math.cos(tilt))
    else:
        grav = (0.0, 0.0)
    return RodArrays(node_mass, k_axial, rest, bend_b, drag_n, drag_t, grav)


def stability_dt(model: RodModel) -> float:
    """Auto-derived integration step: dt_safety * sqrt(m_min / k_axial_max)."""
    arr = assemble(model)
    return model.dt_safety * math.sqrt(arr.node_mass.min() / arr.k_axial.max())


def build_rod(model: RodModel, base_pose: tuple[float, float, float] = (0.0, 0.0, 0.0)) -> RodState:
    """Straight rod at rest, nodes equally spaced from the base pivot."""
    n = model.n_nodes
    ds = model.length / (n - 1)
    s = np.arange(n) * ds
    x0, y0, heading = base_pose
    pos = np.column_stack([x0 + s * math.cos(heading), y0 + s * math.sin(heading)])
    return RodState(pos, np.zeros((n, 2)), 0.0)


_EMPTY_PATH = np.zeros((1,))


@njit(cache=True)
def _drive_pose(t, mode, omega, sweep, ramp, t_end, phi_ramp_end,
                path_t, path_x, path_y, path_h):
    if mode == 1:
        if t_end <= 0.0 or t >= t_end:
            phi = sweep
        elif ramp > 0.0 and t < ramp:
            phi = 0.5 * omega * (t - ramp / math.pi * math.sin(math.pi * t / ramp))
        else:
            phi = phi_ramp_end + omega * (t - ramp)
        if phi > sweep:
            phi = sweep
        if phi < 0.0:
            phi = 0.0
        return 0.0, 0.0, phi
    # path-samples: clamped linear interpolation
    k = path_t.size
    if t <= path_t[0]:
        return path_x[0], path_y[0], path_h[0]
    if t >= path_t[k - 1]:
        return path_x[k - 1], path_y[k - 1], path_h[k - 1]
    j = np.searchsorted(path_t, t)
    w = (t - path_t[j - 1]) / (path_t[j] - path_t[j - 1])
    return (path_x[j - 1] + w * (path_x[j] - path_x[j - 1]),
            path_y[j - 1] + w * (path_y[j] - path_y[j - 1]),
            path_h[j - 1] + w * (path_h[j] - path_h[j - 1]))


@njit(cache=True)
def _advance(pos, vel, nsub, dt, t0,
             mass, k_ax, rest, bend_b, drag_n, drag_t, damping, gx, gy,
             mode, omega, sweep, ramp, t_end, phi_ramp_end,
             path_t, path_x, path_y, path_h):
    n = pos.shape[0]
    fx = np.zeros(n)
    fy = np.zeros(n)
    for s in range(nsub):
        for i in range(n):
            fx[i] = mass[i] * gx - damping * vel[i, 0]
            fy[i] = mass[i] * gy - damping * vel[i, 1]
        # axial springs
        for i in range(n - 1):
            ex = pos[i + 1, 0] - pos[i, 0]
            ey = pos[i + 1, 1] - pos[i, 1]
            el = math.sqrt(ex * ex + ey * ey)
            if el > 0.0:
                f = k_ax[i] * (el - rest[i]) / el
                fx[i] += f * ex
                fy[i] += f * ey
                fx[i + 1] -= f * ex
                fy[i + 1] -= f * ey
        # bending moments at interior joints (exact gradient of 0.5*B*theta^2)
        for j in range(1, n - 1):
            e1x = pos[j, 0] - pos[j - 1, 0]
            e1y = pos[j, 1] - pos[j - 1, 1]
            e2x = pos[j + 1, 0] - pos[j, 0]
            e2y = pos[j + 1, 1] - pos[j, 1]
            l1 = e1x * e1x + e1y * e1y
            l2 = e2x * e2x + e2y * e2y
            cr = e1x * e2y - e1y * e2x
            dd = e1x * e2x + e1y * e2y
            co = bend_b[j] * math.atan2(cr, dd)
            a1x = -co * e1y / l1
            a1y = co * e1x / l1
            a2x = -co * e2y / l2
            a2y = co * e2x / l2
            fx[j - 1] -= a1x
            fy[j - 1] -= a1y
            fx[j] += a1x + a2x
            fy[j] += a1y + a2y
            fx[j + 1] -= a2x
            fy[j + 1] -= a2y
        # quadratic drag per segment, split to the end nodes
        for i in range(n - 1):
            if drag_n[i] != 0.0 or drag_t[i] != 0.0:
                ex = pos[i + 1, 0] - pos[i, 0]
                ey = pos[i + 1, 1] - pos[i, 1]
                el = math.sqrt(ex * ex + ey * ey)
                if el > 0.0:
                    tx = ex / el
                    ty = ey / el
                    vmx = 0.5 * (vel[i, 0] + vel[i + 1, 0])
                    vmy = 0.5 * (vel[i, 1] + vel[i + 1, 1])
                    vt = vmx * tx + vmy * ty
                    vn = -vmx * ty + vmy * tx
                    fn = -drag_n[i] * abs(vn) * vn
                    ft = -drag_t[i] * abs(vt) * vt
                    fsx = -fn * ty + ft * tx
                    fsy = fn * tx + ft * ty
                    fx[i] += 0.5 * fsx
                    fy[i] += 0.5 * fsy
                    fx[i + 1] += 0.5 * fsx
                    fy[i + 1] += 0.5 * fsy
        # semi-implicit Euler on the free nodes
        i0 = 2 if mode > 0 else 0
        for i in range(i0, n):
            vel[i, 0] += dt * fx[i] / mass[i]
            vel[i, 1] += dt * fy[i] / mass[i]
            pos[i, 0] += dt * vel[i, 0]
            pos[i, 1] += dt * vel[i, 1]
        # driven base pose at the end of the substep
        if mode > 0:
            t_new = t0 + (s + 1) * dt
            bx, by, h = _drive_pose(t_new, mode, omega, sweep, ramp, t_end,
                                    phi_ramp_end, path_t, path_x, path_y, path_h)
            n1x = bx + rest[0] * math.cos(h)
            n1y = by + rest[0] * math.sin(h)
            vel[0, 0] = (bx - pos[0, 0]) / dt
            vel[0, 1] = (by - pos[0, 1]) / dt
            vel[1, 0] = (n1x - pos[1, 0]) / dt
            vel[1, 1] = (n1y - pos[1, 1]) / dt
            pos[0, 0] = bx
            pos[0, 1] = by
            pos[1, 0] = n1x
            pos[1, 1] = n1y


def _drive_args(model: RodModel, drive: DriveProfile | None):
    if drive is None:
        return (0, 0.0, 0.0, 0.0, 0.0, 0.0,
                _EMPTY_PATH, _EMPTY_PATH, _EMPTY_PATH, _EMPTY_PATH)
    if drive.mode == "rotary-sweep":
        phi_ramp_end = 0.5 * drive.omega * drive.ramp_time
        return (1, drive.omega, drive.sweep_angle, drive.ramp_time,
                drive.end_time(), phi_ramp_end,
                _EMPTY_PATH, _EMPTY_PATH, _EMPTY_PATH, _EMPTY_PATH)
    p = drive.path
    return (2, 0.0, 0.0, 0.0, float(p[-1, 0]), 0.0,
            np.ascontiguousarray(p[:, 0]), np.ascontiguousarray(p[:, 1]),
            np.ascontiguousarray(p[:, 2]), np.ascontiguousarray(p[:, 3]))


def step(state: RodState, model: RodModel, drive: DriveProfile | None, dt: float) -> RodState:
    """Advance the dynamics one step of size ``dt`` (must respect the bound)."""
    bound = DT_SAFETY_MAX * math.sqrt(
        assemble(model).node_mass.min() / assemble(model).k_axial.max())
    if dt <= 0.0 or dt > bound * (1.0 + 1e-9):
        raise InvalidArgumentError(f"dt={dt} outside stability bound {bound}")
    arr = assemble(model)
    out = state.copy()
    _advance(out.pos, out.vel, 1, dt, state.time,
             arr.node_mass, arr.k_axial, arr.rest, arr.bend_b,
             arr.drag_n, arr.drag_t, model.internal_damping, *arr.grav,
             *_drive_args(model, drive))
    out.time = state.time + dt
    if not (np.all(np.isfinite(out.pos)) and np.all(np.isfinite(out.vel))):
        raise SimulationDivergedError(
            "non-finite state after step",
            diagnostics={"time": out.time})
    return out


def energy(state: RodState, model: RodModel) -> tuple[float, float]:
    """(kinetic, elastic) mechanical energy in joules.

    Elastic is the axial spring energy plus the discrete bending energy
    0.5 * EI(s_j) * kappa_j^2 * ds summed over interior joints, evaluated with
    the same discrete quantities the forces derive from.
    """
    arr = assemble(model)
    v2 = (state.vel ** 2).sum(axis=1)
    kinetic = 0.5 * float(np.dot(arr.node_mass, v2))
    d = np.diff(state.pos, axis=0)
    el = np.hypot(d[:, 0], d[:, 1])
    axial = 0.5 * float(np.sum(arr.k_axial * (el - arr.rest) ** 2))
    e1, e2 = d[:-1], d[1:]
    cr = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    dd = (e1 * e2).sum(axis=1)
    theta = np.arctan2(cr, dd)
    bending = 0.5 * float(np.sum(arr.bend_b[1:-1] * theta ** 2))
    return kinetic, axial + bending


def simulate(model: RodModel, drive: DriveProfile | None, duration: float,
             output_dt: float) -> MidlineSequence:
    """Run the step loop and emit node polylines at ``output_dt`` spacing.

    Frames land at k*output_dt for k = 0..round(duration/output_dt)-1 (the
    initial state is frame 0). Divergence raises
    :class:`SimulationDivergedError` carrying the frames emitted so far.
    """
    if duration <= 0.0 or output_dt <= 0.0:
        raise InvalidArgumentError("duration and output_dt must be positive")
    n_frames = round(duration / output_dt)
    if n_frames < 1:
        raise InvalidArgumentError("duration shorter than one output interval")
    arr = assemble(model)
    dt_bound = stability_dt(model)
    substeps = max(1, math.ceil(output_dt / dt_bound))
    dt = output_dt / substeps

    if drive is not None and drive.mode == "path-samples":
        p0 = drive.path[0]
        state = build_rod(model, (float(p0[1]), float(p0[2]), float(p0[3])))
    else:
        state = build_rod(model)

    pos = state.pos
    vel = state.vel
    frames = [Midline(pos.copy(), 0.0)]
    drive_args = _drive_args(model, drive)
    bound = 1e3 * model.length
    for k in range(1, n_frames):
        _advance(pos, vel, substeps, dt, (k - 1) * output_dt,
                 arr.node_mass, arr.k_axial, arr.rest, arr.bend_b,
                 arr.drag_n, arr.drag_t, model.internal_damping, *arr.grav,
                 *drive_args)
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))
                and np.abs(pos).max() < bound):
            partial = MidlineSequence(tuple(frames), output_dt) if frames else None
            raise SimulationDivergedError(
                f"simulation diverged at t={k * output_dt:.6g} s",
                partial=partial,
                diagnostics={"frame": k, "time": k * output_dt,
                             "substeps": substeps, "dt": dt})
        frames.append(Midline(pos.copy(), k * output_dt))
    return MidlineSequence(tuple(frames), output_dt)


def node_speed_history(model: RodModel, drive: DriveProfile | None, duration: float,
                       output_dt: float) -> tuple[MidlineSequence, np.ndarray]:
    """Simulate and return per-frame, per-node speeds via frame differencing."""
    seq = simulate(model, drive, duration, output_dt)
    pts = np.array([f.points for f in seq.frames])
    disp = np.diff(pts, axis=0)
    speeds = np.hypot(disp[..., 0], disp[..., 1]) / seq.dt
    return seq, speeds
