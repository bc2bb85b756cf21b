"""Racetrack device: construction, wall tracking and the device experiments."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .magnetics import (DEFAULT_DT, LLGSolver, MagGrid, MaterialParams,
                        ModelValidityError, relax, steps_for)

J_MAX = 2.5e12  # A/m^2, upper end of the validated drive range

POLARITIES = ("up-left", "down-left")


@dataclass(frozen=True)
class DeviceGeometry:
    length: float = 200e-9
    width: float = 160e-9
    t_free: float = 0.6e-9
    t_shm: float = 3e-9
    fixed_edge_width: float = 4e-9
    cell: float = 2e-9

    def __post_init__(self):
        if min(self.length, self.width, self.t_free, self.t_shm, self.cell) <= 0:
            raise ValueError("geometry dimensions must be positive")
        if self.n_fixed < 2:
            raise ValueError("fixed edges must span at least 2 cells")
        if not self.length > 2 * self.fixed_edge_width:
            raise ValueError("device shorter than its two fixed edges")

    @property
    def nx(self) -> int:
        return int(round(self.length / self.cell))

    @property
    def ny(self) -> int:
        return max(1, int(round(self.width / self.cell)))

    @property
    def n_fixed(self) -> int:
        return int(round(self.fixed_edge_width / self.cell))

    @property
    def shm_area(self) -> float:
        """SHM cross-section (m^2) used for current -> current density."""
        return self.width * self.t_shm

    def j_from_current(self, i: float) -> float:
        return i / self.shm_area

    def current_from_j(self, j: float) -> float:
        return j * self.shm_area


BENCHMARK_GEOMETRY = DeviceGeometry()
CIRCUIT_GEOMETRY = DeviceGeometry(width=20e-9)


@dataclass(frozen=True)
class WallState:
    """Wall observables; ``position`` and ``tilt`` are None when no wall exists."""

    position: float | None
    tilt: float | None
    switched_fraction: float

    @property
    def has_wall(self) -> bool:
        return self.position is not None


def wall_profile(geom: DeviceGeometry, p: MaterialParams, polarity: str,
                 wall_pos: float, phi: float | None = None,
                 pinned: str = "both") -> MagGrid:
    """Unrelaxed two-domain state with a wall of width ``sqrt(A/Keff)``.

    ``phi`` is the in-plane angle of the wall moment; by default the
    left-handed Neel orientation (+x for down-left, -x for up-left).
    ``pinned`` selects which ends carry a fixed region: "both", "left" or
    "right".  An unpinned end is an open edge the wall can leave through.
    """
    if polarity not in POLARITIES:
        raise ValueError(f"polarity must be one of {POLARITIES}")
    if pinned not in ("both", "left", "right"):
        raise ValueError("pinned must be 'both', 'left' or 'right'")
    down_left = polarity == "down-left"
    if phi is None:
        phi = 0.0 if down_left else np.pi
    x = (np.arange(geom.nx) + 0.5) * geom.cell
    theta = 2.0 * np.arctan(np.exp(-(x - wall_pos) / p.wall_width()))
    if not down_left:
        theta = np.pi - theta
    m = np.empty((geom.ny, geom.nx, 3))
    m[..., 0] = np.sin(theta) * np.cos(phi)
    m[..., 1] = np.sin(theta) * np.sin(phi)
    m[..., 2] = np.cos(theta)
    k = geom.n_fixed
    left, right = (-1.0, 1.0) if down_left else (1.0, -1.0)
    mask = np.zeros((geom.ny, geom.nx), dtype=bool)
    if pinned != "right":
        m[:, :k] = (0.0, 0.0, left)
        mask[:, :k] = True
    if pinned != "left":
        m[:, -k:] = (0.0, 0.0, right)
        mask[:, -k:] = True
    return MagGrid(geom.nx, geom.ny, geom.cell, geom.cell, geom.t_free, m, mask)


def init_racetrack(geom: DeviceGeometry, p: MaterialParams, polarity: str,
                   wall_pos: float, phi: float | None = None,
                   relax_steps: int = 3000, pinned: str = "both",
                   strict: bool = False) -> MagGrid:
    """Two-domain racetrack with fixed edges, relaxed at zero drive.

    Relaxation stops once the torque falls below 1e-4 gamma0 Ms or after
    ``relax_steps`` damping-only steps (0.2 ps each).  The budget settles the
    wall profile; a wall near a fixed edge keeps creeping away from it, so
    reaching the torque tolerance is only enforced with ``strict=True``.
    """
    edge = geom.fixed_edge_width
    if not edge < wall_pos < geom.length - edge:
        raise ValueError(f"wall_pos {wall_pos:.3g} m lies inside a fixed edge")
    grid = wall_profile(geom, p, polarity, wall_pos, phi, pinned)
    grid.check_resolution(p)
    relax(grid, p, max_steps=relax_steps, strict=strict)
    return grid


def _row_crossing(row, near):
    s = np.nonzero(np.signbit(row[:-1]) != np.signbit(row[1:]))[0]
    if s.size == 0:
        return None
    i = s[np.argmin(np.abs(s - near))]
    a, b = row[i], row[i + 1]
    if a == b:
        return i + 1.0
    # cell centres sit at (i + 0.5) * cell
    return i + 0.5 + a / (a - b)


def switched_fraction(grid: MagGrid) -> float:
    """Up-pointing share of the free region, (1 + <m_z>) / 2."""
    return 0.5 * (1.0 + float(grid.m[..., 2][grid.free].mean()))


def track_wall(grid: MagGrid) -> WallState:
    mz = grid.m[..., 2]
    frac = switched_fraction(grid)
    profile = mz.mean(axis=0)
    s = np.nonzero(np.signbit(profile[:-1]) != np.signbit(profile[1:]))[0]
    if s.size == 0:
        return WallState(None, None, frac)
    if s.size > 1:
        raise ValueError("more than one wall in the grid")
    ys, xs = [], []
    for iy in range(grid.ny):
        xc = _row_crossing(mz[iy], s[0])
        if xc is not None:
            ys.append((iy + 0.5) * grid.dy)
            xs.append(xc * grid.dx)
    xs = np.asarray(xs)
    position = float(xs.mean())
    tilt = 0.0
    if len(xs) > 1:
        slope = np.polyfit(ys, xs, 1)[0]
        tilt = float(np.arctan(slope))
    return WallState(position, tilt, frac)


def wall_position(grid: MagGrid) -> float:
    state = track_wall(grid)
    if not state.has_wall:
        raise ValueError("no domain wall in the grid")
    return state.position


# -- experiments ------------------------------------------------------------

def _check_j(j):
    if abs(j) > J_MAX:
        raise ModelValidityError(f"|j| = {abs(j):.3g} A/m^2 exceeds {J_MAX:.3g}")


def _map(fn: Callable, items: Sequence, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _start_position(geom, j, margin):
    # an undriven wall sits mid-track, clear of the fixed edges' repulsion
    if j == 0:
        return 0.5 * geom.length
    edge = geom.fixed_edge_width
    return edge + margin if j > 0 else geom.length - edge - margin


def _velocity_point(j, geom, p, transient, window, margin, dt):
    _check_j(j)
    grid = init_racetrack(geom, p, "down-left", _start_position(geom, j, margin))
    solver = LLGSolver(grid, p, dt)
    solver.run(steps_for(transient, dt), j)
    x0 = wall_position(grid)
    n = steps_for(window, dt)
    solver.run(n, j)
    return (j, (wall_position(grid) - x0) / (n * dt))


def velocity_sweep(geom: DeviceGeometry, p: MaterialParams,
                   j_values: Sequence[float], transient: float = 0.2e-9,
                   window: float = 0.2e-9, margin: float = 20e-9,
                   dt: float = DEFAULT_DT, workers: int = 1):
    """Steady wall velocity (m/s) for each current density.

    The wall starts ``margin`` from the upstream fixed edge; the first
    ``transient`` seconds are discarded.
    """
    fn = partial(_velocity_point, geom=geom, p=p, transient=transient,
                 window=window, margin=margin, dt=dt)
    return _map(fn, list(j_values), workers)


def switching_time(geom: DeviceGeometry, p: MaterialParams, j: float,
                   e_field: float = 0.0, threshold: float = 0.95,
                   t_max: float = 4e-9, check: float = 5e-12,
                   stall_time: float = 0.5e-9, dt: float = DEFAULT_DT,
                   margin: float | None = None) -> float | None:
    """Time (s) until ``threshold`` of the free region has switched.

    The wall starts next to the upstream fixed edge.  The downstream end is
    left open: a second fixed edge would hold the wall about one wall width
    short of full reversal.  Returns None on timeout, which is declared
    early when the switched fraction has not grown by 1e-3 after
    ``stall_time``.
    """
    _check_j(j)
    if margin is None:
        margin = p.wall_width()
    # the up domain behind the wall grows in both drive directions
    polarity, pinned = ("up-left", "left") if j >= 0 else ("down-left", "right")
    grid = init_racetrack(geom, p, polarity, _start_position(geom, j, margin),
                          pinned=pinned)
    solver = LLGSolver(grid, p, dt)
    n_check = steps_for(check, dt)
    f_prev = f0 = switched_fraction(grid)
    t_prev = 0.0
    while solver.time < t_max:
        solver.run(n_check, j, e_field)
        f = switched_fraction(grid)
        t = solver.time
        if f >= threshold:
            return t_prev + (threshold - f_prev) / (f - f_prev) * (t - t_prev)
        if t >= stall_time and f - f0 < 1e-3:
            return None
        f_prev, t_prev = f, t
    return None


def _displacement_point(j, geom, p, window, transient, margin, dt):
    _check_j(j)
    grid = init_racetrack(geom, p, "down-left", _start_position(geom, j, margin))
    solver = LLGSolver(grid, p, dt)
    solver.run(steps_for(transient, dt), j)
    x0 = wall_position(grid)
    solver.run(steps_for(window, dt), j)
    return (j, wall_position(grid) - x0)


def displacement_sweep(geom: DeviceGeometry, p: MaterialParams,
                       j_values: Sequence[float], window: float = 0.3e-9,
                       transient: float = 0.0, margin: float = 20e-9,
                       dt: float = DEFAULT_DT, workers: int = 1):
    """Wall displacement (m) after driving for ``window`` seconds.

    With ``transient`` > 0 the wall is driven that long first and the
    displacement is counted from there on (steady-state regime).
    """
    fn = partial(_displacement_point, geom=geom, p=p, window=window,
                 transient=transient, margin=margin, dt=dt)
    return _map(fn, list(j_values), workers)


def spin_current(i_e: float, theta_sh: float, a_mtj: float, a_shm: float,
                 sigma_pol: float = 1.0) -> float:
    """Spin current (A) injected into the MTJ free layer by charge current i_e."""
    if a_mtj <= 0 or a_shm <= 0:
        raise ValueError("areas must be positive")
    return theta_sh * (a_mtj / a_shm) * i_e * sigma_pol
