"""Finite-difference micromagnetics for an ultrathin perpendicular film.

Effective field = exchange + uniaxial anisotropy (thin-film demag folded into
``Keff``) + interfacial DMI.  The spin-Hall effect enters as a damping-like
torque with spin polarisation along +y for current along +x.  Time stepping
is fixed-step RK4 with renormalisation after each step.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
import scipy.constants as sc

from ._backend import kernels

DEFAULT_DT = 1e-13


class ModelValidityError(ValueError):
    """Parameters fall outside the range where the model is meaningful."""


class IntegrationError(RuntimeError):
    """Time integration produced a non-finite magnetisation."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"non-finite magnetisation at step {step}")


@dataclass(frozen=True)
class PhysConsts:
    hbar: float = sc.hbar
    mu0: float = sc.mu_0
    e_charge: float = sc.e
    mu_B: float = sc.physical_constants["Bohr magneton"][0]
    # gamma_e * mu0, in m/(A s)
    gamma0: float = sc.physical_constants["electron gyromag. ratio"][0] * sc.mu_0


CONSTS = PhysConsts()


@dataclass(frozen=True)
class MaterialParams:
    """Magnetic and transport constants of the CoFe/Pt stack (SI units).

    ``xi_vcma`` is the interfacial anisotropy change per unit electric field,
    in J/m^2 per V/nm.
    """

    Ms: float = 7.0e5
    Ku: float = 4.8e5
    Aex: float = 1.0e-11
    Dmi: float = -1.2e-3
    alpha: float = 0.3
    theta_sh: float = 0.07
    t_free: float = 0.6e-9
    t_shm: float = 3.0e-9
    xi_vcma: float = 38.5e-6
    sigma_pol: float = 1.0

    def __post_init__(self):
        if not self.Ms > 0:
            raise ModelValidityError("Ms must be positive")
        if not self.Aex > 0:
            raise ModelValidityError("Aex must be positive")
        if not (self.t_free > 0 and self.t_shm > 0):
            raise ModelValidityError("layer thicknesses must be positive")
        if not 0 < self.alpha <= 1:
            raise ModelValidityError("alpha must lie in (0, 1]")
        if not abs(self.theta_sh) < 1:
            raise ModelValidityError("|theta_sh| must be < 1")
        if not 0 <= self.sigma_pol <= 1:
            raise ModelValidityError("sigma_pol must lie in [0, 1]")
        if not self.Keff > 0:
            raise ModelValidityError(
                f"Keff = {self.Keff:.4g} J/m^3 <= 0: easy axis is in-plane")

    @property
    def Keff(self) -> float:
        return self.Ku - 0.5 * CONSTS.mu0 * self.Ms**2

    def keff(self, e_field: float = 0.0) -> float:
        """Effective anisotropy (J/m^3) under a VCMA field in V/nm."""
        return self.Keff - self.xi_vcma * e_field / self.t_free

    def e_field_for_keff_cut(self, fraction: float) -> float:
        """VCMA field (V/nm) that lowers Keff by ``fraction``."""
        return fraction * self.Keff * self.t_free / self.xi_vcma

    @property
    def exchange_length(self) -> float:
        return np.sqrt(2.0 * self.Aex / (CONSTS.mu0 * self.Ms**2))

    def wall_width(self, e_field: float = 0.0) -> float:
        return np.sqrt(self.Aex / self.keff(e_field))

    def with_(self, **changes) -> "MaterialParams":
        return replace(self, **changes)


@dataclass
class MagGrid:
    """2D grid of unit magnetisation vectors, shape ``(ny, nx, 3)``."""

    nx: int
    ny: int
    dx: float
    dy: float
    t_free: float
    m: np.ndarray = field(repr=False)
    fixed_mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.m = np.ascontiguousarray(self.m, dtype=np.float64)
        self.fixed_mask = np.ascontiguousarray(self.fixed_mask, dtype=bool)
        if self.m.shape != (self.ny, self.nx, 3):
            raise ValueError(f"m has shape {self.m.shape}, "
                             f"expected {(self.ny, self.nx, 3)}")
        if self.fixed_mask.shape != (self.ny, self.nx):
            raise ValueError("fixed_mask shape does not match the grid")
        if min(self.dx, self.dy, self.t_free) <= 0:
            raise ValueError("cell dimensions must be positive")
        norm = np.linalg.norm(self.m, axis=-1)
        if not np.all(np.isfinite(norm)) or np.any(norm == 0):
            raise ValueError("magnetisation must be finite and non-zero")
        self.m /= norm[..., None]

    @classmethod
    def uniform(cls, nx, ny, dx, dy, t_free, direction=(0.0, 0.0, 1.0),
                fixed_mask=None) -> "MagGrid":
        m = np.empty((ny, nx, 3))
        m[...] = direction
        if fixed_mask is None:
            fixed_mask = np.zeros((ny, nx), dtype=bool)
        return cls(nx, ny, dx, dy, t_free, m, fixed_mask)

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy * self.t_free

    @property
    def free(self) -> np.ndarray:
        return ~self.fixed_mask

    def copy(self) -> "MagGrid":
        return MagGrid(self.nx, self.ny, self.dx, self.dy, self.t_free,
                       self.m.copy(), self.fixed_mask.copy())

    def mean_m(self, free_only: bool = True) -> np.ndarray:
        cells = self.m[self.free] if free_only else self.m.reshape(-1, 3)
        return cells.mean(axis=0)

    def check_resolution(self, p: MaterialParams) -> None:
        lex = p.exchange_length
        if self.dx > lex or self.dy > lex:
            raise ModelValidityError(
                f"cell {self.dx:.3g} x {self.dy:.3g} m exceeds the exchange "
                f"length {lex:.3g} m")


@dataclass(frozen=True)
class DriveSegment:
    duration: float
    j_shm: float = 0.0
    e_field: float = 0.0

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("segment duration must be positive")


# -- coefficients -----------------------------------------------------------

def exchange_coefficient(p: MaterialParams) -> float:
    return 2.0 * p.Aex / (CONSTS.mu0 * p.Ms)


def anisotropy_coefficient(p: MaterialParams, e_field: float = 0.0) -> float:
    k = p.keff(e_field)
    if k < 0:
        raise ModelValidityError(
            f"Keff({e_field} V/nm) = {k:.4g} J/m^3 < 0: easy axis flips")
    return 2.0 * k / (CONSTS.mu0 * p.Ms)


def dmi_coefficient(p: MaterialParams) -> float:
    # sign fixed so that Dmi < 0 selects Down-Right-Up / Up-Left-Down walls
    return -2.0 * p.Dmi / (CONSTS.mu0 * p.Ms)


def she_field(p: MaterialParams, j_shm: float) -> float:
    """Signed spin-Hall effective field amplitude (A/m) for current density j."""
    return (CONSTS.hbar * p.theta_sh * j_shm
            / (2.0 * CONSTS.mu0 * CONSTS.e_charge * p.Ms * p.t_free))


def she_rate(p: MaterialParams, j_shm: float) -> float:
    """Prefactor ``a`` (1/s) of the torque ``a * m x (m x y)``."""
    return CONSTS.gamma0 * she_field(p, j_shm)


def gamma_ll(p: MaterialParams) -> float:
    return CONSTS.gamma0 / (1.0 + p.alpha**2)


# -- fields -----------------------------------------------------------------

def _field(grid, c_ex, c_an, c_dmi):
    out = np.empty_like(grid.m)
    kernels.effective_field(grid.m, out, grid.dx, grid.dy, c_ex, c_an, c_dmi)
    return out


def exchange_field(grid: MagGrid, p: MaterialParams) -> np.ndarray:
    """Exchange field (A/m): ``2 Aex/(mu0 Ms)`` times the 5-point Laplacian."""
    return _field(grid, exchange_coefficient(p), 0.0, 0.0)


def anisotropy_field(grid: MagGrid, p: MaterialParams,
                     e_field: float = 0.0) -> np.ndarray:
    h = np.zeros_like(grid.m)
    h[..., 2] = anisotropy_coefficient(p, e_field) * grid.m[..., 2]
    return h


def dmi_field(grid: MagGrid, p: MaterialParams) -> np.ndarray:
    return _field(grid, 0.0, 0.0, dmi_coefficient(p))


def effective_field(grid: MagGrid, p: MaterialParams,
                    e_field: float = 0.0) -> np.ndarray:
    return _field(grid, exchange_coefficient(p),
                  anisotropy_coefficient(p, e_field), dmi_coefficient(p))


def she_torque(grid: MagGrid, p: MaterialParams, j_shm: float) -> np.ndarray:
    """Damping-like spin-Hall torque (1/s) on every free cell.

    For a Neel wall this is the torque of an effective out-of-plane field
    ``-H_she * (m x sigma)`` with ``sigma = sign(j) * y``.
    """
    y = np.array([0.0, 1.0, 0.0])
    tau = she_rate(p, j_shm) * np.cross(grid.m, np.cross(grid.m, y))
    tau[grid.fixed_mask] = 0.0
    return tau


def llg_rhs(grid: MagGrid, p: MaterialParams, j_shm: float = 0.0,
            e_field: float = 0.0, precess: bool = True) -> np.ndarray:
    out = np.empty_like(grid.m)
    kernels.llg_rhs(grid.m, grid.fixed_mask.view(np.uint8), out, grid.dx,
                    grid.dy, exchange_coefficient(p),
                    anisotropy_coefficient(p, e_field), dmi_coefficient(p),
                    she_rate(p, j_shm), gamma_ll(p), p.alpha, precess)
    return out


def max_torque(grid: MagGrid, p: MaterialParams, e_field: float = 0.0) -> float:
    """Largest ``|m x H_eff|`` (A/m) over free cells."""
    h = effective_field(grid, p, e_field)
    t = np.linalg.norm(np.cross(grid.m, h), axis=-1)[grid.free]
    return float(t.max()) if t.size else 0.0


# -- energy -----------------------------------------------------------------

def exchange_energy(grid: MagGrid, p: MaterialParams) -> float:
    m = grid.m
    ex = np.sum((m[:, 1:] - m[:, :-1]) ** 2) / grid.dx**2
    ey = np.sum((m[1:, :] - m[:-1, :]) ** 2) / grid.dy**2
    return p.Aex * grid.cell_volume * float(ex + ey)


def anisotropy_energy(grid: MagGrid, p: MaterialParams,
                      e_field: float = 0.0) -> float:
    k = p.keff(e_field)
    if k < 0:
        raise ModelValidityError("Keff < 0 under the applied VCMA field")
    return k * grid.cell_volume * float(np.sum(1.0 - grid.m[..., 2] ** 2))


def _central(f, axis, h):
    g = np.zeros_like(f)
    if axis == 1:
        g[:, :-1] += f[:, 1:]
        g[:, 1:] -= f[:, :-1]
    else:
        g[:-1, :] += f[1:, :]
        g[1:, :] -= f[:-1, :]
    return g / (2.0 * h)


def dmi_energy(grid: MagGrid, p: MaterialParams) -> float:
    mx, my, mz = grid.m[..., 0], grid.m[..., 1], grid.m[..., 2]
    dens = (mz * _central(mx, 1, grid.dx) - mx * _central(mz, 1, grid.dx)
            + mz * _central(my, 0, grid.dy) - my * _central(mz, 0, grid.dy))
    return -p.Dmi * grid.cell_volume * float(np.sum(dens))


def total_energy(grid: MagGrid, p: MaterialParams, e_field: float = 0.0) -> float:
    """Exchange + anisotropy + DMI energy (J), zero for the uniform +z state."""
    return (exchange_energy(grid, p) + anisotropy_energy(grid, p, e_field)
            + dmi_energy(grid, p))


# -- time integration -------------------------------------------------------

class LLGSolver:
    """Fixed-step RK4 integrator bound to one grid.

    The grid is advanced in place.  Drives are given per step so that a
    time-varying current (e.g. from the wire model) can be fed in directly.
    """

    def __init__(self, grid: MagGrid, p: MaterialParams, dt: float = DEFAULT_DT,
                 precess: bool = True, kernel_module=None):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.grid = grid
        self.p = p
        self.dt = dt
        self.precess = precess
        self.kernels = kernel_module or kernels
        self.steps = 0
        self.max_norm_dev = 0.0
        self._fixed = grid.fixed_mask.view(np.uint8)
        self._work = np.zeros((5,) + grid.m.shape)
        self._c_ex = exchange_coefficient(p)
        self._c_dmi = dmi_coefficient(p)
        self._gll = gamma_ll(p)
        self._an_cache: dict[float, float] = {}

    @property
    def time(self) -> float:
        return self.steps * self.dt

    def _c_an(self, e_field):
        c = self._an_cache.get(e_field)
        if c is None:
            c = self._an_cache[e_field] = anisotropy_coefficient(self.p, e_field)
        return c

    def run_arrays(self, j_steps: Sequence[float],
                   e_steps: Sequence[float] | float = 0.0) -> None:
        j_steps = np.ascontiguousarray(j_steps, dtype=np.float64)
        n = j_steps.size
        if n == 0:
            return
        if np.isscalar(e_steps):
            can = np.full(n, self._c_an(float(e_steps)))
        else:
            e_steps = np.asarray(e_steps, dtype=np.float64)
            can = np.array([self._c_an(float(e)) for e in e_steps])
        a = np.ascontiguousarray(she_rate(self.p, j_steps), dtype=np.float64)
        worst, bad = self.kernels.rk4_run(
            self.grid.m, self._fixed, self.dt, a, can, self.grid.dx,
            self.grid.dy, self._c_ex, self._c_dmi, self._gll, self.p.alpha,
            self.precess, self._work)
        if bad >= 0:
            raise IntegrationError(self.steps + bad)
        self.steps += n
        self.max_norm_dev = max(self.max_norm_dev, worst)

    def run(self, nsteps: int, j_shm: float = 0.0, e_field: float = 0.0) -> None:
        self.run_arrays(np.full(int(nsteps), float(j_shm)), e_field)

    def run_segment(self, seg: DriveSegment) -> None:
        self.run(steps_for(seg.duration, self.dt), seg.j_shm, seg.e_field)

    def run_schedule(self, schedule: Iterable[DriveSegment]) -> None:
        for seg in schedule:
            self.run_segment(seg)


def steps_for(duration: float, dt: float) -> int:
    return max(1, int(round(duration / dt)))


def llg_step(grid: MagGrid, p: MaterialParams, seg: DriveSegment,
             dt: float = DEFAULT_DT) -> MagGrid:
    """Advance ``grid`` in place by one RK4 step under ``seg``'s drive."""
    LLGSolver(grid, p, dt).run(1, seg.j_shm, seg.e_field)
    return grid


def relax(grid: MagGrid, p: MaterialParams, e_field: float = 0.0,
          tol: float = 1e-4, dt: float = 2e-13, max_steps: int = 200_000,
          check_every: int = 200, strict: bool = True) -> int:
    """Damping-only descent to a local energy minimum.

    Stops when ``max |m x H| < tol * Ms`` (equivalently torque below
    ``tol * gamma0 * Ms``).  Returns the number of steps taken.  With
    ``strict=False`` running out of steps is not an error; useful when a
    soft mode (e.g. a wall drifting in a shallow potential) would take far
    longer than the profile itself to settle.
    """
    relax_p = p.with_(alpha=1.0)
    solver = LLGSolver(grid, relax_p, dt, precess=False)
    while solver.steps < max_steps:
        if max_torque(grid, p, e_field) < tol * p.Ms:
            return solver.steps
        solver.run(min(check_every, max_steps - solver.steps), 0.0, e_field)
    if max_torque(grid, p, e_field) < tol * p.Ms:
        return solver.steps
    if not strict:
        return solver.steps
    raise IntegrationError(solver.steps,
                           f"relaxation did not converge in {max_steps} steps")
