"""Quick invariant checks runnable from the command line (seconds, not minutes)."""

from __future__ import annotations

import numpy as np

from .device import DeviceGeometry, track_wall, wall_profile
from .energy import EnergyInputs, energy_report
from .link import LinkConfig, RCLadder, mtj_sense
from .magnetics import (CONSTS, LLGSolver, MagGrid, MaterialParams, effective_field,
                        total_energy)


def _random_smooth(rng, nx, ny, cell):
    x = np.arange(nx)[None, :] * cell
    y = np.arange(ny)[:, None] * cell
    th = 0.6 + 0.4 * np.sin(2 * np.pi * x / (nx * cell) + rng.uniform(0, 6.3)) \
        * np.cos(2 * np.pi * y / (ny * cell))
    ph = rng.uniform(0, 6.3) + 1.3 * np.sin(2 * np.pi * (x + y) / (nx * cell))
    m = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], -1)
    return MagGrid(nx, ny, cell, cell, 0.6e-9, m, np.zeros((ny, nx), bool))


def check_gradient(rng, p):
    g = _random_smooth(rng, 9, 7, 2e-9)
    h = effective_field(g, p)
    pref = -1.0 / (CONSTS.mu0 * p.Ms * g.cell_volume)
    worst = 0.0
    eps = 1e-6
    for _ in range(10):
        iy, ix, c = rng.integers(g.ny), rng.integers(g.nx), rng.integers(3)
        mp, mm = g.copy(), g.copy()
        mp.m[iy, ix, c] += eps
        mm.m[iy, ix, c] -= eps
        fd = pref * (total_energy(mp, p) - total_energy(mm, p)) / (2 * eps)
        worst = max(worst, abs(fd - h[iy, ix, c]) / np.max(np.abs(h[iy, ix])))
    return worst < 1e-4, f"max relative error {worst:.2e}"


def check_dissipation(rng, p):
    geom = DeviceGeometry(length=60e-9, width=8e-9)
    g = wall_profile(geom, p, "down-left", 30e-9, phi=np.pi / 2)
    s = LLGSolver(g, p)
    e = [total_energy(g, p)]
    for _ in range(20):
        s.run(10)
        e.append(total_energy(g, p))
    rise = float(np.max(np.diff(e)))
    return rise < 1e-12, f"largest energy increase {rise:.2e} J"


def check_norm(rng, p):
    geom = DeviceGeometry(length=60e-9, width=8e-9)
    g = wall_profile(geom, p, "down-left", 30e-9)
    s = LLGSolver(g, p)
    s.run(500, 1e12)
    dev = float(np.max(np.abs(np.linalg.norm(g.m, axis=-1) - 1)))
    return dev <= 1e-9 and s.max_norm_dev < 1e-6, \
        f"|m|-1 after step {dev:.1e}, before renormalisation {s.max_norm_dev:.1e}"


def check_wire_dc(rng, p):
    cfg = LinkConfig()
    lad = RCLadder.for_link(cfg, 666.67)
    out = lad.run(np.full(200_000, 1e-4))
    err = abs(out[-1] / 1e-4 - 1)
    return err < 1e-3, f"DC gain error {err:.1e}"


def check_sense_monotone(rng, p):
    cfg = LinkConfig()
    v = [mtj_sense(f, cfg) for f in np.linspace(0, 1, 21)]
    return bool(np.all(np.diff(v) < 0)), "sense voltage decreasing in switched fraction"


def check_energy_sum(rng, p):
    r = energy_report(EnergyInputs())
    ok = r.e_total == r.e_static + r.e_dynamic + r.e_receiver
    return ok, f"total {r.e_total:.6e} J"


def check_tracking(rng, p):
    m = np.zeros((2, 10, 3))
    m[:, :4, 2] = -1
    m[:, 4:, 2] = 1
    x = track_wall(MagGrid(10, 2, 2e-9, 2e-9, 0.6e-9, m, np.zeros((2, 10), bool))).position
    return abs(x - 8e-9) < 1e-15, f"step at boundary 4 -> {x:.3e} m"


CHECKS = [check_gradient, check_dissipation, check_norm, check_wire_dc,
          check_sense_monotone, check_energy_sum, check_tracking]


def run(seed: int = 0, p: MaterialParams | None = None):
    p = p or MaterialParams()
    rng = np.random.default_rng(seed)
    out = []
    for fn in CHECKS:
        ok, detail = fn(rng, p)
        out.append((fn.__name__.removeprefix("check_"), bool(ok), detail))
    return out
