"""End-to-end acceptance checks.  Each test prints one PASS/FAIL line."""

import time

import numpy as np
import pytest

from dwlink.cli import main
from dwlink.device import (BENCHMARK_GEOMETRY, CIRCUIT_GEOMETRY, POLARITIES,
                           displacement_sweep, init_racetrack, switching_time,
                           velocity_sweep, wall_position)
from dwlink.energy import (FJ, EnergyInputs, double_bit_inputs, energy_report,
                           multibit_report, uniform, vcma_report)
from dwlink.link import (VCMA_VARIANTS, LinkConfig, double_bit_config, exhaustive_check,
                         shm_electrical, vcma_config)
from dwlink.magnetics import (CONSTS, LLGSolver, effective_field, total_energy)

from conftest import smooth_state
from oracles import collective_velocity, fd_gradient

J_SET = (0.5e12, 1.0e12, 1.5e12, 2.0e12)


@pytest.fixture
def report(capsys):
    def _report(name, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {name}: {detail}")
        return ok
    return _report


def _close(x, ref, rel):
    return abs(x / ref - 1) <= rel


# -- 1: energy table ------------------------------------------------------------

def test_criterion_1_energy_table(report):
    t0 = time.perf_counter()
    rep = energy_report(EnergyInputs())
    got = {"static wire": rep.e_static_wire, "SHM set": rep.e_shm_set,
           "SHM static": rep.e_shm_set + rep.e_shm_reset, "static total": rep.e_static,
           "dynamic": rep.e_dynamic, "total": rep.e_total}
    ref = {"static wire": 7.5428, "SHM set": 5.0285, "SHM static": 10.0571,
           "static total": 21.1199, "dynamic": 16.8618, "total": 39.3334}
    bad = [k for k in ref if not _close(got[k] / FJ, ref[k], 2e-3)]
    per_bit_ok = _close(rep.fj_per_bit_per_mm, 3.933, 2e-3)
    elapsed = time.perf_counter() - t0
    ok = not bad and per_bit_ok and elapsed < 0.1
    detail = ", ".join(f"{k} {got[k] / FJ:.4f} (ref {ref[k]})" for k in ref)
    report(1, ok, f"{detail}, per bit {rep.fj_per_bit_per_mm:.4f} fJ/bit/mm; "
                  f"outside 0.2%: {bad or 'none'}; {elapsed * 1e3:.2f} ms")
    assert ok


# -- 2: SHM electrical values --------------------------------------------------------

def test_criterion_2_shm_electrical(report):
    _, v, r = shm_electrical(CIRCUIT_GEOMETRY, 20e-8, 0.1228e-3)
    ok = round(r, 2) == 666.67 and _close(v, 82e-3, 2e-3)
    report(2, ok, f"R_shm = {r:.4f} Ohm, v_drop = {v * 1e3:.3f} mV")
    assert ok


# -- 3: double-bit energy --------------------------------------------------------------

def test_criterion_3_double_bit_energy(report):
    two = multibit_report(double_bit_inputs(), uniform(4))
    one = energy_report(EnergyInputs())
    ratio = two.per_bit_per_mm / one.per_bit_per_mm
    ok = (_close(two.fj_per_bit_per_mm, 4.7231, 0.25) and ratio - 1 < 0.5
          and len(two.assumptions) > 0)
    report(3, ok, f"2-bit {two.fj_per_bit_per_mm:.4f} fJ/bit/mm "
                  f"({two.fj_per_bit_per_mm / 4.7231 - 1:+.1%} vs 4.7231), "
                  f"2-bit/1-bit per-bit ratio {ratio:.3f}, {len(two.assumptions)} assumptions")
    assert ok


# -- 4: VCMA energy ----------------------------------------------------------------------

def test_criterion_4_vcma_energy(report):
    inp = EnergyInputs()
    e = {s: vcma_report(inp, s).fj_per_bit_per_mm for s in (0.5, 0.7, 1.0)}
    ordered = e[0.5] < e[0.7] < e[1.0]
    near = _close(e[0.5], 2.02, 0.30)
    ok = ordered and near
    report(4, ok, f"scale 0.5 {e[0.5]:.4f} ({e[0.5] / 2.02 - 1:+.1%} vs 2.02), "
                  f"0.7 {e[0.7]:.4f}, 1.0 {e[1.0]:.4f} fJ/bit/mm; ordered {ordered}")
    assert ok


# -- 5: micromagnetic properties ---------------------------------------------------------

def _r_squared(x, y):
    c = np.polyfit(x, y, 1)
    res = y - np.polyval(c, x)
    return 1 - np.sum(res ** 2) / np.sum((y - np.mean(y)) ** 2)


def test_criterion_5_micromagnetic_properties(p, report):
    geom = BENCHMARK_GEOMETRY
    t0 = time.perf_counter()
    v = [u for _, u in velocity_sweep(geom, p, J_SET)]
    a = all(y > x for x, y in zip(v, v[1:]))

    d = np.array([x for _, x in displacement_sweep(geom, p, J_SET)])
    r2 = _r_squared(np.array(J_SET), d)
    b = r2 > 0.95

    ts = [switching_time(geom, p, j) for j in J_SET]
    c = None not in ts and all(y < x for x, y in zip(ts, ts[1:]))

    moves = {}
    for pol in POLARITIES:
        for sign in (1, -1):
            g = init_racetrack(geom, p, pol, 100e-9)
            x0 = wall_position(g)
            LLGSolver(g, p).run(2000, sign * 1e12)
            moves[pol, sign] = wall_position(g) - x0
    dd = all(np.sign(moves[pol, s]) == s and abs(moves[pol, s]) > 10 * geom.cell
             for pol, s in moves)

    mx = {}
    for pol in POLARITIES:
        g = init_racetrack(geom, p, pol, 100e-9, phi=np.pi / 2)
        x = wall_position(g)
        ix = int(np.floor(x / geom.cell - 0.5))
        w = x / geom.cell - 0.5 - ix
        mx[pol] = float(((1 - w) * g.m[:, ix, 0] + w * g.m[:, ix + 1, 0]).mean())
    e = mx["down-left"] > 0.9 and mx["up-left"] < -0.9

    elapsed = time.perf_counter() - t0
    ok = a and b and c and dd and e and elapsed <= 600
    fmt = lambda xs: "/".join(f"{q:.4g}" for q in xs)  # noqa: E731
    report(5, ok,
           f"(a) v = {fmt(v)} m/s monotone {a}; (b) R^2 = {r2:.4f} {b}; "
           f"(c) t_switch = {fmt([t * 1e9 if t else np.nan for t in ts])} ns decreasing {c}; "
           f"(d) direction law {dd}; (e) wall m_x down-left {mx['down-left']:.3f}, "
           f"up-left {mx['up-left']:.3f} {e}; runtime {elapsed:.0f} s")
    assert ok


# -- 6: VCMA switching equivalence -----------------------------------------------------

def test_criterion_6_vcma_switching(p, report):
    geom = BENCHMARK_GEOMETRY
    ref = switching_time(geom, p, 1e12)
    cases = [(0.5e12, 1.0), (0.7e12, p.e_field_for_keff_cut(0.20))]
    parts, ok = [], ref is not None
    for j, e in cases:
        t = switching_time(geom, p, j, e)
        cut = 1 - p.keff(e) / p.Keff
        good = t is not None and ref is not None and abs(t / ref - 1) <= 0.25
        ok = ok and good
        ratio = f"{t / ref:.3f}" if t and ref else "n/a"
        parts.append(f"j={j:.2g}, E={e:.3g} V/nm (Keff -{cut:.0%}): "
                     f"{t * 1e9 if t else float('nan'):.3f} ns, ratio {ratio} {good}")
    report(6, ok, f"reference {ref * 1e9:.3f} ns; " + "; ".join(parts))
    assert ok


# -- 7: numerical correctness ----------------------------------------------------------

def test_criterion_7_numerics(p, strip, report):
    rng = np.random.default_rng(20240607)
    worst = 0.0
    for _ in range(20):
        g = smooth_state(rng)
        h = effective_field(g, p)
        pref = -1.0 / (CONSTS.mu0 * p.Ms * g.cell_volume)

        def energy(m):
            gg = g.copy()
            gg.m[...] = m
            return total_energy(gg, p)

        for _ in range(6):
            idx = (rng.integers(g.ny), rng.integers(g.nx), rng.integers(3))
            fd = pref * fd_gradient(energy, g.m, idx)
            worst = max(worst, abs(fd - h[idx]) / np.max(np.abs(h[idx[:2]])))
    a = worst < 1e-4

    mz = []
    for dt in (1e-13, 5e-14):
        g = init_racetrack(strip, p, "down-left", 40e-9)
        s = LLGSolver(g, p, dt)
        s.run(int(round(1e-9 / dt)), 1e12)
        mz.append(float(g.m[..., 2][g.free].mean()))
        if dt == 1e-13:
            drift = s.max_norm_dev * s.steps  # per-step growth before renormalising, over 1 ns
    b = abs(mz[0] - mz[1]) < 1e-4
    c = drift < 1e-6

    g = init_racetrack(strip, p, "down-left", 100e-9, phi=np.pi / 2, relax_steps=0)
    s = LLGSolver(g, p)
    en = [total_energy(g, p)]
    for _ in range(100):
        s.run(10)
        en.append(total_energy(g, p))
    rise = float(np.max(np.diff(en)))
    d = rise < 1e-12

    (_, v), = velocity_sweep(BENCHMARK_GEOMETRY, p, [1e12])
    v1d, _ = collective_velocity(1e12)
    e = abs(v / v1d - 1) <= 0.30

    ok = a and b and c and d and e
    report(7, ok, f"(a) gradient rel. error {worst:.2e} {a}; (b) step-halving d<m_z> "
                  f"{abs(mz[0] - mz[1]):.2e} {b}; (c) |m| drift bound {drift:.2e}/ns {c}; "
                  f"(d) max energy rise {rise:.2e} J {d}; (e) v = {v:.1f} m/s vs 1D "
                  f"{v1d:.1f} m/s ({v / v1d - 1:+.1%}) {e}")
    assert ok


# -- 8: link decoding -------------------------------------------------------------------

def test_criterion_8_link(report):
    t0 = time.perf_counter()
    bases = {"1-bit": LinkConfig(), "2-bit": double_bit_config()}
    parts, ok = [], True
    for label, base in bases.items():
        variants = [("nominal", base)] + [
            (f"VCMA {e:g} V/nm x{s:g}", vcma_config(base, e, s)) for e, s in VCMA_VARIANTS]
        for name, cfg in variants:
            cfg, res = exhaustive_check(cfg)
            errors = sum(r.bit_errors for r in res.values())
            dev = max(r.max_reset_deviation for r in res.values())
            good = (len(res) == (16 if label == "1-bit" else 256) and errors == 0
                    and dev <= 2 * CIRCUIT_GEOMETRY.cell)
            ok = ok and good
            parts.append(f"{label} {name}: {len(res)} patterns, {errors} bit errors, "
                         f"reset spread {dev:.1e} m")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed <= 1800
    report(8, ok, "; ".join(parts) + f"; runtime {elapsed:.0f} s")
    assert ok


# -- 9: determinism -----------------------------------------------------------------------

def test_criterion_9_determinism(tmp_path, report):
    commands = [["velocity-sweep"], ["link", "--pattern", "110"], ["energy"]]
    outputs = {}
    for w in ("1", "2", "8", "1"):
        for cmd in commands:
            out = tmp_path / f"{cmd[0]}-{w}-{len(outputs)}"
            main(cmd + ["--workers", w, "--seed", "11", "--out", str(out)])
            blob = b"".join(f.read_bytes() for f in sorted(out.iterdir()))
            outputs.setdefault(cmd[0], []).append(blob)
    same = {k: len(set(v)) == 1 for k, v in outputs.items()}
    ok = all(same.values())
    report(9, ok, ", ".join(f"{k} identical over workers 1/2/8/1: {v}" for k, v in same.items()))
    assert ok
