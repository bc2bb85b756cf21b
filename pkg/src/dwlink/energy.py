"""Closed-form energy accounting for the link, per clock cycle."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

FJ = 1e-15


@dataclass(frozen=True)
class EnergyInputs:
    i_in: float = 0.1228e-3        # A, level step I (single-bit: the only level)
    r_wire: float = 500.0          # Ohm
    r_shm: float = 666.67          # Ohm
    t_p: float = 1e-9              # s, clock period
    c_wire: float = 2.5e-12        # F
    v_swing: float | None = None   # V; None -> i_in * r_shm
    e_driver: float = 0.1e-15      # J
    e_receiver: float = 4.8717e-15  # J per cycle
    wire_len: float = 10.0         # mm
    bits_per_cycle: int = 1
    e_vcma_gate: float = 0.0       # J per cycle, only used by vcma_report

    def __post_init__(self):
        vals = (self.i_in, self.r_wire, self.r_shm, self.t_p, self.c_wire,
                self.e_driver, self.e_receiver, self.e_vcma_gate)
        if min(vals) < 0 or (self.v_swing is not None and self.v_swing < 0):
            raise ValueError("energy inputs must be nonnegative")
        if not self.wire_len > 0:
            raise ValueError("wire_len must be positive")
        if self.bits_per_cycle < 1:
            raise ValueError("bits_per_cycle must be >= 1")

    @property
    def swing(self) -> float:
        return self.i_in * self.r_shm if self.v_swing is None else self.v_swing

    def with_(self, **kw) -> "EnergyInputs":
        return replace(self, **kw)


def double_bit_inputs(**kw) -> EnergyInputs:
    """Two bits per cycle with 3I equal to the single-bit current."""
    kw.setdefault("i_in", 0.1228e-3 / 3.0)
    kw.setdefault("e_receiver", 60e-15)
    kw.setdefault("bits_per_cycle", 2)
    return EnergyInputs(**kw)


@dataclass(frozen=True)
class EnergyReport:
    e_static_wire: float
    e_shm_set: float
    e_shm_reset: float
    e_static: float
    e_dynamic: float
    e_receiver: float
    e_total: float
    per_bit_per_mm: float
    bits_per_cycle: int
    wire_len: float
    assumptions: tuple[str, ...] = field(default_factory=tuple)

    def components(self) -> list[tuple[str, float]]:
        return [("e_static_wire", self.e_static_wire),
                ("e_shm_set", self.e_shm_set),
                ("e_shm_reset", self.e_shm_reset),
                ("e_static", self.e_static),
                ("e_dynamic", self.e_dynamic),
                ("e_receiver", self.e_receiver),
                ("e_total", self.e_total)]

    @property
    def fj_per_bit_per_mm(self) -> float:
        return self.per_bit_per_mm / FJ


def _report(i2, v2, inp: EnergyInputs, extra=0.0, assumptions=()):
    e_wire = i2 * inp.r_wire * inp.t_p
    e_set = i2 * inp.r_shm * (0.5 * inp.t_p)
    e_reset = i2 * inp.r_shm * (0.5 * inp.t_p)
    e_static = e_wire + e_set + e_reset
    e_dynamic = inp.c_wire * v2 + inp.e_driver + extra
    e_total = e_static + e_dynamic + inp.e_receiver
    return EnergyReport(e_wire, e_set, e_reset, e_static, e_dynamic, inp.e_receiver,
                        e_total, e_total / (inp.bits_per_cycle * inp.wire_len),
                        inp.bits_per_cycle, inp.wire_len, tuple(assumptions))


BASE_ASSUMPTIONS = (
    "static terms: wire and SHM carry i_in for the whole period (set and reset halves)",
    "dynamic term: c_wire * v_swing^2 + e_driver, v_swing = i_in * r_shm unless given",
    "receiver energy is a per-cycle input constant",
)


def energy_report(inp: EnergyInputs) -> EnergyReport:
    return _report(inp.i_in ** 2, inp.swing ** 2, inp, assumptions=BASE_ASSUMPTIONS)


def multibit_report(inp: EnergyInputs, symbol_distribution: Sequence[float]) -> EnergyReport:
    """Expected energy for a multi-level transmitter.

    Level k carries current ``k * i_in`` and swing ``k * v_swing``;
    ``symbol_distribution[k]`` is its probability.
    """
    p = np.asarray(symbol_distribution, dtype=float)
    if p.ndim != 1 or p.size < 2 or np.any(p < 0) or not np.isclose(p.sum(), 1.0, atol=1e-12):
        raise ValueError("symbol distribution must be nonnegative and sum to 1")
    k2 = float(np.dot(p, np.arange(p.size) ** 2))
    notes = BASE_ASSUMPTIONS + (
        f"levels 0..{p.size - 1} x i_in, distribution {np.round(p, 6).tolist()}",
        f"E[i^2] = {k2:.6g} * i_in^2, E[v^2] = {k2:.6g} * v_swing^2",
        f"bits per cycle = {inp.bits_per_cycle}, receiver energy {inp.e_receiver / FJ:.6g} fJ",
    )
    return _report(k2 * inp.i_in ** 2, k2 * inp.swing ** 2, inp, assumptions=notes)


def uniform(n_levels: int) -> list[float]:
    return [1.0 / n_levels] * n_levels


def vcma_report(inp: EnergyInputs, current_scale: float,
                symbol_distribution: Sequence[float] | None = None) -> EnergyReport:
    """Energy with VCMA-assisted drive: current and swing scaled down, plus
    the per-cycle gate energy ``inp.e_vcma_gate`` in the dynamic term."""
    if not 0 < current_scale <= 1:
        raise ValueError("current_scale must lie in (0, 1]")
    scaled = inp.with_(i_in=inp.i_in * current_scale, v_swing=inp.swing * current_scale)
    if symbol_distribution is None:
        base = energy_report(scaled)
        k2 = 1.0
    else:
        base = multibit_report(scaled, symbol_distribution)
        p = np.asarray(symbol_distribution, dtype=float)
        k2 = float(np.dot(p, np.arange(p.size) ** 2))
    notes = base.assumptions + (
        f"current and swing scaled by {current_scale:g}",
        f"VCMA gate energy {inp.e_vcma_gate / FJ:.6g} fJ per cycle",
    )
    return _report(k2 * scaled.i_in ** 2, k2 * scaled.swing ** 2, scaled,
                   extra=inp.e_vcma_gate, assumptions=notes)


@dataclass(frozen=True)
class TechComparison:
    technology: str
    variant: str
    lo: float
    hi: float
    comment: str


def comparison_table() -> list[TechComparison]:
    """Published energy figures (fJ/bit/mm) for on-chip link technologies."""
    return [
        TechComparison("voltage mode full swing", "45 nm CMOS without repeaters",
                       130.743, 130.743, "higher delay for longer lines"),
        TechComparison("voltage mode full swing", "45 nm CMOS with repeaters",
                       302.411, 302.411, "lower delay at higher energy"),
        TechComparison("voltage mode low swing", "65 nm CMOS without repeaters",
                       8.4, 10.9, "very low speed; heavy equalization"),
        TechComparison("current mode", "sampling receiver", 35.6, 35.6,
                       "large static power in analog current sensing"),
        TechComparison("current mode", "sense amplifier receiver", 9.5, 10.8, ""),
        TechComparison("optical", "", 100.0, 100.0, "approximate; costly signal conversion"),
        TechComparison("spin-Hall receiver", "single-bit", 3.93, 3.93,
                       "fast and efficient for multi-bit operation"),
        TechComparison("spin-Hall receiver", "double-bit", 4.72, 4.72, ""),
        TechComparison("spin-Hall receiver with VCMA", "single-bit", 2.02, 2.53,
                       "reduced drive current"),
        TechComparison("spin-Hall receiver with VCMA", "double-bit", 3.77, 4.02, ""),
    ]


# -- rendering --------------------------------------------------------------

def render_text(title: str, rep: EnergyReport) -> str:
    lines = [title]
    for name, e in rep.components():
        lines.append(f"  {name:<16s}{e / FJ:12.4f} fJ")
    lines.append(f"  {'per bit per mm':<16s}{rep.fj_per_bit_per_mm:12.4f} fJ/bit/mm")
    lines.append("  assumptions:")
    lines.extend(f"    - {a}" for a in rep.assumptions)
    return "\n".join(lines) + "\n"


def report_csv(rep: EnergyReport, label: str | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["component", "energy_fJ"])
    prefix = f"{label}." if label else ""
    for name, e in rep.components():
        w.writerow([prefix + name, f"{e / FJ:.6e}"])
    w.writerow([prefix + "per_bit_per_mm", f"{rep.fj_per_bit_per_mm:.6e}"])
    return buf.getvalue()


def comparison_csv(rows: Sequence[TechComparison] | None = None) -> str:
    rows = comparison_table() if rows is None else rows
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["technology", "variant", "fj_per_bit_per_mm_lo",
                "fj_per_bit_per_mm_hi", "comment"])
    for r in rows:
        w.writerow([r.technology, r.variant, f"{r.lo:.6e}", f"{r.hi:.6e}", r.comment])
    return buf.getvalue()
