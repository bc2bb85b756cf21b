"""Behavioural model of the current-mode link.

A clocked transmitter drives one of ``2**bits`` current levels into an RC
ladder that ends in the spin-Hall metal (SHM) under the receiver's free
layer.  Each cycle has two halves:

* set (clock low): the transmitter current reaches the SHM through the
  ladder and pushes the wall away from the left fixed edge;
* reset (clock high): the line is clamped to ground at both ends and a local
  reverse source returns the wall to the edge.

The free layer's state is read through an MTJ resistance divider and
sampled at the rising clock edge, which ends the set half.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .device import (CIRCUIT_GEOMETRY, J_MAX, DeviceGeometry, init_racetrack,
                     switched_fraction, track_wall)
from .magnetics import (DEFAULT_DT, IntegrationError, LLGSolver,
                        MaterialParams, ModelValidityError, anisotropy_coefficient)

RHO_SHM = 20e-8  # Ohm m, 20 uOhm cm (Pt)


@dataclass(frozen=True)
class LinkConfig:
    wire_len: float = 10.0            # mm
    r_per_mm: float = 50.0            # Ohm/mm
    c_per_um: float = 0.25e-15        # F/um
    n_segments_per_mm: int = 10
    t_clk: float = 1e-9               # s
    bits_per_symbol: int = 1
    i_unit: float = 0.1228e-3         # A
    v_read: float = 0.5               # V
    r_p: float = 2e3                  # Ohm
    r_ap: float = 4e3                 # Ohm
    r_ref: float | None = None        # Ohm; None -> sqrt(r_p * r_ap)
    trip_points: tuple[float, ...] | None = None
    vcma_enabled: bool = False
    e_field_on: float = 1.0           # V/nm
    receiver_energy_per_cycle: float = 4.8717e-15  # J
    rho_shm: float = RHO_SHM          # Ohm m
    i_reset: float | None = None      # A; None -> largest set level
    dt: float = DEFAULT_DT            # s
    trace_every: int = 10             # steps between trace rows

    def __post_init__(self):
        if self.bits_per_symbol not in (1, 2):
            raise ValueError("bits_per_symbol must be 1 or 2")
        if not self.r_ap > self.r_p > 0:
            raise ValueError("need r_ap > r_p > 0")
        if self.r_ref is not None and self.r_ref <= 0:
            raise ValueError("r_ref must be positive")
        if self.n_segments_per_mm < 5:
            raise ValueError("n_segments_per_mm must be at least 5")
        if min(self.wire_len, self.r_per_mm, self.c_per_um, self.t_clk,
               self.dt, self.rho_shm) <= 0:
            raise ValueError("wire, clock and step parameters must be positive")
        if self.i_unit < 0 or self.v_read <= 0:
            raise ValueError("i_unit must be >= 0 and v_read > 0")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")
        if self.half_steps * 2 * self.dt != self.t_clk and not math.isclose(
                self.half_steps * 2 * self.dt, self.t_clk, rel_tol=1e-9):
            raise ValueError("t_clk must be an even multiple of dt")
        if self.trip_points is not None:
            tp = tuple(float(v) for v in self.trip_points)
            if len(tp) != self.n_levels - 1:
                raise ValueError(f"need {self.n_levels - 1} trip points")
            if any(b <= a for a, b in zip(tp, tp[1:])):
                raise ValueError("trip points must be strictly increasing")
            object.__setattr__(self, "trip_points", tp)

    @property
    def n_levels(self) -> int:
        return 2 ** self.bits_per_symbol

    @property
    def reference_resistance(self) -> float:
        return self.r_ref if self.r_ref is not None else math.sqrt(self.r_p * self.r_ap)

    @property
    def reset_current(self) -> float:
        return self.i_reset if self.i_reset is not None else self.i_unit * (self.n_levels - 1)

    @property
    def half_steps(self) -> int:
        return int(round(0.5 * self.t_clk / self.dt))

    @property
    def n_segments(self) -> int:
        return max(1, int(round(self.n_segments_per_mm * self.wire_len)))

    @property
    def r_wire(self) -> float:
        return self.r_per_mm * self.wire_len

    @property
    def c_wire(self) -> float:
        return self.c_per_um * 1000.0 * self.wire_len

    def with_(self, **kw) -> "LinkConfig":
        return replace(self, **kw)


def single_bit_config(**kw) -> LinkConfig:
    return LinkConfig(**kw)


def double_bit_config(**kw) -> LinkConfig:
    """Two bits per symbol; by default 3I equals the single-bit maximum."""
    kw.setdefault("i_unit", 0.1228e-3 / 3.0)
    kw.setdefault("receiver_energy_per_cycle", 60e-15)
    return LinkConfig(bits_per_symbol=2, **kw)


# VCMA variants: (effective field in V/nm, current scale)
VCMA_VARIANTS = ((1.0, 0.5), (0.67, 0.7))


def vcma_config(cfg: LinkConfig, e_field: float, current_scale: float) -> LinkConfig:
    if not 0 < current_scale <= 1:
        raise ValueError("current_scale must lie in (0, 1]")
    i_reset = None if cfg.i_reset is None else cfg.i_reset * current_scale
    return cfg.with_(vcma_enabled=True, e_field_on=e_field,
                     i_unit=cfg.i_unit * current_scale, i_reset=i_reset,
                     trip_points=None)


# -- symbols and patterns -----------------------------------------------------

def tx_levels(symbol, cfg: LinkConfig) -> float:
    """Transmitter current (A) for a symbol.

    ``symbol`` is an int in ``[0, 2**bits)`` or a sequence of bits
    ``(B1, B2)`` where B1 weighs I and B2 weighs 2I.
    """
    if not isinstance(symbol, (int, np.integer)):
        bits = tuple(int(b) for b in symbol)
        if len(bits) != cfg.bits_per_symbol or any(b not in (0, 1) for b in bits):
            raise ValueError(f"invalid bit tuple {symbol!r}")
        symbol = sum(b << k for k, b in enumerate(bits))
    if not 0 <= symbol < cfg.n_levels:
        raise ValueError(f"symbol {symbol} out of range for {cfg.bits_per_symbol} bit(s)")
    return int(symbol) * cfg.i_unit


def parse_pattern(text: str, bits_per_symbol: int) -> list[int]:
    """'110' or '11 10 01 00' -> symbols.

    In 2-bit mode each pair is read most significant first, so "10" is B2=1,
    B1=0, i.e. symbol 2 (current 2I).
    """
    s = "".join(text.split())
    if not s:
        raise ValueError("empty bit pattern")
    if set(s) - {"0", "1"}:
        raise ValueError("bit pattern may only contain 0 and 1")
    if len(s) % bits_per_symbol:
        raise ValueError(f"pattern length must be a multiple of {bits_per_symbol}")
    return [int(s[k:k + bits_per_symbol], 2) for k in range(0, len(s), bits_per_symbol)]


def format_symbols(symbols: Iterable[int], bits_per_symbol: int) -> str:
    return " ".join(format(int(s), f"0{bits_per_symbol}b") for s in symbols)


def all_patterns(bits_per_symbol: int, n_symbols: int) -> list[tuple[int, ...]]:
    n = 2 ** bits_per_symbol
    return [tuple(int(d) for d in np.unravel_index(k, (n,) * n_symbols))
            for k in range(n ** n_symbols)]


# -- electrical blocks --------------------------------------------------------

def shm_resistance(geom: DeviceGeometry, rho_shm: float = RHO_SHM) -> float:
    return rho_shm * geom.length / geom.shm_area


def shm_electrical(geom: DeviceGeometry, rho_shm: float, i: float):
    """(current density A/m^2, voltage drop V, resistance Ohm) of the SHM strip."""
    if not math.isfinite(i):
        raise ValueError("current must be finite")
    r = shm_resistance(geom, rho_shm)
    return i / geom.shm_area, i * r, r


def mtj_resistance(f: float, cfg: LinkConfig) -> float:
    if not 0.0 <= f <= 1.0:
        raise ValueError("switched fraction must lie in [0, 1]")
    return 1.0 / (f / cfg.r_p + (1.0 - f) / cfg.r_ap)


def mtj_sense(f: float, cfg: LinkConfig) -> float:
    """Divider output (V) for a free layer whose up fraction is ``f``."""
    r = mtj_resistance(f, cfg)
    return cfg.v_read * r / (r + cfg.reference_resistance)


def detect(v_sense: float, trip_points: Sequence[float]) -> int:
    """Number of trip points strictly exceeded; a tie resolves low."""
    return int(sum(v_sense > t for t in trip_points))


class RCLadder:
    """Current-driven RC ladder ending in a resistive load.

    Node k carries the k-th shunt capacitor; the k-th series resistor joins
    node k to node k+1, and the last one joins the final node to the load.
    Time stepping is trapezoidal.  Two topologies are available:

    * ``"drive"``: current source into node 0, load at the far end;
    * ``"clamp"``: node 0 held at ground and the far end shorted to ground.
    """

    def __init__(self, n: int, r_seg: float, c_seg: float, r_load: float, dt: float):
        if n < 1 or min(r_seg, c_seg, dt) <= 0 or r_load < 0:
            raise ValueError("invalid ladder parameters")
        self.n, self.r_seg, self.c_seg, self.r_load, self.dt = n, r_seg, c_seg, r_load, dt
        self.v = np.zeros(n)
        self._g_out = {"drive": 1.0 / (r_seg + r_load), "clamp": 1.0 / r_seg}
        self._ops = {mode: self._build(mode) for mode in ("drive", "clamp")}

    @classmethod
    def for_link(cls, cfg: LinkConfig, r_load: float) -> "RCLadder":
        n = cfg.n_segments
        return cls(n, cfg.r_wire / n, cfg.c_wire / n, r_load, cfg.dt)

    def _build(self, mode):
        n = self.n
        g = 1.0 / self.r_seg
        G = np.zeros((n, n))
        for k in range(n - 1):
            G[k, k] += g
            G[k + 1, k + 1] += g
            G[k, k + 1] -= g
            G[k + 1, k] -= g
        G[n - 1, n - 1] += self._g_out[mode]
        c2 = 2.0 * self.c_seg / self.dt
        A = c2 * np.eye(n) + G
        B = c2 * np.eye(n) - G
        if mode == "clamp":
            A[0, :] = 0.0
            A[0, 0] = 1.0
            B[0, :] = 0.0
        Ainv = np.linalg.inv(A)
        src = Ainv[:, 0].copy()
        if mode == "clamp":
            src[:] = 0.0
        return Ainv @ B, src

    def output_current(self, mode: str = "drive") -> float:
        return float(self.v[-1] * self._g_out[mode])

    def run(self, i_src: np.ndarray, mode: str = "drive") -> np.ndarray:
        """Advance one step per entry of ``i_src``; return the output current
        after each step.  ``i_src[k]`` is the source current at the end of
        step k, and the source value before the first step is taken to be
        ``i_src[0]`` (piecewise-constant drive switched at step boundaries)."""
        M, s = self._ops[mode]
        g_out = self._g_out[mode]
        i_src = np.asarray(i_src, dtype=float)
        out = np.empty(i_src.size)
        v = self.v
        prev = i_src[0] if i_src.size else 0.0
        for k in range(i_src.size):
            v = M @ v + s * (prev + i_src[k])
            prev = i_src[k]
            out[k] = v[-1] * g_out
        if not np.all(np.isfinite(v)):
            raise IntegrationError(i_src.size, "non-finite node voltage in the wire model")
        self.v = v
        return out


def wire_transient(cfg: LinkConfig, segments: Sequence[tuple[float, float]],
                   r_load: float | None = None, geom: DeviceGeometry = CIRCUIT_GEOMETRY):
    """Output current of the line for a piecewise-constant source.

    ``segments`` is a list of ``(duration_s, current_A)``.  Returns
    ``(t, i_out)`` sampled every ``cfg.dt``, starting from a line at rest.
    """
    if r_load is None:
        r_load = shm_resistance(geom, cfg.rho_shm)
    src = np.concatenate([np.full(max(1, int(round(d / cfg.dt))), float(i))
                          for d, i in segments]) if segments else np.zeros(0)
    lad = RCLadder.for_link(cfg, r_load)
    out = lad.run(src)
    t = cfg.dt * np.arange(1, src.size + 1)
    return t, out


# -- link simulation ----------------------------------------------------------

TRACE_HEADER = ("t_s", "i_src_A", "i_shm_A", "j_shm_Am2", "wall_pos_m",
                "mz_avg", "v_sense_V", "clk", "latched_symbol")


@dataclass
class SymbolTrace:
    t: np.ndarray
    i_src: np.ndarray
    i_shm: np.ndarray
    j_shm: np.ndarray
    wall_pos: np.ndarray
    mz_avg: np.ndarray
    v_sense: np.ndarray
    clk: np.ndarray
    latched: np.ndarray

    def rows(self):
        return zip(self.t, self.i_src, self.i_shm, self.j_shm, self.wall_pos,
                   self.mz_avg, self.v_sense, self.clk, self.latched)

    def write_csv(self, fh, preamble: str | None = None):
        if preamble:
            fh.write(preamble)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for r in self.rows():
            w.writerow([f"{r[0]:.6e}", f"{r[1]:.6e}", f"{r[2]:.6e}", f"{r[3]:.6e}",
                        f"{r[4]:.6e}", f"{r[5]:.6e}", f"{r[6]:.6e}", int(r[7]), int(r[8])])


@dataclass
class LinkResult:
    sent: list[int]
    decoded: list[int]
    v_samples: list[float]
    cycle_start_positions: list[float]
    reset_position: float
    bits_per_symbol: int
    trace: SymbolTrace | None = None

    @property
    def symbol_errors(self) -> int:
        return sum(a != b for a, b in zip(self.sent, self.decoded))

    @property
    def bit_errors(self) -> int:
        return sum(bin(a ^ b).count("1") for a, b in zip(self.sent, self.decoded))

    @property
    def max_reset_deviation(self) -> float:
        return max(abs(x - self.reset_position) for x in self.cycle_start_positions)

    def sent_bits(self) -> str:
        return format_symbols(self.sent, self.bits_per_symbol)

    def decoded_bits(self) -> str:
        return format_symbols(self.decoded, self.bits_per_symbol)


@dataclass
class _State:
    m: np.ndarray
    v_line: np.ndarray
    cycle: int


def _wall_x(grid):
    st = track_wall(grid)
    return st.position if st.has_wall else float("nan")


class LinkSimulator:
    """Cycle-level co-simulation of line, receiver device and readout."""

    def __init__(self, cfg: LinkConfig, geom: DeviceGeometry = CIRCUIT_GEOMETRY,
                 p: MaterialParams | None = None, wall_margin: float | None = None):
        self.cfg = cfg
        self.geom = geom
        self.p = p if p is not None else MaterialParams()
        j_max = max(cfg.i_unit * (cfg.n_levels - 1), cfg.reset_current) / geom.shm_area
        if j_max > J_MAX * (1 + 1e-12):
            raise ModelValidityError(
                f"peak SHM current density {j_max:.3g} A/m^2 exceeds {J_MAX:.3g}")
        if cfg.vcma_enabled:
            anisotropy_coefficient(self.p, cfg.e_field_on)  # raises if the easy axis flips
        self.r_shm = shm_resistance(geom, cfg.rho_shm)
        self.ladder = RCLadder.for_link(cfg, self.r_shm)
        if wall_margin is None:
            wall_margin = self.p.wall_width()
        grid = init_racetrack(geom, self.p, "down-left",
                              geom.fixed_edge_width + wall_margin)
        self.grid = grid
        self.solver = LLGSolver(grid, self.p, cfg.dt)
        # condition with one reset half so every cycle starts alike
        self.solver.run(cfg.half_steps, -cfg.reset_current / geom.shm_area)
        self.solver.steps = 0
        self._cycle = 0
        self._latched = -1
        self._reset = self.snapshot()
        self.reset_position = _wall_x(grid)

    # state handling
    def snapshot(self) -> _State:
        return _State(self.grid.m.copy(), self.ladder.v.copy(), self._cycle)

    def restore(self, st: _State):
        self.grid.m[...] = st.m
        self.ladder.v = st.v_line.copy()
        self._cycle = st.cycle
        self.solver.steps = st.cycle * 2 * self.cfg.half_steps

    def reset(self):
        self.restore(self._reset)

    def sense(self) -> float:
        return mtj_sense(switched_fraction(self.grid), self.cfg)

    def set_phase_drive(self, level: float):
        """Per-step SHM current (A) for the coming set half."""
        n = self.cfg.half_steps
        out = self.ladder.run(np.full(n, level), "drive")
        # each LLG step sees the mean of the line output at its two ends
        start = np.empty(n)
        start[0] = self._i_out_prev
        start[1:] = out[:-1]
        return 0.5 * (start + out)

    def cycle(self, symbol: int, rec: list | None = None):
        """One set + reset cycle.  Returns (v_sample, start_position)."""
        cfg, geom = self.cfg, self.geom
        n = cfg.half_steps
        x_start = _wall_x(self.grid)
        level = tx_levels(symbol, cfg)
        self._i_out_prev = self.ladder.output_current("drive")
        i_shm = self.set_phase_drive(level)
        j = i_shm / geom.shm_area
        e_on = cfg.e_field_on if cfg.vcma_enabled else 0.0
        t0 = self._cycle * 2 * n
        if rec is None:
            self.solver.run_arrays(j, e_on)
        else:
            self._run_recorded(rec, t0, j, i_shm, level, e_on, 0)
        v = self.sense()
        latch = detect(v, cfg.trip_points) if cfg.trip_points is not None else -1
        self._latched = latch
        i_rev = -cfg.reset_current
        self.ladder.run(np.zeros(n), "clamp")
        jr = np.full(n, i_rev / geom.shm_area)
        if rec is None:
            self.solver.run_arrays(jr)
        else:
            self._run_recorded(rec, t0 + n, jr, np.full(n, i_rev), 0.0, 0.0, 1)
        self._cycle += 1
        return v, x_start

    def _row(self, rec, step, i_src, i_shm, clk):
        rec.append((step * self.cfg.dt, i_src, i_shm, i_shm / self.geom.shm_area,
                    _wall_x(self.grid), float(self.grid.m[..., 2][self.grid.free].mean()),
                    self.sense(), clk, self._latched))

    def _run_recorded(self, rec, step0, j, i_shm, i_src, e_on, clk):
        every = self.cfg.trace_every
        if not rec:
            self._row(rec, step0, i_src, i_shm[0], clk)
        for k in range(0, j.size, every):
            self.solver.run_arrays(j[k:k + every], e_on)
            end = min(k + every, j.size)
            step = step0 + end
            if end == j.size:
                # the row at a half-cycle boundary shows the state after the edge
                nxt_clk = 1 - clk
                if clk == 0:
                    self._latched = (detect(self.sense(), self.cfg.trip_points)
                                     if self.cfg.trip_points is not None else -1)
                self._row(rec, step, 0.0 if nxt_clk else i_src, i_shm[end - 1], nxt_clk)
            else:
                self._row(rec, step, i_src, i_shm[end - 1], clk)

    def run(self, symbols: Sequence[int], record: bool = False) -> LinkResult:
        if len(symbols) == 0:
            raise ValueError("empty pattern")
        self.reset()
        self._latched = 0 if self.cfg.trip_points is not None else -1
        rec: list | None = [] if record else None
        vs, xs = [], []
        for s in symbols:
            v, x = self.cycle(int(s), rec)
            vs.append(v)
            xs.append(x)
        trips = self.cfg.trip_points
        decoded = [detect(v, trips) for v in vs] if trips is not None else [-1] * len(vs)
        trace = None
        if record:
            cols = list(zip(*rec))
            trace = SymbolTrace(*(np.asarray(c) for c in cols))
        return LinkResult(list(map(int, symbols)), decoded, vs, xs,
                          self.reset_position, self.cfg.bits_per_symbol, trace)

    def calibrate(self) -> tuple[float, ...]:
        """Sampled voltage after one set half per level, from the reset state,
        and the trip points midway between neighbours."""
        vs = []
        for s in range(self.cfg.n_levels):
            self.reset()
            self._latched = -1
            v, _ = self.cycle(s)
            vs.append(v)
        self.reset()
        if any(b <= a for a, b in zip(vs, vs[1:])):
            raise ValueError(f"sense voltage not monotone in level: {vs}")
        self.levels_v = tuple(vs)
        return tuple(0.5 * (a + b) for a, b in zip(vs, vs[1:]))

    def run_all(self, n_symbols: int) -> dict[tuple[int, ...], LinkResult]:
        """Every pattern of ``n_symbols`` symbols, sharing common prefixes.

        Cycle n+1 depends only on the state after cycle n, so patterns with a
        common prefix share its simulation.  Results are identical to
        separate ``run`` calls.
        """
        out: dict[tuple[int, ...], LinkResult] = {}
        self.reset()
        self._latched = -1
        trips = self.cfg.trip_points
        levels = range(self.cfg.n_levels)

        def walk(prefix, vs, xs):
            if len(prefix) == n_symbols:
                dec = [detect(v, trips) for v in vs] if trips is not None else [-1] * len(vs)
                out[prefix] = LinkResult(list(prefix), dec, list(vs), list(xs),
                                         self.reset_position, self.cfg.bits_per_symbol)
                return
            st = self.snapshot()
            for s in levels:
                self.restore(st)
                v, x = self.cycle(s)
                walk(prefix + (s,), vs + [v], xs + [x])

        walk((), [], [])
        return dict(sorted(out.items()))


def calibrate_trips(cfg: LinkConfig, geom: DeviceGeometry = CIRCUIT_GEOMETRY,
                    p: MaterialParams | None = None) -> tuple[float, ...]:
    return LinkSimulator(cfg, geom, p).calibrate()


def calibrated(cfg: LinkConfig, geom: DeviceGeometry = CIRCUIT_GEOMETRY,
               p: MaterialParams | None = None) -> LinkConfig:
    if cfg.trip_points is not None:
        return cfg
    return cfg.with_(trip_points=calibrate_trips(cfg, geom, p))


def run_link(cfg: LinkConfig, geom: DeviceGeometry = CIRCUIT_GEOMETRY,
             p: MaterialParams | None = None, pattern: str | Sequence[int] = "",
             record: bool = True) -> LinkResult:
    """Simulate a bit pattern.  Trip points are calibrated first if unset."""
    symbols = parse_pattern(pattern, cfg.bits_per_symbol) if isinstance(pattern, str) \
        else list(pattern)
    if not symbols:
        raise ValueError("empty pattern")
    cfg = calibrated(cfg, geom, p)
    return LinkSimulator(cfg, geom, p).run(symbols, record=record)


def exhaustive_check(cfg: LinkConfig, geom: DeviceGeometry = CIRCUIT_GEOMETRY,
                     p: MaterialParams | None = None, n_symbols: int = 4):
    """Calibrate, then decode every pattern of ``n_symbols`` symbols."""
    cfg = calibrated(cfg, geom, p)
    return cfg, LinkSimulator(cfg, geom, p).run_all(n_symbols)
