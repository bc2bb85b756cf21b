"""Flat ``key = value`` run configuration.

Units are part of the key names.  Unknown keys are rejected, and every value
is validated by the owning dataclass before a simulation starts.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .device import DeviceGeometry
from .energy import EnergyInputs
from .link import LinkConfig, shm_resistance
from .magnetics import MaterialParams


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(v) for v in text.replace(";", ",").split(","))


def _pairs(text: str) -> tuple[tuple[float, float], ...]:
    out = []
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        j, _, e = item.partition(":")
        out.append((float(j), float(e) if e else 0.0))
    return tuple(out)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text: str):
    t = text.strip().lower()
    return None if t in ("", "auto", "none") else float(t)


def _opt_floats(text: str):
    t = text.strip().lower()
    return None if t in ("", "auto", "none") else _floats(t)


# key -> (parser, default)
SCHEMA = {
    # material
    "ms_A_per_m": (float, 7e5),
    "ku_J_per_m3": (float, 4.8e5),
    "aex_J_per_m": (float, 1e-11),
    "dmi_J_per_m2": (float, -1.2e-3),
    "alpha": (float, 0.3),
    "theta_sh": (float, 0.07),
    "t_free_m": (float, 0.6e-9),
    "t_shm_m": (float, 3e-9),
    "xi_vcma_J_per_m2_per_V_per_nm": (float, 38.5e-6),
    "sigma_pol": (float, 1.0),
    # geometry
    "length_m": (float, 200e-9),
    "bench_width_m": (float, 160e-9),
    "circuit_width_m": (float, 20e-9),
    "fixed_edge_m": (float, 4e-9),
    "cell_m": (float, 2e-9),
    # integration and sweeps
    "dt_s": (float, 1e-13),
    "velocity_j_Am2": (_floats, (0.5e12, 1.0e12, 1.5e12, 2.0e12)),
    "velocity_transient_s": (float, 0.2e-9),
    "velocity_window_s": (float, 0.2e-9),
    "switching_points_Am2_Vpnm": (_pairs, ((0.0, 0.0), (1.0e12, 0.0), (1.5e12, 0.0),
                                          (2.0e12, 0.0), (0.5e12, 1.0), (0.7e12, 0.67))),
    "switching_t_max_s": (float, 4e-9),
    # link
    "wire_len_mm": (float, 10.0),
    "r_per_mm_ohm": (float, 50.0),
    "c_per_um_F": (float, 0.25e-15),
    "n_segments_per_mm": (int, 10),
    "t_clk_s": (float, 1e-9),
    "bits_per_symbol": (int, 1),
    "i_max_A": (float, 0.1228e-3),
    "v_read_V": (float, 0.5),
    "r_p_ohm": (float, 2e3),
    "r_ap_ohm": (float, 4e3),
    "r_ref_ohm": (_opt_float, None),
    "trip_points_V": (_opt_floats, None),
    "vcma_enabled": (_bool, False),
    "e_field_on_Vpnm": (float, 1.0),
    "vcma_current_scale": (float, 1.0),
    "rho_shm_ohm_m": (float, 20e-8),
    "trace_every": (int, 10),
    # energy
    "e_driver_J": (float, 0.1e-15),
    "e_receiver_1bit_J": (float, 4.8717e-15),
    "e_receiver_2bit_J": (float, 60e-15),
    "e_vcma_gate_J": (float, 0.0),
    # run control
    "workers": (int, 1),
    "seed": (int, 0),
}


class ConfigError(ValueError):
    pass


def _render(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(_render(x) if not isinstance(x, tuple) else ":".join(map(_render, x))
                        for x in v)
    return "auto" if v is None else str(v)


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {k: d for k, (_, d) in SCHEMA.items()})

    def __getitem__(self, key):
        return self.values[key]

    def set(self, key: str, raw) -> None:
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        parser = SCHEMA[key][0]
        try:
            self.values[key] = parser(raw) if isinstance(raw, str) else raw
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None

    # -- derived objects ---------------------------------------------------
    def material(self) -> MaterialParams:
        v = self.values
        return MaterialParams(Ms=v["ms_A_per_m"], Ku=v["ku_J_per_m3"], Aex=v["aex_J_per_m"],
                              Dmi=v["dmi_J_per_m2"], alpha=v["alpha"], theta_sh=v["theta_sh"],
                              t_free=v["t_free_m"], t_shm=v["t_shm_m"],
                              xi_vcma=v["xi_vcma_J_per_m2_per_V_per_nm"],
                              sigma_pol=v["sigma_pol"])

    def _geom(self, width):
        v = self.values
        return DeviceGeometry(length=v["length_m"], width=width, t_free=v["t_free_m"],
                              t_shm=v["t_shm_m"], fixed_edge_width=v["fixed_edge_m"],
                              cell=v["cell_m"])

    def bench_geometry(self) -> DeviceGeometry:
        return self._geom(self.values["bench_width_m"])

    def circuit_geometry(self) -> DeviceGeometry:
        return self._geom(self.values["circuit_width_m"])

    def link(self) -> LinkConfig:
        v = self.values
        bits = v["bits_per_symbol"]
        scale = v["vcma_current_scale"]
        if not 0 < scale <= 1:
            raise ConfigError("vcma_current_scale must lie in (0, 1]")
        e_rx = v["e_receiver_1bit_J"] if bits == 1 else v["e_receiver_2bit_J"]
        tp = v["trip_points_V"]
        return LinkConfig(wire_len=v["wire_len_mm"], r_per_mm=v["r_per_mm_ohm"],
                          c_per_um=v["c_per_um_F"], n_segments_per_mm=v["n_segments_per_mm"],
                          t_clk=v["t_clk_s"], bits_per_symbol=bits,
                          i_unit=scale * v["i_max_A"] / (2 ** bits - 1),
                          v_read=v["v_read_V"], r_p=v["r_p_ohm"], r_ap=v["r_ap_ohm"],
                          r_ref=v["r_ref_ohm"], trip_points=tp,
                          vcma_enabled=v["vcma_enabled"], e_field_on=v["e_field_on_Vpnm"],
                          receiver_energy_per_cycle=e_rx, rho_shm=v["rho_shm_ohm_m"],
                          dt=v["dt_s"], trace_every=v["trace_every"])

    def energy_inputs(self, bits: int = 1) -> EnergyInputs:
        v = self.values
        lk = self.link()
        return EnergyInputs(i_in=v["i_max_A"] / (2 ** bits - 1), r_wire=lk.r_wire,
                            r_shm=shm_resistance(self.circuit_geometry(), v["rho_shm_ohm_m"]),
                            t_p=v["t_clk_s"], c_wire=lk.c_wire, e_driver=v["e_driver_J"],
                            e_receiver=v["e_receiver_1bit_J"] if bits == 1
                            else v["e_receiver_2bit_J"],
                            wire_len=v["wire_len_mm"], bits_per_cycle=bits,
                            e_vcma_gate=v["e_vcma_gate_J"])

    def validate(self) -> None:
        """Build every derived object so that bad values fail early."""
        v = self.values
        try:
            self.material()
            self.bench_geometry()
            self.circuit_geometry()
            self.link()
            self.energy_inputs(1)
            self.energy_inputs(2)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        if v["workers"] < 1:
            raise ConfigError("workers must be >= 1")
        if not (0 <= v["seed"] < 2 ** 64):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        for key in ("dt_s", "velocity_transient_s", "velocity_window_s", "switching_t_max_s"):
            if not (v[key] > 0 and math.isfinite(v[key])):
                raise ConfigError(f"{key} must be positive")

    # -- identity ----------------------------------------------------------
    def canonical(self, exclude=("workers",)) -> str:
        """Sorted ``key = value`` text.  The worker count does not change any
        result, so it is left out of the identity by default."""
        return "".join(f"{k} = {_render(self.values[k])}\n"
                       for k in sorted(self.values) if k not in exclude)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def header(self) -> str:
        return f"# dwlink {__version__} config {self.digest()}\n"


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"line {n}: expected 'key = value'")
        cfg.set(key.strip(), val.strip())
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return parse_config(Path(path).read_text(encoding="utf-8"))
