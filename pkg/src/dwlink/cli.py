"""Command-line front end: ``dwlink <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from . import __version__, selftest
from .config import ConfigError, RunConfig, load_config
from .device import switching_time, velocity_sweep
from .energy import (comparison_csv, energy_report, multibit_report, render_text,
                     report_csv, uniform, vcma_report)
from .link import VCMA_VARIANTS, run_link


def _fmt(x: float) -> str:
    return f"{x:.6e}"


def _write(out_dir: Path, name: str, cfg: RunConfig, body: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(cfg.header())
        fh.write(body)
    return path


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_velocity_sweep(cfg: RunConfig, out: Path) -> int:
    v = cfg.values
    js = sorted(v["velocity_j_Am2"])
    res = velocity_sweep(cfg.bench_geometry(), cfg.material(), js,
                         transient=v["velocity_transient_s"], window=v["velocity_window_s"],
                         dt=v["dt_s"], workers=v["workers"]) if js else []
    path = _write(out, "velocity_sweep.csv", cfg,
                  _csv(["j_Am2", "velocity_mps"], [[_fmt(j), _fmt(u)] for j, u in res]))
    print(f"wrote {path}")
    return 0


def _switch_point(args):
    geom, p, j, e, t_max, dt = args
    return switching_time(geom, p, j, e, t_max=t_max, dt=dt)


def cmd_switching_sweep(cfg: RunConfig, out: Path) -> int:
    from concurrent.futures import ProcessPoolExecutor

    v = cfg.values
    pts = sorted(v["switching_points_Am2_Vpnm"])
    geom, p = cfg.bench_geometry(), cfg.material()
    jobs = [(geom, p, j, e, v["switching_t_max_s"], v["dt_s"]) for j, e in pts]
    if v["workers"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=v["workers"]) as pool:
            times = list(pool.map(_switch_point, jobs))
    else:
        times = [_switch_point(a) for a in jobs]
    rows = [[_fmt(j), _fmt(e), "nan" if t is None else _fmt(t), int(t is None)]
            for (j, e), t in zip(pts, times)]
    path = _write(out, "switching_sweep.csv", cfg,
                  _csv(["j_Am2", "e_field_Vpnm", "t_switch_s", "timeout"], rows))
    print(f"wrote {path}")
    return 0


def cmd_link(cfg: RunConfig, out: Path, pattern: str | None) -> int:
    if not pattern or not "".join(pattern.split()):
        print("error: link needs a non-empty --pattern", file=sys.stderr)
        return 2
    lk = cfg.link()
    res = run_link(lk, cfg.circuit_geometry(), cfg.material(), pattern)
    buf = io.StringIO()
    res.trace.write_csv(buf)
    path = _write(out, "link_trace.csv", cfg, buf.getvalue())
    summary = (f"pattern={res.sent_bits()} decoded={res.decoded_bits()} "
               f"bit_errors={res.bit_errors} "
               f"max_reset_deviation_m={_fmt(res.max_reset_deviation)}")
    _write(out, "link_summary.txt", cfg, summary + "\n")
    print(f"wrote {path}")
    print(summary)
    return 1 if res.bit_errors else 0


def cmd_energy(cfg: RunConfig, out: Path, no_vcma: bool) -> int:
    one, two = cfg.energy_inputs(1), cfg.energy_inputs(2)
    reports = [("single", "single-bit", energy_report(one)),
               ("double", "double-bit (uniform symbols)", multibit_report(two, uniform(4)))]
    if not no_vcma:
        for e_field, scale in VCMA_VARIANTS:
            tag = f"VCMA {e_field:g} V/nm, current x{scale:g}"
            reports.append((f"single_vcma_x{scale:g}", f"single-bit {tag}",
                            vcma_report(one, scale)))
            reports.append((f"double_vcma_x{scale:g}", f"double-bit {tag}",
                            vcma_report(two, scale, uniform(4))))
    text = "".join(render_text(title, r) + "\n" for _, title, r in reports)
    body = "component,energy_fJ\n" + "".join(
        "".join(report_csv(r, lab).splitlines(keepends=True)[1:]) for lab, _, r in reports)
    _write(out, "energy_report.txt", cfg, text)
    _write(out, "energy.csv", cfg, body)
    _write(out, "comparison.csv", cfg, comparison_csv())
    sys.stdout.write(text)
    return 0


def cmd_selftest(cfg: RunConfig, seed: int) -> int:
    bad = 0
    for name, ok, detail in selftest.run(seed, cfg.material()):
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        bad += not ok
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--workers", type=int, help="worker processes for sweeps")
    common.add_argument("--seed", type=int, help="seed for randomised checks")
    ap = argparse.ArgumentParser(prog="dwlink",
                                 description="Domain-wall interconnect receiver simulator")
    ap.add_argument("--version", action="version", version=f"dwlink {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("velocity-sweep", parents=[common], help="wall velocity vs current density")
    sub.add_parser("switching-sweep", parents=[common], help="free-layer switching time")
    lk = sub.add_parser("link", parents=[common], help="simulate a bit pattern over the link")
    lk.add_argument("--pattern", help="bits, e.g. 110 or '11 10 01 00'")
    en = sub.add_parser("energy", parents=[common], help="energy per bit reports")
    en.add_argument("--no-vcma", action="store_true", help="omit the VCMA variants")
    sub.add_parser("selftest", parents=[common], help="fast invariant checks")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.workers is not None:
            cfg.set("workers", args.workers)
        if args.seed is not None:
            cfg.set("seed", args.seed)
        cfg.validate()
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    if args.command == "velocity-sweep":
        return cmd_velocity_sweep(cfg, out)
    if args.command == "switching-sweep":
        return cmd_switching_sweep(cfg, out)
    if args.command == "link":
        return cmd_link(cfg, out, args.pattern)
    if args.command == "energy":
        return cmd_energy(cfg, out, args.no_vcma)
    return cmd_selftest(cfg, cfg["seed"])


if __name__ == "__main__":
    sys.exit(main())
