"""Command-line front end.

    detumble simulate --config run.toml --out telemetry.csv
    detumble sweep    --config sweep.toml --out sweep.csv --threads 4
    detumble check    --config run.toml [--out report.json]
    detumble portrait --config run.toml --out portrait.csv

Exit codes: 0 success / entry recommended, 1 configuration or validation
error, 2 numerical abort, 3 entry refused by ``check``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, RunSpec
from .simharness import (
    Horizon,
    SimulationAborted,
    Telemetry,
    run_detumble,
    sweep_1d,
    sweep_2d,
)
from .stability import bdot_phase_acceleration, classify_equilibria, entry_check

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ABORT = 2
EXIT_REFUSED = 3

TELEMETRY_COLUMNS = [
    "t", "omega_x", "omega_y", "omega_z", "omega_norm",
    "b_x", "b_y", "b_z", "m_x", "m_y", "m_z",
    "torque_x", "torque_y", "torque_z", "energy",
]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def telemetry_rows(tel: Telemetry):
    for k in range(len(tel)):
        yield [tel.t[k], *tel.omega[k], np.linalg.norm(tel.omega[k]), *tel.b_body[k],
               *tel.moment[k], *tel.torque[k], tel.energy[k]]


def write_csv(path: Optional[Path], header: Sequence[str], rows, trailer: Optional[str] = None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    if trailer:
        buf.write(trailer + "\n")
    if path is None:
        sys.stdout.write(buf.getvalue())
    else:
        path.write_text(buf.getvalue(), encoding="utf-8")


def cmd_simulate(spec: RunSpec, out: Optional[Path], seed: Optional[int] = None) -> int:
    cfg = spec.sim_config(seed)
    try:
        tel = run_detumble(cfg)
    except SimulationAborted as exc:
        write_csv(out, TELEMETRY_COLUMNS, telemetry_rows(exc.telemetry),
                  trailer=f"# ABORTED at step {exc.step} (t={fmt(exc.t)}): {exc.__cause__}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ABORT
    write_csv(out, TELEMETRY_COLUMNS, telemetry_rows(tel))
    w0 = float(np.linalg.norm(tel.omega[0]))
    wf = float(np.linalg.norm(tel.final_omega))
    stream = sys.stdout if out is not None else sys.stderr
    print(f"steps: {len(tel)}", file=stream)
    print(f"initial |omega|: {w0:.9g} rad/s", file=stream)
    print(f"final |omega|: {wf:.9g} rad/s", file=stream)
    print(f"average angular acceleration: {tel.average_angular_acceleration():.9g} rad/s^2", file=stream)
    print(f"energy non-increasing: {'yes' if tel.energy_monotone() else 'no'}"
          f" ({tel.energy_violations()} increasing steps)", file=stream)
    return EXIT_OK


def cmd_sweep(spec: RunSpec, out: Optional[Path], threads: int = 1, seed: Optional[int] = None) -> int:
    base = spec.sim_config(seed)
    axis1, values1 = spec.sweep_axis(1)
    second = spec.sweep_axis(2)
    horizon = spec.horizon()
    measured = "delta_omega" if horizon is Horizon.ONE_INTERVAL else "avg_angular_acceleration"
    if second is None:
        rows = sweep_1d(base, axis1, values1, horizon, threads)
        header = [axis1.value, measured]
    else:
        axis2, values2 = second
        if axis2 is axis1:
            spec.fail("sweep.axis2", "must differ from sweep.axis1")
        rows = sweep_2d(base, axis1, axis2, values1, values2, horizon, threads)
        header = [axis1.value, axis2.value, measured]
    failed = [r for r in rows if r.error]
    if failed:
        header = header + ["error"]
        table = [[*r.values, r.measured, r.error or ""] for r in rows]
        for r in failed:
            print(f"warning: row {r.values}: {r.error}", file=sys.stderr)
    else:
        table = [[*r.values, r.measured] for r in rows]
    write_csv(out, header, table)
    return EXIT_OK


def cmd_check(spec: RunSpec, out: Optional[Path]) -> int:
    body = spec.body()
    controller = spec.controller(body)
    omega = spec.initial_omega()
    report = entry_check(omega, controller, body)

    lines = [
        f"algorithm: {controller.algorithm.value}   k_c = {controller.k_c:.6g}   dt = {controller.dt:.6g} s",
        f"|omega| = {report.omega_norm:.6g} rad/s ({math.degrees(report.omega_norm):.6g} deg/s)",
        f"Type I   k_c*dt/I_min - 2 = {report.type1_margin:+.6g}   "
        f"{'VIOLATED' if report.type1_unstable else 'ok'}",
    ]
    if report.type2_applies:
        lines.append(f"Type II  max dt = pi/|omega| = {report.type2_max_dt:.6g} s   "
                     f"{'VIOLATED' if report.type2_violated else 'ok'}")
    else:
        lines.append(f"Type II  max dt = {report.type2_max_dt:.6g} s   not applicable (omega_cross_b)")
    lines.append(f"Type III |omega|*dt = {report.type3_angle:.6g} rad, predicted change "
                 f"{report.type3_delta_omega_pred:+.6g} rad/s   "
                 f"{'VIOLATED' if report.type3_violated else 'ok'}")
    lines.append("entry: " + ("RECOMMENDED" if report.recommended_entry else "REFUSED"))
    lines.extend(f"  - {r}" for r in report.reasons)
    print("\n".join(lines))

    payload = json.dumps(report.as_dict(), sort_keys=True, default=_json_default)
    if out is not None:
        out.write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    return EXIT_OK if report.recommended_entry else EXIT_REFUSED


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(type(x).__name__)


def equilibria_path(out: Path) -> Path:
    return out.with_name(out.stem + "_equilibria" + (out.suffix or ".csv"))


def cmd_portrait(spec: RunSpec, out: Optional[Path]) -> int:
    body = spec.body()
    controller = spec.controller(body)
    dt = controller.dt
    lo = spec.number("portrait.omega_min", 0.0)
    hi = spec.number("portrait.omega_max", 4.0 * math.pi / dt)
    if not hi > lo:
        spec.fail("portrait.omega_max", "must exceed portrait.omega_min")
    n = spec.integer("portrait.points", 401, minimum=2)
    inertia = spec.number("portrait.inertia", body.j_min, positive=True)
    default_b = [1.0, 0.0, 0.0]
    if spec.get("field.model") in ("static", "planar_rotating") and spec.has("field.b0"):
        default_b = spec.get("field.b0")
    b = spec.vector("portrait.b", 3, default_b)
    if not np.linalg.norm(b) > 0:
        spec.fail("portrait.b", "must be nonzero")

    omega = np.linspace(lo, hi, n)
    accel = bdot_phase_acceleration(omega, dt, controller.k_c, inertia, b)
    write_csv(out, ["omega_z", "omega_z_dot"], zip(omega, accel))

    eq = classify_equilibria(dt, hi)
    rows = sorted([(w, "stable") for w in eq.stable_points if w >= lo]
                  + [(w, "unstable") for w in eq.unstable_points if w >= lo])
    eq_rows = [[w, kind, str(int(round(w * dt / math.pi)))] for w, kind in rows]
    write_csv(equilibria_path(out) if out is not None else None, ["omega", "kind", "n"], eq_rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="detumble", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("simulate", "run one closed-loop detumbling simulation"),
        ("sweep", "sweep one or two parameters"),
        ("check", "evaluate the detumbling entry criteria"),
        ("portrait", "sample the sampled-B-dot phase portrait"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, type=Path, help="TOML run configuration")
        p.add_argument("--out", type=Path, default=None, help="output path (default stdout)")
        p.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
        p.add_argument("--seed", type=int, default=None, help="override sim.seed")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = RunSpec.from_file(args.config)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.command == "simulate":
            return cmd_simulate(spec, args.out, args.seed)
        if args.command == "sweep":
            return cmd_sweep(spec, args.out, args.threads, args.seed)
        if args.command == "check":
            return cmd_check(spec, args.out)
        return cmd_portrait(spec, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
