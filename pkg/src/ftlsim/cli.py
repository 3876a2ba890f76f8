"""Command line entry point: ``ftlsim {plan,simulate,estimate,antinomy}``.

Exit codes: 0 success, 2 invalid input, 3 runtime/statistical failure,
4 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from pathlib import Path

from . import config as config_mod
from ._backend import BACKEND
from .errors import EstimationError, ValidationError
from .geometry import feasible, v_max, v_min
from .logio import LogFormatError, read_logs, write_logs
from .optics_sim import SIGNALING_MODEL, channel_from_logs, simulate_cycles
from .protocol import RecordedDevice, effective_speed, estimate_reliability, verify_bound
from .relativity import antinomy_scenario

log = logging.getLogger("ftlsim")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4

RELIABILITY_COLUMNS = ["V", "standby_s", "Q_avg", "Q0_avg", "R", "R_ci_low", "R_ci_high", "cycles"]


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue())


def _finite(x):
    return x if x is None or math.isfinite(x) else None


def cmd_plan(cfg, out: Path, args) -> dict:
    cfg.require("geometry")
    g = cfg.geometry
    top, bottom = v_max(g), v_min(g)
    rows = []
    for factor in cfg.plan.r_factors:
        for frac in cfg.plan.i_fractions:
            gi = dataclasses.replace(g, leg_i=frac * g.leg_s, pump_arm_r=factor * g.pump_arm_r)
            rows.append([frac, gi.pump_arm_r, v_max(gi), v_min(gi), feasible(gi)])
    _write_csv(out / "plan_sweep.csv", ["i_over_s", "pump_arm_r", "v_max", "v_min", "feasible"], rows)
    report = {
        "v_max": top,
        "v_max_over_c": top / g.light_speed_c,
        "v_min": bottom,
        "v_min_over_c": bottom / g.light_speed_c,
        "feasible": feasible(g),
        "superluminal_v_min": bottom > g.light_speed_c,
        "detector_delay": g.detector_delay,
    }
    _write_json(out / "plan.json", report)
    return report


def cmd_simulate(cfg, out: Path, args) -> dict:
    cfg.require("geometry", "hypothesis", "schedule")
    cycle = cfg.schedule.cycle()
    logs = simulate_cycles(cfg.geometry, cfg.hypothesis, cycle, cfg.cycles, cfg.master_seed, cfg.workers)
    path = write_logs(out / "alarms.log", logs, cfg.master_seed, cycle.length)
    (out / "run.yaml").write_text(config_mod.dumps(cfg, runtime=False))
    total = sum(len(x) for x in logs)
    return {
        "log": str(path),
        "cycles": len(logs),
        "alarms": total,
        "mean_alarms_per_cycle": total / len(logs) if logs else 0.0,
    }


def cmd_estimate(cfg, out: Path, args) -> dict:
    cfg.require("geometry", "schedule")
    if not cfg.schedule.probe_speeds:
        raise ValidationError("schedule.probe_speeds is empty")
    logs = read_logs(args.logs or out / "alarms.log")
    if not logs:
        raise EstimationError("the alarm log contains no cycles")
    sched, est_cfg = cfg.schedule, cfg.estimate
    r = cfg.geometry.pump_arm_r
    seed = cfg.master_seed
    rows, per_speed = [], []
    device = RecordedDevice(logs)
    for V in sched.probe_speeds:
        entry: dict = {"V": V}
        try:
            est = estimate_reliability(device.logs(sched, V), sched, V, r,
                                       est_cfg.significance, est_cfg.n_boot, seed)
        except EstimationError as exc:
            entry["error"] = str(exc)
            per_speed.append(entry)
            continue
        for lvl in est.trend:
            rows.append([V, lvl.standby, lvl.Q_avg, lvl.Q0_avg, lvl.R, lvl.R_ci_low,
                         lvl.R_ci_high, est.cycles_used])
        entry.update(R=est.R, R_ci_low=est.R_ci_low, R_ci_high=est.R_ci_high)
        try:
            ch = channel_from_logs(logs, r / V, est_cfg.threshold, sched.cycle_length)
            check = verify_bound(ch, est)
            entry["bound"] = {
                "p01": ch.p01, "p11": ch.p11, "ratio": check.ratio,
                "one_minus_R": check.one_minus_R, "margin": check.margin,
                "sigma": check.sigma, "holds": check.holds,
            }
        except (EstimationError, ValidationError) as exc:
            entry["bound"] = {"error": str(exc)}
        per_speed.append(entry)
    if not rows:
        raise EstimationError("R(V) could not be estimated at any probe speed")
    _write_csv(out / "reliability.csv", RELIABILITY_COLUMNS, rows)
    veff = effective_speed(device, sched, r, est_cfg.significance, est_cfg.rel_width,
                           est_cfg.n_boot, seed)
    report = {
        "cycles": len(logs),
        "v_eff": {
            "detectable": veff.detectable,
            "low": veff.low,
            "high": veff.high,
            "bracketed_above": veff.high is not None,
            "relative_width": _finite(veff.relative_width),
        },
        "probes": per_speed,
    }
    _write_json(out / "estimate.json", report)
    return report


def cmd_antinomy(cfg, out: Path, args) -> dict:
    cfg.require("channel")
    ch = cfg.channel
    c = cfg.geometry.light_speed_c if cfg.geometry is not None else 1.0
    sc = antinomy_scenario(ch.channel, ch.prior, ch.signal_speed, c, ch.distance,
                           ch.epsilon, ch.max_steps)
    chain = sc.chain
    _write_csv(out / "antinomy_chain.csv", ["step", "p"],
               [[k, p] for k, p in enumerate(chain.iterates.tolist())])

    def ev(e):
        return {"position": e.position, "time": e.time}

    report = {
        "prior": ch.prior,
        "p01": ch.channel.p01,
        "p11": ch.channel.p11,
        "first_iterate": float(chain.iterates[1]) if len(chain) > 1 else chain.final,
        "final": chain.final,
        "steps": chain.steps,
        "converged": chain.converged,
        "fixed_point": ch.channel.p01 == ch.channel.p11,
        "vacuous": chain.vacuous,
        "signal_speed": sc.signal_speed,
        "reversal_beta": sc.reversal_boost.beta,
        "frame_beta": sc.frame.beta,
        "events": {
            "start": ev(sc.start), "send": ev(sc.send), "receive": ev(sc.receive),
            "start_boosted": ev(sc.start_p), "send_boosted": ev(sc.send_p),
            "receive_boosted": ev(sc.receive_p),
        },
        "closes": sc.closes,
    }
    _write_json(out / "antinomy.json", report)
    return report


COMMANDS = {
    "plan": cmd_plan,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "antinomy": cmd_antinomy,
}


def _summary(name: str, report: dict) -> str:
    if name == "plan":
        return (f"v_max = {report['v_max_over_c']:.10g} c, v_min = {report['v_min_over_c']:.10g} c, "
                f"feasible = {report['feasible']}")
    if name == "simulate":
        return (f"wrote {report['cycles']} cycles ({report['alarms']} alarms) to {report['log']}")
    if name == "estimate":
        lines = []
        for p in report["probes"]:
            if "R" in p:
                lines.append(f"V = {p['V']:.6g}: R = {p['R']:+.4f} "
                             f"[{p['R_ci_low']:+.4f}, {p['R_ci_high']:+.4f}]")
            else:
                lines.append(f"V = {p['V']:.6g}: {p['error']}")
        v = report["v_eff"]
        if not v["detectable"]:
            lines.append("v_eff undetectable: no probe speed beats accident")
        elif v["high"] is None:
            lines.append(f"v_eff >= {v['low']:.6g} (unbracketed above)")
        else:
            lines.append(f"v_eff in [{v['low']:.6g}, {v['high']:.6g}]")
        return "\n".join(lines)
    if name == "antinomy":
        head = "fixed point, zero progress" if report["fixed_point"] else (
            f"reached {report['final']!r} after {report['steps']} steps")
        return (f"p2 = {report['first_iterate']!r}; {head}; boosted receive time "
                f"{report['events']['receive_boosted']['time']:.6g}")
    return json.dumps(report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ftlsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--out", help=f"output directory (overrides ${config_mod.OUTPUT_ENV})")
        p.add_argument("--cycles", type=int, help="override the number of cycles")
        p.add_argument("--quiet", action="store_true")
        if name == "simulate":
            p.add_argument("--workers", type=int, help="parallel simulation threads")
        if name == "estimate":
            p.add_argument("--logs", help="alarm log (default: <out>/alarms.log)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_mod.load(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        if args.cycles is not None:
            overrides["cycles"] = args.cycles
        if getattr(args, "workers", None) is not None:
            overrides["workers"] = args.workers
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
        out = cfg.output_path(args.out)
        log.debug("kernel backend: %s", BACKEND)
        report = COMMANDS[args.command](cfg, out, args)
    except ValidationError as exc:
        print(f"ftlsim: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except EstimationError as exc:
        print(f"ftlsim: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, LogFormatError) as exc:
        print(f"ftlsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not args.quiet:
        print(_summary(args.command, report))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
