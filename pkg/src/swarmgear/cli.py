"""Command-line entry point.

Exit codes: 0 success, 2 config error, 3 infeasible scenario, 4 divergence.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis
from .config import ConfigError, apply_overrides, build_config, config_hash, load_file
from .controllers import SimulationDiverged
from .gait import GaitType, InfeasibleGait, make_plan, type1_foot_trajectory
from .impedance import ImpedanceError
from .kinematics import KinematicsError
from .sim import TrajectoryLog, leader_reference, run_simulation
from .topology import TopologyError

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_DIVERGED = 0, 2, 3, 4


def _say(args, msg):
    if not args.quiet:
        print(msg)


def _resolve(args, path=None, extra=()):
    raw = load_file(path or args.config[0])
    raw = apply_overrides(raw, list(args.set or ()) + list(extra))
    cfg = build_config(raw, args.seed)
    return raw, cfg, config_hash(raw, cfg.seed)


def _out_path(out_dir: Path, name: str) -> Path:
    p = (out_dir / name).resolve()
    if out_dir.resolve() not in p.parents:
        raise ConfigError(f"output name {name!r} would write outside the output directory")
    return p


def _write_all(files: dict):
    """Write every ``{path: text}`` via temp files so a failure leaves nothing partial."""
    staged = []
    try:
        for path, text in files.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


def _simulate(cfg, digest):
    header = f"config_sha256={digest} seed={cfg.seed}"
    log = run_simulation(cfg, header=header)
    report = analysis.swarm_report(log)
    report = {"_provenance": header, **report}
    return log, report


def cmd_run(args):
    raw, cfg, digest = _resolve(args)
    out = Path(args.out)
    traj = _out_path(out, raw["output"]["trajectory"])
    metrics = _out_path(out, raw["output"]["metrics"])
    log, report = _simulate(cfg, digest)
    _write_all({traj: log.to_csv(), metrics: analysis.report_json(report) + "\n"})
    _say(args, analysis.rmse_table(report).rstrip())
    _say(args, f"wrote {traj} and {metrics}")


def cmd_validate(args):
    _, cfg, digest = _resolve(args)
    _say(args, f"ok config_sha256={digest}")


VARIANTS = {
    "star": ["controller.kind=impedance", "controller.topology=star"],
    "ring": ["controller.kind=impedance", "controller.topology=ring"],
    "tree": ["controller.kind=impedance", "controller.topology=tree"],
    "apf": ["controller.kind=apf"],
    "hybrid": ["controller.kind=hybrid"],
}


def _scenarios_for_compare(args):
    if args.variants:
        names = [v.strip() for v in args.variants.split(",") if v.strip()]
        unknown = [n for n in names if n not in VARIANTS]
        if unknown:
            raise ConfigError(f"unknown variant(s) {unknown}; choose from {sorted(VARIANTS)}")
        return [(n, *_resolve(args, args.config[0], VARIANTS[n])) for n in names]
    out = []
    for path in args.config:
        raw, cfg, digest = _resolve(args, path)
        out.append((raw["name"], raw, cfg, digest))
    return out


def _unique(names):
    seen = {}
    result = []
    for n in names:
        seen[n] = seen.get(n, 0) + 1
        result.append(n if seen[n] == 1 else f"{n}#{seen[n]}")
    return result


def cmd_compare(args):
    scenarios = _scenarios_for_compare(args)
    if len(scenarios) < 2:
        raise ConfigError("compare needs at least two scenarios")
    refs = [leader_reference(cfg)[1] for _, _, cfg, _ in scenarios]
    for (name, *_), ref in zip(scenarios[1:], refs[1:]):
        if ref.shape != refs[0].shape or not np.array_equal(ref, refs[0]):
            raise ConfigError(f"scenario {name!r} uses a different leader reference path")
    names = _unique([s[0] for s in scenarios])
    summaries, digests = {}, {}
    for name, (_, _, cfg, digest) in zip(names, scenarios):
        log = run_simulation(cfg)
        summaries[name] = analysis.follower_summary(log)
        digests[name] = digest
    header = "config_sha256=" + ",".join(f"{n}:{d}" for n, d in digests.items())
    text = (f"# {header}\n" + analysis.error_table(summaries) + "\n"
            + analysis.velocity_table(summaries))
    doc = {"_provenance": header, "scenarios": summaries}
    out = Path(args.out)
    _write_all({_out_path(out, "comparison.txt"): text,
                _out_path(out, "comparison.json"): json.dumps(doc, indent=2) + "\n"})
    _say(args, text.rstrip())


def _sweep_one(job):
    idx, raw, cfg, digest = job
    log, report = _simulate(cfg, digest)
    return idx, log.to_csv(), analysis.report_json(report) + "\n", analysis.follower_summary(log)


def cmd_sweep(args):
    if not args.vary:
        raise ConfigError("sweep needs at least one --vary key=v1,v2,...")
    axes = []
    for item in args.vary:
        if "=" not in item:
            raise ConfigError(f"--vary '{item}' is not of the form key=v1,v2,...")
        key, values = item.split("=", 1)
        axes.append([f"{key.strip()}={v.strip()}" for v in values.split(",") if v.strip()])
    jobs = []
    for idx, combo in enumerate(itertools.product(*axes)):
        raw, cfg, digest = _resolve(args, extra=combo)
        jobs.append((idx, raw, cfg, digest))
    labels = {idx: " ".join(combo) for idx, combo in enumerate(itertools.product(*axes))}
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    out = Path(args.out)
    files, summaries = {}, {}
    for idx, csv_text, json_text, summary in sorted(results, key=lambda r: r[0]):
        sub = f"scenario_{idx:03d}"
        raw = jobs[idx][1]
        files[_out_path(out, f"{sub}/{raw['output']['trajectory']}")] = csv_text
        files[_out_path(out, f"{sub}/{raw['output']['metrics']}")] = json_text
        summaries[labels[idx]] = summary
    header = "config_sha256=" + ",".join(j[3] for j in jobs)
    text = f"# {header}\n" + analysis.error_table(summaries) + "\n" + analysis.velocity_table(summaries)
    files[_out_path(out, "sweep.txt")] = text
    files[_out_path(out, "sweep.json")] = json.dumps(
        {"_provenance": header, "scenarios": summaries}, indent=2) + "\n"
    _write_all(files)
    _say(args, text.rstrip())


def cmd_gait_trace(args):
    raw, cfg, digest = _resolve(args)
    header = f"config_sha256={digest}"
    plan = make_plan(cfg.geometry, cfg.gait)
    out = Path(args.out)
    files = {_out_path(out, "gait_schedule.csv"): plan.to_csv(header_comment=header)}
    lines = [f"# {header}", "time_s,leg_id,x_m,y_m,z_m"]
    for k, t in enumerate(plan.times):
        for leg, name in enumerate(("FL", "FR", "RL", "RR")):
            x, y, z = plan.feet[k, leg]
            lines.append(f"{t:.6f},{name},{x:.9f},{y:.9f},{z:.9f}")
    files[_out_path(out, "feet_world.csv")] = "\n".join(lines) + "\n"
    if cfg.gait.gait_type is GaitType.TYPE1:
        n = args.samples
        rows = [f"# {header}", "phase,x_m,y_m"]
        for i in range(n + 1):
            ph = i / n
            p = type1_foot_trajectory(cfg.geometry, cfg.gait, ph)
            rows.append(f"{ph:.6f},{p.x:.9f},{p.y:.9f}")
        files[_out_path(out, "foot_path.csv")] = "\n".join(rows) + "\n"
    _write_all(files)
    _say(args, f"{cfg.gait.gait_type.value}: {len(plan)} ticks, "
               f"displacement {plan.displacement:.4f} m, wrote {len(files)} files to {out}")


def cmd_analyze(args):
    log_path = Path(args.log)
    try:
        text = log_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read log {log_path}: {exc.strerror}") from None
    try:
        log = TrajectoryLog.from_csv(text)
        report = analysis.swarm_report(log)
    except (ValueError, analysis.AnalysisError) as exc:
        raise ConfigError(f"{log_path}: {exc}") from None
    header = log.header or f"source={log_path.name}"
    report = {"_provenance": header, **report}
    table = f"# {header}\n" + analysis.rmse_table(report)
    out = Path(args.out)
    _write_all({_out_path(out, "metrics.json"): analysis.report_json(report) + "\n",
                _out_path(out, "metrics.txt"): table})
    _say(args, table.rstrip())


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", action="append", required=True,
                        help="scenario YAML file (repeat for compare)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config entry, e.g. impedance.K=20.88")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="swarmgear", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    sub.add_parser("run", parents=[common], help="simulate one scenario")
    sub.add_parser("validate-config", parents=[common], help="check a config file")
    p = sub.add_parser("compare", parents=[common], help="compare scenarios on one path")
    p.add_argument("--variants", help="comma list from star,ring,tree,apf,hybrid applied to one config")
    p = sub.add_parser("sweep", parents=[common], help="cartesian parameter sweep")
    p.add_argument("--vary", action="append", metavar="KEY=V1,V2", help="swept key and values")
    p.add_argument("--jobs", type=int, default=1)
    p = sub.add_parser("gait-trace", parents=[common], help="export gait schedule and foot paths")
    p.add_argument("--samples", type=int, default=400, help="dense samples of the Type 1 foot path")
    p = sub.add_parser("analyze", help="compute metrics from an existing trajectory CSV")
    p.add_argument("--log", required=True, help="trajectory CSV written by 'run'")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--quiet", action="store_true")
    return parser


COMMANDS = {
    "run": cmd_run, "validate-config": cmd_validate, "compare": cmd_compare,
    "sweep": cmd_sweep, "gait-trace": cmd_gait_trace, "analyze": cmd_analyze,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.verb](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleGait, KinematicsError, TopologyError, ImpedanceError) as exc:
        constraint = getattr(exc, "constraint", None)
        extra = f" [violated: {constraint}]" if constraint else ""
        print(f"infeasible scenario: {exc}{extra}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SimulationDiverged as exc:
        print(f"simulation diverged: {exc} (tick {exc.tick})", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
