"""Tracking-error and velocity metrics over trajectory logs."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .sim import TrajectoryLog
from .topology import LEADER


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class PathMetrics:
    mean_err_x: float
    mean_err_y: float
    max_err_x: float
    max_err_y: float
    rmse: float
    max_err: float
    crosstrack_mean: float
    crosstrack_max: float
    mean_speed: float
    max_speed: float
    yaw_std: float | None = None  # degrees, leader only
    samples: int = 0

    def to_dict(self):
        return asdict(self)


def _series(log: TrajectoryLog, agent: str):
    if len(log) == 0:
        raise AnalysisError("trajectory log is empty")
    return log.agent(agent)


def per_axis_error(log: TrajectoryLog, agent: str):
    """Mean and max of ``|actual - reference|`` on x and y."""
    pos, ref = _series(log, agent)
    err = np.abs(pos[:, :2] - ref[:, :2])
    return (float(err[:, 0].mean()), float(err[:, 1].mean()),
            float(err[:, 0].max()), float(err[:, 1].max()))


def crosstrack(log: TrajectoryLog, agent: str, reference_line=None):
    """Perpendicular distance of each XY sample from a straight reference line.

    ``reference_line`` is ``(start, end)``; by default the agent's own
    reference from first to last sample is used.
    """
    pos, ref = _series(log, agent)
    if reference_line is None:
        a, b = ref[0, :2], ref[-1, :2]
    else:
        a, b = (np.asarray(p, float)[:2] for p in reference_line)
    d = b - a
    length = math.hypot(d[0], d[1])
    if length < 1e-12:
        raise AnalysisError("reference line has zero length")
    rel = pos[:, :2] - a
    dist = np.abs(rel[:, 0] * d[1] - rel[:, 1] * d[0]) / length
    return float(dist.mean()), float(dist.max())


def rmse_and_max(log: TrajectoryLog, agent: str):
    pos, ref = _series(log, agent)
    e = np.linalg.norm(pos - ref, axis=1)
    return float(np.sqrt(np.mean(e * e))), float(e.max())


def pooled_rmse(log: TrajectoryLog, agents):
    """RMSE over all samples of several agents taken together."""
    if len(log) == 0:
        raise AnalysisError("trajectory log is empty")
    sq = []
    for a in agents:
        pos, ref = log.agent(a)
        sq.append(np.sum((pos - ref) ** 2, axis=1))
    sq = np.concatenate(sq)
    return float(np.sqrt(sq.mean()))


def velocity_stats(log: TrajectoryLog, agent: str):
    """Planar speed from finite differences of logged positions."""
    pos, _ = _series(log, agent)
    if len(pos) < 2:
        raise AnalysisError("need at least two samples for velocity statistics")
    dt = np.diff(log.times)
    speed = np.hypot(*np.diff(pos[:, :2], axis=0).T) / dt
    return float(speed.mean()), float(speed.max())


def yaw_std(log: TrajectoryLog, agent: str = LEADER) -> float:
    i = log.index(agent)
    return float(np.degrees(np.std(log.yaw[:, i])))


def path_metrics(log: TrajectoryLog, agent: str, reference_line=None) -> PathMetrics:
    mx, my, Mx, My = per_axis_error(log, agent)
    rmse, mxe = rmse_and_max(log, agent)
    try:
        ct_mean, ct_max = crosstrack(log, agent, reference_line)
    except AnalysisError:
        ct_mean = ct_max = float("nan")
    if len(log) >= 2:
        v_mean, v_max = velocity_stats(log, agent)
    else:
        v_mean = v_max = 0.0
    return PathMetrics(mx, my, Mx, My, rmse, mxe, ct_mean, ct_max, v_mean, v_max,
                       yaw_std(log, agent) if agent == LEADER else None, len(log))


def swarm_report(log: TrajectoryLog, reference_line=None) -> dict:
    """Per-agent metrics plus pooled rows for the followers and the whole swarm."""
    agents = {a: path_metrics(log, a, reference_line).to_dict() for a in log.agent_ids}
    followers = log.followers
    summary = {
        "followers_overall": {
            "rmse": pooled_rmse(log, followers) if followers else float("nan"),
            "max_err": max((agents[f]["max_err"] for f in followers), default=float("nan")),
            "mean_speed": float(np.mean([agents[f]["mean_speed"] for f in followers]))
            if followers else float("nan"),
        },
        "overall": {
            "rmse": pooled_rmse(log, log.agent_ids),
            "max_err": max(a["max_err"] for a in agents.values()),
        },
    }
    return {"agents": agents, **summary}


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=True)


def follower_summary(log: TrajectoryLog) -> dict:
    """Follower-averaged metrics for one scenario (one row of a comparison table)."""
    rows = [path_metrics(log, f) for f in log.followers]
    if not rows:
        raise AnalysisError("log has no followers")
    mean = lambda key: float(np.mean([getattr(r, key) for r in rows]))
    peak = lambda key: float(np.max([getattr(r, key) for r in rows]))
    return {
        "mean_err_x": mean("mean_err_x"), "mean_err_y": mean("mean_err_y"),
        "max_err_x": peak("max_err_x"), "max_err_y": peak("max_err_y"),
        "rmse": pooled_rmse(log, log.followers), "max_err": peak("max_err"),
        "mean_speed": mean("mean_speed"), "max_speed": peak("max_speed"),
    }


def _table(headers, rows):
    cells = [headers] + [[name] + [f"{v:.3f}" for v in vals] for name, vals in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    line = lambda r: " | ".join(c.ljust(w) if i == 0 else c.rjust(w)
                                for i, (c, w) in enumerate(zip(r, widths)))
    sep = "-+-".join("-" * w for w in widths)
    return "\n".join([line(cells[0]), sep] + [line(r) for r in cells[1:]]) + "\n"


def error_table(summaries: dict) -> str:
    """Mean/max per-axis error per scenario."""
    rows = [(name, (s["mean_err_x"], s["mean_err_y"], s["max_err_x"], s["max_err_y"]))
            for name, s in summaries.items()]
    return _table(["scenario", "mean_x_m", "mean_y_m", "max_x_m", "max_y_m"], rows)


def velocity_table(summaries: dict) -> str:
    rows = [(name, (s["max_speed"], s["mean_speed"])) for name, s in summaries.items()]
    return _table(["scenario", "max_v_mps", "mean_v_mps"], rows)


def rmse_table(report: dict) -> str:
    """RMSE and max error per agent, followers overall and overall."""
    rows = [(a, (m["rmse"], m["max_err"])) for a, m in report["agents"].items()]
    rows.append(("followers overall", (report["followers_overall"]["rmse"],
                                       report["followers_overall"]["max_err"])))
    rows.append(("overall", (report["overall"]["rmse"], report["overall"]["max_err"])))
    return _table(["agent", "rmse_m", "max_err_m"], rows)
