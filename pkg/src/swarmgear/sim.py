"""Fixed-timestep swarm simulation.

The loop is single threaded and uses no hidden randomness.  The only random
source is the optional disturbance noise, which is seeded from the config.
Identical configs therefore produce bit-identical logs.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .controllers import ApfParams, SimulationDiverged, apf_controller_step, impedance_controller_step
from .gait import GaitParams, GaitType, make_plan
from .impedance import ImpedanceParams, discretize
from .kinematics import LegGeometry
from .topology import LEADER, TopologyKind, build_topology

DEFAULT_OFFSETS = ((-0.6, 0.6, 1.0), (-0.6, -0.6, 1.0), (-1.2, 0.0, 1.0))

LOG_COLUMNS = (
    "t_s", "agent_id", "x_m", "y_m", "z_m", "vx_mps", "vy_mps", "vz_mps",
    "ref_x_m", "ref_y_m", "ref_z_m", "yaw_deg",
)


class LeaderSource(str, enum.Enum):
    SCRIPTED = "scripted"
    GAIT = "gait"


class PathKind(str, enum.Enum):
    SQUARE = "square"
    LINE = "line"
    HOLD = "hold"


class ControllerKind(str, enum.Enum):
    IMPEDANCE = "impedance"
    APF = "apf"
    HYBRID = "hybrid"


@dataclass(frozen=True)
class LeaderSpec:
    source: LeaderSource = LeaderSource.SCRIPTED
    path: PathKind = PathKind.SQUARE
    length: float = 1.0          # square side or line length (m)
    speed: float = 0.18          # scripted speed (m/s)
    heading_deg: float = 0.0     # initial direction of travel
    start_delay: float = 0.0     # leader holds still for this long first (s)

    def __post_init__(self):
        object.__setattr__(self, "source", LeaderSource(self.source))
        object.__setattr__(self, "path", PathKind(self.path))
        if self.length < 0 or self.start_delay < 0:
            raise ValueError("leader.length and leader.start_delay must be non-negative")
        if self.source is LeaderSource.SCRIPTED and self.path is not PathKind.HOLD and not self.speed > 0:
            raise ValueError("leader.speed must be positive for a moving scripted path")


@dataclass(frozen=True)
class ControllerSpec:
    kind: ControllerKind = ControllerKind.IMPEDANCE
    topology: TopologyKind = TopologyKind.STAR
    n_followers: int = 3
    offsets: tuple = DEFAULT_OFFSETS
    # absolute start positions; None places followers on their slots
    initial_positions: tuple | None = None
    # hybrid mode hands over from APF to impedance once every follower is this close
    switch_tolerance: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "kind", ControllerKind(self.kind))
        object.__setattr__(self, "topology", TopologyKind(self.topology))
        offs = tuple(tuple(float(c) for c in o) for o in self.offsets)
        object.__setattr__(self, "offsets", offs)
        if len(offs) != self.n_followers:
            raise ValueError(f"controller.offsets has {len(offs)} entries, "
                             f"expected n_followers={self.n_followers}")
        if any(len(o) != 3 for o in offs):
            raise ValueError("controller.offsets entries must be 3-vectors")
        if self.initial_positions is not None:
            ip = tuple(tuple(float(c) for c in o) for o in self.initial_positions)
            if len(ip) != self.n_followers or any(len(o) != 3 for o in ip):
                raise ValueError("controller.initial_positions must list one 3-vector per follower")
            object.__setattr__(self, "initial_positions", ip)


@dataclass(frozen=True)
class Disturbance:
    """Lateral body sway (and yaw wobble) injected on top of the leader reference."""

    enabled: bool = False
    amplitude: float = 0.02        # m
    frequency: float = 0.5         # Hz
    yaw_amplitude_deg: float = 3.0
    noise_std: float = 0.0         # m, white lateral noise

    def __post_init__(self):
        if self.amplitude < 0 or self.frequency < 0 or self.noise_std < 0:
            raise ValueError("disturbance amplitude, frequency and noise_std must be non-negative")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.025
    duration: float = 10.0
    leader: LeaderSpec = field(default_factory=LeaderSpec)
    controller: ControllerSpec = field(default_factory=ControllerSpec)
    disturbance: Disturbance = field(default_factory=Disturbance)
    impedance: ImpedanceParams = field(default_factory=ImpedanceParams)
    apf: ApfParams = field(default_factory=ApfParams)
    geometry: LegGeometry = field(default_factory=LegGeometry)
    gait: GaitParams = field(default_factory=lambda: GaitParams(gait_type=GaitType.TYPE2, step_length=0.19))
    seed: int = 0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.duration >= 0:
            raise ValueError(f"duration must be non-negative, got {self.duration!r}")

    @property
    def n_ticks(self) -> int:
        return int(math.floor(self.duration / self.dt + 1e-9)) + 1


@dataclass(frozen=True, eq=False)
class TrajectoryLog:
    """Per-tick state of every agent.  Arrays are ``(ticks, agents, ...)``."""

    times: np.ndarray
    agent_ids: tuple
    position: np.ndarray
    velocity: np.ndarray
    reference: np.ndarray
    yaw: np.ndarray
    dt: float
    header: str = ""

    def __len__(self):
        return len(self.times)

    def index(self, agent: str) -> int:
        try:
            return self.agent_ids.index(agent)
        except ValueError:
            raise KeyError(f"agent {agent!r} not in log (have {self.agent_ids})") from None

    @property
    def followers(self):
        return tuple(a for a in self.agent_ids if a != LEADER)

    def agent(self, agent: str):
        i = self.index(agent)
        return self.position[:, i], self.reference[:, i]

    def to_csv(self, fh=None) -> str | None:
        own = fh is None
        out = io.StringIO() if own else fh
        if self.header:
            out.write(f"# {self.header}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        for k, t in enumerate(self.times):
            for i, aid in enumerate(self.agent_ids):
                row = [f"{t:.6f}", aid]
                row += [_fmt(v) for v in self.position[k, i]]
                row += [_fmt(v) for v in self.velocity[k, i]]
                row += [_fmt(v) for v in self.reference[k, i]]
                row.append(_fmt(math.degrees(self.yaw[k, i])))
                w.writerow(row)
        return out.getvalue() if own else None

    @classmethod
    def from_csv(cls, fh) -> "TrajectoryLog":
        text = fh.read() if hasattr(fh, "read") else str(fh)
        lines = text.splitlines()
        header = ""
        while lines and lines[0].startswith("#"):
            header = lines.pop(0)[1:].strip()
        reader = csv.reader(lines)
        try:
            cols = next(reader)
        except StopIteration:
            raise ValueError("empty trajectory log") from None
        if tuple(cols) != LOG_COLUMNS:
            raise ValueError(f"unexpected log columns {cols}; expected {list(LOG_COLUMNS)}")
        rows = [r for r in reader if r]
        if not rows:
            raise ValueError("trajectory log has no samples")
        agents = []
        for r in rows:
            if r[1] in agents:
                break
            agents.append(r[1])
        n_a = len(agents)
        if len(rows) % n_a:
            raise ValueError("trajectory log rows do not form complete ticks")
        try:
            data = np.array([[float(v) for v in (r[0], *r[2:])] for r in rows])
        except ValueError as exc:
            raise ValueError(f"malformed number in trajectory log: {exc}") from None
        if data.shape[1] != len(LOG_COLUMNS) - 1:
            raise ValueError("trajectory log rows have the wrong number of fields")
        for k in range(0, len(rows), n_a):
            if [r[1] for r in rows[k:k + n_a]] != agents:
                raise ValueError(f"agent order changes at row {k + 2}")
        data = data.reshape(-1, n_a, data.shape[1])
        times = data[:, 0, 0]
        dt = float(times[1] - times[0]) if len(times) > 1 else 0.0
        return cls(times, tuple(agents), data[:, :, 1:4], data[:, :, 4:7],
                   data[:, :, 7:10], np.radians(data[:, :, 10]), dt, header)


def _fmt(v) -> str:
    v = float(v)
    if v == 0.0:
        v = 0.0
    return f"{v:.9f}"


# -- leader reference --------------------------------------------------------

def scripted_path(spec: LeaderSpec, times):
    """Leader reference positions (planar, z = 0) for a scripted path."""
    head = math.radians(spec.heading_deg)
    u = np.array([math.cos(head), math.sin(head)])
    n = np.array([-u[1], u[0]])
    if spec.path is PathKind.HOLD or spec.length == 0:
        corners = [np.zeros(2)]
    elif spec.path is PathKind.LINE:
        corners = [np.zeros(2), spec.length * u]
    else:
        L = spec.length
        corners = [np.zeros(2), L * u, L * (u + n), L * n, np.zeros(2)]
    corners = np.array(corners)
    seg = np.linalg.norm(np.diff(corners, axis=0), axis=1) if len(corners) > 1 else np.zeros(0)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    t_move = np.clip(np.asarray(times, float) - spec.start_delay, 0.0, None)
    s = np.minimum(t_move * spec.speed, cum[-1]) if len(seg) else np.zeros_like(t_move)
    xy = np.column_stack([np.interp(s, cum, corners[:, 0]), np.interp(s, cum, corners[:, 1])])
    return np.column_stack([xy, np.zeros(len(xy))])


def gait_path(cfg: SimConfig, times):
    """Leader reference from the gait planner: enough steps to cover ``leader.length``."""
    gp = cfg.gait
    steps = max(0, math.ceil(cfg.leader.length / gp.step_length - 1e-9))
    plan = make_plan(cfg.geometry, replace(gp, steps=steps))
    t = np.asarray(times, float) - cfg.leader.start_delay
    x = np.interp(t, plan.times, plan.body[:, 0], left=plan.body[0, 0], right=plan.body[-1, 0])
    y = np.interp(t, plan.times, plan.body[:, 1], left=plan.body[0, 1], right=plan.body[-1, 1])
    yaw = np.interp(t, plan.times, plan.body[:, 2], left=0.0, right=plan.body[-1, 2])
    head = math.radians(cfg.leader.heading_deg)
    c, s = math.cos(head), math.sin(head)
    pos = np.column_stack([c * x - s * y, s * x + c * y, np.zeros(len(t))])
    return pos, yaw + head


def leader_reference(cfg: SimConfig):
    times = np.arange(cfg.n_ticks) * cfg.dt
    if cfg.leader.source is LeaderSource.GAIT:
        pos, yaw = gait_path(cfg, times)
    else:
        pos = scripted_path(cfg.leader, times)
        yaw = np.full(len(times), math.radians(cfg.leader.heading_deg))
    return times, pos, yaw


def apply_disturbance(cfg: SimConfig, times, ref, yaw):
    """Leader actual pose: the reference plus sway perpendicular to the path."""
    dist = cfg.disturbance
    if not dist.enabled:
        return ref.copy(), yaw.copy()
    head = np.full(len(times), math.radians(cfg.leader.heading_deg))
    if len(times) > 1:
        d = np.diff(ref[:, :2], axis=0)
        moving = np.hypot(d[:, 0], d[:, 1]) > 1e-12
        ang = np.arctan2(d[:, 1], d[:, 0])
        last = head[0]
        for k in range(len(times) - 1):
            if moving[k]:
                last = ang[k]
            head[k + 1] = last
        head[0] = head[1]
    normal = np.column_stack([-np.sin(head), np.cos(head), np.zeros(len(times))])
    phase = 2.0 * math.pi * dist.frequency * times
    lateral = dist.amplitude * np.sin(phase)
    if dist.noise_std > 0:
        rng = np.random.default_rng(cfg.seed)
        lateral = lateral + rng.normal(0.0, dist.noise_std, len(times))
    actual = ref + lateral[:, None] * normal
    yaw_act = yaw + math.radians(dist.yaw_amplitude_deg) * np.sin(phase)
    return actual, yaw_act


# -- main loop ---------------------------------------------------------------

def _forward_velocity(pos, dt):
    v = np.zeros_like(pos)
    if len(pos) > 1:
        v[:-1] = np.diff(pos, axis=0) / dt
    return v


def run_simulation(cfg: SimConfig, header: str = "") -> TrajectoryLog:
    """Simulate the swarm for ``cfg.duration`` seconds at ``cfg.dt``."""
    times, ref, yaw_ref = leader_reference(cfg)
    lead, lead_yaw = apply_disturbance(cfg, times, ref, yaw_ref)
    v_lead = _forward_velocity(lead, cfg.dt)
    ctrl = cfg.controller
    graph = build_topology(ctrl.topology, ctrl.n_followers, ctrl.offsets)
    offsets = np.array(ctrl.offsets)
    n, N = len(times), ctrl.n_followers

    pos = np.zeros((n, N + 1, 3))
    vel = np.zeros((n, N + 1, 3))
    refs = np.zeros((n, N + 1, 3))
    yaw = np.zeros((n, N + 1))
    pos[:, 0], vel[:, 0], refs[:, 0], yaw[:, 0] = lead, v_lead, ref, lead_yaw
    refs[:, 1:] = ref[:, None, :] + offsets[None, :, :]

    if ctrl.initial_positions is None:
        p = lead[0] + offsets
    else:
        p = np.array(ctrl.initial_positions)

    use_impedance = ctrl.kind is ControllerKind.IMPEDANCE
    disc = discretize(cfg.impedance, cfg.dt) if ctrl.kind is not ControllerKind.APF else None
    delta = lead[0] + offsets - p
    delta_v = np.zeros_like(delta)

    for k in range(n):
        slot = lead[k] + offsets
        if use_impedance:
            p = slot - delta
            pos[k, 1:] = p
            vel[k, 1:] = v_lead[k] - delta_v
            if k + 1 < n:
                delta, delta_v = impedance_controller_step(
                    graph, delta, delta_v, v_lead[k], disc, positions=p, tick=k)
            continue
        pos[k, 1:] = p
        if ctrl.kind is ControllerKind.HYBRID and np.all(
                np.linalg.norm(slot - p, axis=1) <= ctrl.switch_tolerance):
            # hand over to the impedance links from the current slot error
            use_impedance = True
            delta = slot - p
            delta_v = np.zeros_like(delta)
            vel[k, 1:] = v_lead[k]
            if k + 1 < n:
                delta, delta_v = impedance_controller_step(
                    graph, delta, delta_v, v_lead[k], disc, positions=p, tick=k)
            continue
        p_next, v = apf_controller_step(cfg.apf, p, lead[k], offsets, cfg.dt)
        vel[k, 1:] = v
        p = p_next
        if not np.isfinite(p).all():
            raise SimulationDiverged(f"APF state diverged at tick {k}", k)

    ids = (LEADER,) + graph.followers
    for arr in (times, pos, vel, refs, yaw):
        arr.setflags(write=False)
    return TrajectoryLog(times, ids, pos, vel, refs, yaw, cfg.dt, header)
