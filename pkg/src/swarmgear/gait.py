"""Gait generation for the legged leader.

Two gaits are produced as time-indexed joint schedules:

* Type 1: diagonal leg pairs trace a closed foot path.  The stance part is
  a straight ground line and the swing part is an Archimedean-spiral arc.
  The pairs are half a cycle apart.
* Type 2: one diagonal pair is planted vertically and the robot pushes itself
  forward by yawing those shoulders.  The upperarm/forearm compensation
  angle follows :func:`xi_of_alpha`.

Body motion is rigid and no-slip.  Stance feet never move in the world frame.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .kinematics import (
    JointAngles,
    KinematicsError,
    LegGeometry,
    PlanarPoint,
    UnreachableTarget,
    inverse_kinematics,
    robot_height,
    standing_angles,
    stride_extreme,
)

LEGS = ("FL", "FR", "RL", "RR")
# +1 for front legs, -1 for hind legs (hind trajectories are mirrored).
FACING = np.array([1.0, 1.0, -1.0, -1.0])
# +1 for left legs, -1 for right legs.
SIDE = np.array([1.0, -1.0, 1.0, -1.0])
PAIR_A = (0, 3)  # FL, RR
PAIR_B = (1, 2)  # FR, RL

ALPHA_MAX_LIMIT = math.radians(60.0)

CSV_COLUMNS = (
    "time_s", "leg_id", "alpha_deg", "beta_deg", "gamma_deg",
    "stance_flag", "body_x_m", "body_y_m", "body_yaw_deg",
)


class GaitType(str, enum.Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"


class InfeasibleGait(ValueError):
    """The requested gait violates a geometric or actuator constraint."""

    def __init__(self, message, constraint=None):
        super().__init__(message)
        self.constraint = constraint


@dataclass(frozen=True)
class GaitParams:
    gait_type: GaitType = GaitType.TYPE1
    beta_init: float = math.radians(45.0)
    step_length: float = 0.10
    servo_angular_speed: float = math.radians(45.0)
    command_period: float = 0.025
    swing_height: float = 0.03
    steps: int = 1
    joint_limit: float = math.pi
    pause_ticks: int = 1
    # half length / half width of the base, hip to body centre (m)
    hip_offset: tuple = (0.10, 0.10)

    def __post_init__(self):
        object.__setattr__(self, "gait_type", GaitType(self.gait_type))
        object.__setattr__(self, "hip_offset", tuple(float(v) for v in self.hip_offset))
        if not self.command_period > 0:
            raise InfeasibleGait("command_period must be positive", "command_period")
        if not self.servo_angular_speed > 0:
            raise InfeasibleGait("servo_angular_speed must be positive", "servo_angular_speed")
        if not self.step_length > 0:
            raise InfeasibleGait("step_length must be positive", "step_length")
        if not self.swing_height > 0:
            raise InfeasibleGait("swing_height must be positive", "swing_height")
        if self.steps < 0 or int(self.steps) != self.steps:
            raise InfeasibleGait("steps must be a non-negative integer", "steps")
        if self.pause_ticks < 0:
            raise InfeasibleGait("pause_ticks must be non-negative", "pause_ticks")

    @property
    def max_joint_step(self) -> float:
        """Largest joint change allowed between two ticks."""
        return self.servo_angular_speed * self.command_period


def check_step_length(geom: LegGeometry, params: GaitParams):
    H = robot_height(geom, params.beta_init)
    x0 = stride_extreme(geom, H)
    if params.step_length > 2.0 * x0:
        raise InfeasibleGait(
            f"step_length {params.step_length:.4g} m exceeds 2*x0 = {2 * x0:.4g} m "
            f"for beta_init={math.degrees(params.beta_init):.4g} deg",
            "step_length <= 2*x0",
        )
    return H, x0


# -- equations of the shoulder-pivot gait -----------------------------------

def horizontal_shift(alpha_sh: float, l_p: float) -> float:
    """Lateral base shift caused by yawing two opposite stance shoulders."""
    if not l_p > 0:
        raise ValueError(f"l_p must be positive, got {l_p!r}")
    return 2.0 * (1.0 - math.cos(alpha_sh)) * l_p


def vertical_compensation(beta_init: float, xi: float, l_ua: float) -> float:
    """Horizontal reach given up when the upperarm tilts down by ``xi``."""
    if beta_init + xi > math.pi / 2 + 1e-15:
        raise KinematicsError(
            f"beta_init + xi = {math.degrees(beta_init + xi):.6g} deg exceeds 90 deg"
        )
    return (math.cos(beta_init) - math.cos(beta_init + xi)) * l_ua


def xi_of_alpha(alpha_sh: float, beta_init: float) -> float:
    """Compensation angle that cancels the shift for a shoulder yaw."""
    if not 0.0 <= alpha_sh <= ALPHA_MAX_LIMIT + 1e-15:
        raise KinematicsError(
            f"alpha_sh must lie in [0, 60] deg, got {math.degrees(alpha_sh):.6g}"
        )
    if alpha_sh == 0.0:
        return 0.0  # acos(cos(b)) - b can be off by one ulp
    arg = (2.0 * math.cos(alpha_sh) - 1.0) * math.cos(beta_init)
    if abs(arg) > 1.0:
        raise KinematicsError(f"arccos argument {arg!r} outside [-1, 1]")
    return math.acos(arg) - beta_init


def stance_radius(geom: LegGeometry, beta_init: float) -> float:
    """Horizontal distance from the shoulder yaw axis to a vertically planted foot."""
    return geom.l_sh + geom.l_ua * math.cos(beta_init)


def alpha_for_step(geom: LegGeometry, beta_init: float, step_length: float) -> float:
    """Shoulder sweep whose stance-arc chord equals ``step_length``."""
    R = stance_radius(geom, beta_init)
    ratio = step_length / (2.0 * R)
    if not 0.0 <= ratio <= 1.0:
        raise InfeasibleGait(
            f"step_length {step_length:.4g} m exceeds the stance-arc diameter {2 * R:.4g} m",
            "step_length <= 2*R",
        )
    alpha = 2.0 * math.asin(ratio)
    if alpha > ALPHA_MAX_LIMIT:
        raise InfeasibleGait(
            f"step_length {step_length:.4g} m needs a shoulder sweep of "
            f"{math.degrees(alpha):.4g} deg (> 60 deg)",
            "alpha_max <= 60 deg",
        )
    return alpha


# -- Type 1 foot path --------------------------------------------------------

@dataclass(frozen=True)
class _Spiral:
    """Swing arc ``r = a + b*theta`` about ``pole``, theta from ``theta_lift`` down."""

    pole: tuple
    a: float
    b: float
    theta_lift: float
    theta_land: float
    length: float

    def radius(self, theta):
        return self.a + self.b * theta

    def point(self, theta):
        r = self.radius(theta)
        return self.pole[0] + r * math.cos(theta), self.pole[1] + r * math.sin(theta)

    def arc_from_lift(self, theta):
        # arc length between theta_lift and theta (theta <= theta_lift)
        return _spiral_arc(self.a, self.b, theta, self.theta_lift)

    def theta_at(self, arc):
        if arc <= 0.0:
            return self.theta_lift
        if arc >= self.length:
            return self.theta_land
        return brentq(lambda th: self.arc_from_lift(th) - arc,
                      self.theta_land, self.theta_lift, xtol=1e-15, rtol=1e-15)


def _spiral_arc(a, b, th0, th1):
    # Arc length of r = a + b*th between th0 < th1; ds = sqrt(r^2 + b^2) dth.
    if b == 0.0:
        return abs(a) * (th1 - th0)

    def prim(th):
        r = a + b * th
        return (r * math.hypot(r, b) + b * b * math.asinh(r / abs(b))) / (2.0 * b)

    return abs(prim(th1) - prim(th0))


def _make_spiral(s, H, depth):
    # Pole a quarter step ahead of lift-off, ``depth`` below the ground line.
    lift = (-s / 2.0, -H)
    land = (s / 2.0, -H)
    pole = (-s / 4.0, -H - depth)
    r_lift = math.hypot(lift[0] - pole[0], lift[1] - pole[1])
    r_land = math.hypot(land[0] - pole[0], land[1] - pole[1])
    th_lift = math.atan2(lift[1] - pole[1], lift[0] - pole[0])
    th_land = math.atan2(land[1] - pole[1], land[0] - pole[0])
    b = (r_lift - r_land) / (th_lift - th_land)
    a = r_lift - b * th_lift
    length = _spiral_arc(a, b, th_land, th_lift)
    return _Spiral(pole, a, b, th_lift, th_land, length)


def _apex(sp: _Spiral, ground):
    res = minimize_scalar(lambda th: -sp.point(th)[1], bounds=(sp.theta_land, sp.theta_lift),
                          method="bounded", options={"xatol": 1e-13})
    return -res.fun - ground


@lru_cache(maxsize=64)
def _swing_spiral(geom: LegGeometry, s: float, H: float, h: float) -> _Spiral:
    apex0 = _apex(_make_spiral(s, H, 0.0), -H)
    if h >= apex0:
        raise InfeasibleGait(
            f"swing_height {h:.4g} m exceeds the largest spiral apex {apex0:.4g} m "
            f"for step_length {s:.4g} m",
            "swing_height < spiral apex limit",
        )
    hi = s
    while _apex(_make_spiral(s, H, hi), -H) > h:
        hi *= 2.0
    depth = brentq(lambda d: _apex(_make_spiral(s, H, d), -H) - h, 0.0, hi,
                   xtol=1e-15, rtol=1e-15)
    return _make_spiral(s, H, depth)


def type1_foot_trajectory(geom: LegGeometry, params: GaitParams, phase: float) -> PlanarPoint:
    """Foot position relative to the hip for a cycle phase in ``[0, 1)``.

    ``x`` points forward along the body and is measured from the hip's ground
    projection.  ``y`` is vertical.  Phase ``[0, 0.5)`` is stance, moving from
    ``+step/2`` back to ``-step/2`` at constant speed.  Phase ``[0.5, 1)`` is
    the spiral swing, traversed at constant arc speed.
    """
    if params.gait_type is not GaitType.TYPE1:
        raise ValueError("type1_foot_trajectory needs a Type 1 GaitParams")
    H, _ = check_step_length(geom, params)
    s = params.step_length
    phase = phase % 1.0
    if phase < 0.5:
        return PlanarPoint(s / 2.0 - s * (phase / 0.5), -H)
    sp = _swing_spiral(geom, s, H, params.swing_height)
    u = (phase - 0.5) / 0.5
    x, y = sp.point(sp.theta_at(u * sp.length))
    return PlanarPoint(x, y)


# -- plans -------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftState:
    alpha_sh: float
    xi: float
    l_p: float


@dataclass(frozen=True, eq=False)
class GaitPlan:
    """Immutable joint schedule and body trajectory.

    Arrays are indexed by tick first.  ``joints[k, leg]`` holds (alpha, beta,
    gamma) in radians.  ``body[k]`` is (x, y, yaw).  ``feet[k, leg]`` is the
    world foot position, whose z is the height above ground.
    """

    gait_type: GaitType
    times: np.ndarray
    joints: np.ndarray
    stance: np.ndarray
    body: np.ndarray
    body_height: np.ndarray
    feet: np.ndarray
    alpha_sh: np.ndarray = field(default=None)
    xi: np.ndarray = field(default=None)
    l_p: float = float("nan")

    def __post_init__(self):
        for name in ("times", "joints", "stance", "body", "body_height", "feet",
                     "alpha_sh", "xi"):
            arr = getattr(self, name)
            if arr is not None:
                arr.setflags(write=False)

    def __len__(self):
        return len(self.times)

    @property
    def displacement(self) -> float:
        return float(self.body[-1, 0] - self.body[0, 0])

    def max_joint_step(self) -> float:
        if len(self) < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(self.joints, axis=0))))

    def shift_states(self):
        """Per-tick shift state while the stance pair is yawing (Type 2 only)."""
        if self.alpha_sh is None:
            return []
        keep = ~np.isnan(self.alpha_sh)
        return [ShiftState(float(a), float(x), self.l_p)
                for a, x in zip(self.alpha_sh[keep], self.xi[keep])]

    def rows(self):
        for k, t in enumerate(self.times):
            bx, by, yaw = self.body[k]
            for leg, name in enumerate(LEGS):
                a, b, g = self.joints[k, leg]
                yield (t, name, math.degrees(a), math.degrees(b), math.degrees(g),
                       int(self.stance[k, leg]), bx, by, math.degrees(yaw))

    def to_csv(self, fh=None, header_comment: str | None = None) -> str | None:
        """Write the long-format schedule (one row per tick and leg)."""
        own = fh is None
        out = io.StringIO() if own else fh
        if header_comment:
            out.write(f"# {header_comment}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for t, name, a, b, g, st, bx, by, yaw in self.rows():
            w.writerow([_fmt(t), name, _fmt(a), _fmt(b), _fmt(g), st,
                        _fmt(bx), _fmt(by), _fmt(yaw)])
        return out.getvalue() if own else None


def _fmt(v: float) -> str:
    v = float(v)
    if v == 0.0:
        v = 0.0  # drop the sign of negative zero
    return f"{v:.9f}"


def _hip_positions(params: GaitParams) -> np.ndarray:
    hx, hy = params.hip_offset
    return np.stack([FACING * hx, SIDE * hy], axis=1)


def _ik_leg(geom, x_local, y, limit):
    try:
        ang = inverse_kinematics(geom, PlanarPoint(x_local, y))
    except UnreachableTarget as exc:
        raise InfeasibleGait(str(exc), "foot target within reachable annulus") from exc
    if not ang.within(limit):
        raise InfeasibleGait(f"joint angles {ang} exceed joint limit", "joint limits")
    return ang.beta, ang.gamma


def _rate_ok(joints, limit):
    return np.all(np.abs(np.diff(joints, axis=0)) <= limit)


def type1_plan(geom: LegGeometry, params: GaitParams) -> GaitPlan:
    """Continuous diagonal gait; each step advances the body one step length."""
    if params.gait_type is not GaitType.TYPE1:
        raise ValueError("type1_plan needs a Type 1 GaitParams")
    H, _ = check_step_length(geom, params)
    s = params.step_length
    limit = params.max_joint_step

    def cycle_joints(n_half):
        n = 2 * n_half
        q = np.zeros((n + 1, 2))
        for m in range(n + 1):
            p = type1_foot_trajectory(geom, params, (m % n) / n)
            q[m] = _ik_leg(geom, p.x, p.y, params.joint_limit)
        return q

    def mirrored(n_half):
        n = 2 * n_half
        q = np.zeros((n + 1, 2))
        for m in range(n + 1):
            p = type1_foot_trajectory(geom, params, (m % n) / n)
            q[m] = _ik_leg(geom, -p.x, p.y, params.joint_limit)
        return q

    # Coarse estimate of the peak joint rate per unit phase, then refine until
    # every tick respects the servo limit exactly.
    probe = 200
    peak = max(np.max(np.abs(np.diff(cycle_joints(probe), axis=0))),
               np.max(np.abs(np.diff(mirrored(probe), axis=0)))) * 2 * probe
    n_half = max(1, math.ceil(peak / (2.0 * limit)))
    while True:
        front, hind = cycle_joints(n_half), mirrored(n_half)
        if _rate_ok(front, limit) and _rate_ok(hind, limit):
            break
        n_half += 1

    n_cycle = 2 * n_half
    n_ticks = params.steps * n_half + 1
    offsets = np.array([0, n_half, n_half, 0])  # FL, RR lead; FR, RL half a cycle later
    hips = _hip_positions(params)

    times = np.arange(n_ticks) * params.command_period
    joints = np.zeros((n_ticks, 4, 3))
    stance = np.zeros((n_ticks, 4), dtype=bool)
    body = np.zeros((n_ticks, 3))
    feet = np.zeros((n_ticks, 4, 3))
    body[:, 0] = np.arange(n_ticks) * s / n_half
    for k in range(n_ticks):
        for leg in range(4):
            m = (k + offsets[leg]) % n_cycle
            table = front if FACING[leg] > 0 else hind
            joints[k, leg, 1:] = table[m]
            stance[k, leg] = m < n_half
            p = type1_foot_trajectory(geom, params, m / n_cycle)
            feet[k, leg] = (body[k, 0] + hips[leg, 0] + p.x,
                            hips[leg, 1] + SIDE[leg] * geom.l_sh,
                            p.y + H)
    return GaitPlan(GaitType.TYPE1, times, joints, stance, body,
                    np.full(n_ticks, H), feet)


@dataclass
class _Pose:
    joints: np.ndarray        # (4, 3)
    stance: np.ndarray        # (4,)
    body: np.ndarray          # (3,)
    height: float
    alpha_sh: float = float("nan")
    xi: float = float("nan")


class _Timeline:
    """Accumulates rate-limited segments into a plan."""

    def __init__(self, params: GaitParams):
        self.params = params
        self.limit = params.max_joint_step
        self.poses: list[_Pose] = []

    def start(self, pose: _Pose):
        self.poses.append(pose)

    def segment(self, fn):
        """Append ``fn(u)`` for ``u`` in ``(0, 1]`` using as few ticks as the rate limit allows."""
        prev = self.poses[-1].joints
        probe = np.array([fn(u).joints for u in np.linspace(0.0, 1.0, 201)])
        if not np.allclose(probe[0], prev, atol=1e-12, rtol=0):
            raise AssertionError("gait segment is not continuous with the previous pose")
        peak = np.max(np.abs(np.diff(probe, axis=0))) * 200
        n = max(1, math.ceil(peak / self.limit))
        while True:
            poses = [fn(i / n) for i in range(1, n + 1)]
            seq = np.array([prev] + [p.joints for p in poses])
            if _rate_ok(seq, self.limit):
                break
            n += 1
        self.poses.extend(poses)

    def pause(self, ticks):
        last = self.poses[-1]
        for _ in range(ticks):
            self.poses.append(_Pose(last.joints.copy(), last.stance.copy(),
                                    last.body.copy(), last.height))


def type2_plan(geom: LegGeometry, params: GaitParams, alpha_max: float | None = None) -> GaitPlan:
    """Shoulder-pivot gait.

    Each step runs the same sub-phases in order:

    1. The support pair swings its shoulders back to zero and plants vertically.
    2. The other pair lifts.
    3. The support shoulders sweep 0 -> ``alpha_max``.  The compensation angle
       raises the body, which advances by the stance-arc chord.
    4. The compensation is released and the body lowers to its standing height.
    5. The lifted pair plants again.  The plan then pauses for ``pause_ticks``.

    Diagonal pairs alternate as support from one step to the next.
    """
    if params.gait_type is not GaitType.TYPE2:
        raise ValueError("type2_plan needs a Type 2 GaitParams")
    beta0 = params.beta_init
    H0, _ = check_step_length(geom, params)
    if alpha_max is None:
        alpha_max = alpha_for_step(geom, beta0, params.step_length)
    elif not 0.0 <= alpha_max <= ALPHA_MAX_LIMIT:
        raise InfeasibleGait(f"alpha_max {math.degrees(alpha_max):.4g} deg outside [0, 60]",
                             "alpha_max <= 60 deg")
    R = stance_radius(geom, beta0)
    l_p = geom.l_ua * math.cos(beta0)
    xi_max = xi_of_alpha(alpha_max, beta0)
    if beta0 + xi_max > params.joint_limit:
        raise InfeasibleGait("compensation exceeds joint limits", "joint limits")
    h = params.swing_height
    x_plant = geom.l_ua * math.cos(beta0)
    stand = standing_angles(beta0)
    stand_bg = np.array([stand.beta, stand.gamma])

    def lifted_bg(z):
        return np.array(_ik_leg(geom, x_plant, -H0 + z, params.joint_limit))

    def compensated_bg(xi):
        return np.array([-(beta0 + xi), beta0 + xi - math.pi / 2])

    joints = np.zeros((4, 3))
    joints[:, 1:] = stand_bg
    tl = _Timeline(params)
    tl.start(_Pose(joints.copy(), np.ones(4, dtype=bool), np.zeros(3), H0))
    yaw = np.zeros(4)

    for step_idx in range(params.steps):
        support, other = (PAIR_A, PAIR_B) if step_idx % 2 == 0 else (PAIR_B, PAIR_A)
        base = tl.poses[-1]
        bx0 = base.body[0]

        def swing(u, base=base, support=support):
            q = base.joints.copy()
            st = base.stance.copy()
            for leg in support:
                q[leg, 0] = yaw[leg] * (1.0 - u)
                q[leg, 1:] = lifted_bg(h * math.sin(math.pi * u)) if 0.0 < u < 1.0 else stand_bg
                st[leg] = u >= 1.0 or u <= 0.0
            return _Pose(q, st, base.body.copy(), H0)

        tl.segment(swing)
        for leg in support:
            yaw[leg] = 0.0
        base = tl.poses[-1]

        def lift(u, base=base, other=other):
            q = base.joints.copy()
            st = base.stance.copy()
            for leg in other:
                q[leg, 1:] = lifted_bg(h * u) if u > 0.0 else stand_bg
                st[leg] = u <= 0.0
            return _Pose(q, st, base.body.copy(), H0)

        tl.segment(lift)
        base = tl.poses[-1]

        def push(u, base=base, support=support):
            a = alpha_max * u
            xi = xi_of_alpha(a, beta0)
            q = base.joints.copy()
            for leg in support:
                q[leg, 0] = SIDE[leg] * a
                q[leg, 1:] = compensated_bg(xi)
            body = np.array([bx0 + 2.0 * R * math.sin(a / 2.0), 0.0, 0.0])
            height = geom.l_ua * math.sin(beta0 + xi) + geom.l_fa
            return _Pose(q, base.stance.copy(), body, height, a, xi)

        tl.segment(push)
        for leg in support:
            yaw[leg] = SIDE[leg] * alpha_max
        base = tl.poses[-1]

        def lower(u, base=base, support=support):
            xi = xi_max * (1.0 - u)
            q = base.joints.copy()
            for leg in support:
                q[leg, 1:] = compensated_bg(xi)
            return _Pose(q, base.stance.copy(), base.body.copy(),
                         geom.l_ua * math.sin(beta0 + xi) + geom.l_fa)

        tl.segment(lower)
        base = tl.poses[-1]

        def plant(u, base=base, other=other):
            q = base.joints.copy()
            st = base.stance.copy()
            for leg in other:
                q[leg, 1:] = lifted_bg(h * (1.0 - u)) if u < 1.0 else stand_bg
                st[leg] = u >= 1.0
            return _Pose(q, st, base.body.copy(), H0)

        tl.segment(plant)
        tl.pause(params.pause_ticks)

    return _assemble_type2(geom, params, tl.poses, l_p, R)


def _assemble_type2(geom, params, poses, l_p, R):
    n = len(poses)
    hips = _hip_positions(params)
    times = np.arange(n) * params.command_period
    joints = np.array([p.joints for p in poses])
    stance = np.array([p.stance for p in poses])
    body = np.array([p.body for p in poses])
    height = np.array([p.height for p in poses])
    alpha_sh = np.array([p.alpha_sh for p in poses])
    xi = np.array([p.xi for p in poses])
    feet = np.zeros((n, 4, 3))
    for k in range(n):
        for leg in range(4):
            if k > 0 and stance[k, leg] and stance[k - 1, leg]:
                feet[k, leg] = feet[k - 1, leg]
                continue
            # Airborne (or touching down): nominal foot below the hip, raised
            # by whatever the leg-plane geometry gives.
            b, g = joints[k, leg, 1:]
            z = height[k] + geom.l_ua * math.sin(b) + geom.l_fa * math.sin(b + g)
            feet[k, leg] = (body[k, 0] + hips[leg, 0],
                            hips[leg, 1] + SIDE[leg] * R,
                            max(z, 0.0) if stance[k, leg] else z)
    return GaitPlan(GaitType.TYPE2, times, joints, stance, body, height, feet,
                    alpha_sh, xi, l_p)


def make_plan(geom: LegGeometry, params: GaitParams) -> GaitPlan:
    if params.gait_type is GaitType.TYPE1:
        return type1_plan(geom, params)
    return type2_plan(geom, params)


def with_type(params: GaitParams, gait_type) -> GaitParams:
    return replace(params, gait_type=GaitType(gait_type))
