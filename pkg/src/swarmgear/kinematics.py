"""Planar kinematics of one pedipulator.

Frame: ``x`` is horizontal in the leg plane, ``y`` is vertical with the
positive axis pointing up from the hip.  The origin is the upperarm joint.
All angles are radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Slack allowed on |cos(gamma)| before a target is declared unreachable.
COS_GUARD = 1e-12


class KinematicsError(ValueError):
    """Raised when a geometric quantity is requested outside its domain."""


class UnreachableTarget(KinematicsError):
    """Target lies outside the reachable annulus of the two-link limb.

    ``boundary`` holds the closest reachable point (the clamped target).
    """

    def __init__(self, message, target, boundary):
        super().__init__(message)
        self.target = target
        self.boundary = boundary


@dataclass(frozen=True)
class LegGeometry:
    """Link lengths of one leg in metres (defaults: the built robot)."""

    l_sh: float = 0.093
    l_ua: float = 0.154
    l_fa: float = 0.206
    l_wr: float = 0.044

    def __post_init__(self):
        for name in ("l_sh", "l_ua", "l_fa", "l_wr"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive length, got {value!r}")

    @property
    def reach(self) -> float:
        return self.l_ua + self.l_fa

    @property
    def inner_reach(self) -> float:
        return abs(self.l_ua - self.l_fa)


@dataclass(frozen=True)
class JointAngles:
    alpha: float = 0.0  # shoulder yaw
    beta: float = 0.0   # upperarm
    gamma: float = 0.0  # forearm, relative to the upperarm

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])

    def within(self, limit: float = math.pi) -> bool:
        return all(abs(a) <= limit for a in (self.alpha, self.beta, self.gamma))


@dataclass(frozen=True)
class PlanarPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


def robot_height(geom: LegGeometry, beta_init: float) -> float:
    """Standing height of the hip above ground for an upperarm angle.

    The forearm is taken as vertical, so ``H = sin(beta_init) * l_ua + l_fa``.
    """
    if not 0.0 < beta_init < math.pi / 2:
        raise KinematicsError(f"beta_init must lie in (0, pi/2), got {beta_init!r}")
    return math.sin(beta_init) * geom.l_ua + geom.l_fa


def stride_extreme(geom: LegGeometry, H: float) -> float:
    """Horizontal distance from the hip projection to the farthest stance point.

    This is where the straightened limb touches the ground line ``y = -H``.
    """
    if not 0.0 < H <= geom.reach:
        raise KinematicsError(
            f"height {H!r} is not in (0, {geom.reach}] for this geometry"
        )
    return math.sqrt(geom.reach ** 2 - H ** 2)


def forward_kinematics(geom: LegGeometry, angles: JointAngles) -> PlanarPoint:
    b, g = angles.beta, angles.gamma
    return PlanarPoint(
        geom.l_ua * math.cos(b) + geom.l_fa * math.cos(b + g),
        geom.l_ua * math.sin(b) + geom.l_fa * math.sin(b + g),
    )


def _clamp_to_annulus(geom: LegGeometry, x: float, y: float) -> PlanarPoint:
    r = math.hypot(x, y)
    if r == 0.0:
        return PlanarPoint(geom.inner_reach, 0.0)
    r_clamped = min(max(r, geom.inner_reach), geom.reach)
    return PlanarPoint(x * r_clamped / r, y * r_clamped / r)


def inverse_kinematics(geom: LegGeometry, target: PlanarPoint) -> JointAngles:
    """Upperarm/forearm angles placing the foot at ``target``.

    Only the ``gamma <= 0`` elbow branch is produced.  Shoulder yaw is
    returned as zero.
    """
    x, y = target.x, target.y
    a, b = geom.l_ua, geom.l_fa
    cos_g = (x * x + y * y - a * a - b * b) / (2.0 * a * b)
    if abs(cos_g) > 1.0:
        if abs(cos_g) - 1.0 > COS_GUARD:
            raise UnreachableTarget(
                f"target ({x:.6g}, {y:.6g}) is outside the reachable annulus "
                f"[{geom.inner_reach:.6g}, {geom.reach:.6g}] m",
                target,
                _clamp_to_annulus(geom, x, y),
            )
        cos_g = math.copysign(1.0, cos_g)
    gamma = -math.acos(cos_g)
    beta = math.atan2(y, x) - math.atan2(b * math.sin(gamma), a + b * math.cos(gamma))
    return JointAngles(0.0, beta, gamma)


def standing_angles(beta_init: float) -> JointAngles:
    """Joint angles of a leg standing with a vertical forearm.

    The upperarm points ``beta_init`` below the horizontal; the forearm then
    bends down to vertical.
    """
    return JointAngles(0.0, -beta_init, beta_init - math.pi / 2)
