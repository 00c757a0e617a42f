"""Quadruped leg kinematics, gait planning and impedance-coupled swarm simulation."""

from .gait import GaitParams, GaitPlan, GaitType, InfeasibleGait, make_plan
from .impedance import DiscreteImpedance, ImpedanceParams, discretize, expm_oracle
from .kinematics import (JointAngles, LegGeometry, PlanarPoint, UnreachableTarget,
                         forward_kinematics, inverse_kinematics, robot_height)
from .sim import SimConfig, TrajectoryLog, run_simulation
from .topology import TopologyKind, build_topology

__version__ = "0.1.0"

__all__ = [
    "DiscreteImpedance", "GaitParams", "GaitPlan", "GaitType", "ImpedanceParams",
    "InfeasibleGait", "JointAngles", "LegGeometry", "PlanarPoint", "SimConfig",
    "TopologyKind", "TrajectoryLog", "UnreachableTarget", "build_topology", "discretize",
    "expm_oracle", "forward_kinematics", "inverse_kinematics", "make_plan", "robot_height",
    "run_simulation",
]
