"""
Type 1 gait: trot with a spiral swing
=====================================

Diagonal leg pairs take turns.  A foot pushes back along the ground, then
returns through an Archimedean-spiral arc whose highest point is the
requested swing height.
"""

import math

import numpy as np

from swarmgear.gait import GaitParams, InfeasibleGait, LEGS, make_plan, type1_foot_trajectory
from swarmgear.kinematics import LegGeometry, robot_height

geom = LegGeometry()
params = GaitParams(step_length=0.10, swing_height=0.03, steps=5)
H = robot_height(geom, params.beta_init)

# %%
# One cycle of the foot path, relative to the hip.
phases = np.linspace(0.0, 1.0, 9)
for u in phases:
    p = type1_foot_trajectory(geom, params, u)
    label = "stance" if u % 1.0 < 0.5 else "swing"
    print(f"  phase {u:.3f}  x={p.x:+.4f}  clearance={p.y + H:.4f} m  ({label})")

# %%
# The plan turns the path into a joint schedule sent every 25 ms.  The number
# of ticks per step is the smallest that keeps every joint under the servo
# speed limit.
plan = make_plan(geom, params)
print(f"\n{len(plan)} ticks, {plan.times[-1]:.3f} s, body moved {plan.displacement:.4f} m")
print(f"largest joint change per tick {math.degrees(plan.max_joint_step()):.4f} deg "
      f"(limit {math.degrees(params.max_joint_step):.4f} deg)")

# %%
# Diagonal pairs share their stance pattern.
stance = plan.stance.astype(int)
print("stance pattern for the first 10 ticks:")
print("  ", " ".join(LEGS))
for row in stance[:10]:
    print("  ", "  ".join(str(v) for v in row))

# %%
# Asking for more clearance than the spiral can give is refused up front.
try:
    make_plan(geom, GaitParams(step_length=0.10, swing_height=0.08))
except InfeasibleGait as exc:
    print("\ninfeasible:", exc, f"[{exc.constraint}]")
