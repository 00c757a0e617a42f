"""
Leg kinematics
==============

A single leg seen from the side: upperarm and forearm in a vertical plane.
We stand the robot up, find how far a foot can reach along the ground, and
check that inverse and forward kinematics agree.
"""

import math

import numpy as np

from swarmgear.kinematics import (
    LegGeometry, PlanarPoint, UnreachableTarget, forward_kinematics, inverse_kinematics,
    robot_height, standing_angles, stride_extreme,
)

geom = LegGeometry()
print("link lengths (m):", geom)

# %%
# Standing pose. The upperarm tilts down by beta_init and the forearm hangs
# vertically, so the body height follows directly from the two lengths.
beta_init = math.radians(45)
H = robot_height(geom, beta_init)
stand = standing_angles(beta_init)
foot = forward_kinematics(geom, stand)
print(f"standing height H = {H:.4f} m, foot at ({foot.x:.4f}, {foot.y:.4f})")

# %%
# The longest stride reaches where the straightened leg meets the ground.
x0 = stride_extreme(geom, H)
print(f"farthest ground point x0 = {x0:.4f} m, so a step can be at most {2 * x0:.4f} m")

# %%
# Round trip over a sweep of ground points.
xs = np.linspace(-x0, x0, 9)
errs = []
for x in xs:
    q = inverse_kinematics(geom, PlanarPoint(x, -H))
    p = forward_kinematics(geom, q)
    errs.append(math.hypot(p.x - x, p.y + H))
    print(f"  x={x:+.3f}  beta={math.degrees(q.beta):+8.3f}  gamma={math.degrees(q.gamma):+8.3f} deg")
print(f"largest round-trip error: {max(errs):.1e} m")

# %%
# Out-of-reach targets raise, and the error carries the nearest point we
# could have reached.
try:
    inverse_kinematics(geom, PlanarPoint(0.5, -0.1))
except UnreachableTarget as exc:
    print("unreachable:", exc)
    print(f"  nearest reachable point: ({exc.boundary.x:.4f}, {exc.boundary.y:.4f})")
