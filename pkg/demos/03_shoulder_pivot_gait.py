"""
Type 2 gait: pushing with the shoulders
=======================================

One diagonal pair stands with vertical forearms and yaws its shoulders.
That sweep pushes the body forward.  Tilting the upperarm by a compensation
angle xi keeps the footprint from sliding sideways.
"""

import math

import numpy as np

from swarmgear.gait import (
    GaitParams, GaitType, alpha_for_step, horizontal_shift, make_plan, vertical_compensation,
    xi_of_alpha,
)
from swarmgear.kinematics import LegGeometry

geom = LegGeometry()
beta = math.radians(45)
l_p = geom.l_ua * math.cos(beta)

# %%
# The compensation exactly cancels the sideways shift for every sweep angle.
print(" alpha    xi      shift     compensation")
for a_deg in (0, 15, 30, 45, 60):
    a = math.radians(a_deg)
    xi = xi_of_alpha(a, beta)
    print(f"  {a_deg:>3}  {math.degrees(xi):6.2f}  {horizontal_shift(a, l_p):.6f}  "
          f"{vertical_compensation(beta, xi, geom.l_ua):.6f}")

# %%
# The sweep needed for a 19 cm step.
a_max = alpha_for_step(geom, beta, 0.19)
print(f"\nsweep for a 0.19 m step: {math.degrees(a_max):.3f} deg (limit 60)")

# %%
# A two-step plan.  The body rises while the pair pushes, then settles back.
plan = make_plan(geom, GaitParams(gait_type=GaitType.TYPE2, step_length=0.19, steps=2))
print(f"{len(plan)} ticks over {plan.times[-1]:.2f} s, displacement {plan.displacement:.3f} m")
print(f"body height ranges {plan.body_height.min():.4f} .. {plan.body_height.max():.4f} m")
feet_down = plan.stance.sum(axis=1)
print(f"feet on the ground: min {feet_down.min()}, max {feet_down.max()}")

# %%
# The schedule exports as CSV, one row per tick and leg.
print("\n" + "\n".join(plan.to_csv().splitlines()[:5]))
