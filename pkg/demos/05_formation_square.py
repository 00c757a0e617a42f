"""
Formation on a square path
==========================

The leader walks a 1 m square.  Three followers fly in formation using
impedance links in a star, ring or tree, or the potential-field baseline.
"""

from dataclasses import replace

from swarmgear.analysis import error_table, follower_summary, velocity_table
from swarmgear.sim import ControllerSpec, LeaderSpec, SimConfig, run_simulation

base = SimConfig(duration=25.0, leader=LeaderSpec(path="square", length=1.0, speed=0.18))

# %%
# Same leader path for every controller, so the rows are comparable.
variants = {
    "star": ControllerSpec(topology="star"),
    "ring": ControllerSpec(topology="ring"),
    "tree": ControllerSpec(topology="tree"),
    "apf": ControllerSpec(kind="apf"),
}
summaries = {}
for name, ctrl in variants.items():
    log = run_simulation(replace(base, controller=ctrl))
    summaries[name] = follower_summary(log)

print(error_table(summaries))
print(velocity_table(summaries))

# %%
# The impedance followers keep pace with the leader but trail it slightly.
# The potential field is slower because its command saturates, so it falls
# further behind.
print("APF slower than star:", summaries["apf"]["mean_speed"] < summaries["star"]["mean_speed"])
