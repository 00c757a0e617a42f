"""
A virtual spring-damper link
============================

Followers are tied to the leader by a virtual mass-spring-damper.  With the
damping chosen for critical damping, the link settles as fast as it can
without ringing.
"""

import numpy as np

from swarmgear.impedance import (
    ImpedanceParams, LinkState, discretize, expm_oracle, solve_critical_damping, step,
)

M, K = 1.9, 20.88
print(f"critical damping for M={M}, K={K}: D = {solve_critical_damping(M, K):.4f}")
p = ImpedanceParams(M=M, D=12.6, K=K, K_v=10.0)
print(f"with D=12.6: zeta = {p.zeta:.5f}, omega_n = {p.omega_n:.4f} rad/s")

# %%
# Exact discretisation at the 25 ms control period, checked against a
# general matrix exponential.
d = discretize(p, 0.025)
A_ref, B_ref = expm_oracle(p, 0.025)
print("A_d =\n", d.A_d)
print("B_d =", d.B_d)
print(f"difference from expm: {max(np.abs(d.A_d - A_ref).max(), np.abs(d.B_d - B_ref).max()):.1e}")

# %%
# A leader moving at 0.18 m/s pushes the link with F = K_v * v.  The link
# stretches to F/K and stays there, so the follower trails by that amount.
v = 0.18
s = LinkState.rest(1)
for k in range(1, 161):
    s = step(d, s, p.K_v * v)
    if k % 40 == 0:
        print(f"  t={k * 0.025:4.1f} s  lag={s.delta_x[0]:.5f} m")
print(f"expected steady lag K_v*v/K = {p.K_v * v / p.K:.5f} m")
