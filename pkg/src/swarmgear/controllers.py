"""Follower controllers: impedance links and the potential-field baseline.

Impedance followers carry a per-axis link state ``delta``, which is the
amount the follower trails its formation slot::

    position = leader + offset - delta
    velocity = leader_velocity - delta_v

A leader-coupled link pushes ``delta`` with ``K_v * v_leader``.  Under a
constant leader velocity ``v`` the follower therefore settles
``K_v * v / K`` behind its slot.  When the leader stops, ``delta`` decays
monotonically back to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .impedance import DiscreteImpedance, ImpedanceParams, LinkState, external_force, step
from .topology import TopologyGraph

MIN_DISTANCE = 1e-3


class SimulationDiverged(RuntimeError):
    def __init__(self, message, tick=None, agent=None):
        super().__init__(message)
        self.tick = tick
        self.agent = agent


def link_forces(graph: TopologyGraph, params: ImpedanceParams, delta, delta_v,
                leader_velocity, positions=None):
    """Total external force on each follower's link state, shape ``(N, 3)``."""
    followers = graph.followers
    index = {f: i for i, f in enumerate(followers)}
    F = np.zeros_like(delta)
    f_lead = external_force(params.K_v, leader_velocity)
    for ln in graph.links:
        if ln.obstacle is not None:
            if positions is None:
                continue
            i = index[ln.a]
            away = positions[i] - ln.obstacle
            d = max(float(np.linalg.norm(away)), MIN_DISTANCE)
            if d < ln.clearance:
                # repulsion on the position is a pull on delta
                F[i] -= params.K * (ln.clearance - d) * away / d
            continue
        if ln.leader_coupled:
            F[index[ln.other("leader")]] += f_lead
            continue
        i, j = index[ln.a], index[ln.b]
        # Spring-damper about the rest offset, written in delta coordinates:
        # (p_j - p_i) - rest = delta_i - delta_j.
        f = params.K * (delta[j] - delta[i]) + params.D * (delta_v[j] - delta_v[i])
        F[i] += f
        F[j] -= f
    return F


def impedance_controller_step(graph: TopologyGraph, delta, delta_v, leader_velocity,
                              disc, positions=None, tick=None):
    """Advance every follower's link state by one period.

    ``disc`` is one :class:`DiscreteImpedance` shared by all followers, or a
    mapping from follower id to its own discretisation.
    """
    delta = np.asarray(delta, float)
    delta_v = np.asarray(delta_v, float)
    followers = graph.followers
    if isinstance(disc, DiscreteImpedance):
        discs = [disc] * len(followers)
    else:
        discs = [disc[f] for f in followers]
    F = link_forces(graph, discs[0].params, delta, delta_v, leader_velocity, positions)
    new_x = np.empty_like(delta)
    new_v = np.empty_like(delta_v)
    for i, d in enumerate(discs):
        nxt = step(d, LinkState(delta[i], delta_v[i]), F[i])
        new_x[i], new_v[i] = nxt.delta_x, nxt.delta_v
    bad = ~(np.isfinite(new_x).all(axis=1) & np.isfinite(new_v).all(axis=1))
    if bad.any():
        who = followers[int(np.argmax(bad))]
        raise SimulationDiverged(f"link state of {who} diverged at tick {tick}", tick, who)
    return new_x, new_v


@dataclass(frozen=True)
class ApfParams:
    k_att: float = 0.8
    k_rep: float = 0.02
    d0: float = 0.4
    v_max: float = 0.12

    def __post_init__(self):
        for name in ("k_att", "k_rep", "d0", "v_max"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"ApfParams.{name} must be positive, got {v!r}")


def apf_velocity(params: ApfParams, positions, slots, obstacles=()):
    """Clamped negative gradient of attraction to the slot plus neighbour repulsion.

    ``obstacles`` are extra points (e.g. the leader) that repel but are not moved.
    """
    p = np.asarray(positions, float)
    v = params.k_att * (np.asarray(slots, float) - p)
    others = np.vstack([p] + [np.atleast_2d(o) for o in obstacles]) if len(obstacles) else p
    for i in range(len(p)):
        for j in range(len(others)):
            if j == i:
                continue
            diff = p[i] - others[j]
            d = max(float(np.linalg.norm(diff)), MIN_DISTANCE)
            if d < params.d0:
                v[i] += params.k_rep * (1.0 / d - 1.0 / params.d0) / (d * d) * diff / d
    speed = np.linalg.norm(v, axis=1)
    over = speed > params.v_max
    v[over] *= (params.v_max / speed[over])[:, None]
    return v


def apf_controller_step(params: ApfParams, positions, leader_position, offsets, dt):
    """One explicit step of the potential-field baseline.  Returns ``(positions, velocities)``."""
    leader_position = np.asarray(leader_position, float)
    slots = leader_position + np.asarray(offsets, float)
    v = apf_velocity(params, positions, slots, obstacles=(leader_position,))
    new = np.asarray(positions, float) + v * dt
    if not np.isfinite(new).all():
        raise SimulationDiverged("APF state diverged")
    return new, v
