"""Impedance-link topologies between the leader and its followers."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

LEADER = "leader"


class TopologyKind(str, enum.Enum):
    STAR = "star"
    RING = "ring"
    TREE = "tree"


class TopologyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Link:
    a: str
    b: str
    # desired position of ``b`` minus desired position of ``a``
    rest_offset: np.ndarray
    leader_coupled: bool
    # obstacle links tie an agent to a fixed world point instead of another agent
    obstacle: np.ndarray | None = None
    clearance: float = 0.0

    def other(self, agent: str) -> str:
        return self.b if agent == self.a else self.a

    def __eq__(self, other):
        return (
            isinstance(other, Link)
            and (self.a, self.b, self.leader_coupled) == (other.a, other.b, other.leader_coupled)
            and np.array_equal(self.rest_offset, other.rest_offset)
        )


@dataclass(frozen=True)
class TopologyGraph:
    kind: TopologyKind
    agents: tuple
    links: tuple
    offsets: dict

    def __post_init__(self):
        if self.agents.count(LEADER) != 1:
            raise TopologyError("topology must contain the leader exactly once")
        if len(set(self.agents)) != len(self.agents):
            raise TopologyError("duplicate agent ids")
        if not self.is_connected():
            raise TopologyError(f"{self.kind.value} topology is not connected")

    @property
    def followers(self) -> tuple:
        return tuple(a for a in self.agents if a != LEADER)

    def incident(self, agent: str):
        return [ln for ln in self.links if ln.obstacle is None and agent in (ln.a, ln.b)]

    def is_connected(self) -> bool:
        seen = {LEADER}
        frontier = [LEADER]
        while frontier:
            node = frontier.pop()
            for ln in self.links:
                if ln.obstacle is not None or node not in (ln.a, ln.b):
                    continue
                nxt = ln.other(node)
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen == set(self.agents)

    def has_cycle(self) -> bool:
        edges = [ln for ln in self.links if ln.obstacle is None]
        return len(edges) >= len(self.agents)


def _link(a, b, offsets):
    rest = np.asarray(offsets[b], float) - np.asarray(offsets[a], float)
    rest.setflags(write=False)
    return Link(a, b, rest, leader_coupled=LEADER in (a, b))


def build_topology(kind, n_followers: int, offsets) -> TopologyGraph:
    """Links for a star, ring or tree formation.

    ``offsets[i]`` is follower ``i``'s formation slot relative to the leader.

    * star: every follower linked to the leader
    * ring: leader -> f1 -> ... -> fN -> leader
    * tree: balanced binary tree rooted at the leader (heap order)
    """
    kind = TopologyKind(kind)
    if int(n_followers) != n_followers or n_followers < 1:
        raise TopologyError(f"need at least one follower, got {n_followers!r}")
    offsets = [np.asarray(o, float) for o in offsets]
    if len(offsets) != n_followers:
        raise TopologyError(f"expected {n_followers} offsets, got {len(offsets)}")
    ids = [LEADER] + [f"f{i + 1}" for i in range(n_followers)]
    slot = {LEADER: np.zeros(3)}
    for fid, off in zip(ids[1:], offsets):
        if off.shape != (3,):
            off = np.pad(off, (0, 3 - off.size)) if off.size < 3 else off
        slot[fid] = off

    if kind is TopologyKind.STAR:
        links = [_link(LEADER, f, slot) for f in ids[1:]]
    elif kind is TopologyKind.RING:
        links = [_link(ids[i], ids[i + 1], slot) for i in range(n_followers)]
        if n_followers > 1:
            links.append(_link(ids[-1], LEADER, slot))
    else:
        links = [_link(ids[(i - 1) // 2], ids[i], slot) for i in range(1, n_followers + 1)]
    return TopologyGraph(kind, tuple(ids), tuple(links), slot)


def add_obstacle_link(graph: TopologyGraph, agent: str, point, clearance: float) -> TopologyGraph:
    """Attach a repulsive link from ``agent`` to a fixed obstacle point."""
    if agent not in graph.followers:
        raise TopologyError(f"unknown follower {agent!r}")
    obs = np.asarray(point, float)
    ln = Link(agent, f"obstacle@{tuple(obs)}", np.zeros(3), leader_coupled=False,
              obstacle=obs, clearance=float(clearance))
    return TopologyGraph(graph.kind, graph.agents, graph.links + (ln,), graph.offsets)
