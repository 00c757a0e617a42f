import numpy as np
import pytest
from hypothesis import given, strategies as st

from swarmgear.topology import (
    LEADER, Link, TopologyError, TopologyGraph, TopologyKind, add_obstacle_link, build_topology,
)

OFFS = [(-0.6, 0.6, 1.0), (-0.6, -0.6, 1.0), (-1.2, 0.0, 1.0)]


def pairs(g):
    return {(ln.a, ln.b) for ln in g.links}


def test_star_links_every_follower_to_leader():
    g = build_topology("star", 3, OFFS)
    assert pairs(g) == {(LEADER, "f1"), (LEADER, "f2"), (LEADER, "f3")}
    assert all(ln.leader_coupled for ln in g.links)
    assert not g.has_cycle()


def test_ring_closes_through_leader():
    g = build_topology("ring", 3, OFFS)
    assert pairs(g) == {(LEADER, "f1"), ("f1", "f2"), ("f2", "f3"), ("f3", LEADER)}
    assert g.has_cycle()
    assert [ln.leader_coupled for ln in g.links] == [True, False, False, True]


def test_ring_with_one_follower_is_single_link():
    g = build_topology("ring", 1, OFFS[:1])
    assert pairs(g) == {(LEADER, "f1")}


def test_tree_is_heap_ordered():
    g = build_topology("tree", 6, [(i, 0, 0) for i in range(6)])
    assert pairs(g) == {(LEADER, "f1"), (LEADER, "f2"), ("f1", "f3"), ("f1", "f4"),
                        ("f2", "f5"), ("f2", "f6")}
    assert not g.has_cycle()


def test_rest_offset_is_slot_difference():
    g = build_topology("ring", 3, OFFS)
    ln = g.links[1]
    assert np.allclose(ln.rest_offset, np.subtract(OFFS[1], OFFS[0]))
    with pytest.raises(ValueError):
        ln.rest_offset[0] = 5.0


@pytest.mark.parametrize("n,offs", [(0, []), (2, OFFS), (1.5, OFFS[:1])])
def test_bad_sizes_rejected(n, offs):
    with pytest.raises(TopologyError):
        build_topology("star", n, offs)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        build_topology("mesh", 3, OFFS)


def test_disconnected_graph_rejected():
    g = build_topology("star", 2, OFFS[:2])
    with pytest.raises(TopologyError, match="not connected"):
        TopologyGraph(TopologyKind.STAR, g.agents, g.links[:1], g.offsets)


def test_leader_must_appear_once():
    g = build_topology("star", 1, OFFS[:1])
    with pytest.raises(TopologyError):
        TopologyGraph(TopologyKind.STAR, ("f1",), g.links, g.offsets)


def test_obstacle_link_does_not_change_connectivity():
    g = add_obstacle_link(build_topology("star", 2, OFFS[:2]), "f1", (1, 1, 1), 0.3)
    assert len(g.links) == 3 and g.is_connected()
    assert len(g.incident("f1")) == 1
    with pytest.raises(TopologyError):
        add_obstacle_link(g, "f9", (0, 0, 0), 0.3)


def test_link_equality():
    a = Link("leader", "f1", np.ones(3), True)
    assert a == Link("leader", "f1", np.ones(3), True)
    assert a != Link("leader", "f1", np.zeros(3), True)


@given(kind=st.sampled_from(list(TopologyKind)), n=st.integers(1, 20))
def test_every_topology_connected_and_sized(kind, n):
    g = build_topology(kind, n, [(0.0, float(i), 0.0) for i in range(n)])
    assert g.is_connected()
    expected = {TopologyKind.STAR: n, TopologyKind.TREE: n,
                TopologyKind.RING: n + 1 if n > 1 else 1}[kind]
    assert len(g.links) == expected


def test_single_follower_tree_equals_star():
    assert build_topology("tree", 1, OFFS[:1]).links == build_topology("star", 1, OFFS[:1]).links
