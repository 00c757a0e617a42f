import csv
import io
import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import alpha_max_by_bisection
from swarmgear.gait import (
    ALPHA_MAX_LIMIT, CSV_COLUMNS, FACING, LEGS, PAIR_A, PAIR_B, GaitParams, GaitType,
    InfeasibleGait, alpha_for_step, check_step_length, horizontal_shift, make_plan,
    stance_radius, type1_foot_trajectory, type1_plan, type2_plan, vertical_compensation,
    with_type, xi_of_alpha,
)
from swarmgear.kinematics import (
    JointAngles, KinematicsError, LegGeometry, forward_kinematics, robot_height,
)

GOLDEN = Path(__file__).parent / "golden"
GEOM = LegGeometry()
T1 = GaitParams()
T2 = GaitParams(gait_type=GaitType.TYPE2, step_length=0.19)


# -- shoulder-pivot equations ------------------------------------------------

def test_xi_zero_at_zero_sweep_exactly():
    for beta in (math.radians(30), math.radians(45), 1.0):
        assert xi_of_alpha(0.0, beta) == 0.0


def test_xi_reaches_vertical_upperarm_at_60_for_45():
    assert math.radians(45) + xi_of_alpha(ALPHA_MAX_LIMIT, math.radians(45)) == pytest.approx(
        math.pi / 2, abs=1e-12)


def test_xi_rejects_sweep_beyond_limit():
    with pytest.raises(KinematicsError):
        xi_of_alpha(math.radians(61), math.radians(45))
    with pytest.raises(KinematicsError):
        xi_of_alpha(-0.01, math.radians(45))


def test_vertical_compensation_guard():
    with pytest.raises(KinematicsError):
        vertical_compensation(math.radians(80), math.radians(20), 0.154)


def test_horizontal_shift_rejects_non_positive_lever():
    with pytest.raises(ValueError):
        horizontal_shift(0.1, 0.0)


@settings(max_examples=300, deadline=None)
@given(a=st.floats(0.0, ALPHA_MAX_LIMIT), beta=st.floats(math.radians(20), math.radians(60)))
def test_shift_and_compensation_balance_property(a, beta):
    l_p = GEOM.l_ua * math.cos(beta)
    xi = xi_of_alpha(a, beta)
    assert abs(horizontal_shift(a, l_p) - vertical_compensation(beta, xi, GEOM.l_ua)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(a1=st.floats(0.0, ALPHA_MAX_LIMIT), a2=st.floats(0.0, ALPHA_MAX_LIMIT))
def test_xi_monotone_in_sweep(a1, a2):
    beta = math.radians(45)
    lo, hi = sorted((a1, a2))
    assert xi_of_alpha(lo, beta) <= xi_of_alpha(hi, beta)


def test_alpha_for_step_matches_bisection_oracle():
    beta = math.radians(45)
    R = stance_radius(GEOM, beta)
    for s in np.linspace(0.01, 0.19, 19):
        assert alpha_for_step(GEOM, beta, s) == pytest.approx(
            alpha_max_by_bisection(R, s), abs=1e-12)


def test_alpha_for_default_step_frozen():
    assert math.degrees(alpha_for_step(GEOM, math.radians(45), 0.19)) == pytest.approx(
        56.139088, abs=1e-6)


def test_alpha_for_step_rejects_sweep_over_60():
    with pytest.raises(InfeasibleGait) as info:
        alpha_for_step(GEOM, math.radians(45), 0.21)
    assert "60" in info.value.constraint


# -- feasibility ---------------------------------------------------------------

def test_step_longer_than_twice_x0_is_infeasible():
    H, x0 = check_step_length(GEOM, T1)
    with pytest.raises(InfeasibleGait) as info:
        type1_plan(GEOM, replace(T1, step_length=2 * x0 + 1e-6))
    assert info.value.constraint == "step_length <= 2*x0"


def test_swing_height_above_spiral_limit_is_infeasible():
    with pytest.raises(InfeasibleGait) as info:
        type1_foot_trajectory(GEOM, replace(T1, swing_height=0.2), 0.75)
    assert "spiral" in info.value.constraint


@pytest.mark.parametrize("kw", [
    {"command_period": 0.0}, {"servo_angular_speed": -1.0}, {"step_length": 0.0},
    {"swing_height": 0.0}, {"steps": -1}, {"steps": 1.5}, {"pause_ticks": -1},
])
def test_params_validation(kw):
    with pytest.raises(InfeasibleGait):
        GaitParams(**kw)


def test_wrong_gait_type_rejected():
    with pytest.raises(ValueError):
        type1_plan(GEOM, T2)
    with pytest.raises(ValueError):
        type2_plan(GEOM, T1)
    assert with_type(T1, "type2").gait_type is GaitType.TYPE2


def test_explicit_alpha_max_outside_limit():
    with pytest.raises(InfeasibleGait):
        type2_plan(GEOM, T2, alpha_max=math.radians(61))


# -- Type 1 foot path ----------------------------------------------------------

def test_type1_path_is_closed_and_continuous():
    pts = np.array([type1_foot_trajectory(GEOM, T1, u).as_array()
                    for u in np.linspace(0, 1, 2001)])
    assert np.allclose(pts[0], pts[-1], atol=1e-15)
    assert np.max(np.linalg.norm(np.diff(pts, axis=0), axis=1)) < 1e-3


def test_type1_stance_is_ground_line():
    H = robot_height(GEOM, T1.beta_init)
    for u in np.linspace(0, 0.499, 50):
        p = type1_foot_trajectory(GEOM, T1, u)
        assert p.y == -H
        assert p.x == pytest.approx(T1.step_length / 2 - T1.step_length * u / 0.5)


def test_type1_swing_apex_equals_swing_height():
    H = robot_height(GEOM, T1.beta_init)
    ys = [type1_foot_trajectory(GEOM, T1, u).y for u in np.linspace(0.5, 1.0, 20001)]
    assert max(ys) + H == pytest.approx(T1.swing_height, abs=1e-8)
    assert min(ys) >= -H - 1e-12


def test_type1_swing_has_constant_arc_speed():
    pts = np.array([type1_foot_trajectory(GEOM, T1, u).as_array()
                    for u in np.linspace(0.5, 1.0, 401)])
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    assert np.ptp(seg) / seg.mean() < 1e-4


# -- plans -----------------------------------------------------------------

def _rate_and_ticks(plan, params):
    assert np.all(np.abs(np.diff(plan.joints, axis=0)) <= params.max_joint_step)
    assert np.array_equal(plan.times, np.arange(len(plan)) * params.command_period)


def test_type1_plan_displacement_and_limits():
    p = replace(T1, steps=5)
    plan = type1_plan(GEOM, p)
    assert plan.displacement == pytest.approx(0.5, abs=1e-12)
    _rate_and_ticks(plan, p)
    assert len(plan) == 376


def test_type1_diagonal_pairs_share_stance_and_alternate():
    plan = type1_plan(GEOM, replace(T1, steps=2))
    st = plan.stance
    assert np.array_equal(st[:, PAIR_A[0]], st[:, PAIR_A[1]])
    assert np.array_equal(st[:, PAIR_B[0]], st[:, PAIR_B[1]])
    assert np.all(st[:, PAIR_A[0]] != st[:, PAIR_B[0]])


def test_type1_stance_feet_do_not_slip():
    plan = type1_plan(GEOM, replace(T1, steps=3))
    for leg in range(4):
        both = plan.stance[1:, leg] & plan.stance[:-1, leg]
        d = np.abs(np.diff(plan.feet[:, leg, 0]))[both]
        assert np.all(d < 1e-12)


def test_type1_joint_schedule_reproduces_foot_path():
    plan = type1_plan(GEOM, T1)
    H = robot_height(GEOM, T1.beta_init)
    for k in range(0, len(plan), 7):
        for leg in range(4):
            _, b, g = plan.joints[k, leg]
            p = forward_kinematics(GEOM, JointAngles(0.0, b, g))
            assert p.y + H == pytest.approx(plan.feet[k, leg, 2], abs=1e-12)
            assert FACING[leg] * p.x == pytest.approx(
                plan.feet[k, leg, 0] - plan.body[k, 0] - FACING[leg] * T1.hip_offset[0], abs=1e-12)


def test_type2_single_step_displacement_and_limits():
    plan = type2_plan(GEOM, T2)
    assert plan.displacement == pytest.approx(0.19, abs=1e-12)
    _rate_and_ticks(plan, T2)


def test_type2_shift_states_follow_compensation_law():
    plan = type2_plan(GEOM, T2)
    states = plan.shift_states()
    alpha_max = alpha_for_step(GEOM, T2.beta_init, T2.step_length)
    assert 0.0 < states[0].alpha_sh < states[-1].alpha_sh == pytest.approx(alpha_max, abs=1e-15)
    for s in states:
        assert s.xi == pytest.approx(xi_of_alpha(s.alpha_sh, T2.beta_init), abs=1e-15)
        assert s.l_p == pytest.approx(GEOM.l_ua * math.cos(T2.beta_init))


def test_type2_body_returns_to_standing_height():
    plan = type2_plan(GEOM, replace(T2, steps=2))
    H = robot_height(GEOM, T2.beta_init)
    assert plan.body_height[0] == pytest.approx(H) and plan.body_height[-1] == pytest.approx(H)
    assert plan.body_height.max() <= GEOM.l_ua + GEOM.l_fa + 1e-12


def test_type2_stance_feet_fixed_and_pairs_alternate():
    plan = type2_plan(GEOM, replace(T2, steps=2))
    for leg in range(4):
        both = plan.stance[1:, leg] & plan.stance[:-1, leg]
        assert np.all(np.abs(np.diff(plan.feet[:, leg], axis=0))[both] < 1e-12)
    assert plan.displacement == pytest.approx(0.38, abs=1e-12)
    # each pair is airborne at some point
    for leg in range(4):
        assert not plan.stance[:, leg].all()
    # never fewer than two feet down
    assert plan.stance.sum(axis=1).min() >= 2


def test_zero_steps_gives_single_standing_tick():
    for p in (replace(T1, steps=0), replace(T2, steps=0)):
        plan = make_plan(GEOM, p)
        assert len(plan) == 1 and plan.displacement == 0.0


def test_plan_arrays_read_only():
    plan = make_plan(GEOM, T1)
    with pytest.raises(ValueError):
        plan.joints[0, 0, 0] = 1.0


def test_csv_layout():
    plan = make_plan(GEOM, T2)
    text = plan.to_csv(header_comment="hash=abc")
    lines = text.splitlines()
    assert lines[0] == "# hash=abc"
    assert tuple(lines[1].split(",")) == CSV_COLUMNS
    assert len(lines) == 2 + 4 * len(plan)
    assert [l.split(",")[1] for l in lines[2:6]] == list(LEGS)
    assert "-0.000000000" not in text


@pytest.mark.parametrize("name,params", [
    ("type1_one_step.csv", replace(T1, steps=1)),
    ("type2_one_step.csv", T2),
])
def test_golden_schedules(name, params):
    got = list(csv.reader(io.StringIO(make_plan(GEOM, params).to_csv())))
    want = list(csv.reader((GOLDEN / name).open()))
    assert got[0] == want[0] and len(got) == len(want)
    for g, w in zip(got[1:], want[1:]):
        assert g[1] == w[1] and g[5] == w[5]
        num = [0, 2, 3, 4, 6, 7, 8]
        assert np.allclose([float(g[i]) for i in num], [float(w[i]) for i in num],
                           atol=2e-9, rtol=0)


def test_worked_examples():
    assert horizontal_shift(math.radians(60), 0.1) == pytest.approx(0.1, abs=1e-15)
    assert horizontal_shift(-0.3, 0.1) == horizontal_shift(0.3, 0.1)
    assert vertical_compensation(math.radians(45), math.radians(15), 0.154) == pytest.approx(
        0.03190, abs=1e-5)
    assert math.degrees(xi_of_alpha(math.radians(10), math.radians(45))) == pytest.approx(
        1.72, abs=5e-3)


def test_xi_matches_numeric_solution_of_balance():
    from scipy.optimize import brentq
    beta = math.radians(45)
    l_p = GEOM.l_ua * math.cos(beta)
    for a in np.radians([5, 20, 40, 55]):
        xi = brentq(lambda x: vertical_compensation(beta, x, GEOM.l_ua) - horizontal_shift(a, l_p),
                    0.0, math.pi / 2 - beta, xtol=1e-15)
        assert xi_of_alpha(a, beta) == pytest.approx(xi, abs=1e-12)


def test_type2_body_lifts_with_compensation():
    # The forearm stays vertical while the upperarm tilts by xi, so the hip rises.
    plan = type2_plan(GEOM, T2)
    keep = ~np.isnan(plan.alpha_sh)
    want = GEOM.l_ua * np.sin(T2.beta_init + plan.xi[keep]) + GEOM.l_fa
    assert np.allclose(plan.body_height[keep], want, atol=1e-15)


def test_type2_zero_sweep_gives_zero_displacement():
    plan = type2_plan(GEOM, T2, alpha_max=0.0)
    assert plan.displacement == 0.0
