import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beecup.mobility import (MobilityModel, MobilityParams, Phase, WaypointState, advance,
                             assign_waypoint, select_mobile_subset)
from beecup.world import Nodes, Region

RECT = Region.from_name("rect80")


def test_linear_motion():
    st_ = WaypointState((10.0, 0.0), 1.0)
    pos, st_ = advance((0.0, 0.0), st_, 5.0, RECT, np.random.default_rng(0))
    assert pos == pytest.approx((5.0, 0.0))
    assert st_.phase is Phase.MOVING


def test_arrival_clamps_and_pauses():
    pos, st_ = advance((9.0, 0.0), WaypointState((10.0, 0.0), 1.0), 5.0, RECT,
                       np.random.default_rng(0))
    assert pos == (10.0, 0.0)
    assert st_.phase is Phase.PAUSED
    # 4 s of the step were spent pausing already
    assert 26.0 <= st_.pause_remaining <= 596.0


def test_pause_expiry_then_moves_for_remaining_time():
    rng = np.random.default_rng(5)
    st_ = WaypointState((0.0, 0.0), 1.0, pause_remaining=40.0, phase=Phase.PAUSED)
    pos, new = advance((0.0, 0.0), st_, 60.0, RECT, rng)
    travelled = np.hypot(*pos)
    assert new.phase is Phase.MOVING
    assert travelled == pytest.approx(20.0 * new.speed)


def test_assign_waypoint_ranges_and_determinism():
    for seed in range(50):
        w = assign_waypoint(RECT, np.random.default_rng(seed))
        assert 0.5 <= w.speed <= 1.0
        assert RECT.contains([w.destination]).all()
    a = assign_waypoint(RECT, np.random.default_rng(9))
    b = assign_waypoint(RECT, np.random.default_rng(9))
    assert a == b


@pytest.mark.parametrize("fraction, n, expected", [(0.0, 120, 0), (1.0, 120, 120), (0.3, 120, 36)])
def test_mobile_subset_size(fraction, n, expected):
    nodes = Nodes(np.zeros((n, 2)))
    got = select_mobile_subset(nodes, fraction, np.random.default_rng(0))
    assert len(got) == expected


def test_mobile_subset_skips_dead():
    nodes = Nodes(np.zeros((10, 2)))
    nodes.residual[:5] = 0
    nodes.update_alive()
    got = select_mobile_subset(nodes, 1.0, np.random.default_rng(0))
    assert got == set(range(5, 10))
    with pytest.raises(ValueError):
        select_mobile_subset(nodes, 1.5, np.random.default_rng(0))


@given(st.integers(0, 10_000), st.sampled_from(["rect80", "classroom"]),
       st.lists(st.floats(1.0, 700.0), min_size=1, max_size=20))
def test_trajectories_stay_inside_and_respect_speed(seed, region, steps):
    region = Region.from_name(region)
    rng = np.random.default_rng(seed)
    pos = tuple(region.sample(1, rng)[0])
    state = assign_waypoint(region, rng)
    for dt in steps:
        prev = pos
        pos, state = advance(pos, state, dt, region, rng)
        assert region.contains([pos]).all()
        assert np.hypot(pos[0] - prev[0], pos[1] - prev[1]) <= 1.0 * dt + 1e-9
        assert state.current_speed == 0.0 or 0.5 <= state.current_speed <= 1.0


def test_model_moves_only_mobile_nodes():
    nodes = Nodes(RECT.sample(40, np.random.default_rng(1)))
    model = MobilityModel(RECT, nodes, np.random.default_rng(2), MobilityParams(mobile_fraction=0.25))
    start = nodes.pos.copy()
    mobile = model.new_round(nodes)
    assert len(mobile) == 10
    model.step(nodes, 60.0)
    moved = set(np.flatnonzero(np.any(nodes.pos != start, axis=1)).tolist())
    assert moved <= mobile
    still = [i for i in range(40) if i not in mobile]
    assert np.all(nodes.speed[still] == 0.0)


def test_model_is_deterministic():
    def trace(seed):
        nodes = Nodes(RECT.sample(20, np.random.default_rng(seed)))
        model = MobilityModel(RECT, nodes, np.random.default_rng(seed + 1))
        for _ in range(3):
            model.new_round(nodes)
            for _ in range(10):
                model.step(nodes, 60.0)
        return nodes.pos.copy()
    assert np.array_equal(trace(4), trace(4))
