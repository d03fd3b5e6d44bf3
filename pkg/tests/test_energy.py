import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beecup.energy import (CATEGORIES, MB, Activity, EnergyLedger, RadioParams, Workload,
                           apply_drain, baseline_idle_energy, bt_transfer_time, drain_node,
                           file_dissemination_energy, realtime_session_energy, wlan_transfer_time,
                           window_activity, window_drain)
from beecup.world import Cluster, Nodes, Role

TOL = 1e-9


def test_radio_defaults():
    r = RadioParams()
    assert (r.p_wlan_active, r.p_wlan_idle, r.p_bt_active, r.p_bt_idle) == (1.1, 0.88, 0.22, 0.12)
    assert (r.rate_wlan, r.rate_bt, r.r_wlan, r.r_bt) == (54e6, 2e6, 100.0, 10.0)
    with pytest.raises(ValueError):
        RadioParams(p_wlan_active=0.5)


@pytest.mark.parametrize("nbytes, expected", [(0, 0.0), (6.75e6, 1.0), (30 * MB, 4.444444444444)])
def test_wlan_time(nbytes, expected):
    assert wlan_transfer_time(nbytes) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("nbytes, expected", [(0, 0.0), (0.25e6, 1.0), (30 * MB, 120.0)])
def test_bt_time(nbytes, expected):
    assert bt_transfer_time(nbytes) == pytest.approx(expected, abs=TOL)


def test_dissemination_examples():
    assert file_dissemination_energy(Cluster(0), 6.75e6) == {0: pytest.approx(1.1, abs=TOL)}
    pair = file_dissemination_energy(Cluster(0, [1]), 0.25e6)
    assert pair[0] == pytest.approx(1.1 * 2 / 54 + 0.22, abs=TOL)
    assert round(pair[0], 4) == 0.2607
    assert pair[1] == pytest.approx(0.22, abs=TOL)
    trio = file_dissemination_energy(Cluster(0, [1, 2]), 0.25e6)
    assert trio[1] == pytest.approx(0.22 + 0.12, abs=TOL)
    assert trio[2] == pytest.approx(0.22 + 0.12, abs=TOL)


def test_realtime_examples():
    assert realtime_session_energy(Cluster(0, [1]), 0.0) == {0: 0.0, 1: 0.0}
    assert realtime_session_energy(Cluster(0), 100.0)[0] == pytest.approx(110.0, abs=TOL)
    e = realtime_session_energy(Cluster(0, [1, 2, 3]), 50.0)
    assert e[0] == pytest.approx(66.0, abs=TOL)
    assert all(e[i] == pytest.approx(11.0, abs=TOL) for i in (1, 2, 3))


@pytest.mark.parametrize("role, expected", [(Role.CH, 60.0), (Role.RN, 7.2), (Role.SINGLE, 52.8),
                                            (None, 0.0)])
def test_idle_examples(role, expected):
    assert baseline_idle_energy(role, 60.0) == pytest.approx(expected, abs=TOL)


@given(st.floats(0, 1e8), st.integers(0, 7))
def test_dissemination_linear_in_bytes(nbytes, size):
    c = Cluster(0, list(range(1, size + 1)))
    one = file_dissemination_energy(c, nbytes)
    two = file_dissemination_energy(c, 2 * nbytes)
    for k in one:
        assert two[k] == pytest.approx(2 * one[k], rel=1e-12, abs=1e-12)


def test_workload_bounds():
    rng = np.random.default_rng(0)
    for _ in range(500):
        w = Workload.draw(rng)
        assert 30 * MB <= w.file_bytes <= 60 * MB
        assert 50 <= w.realtime_seconds <= 100


def _bill(joules_per_node, n):
    return {c: (np.asarray(joules_per_node, dtype=float) if c == "wlan_idle" else np.zeros(n))
            for c in CATEGORIES}


def test_apply_drain_examples():
    nodes = Nodes([[0, 0], [1, 0], [2, 0]], residual=[100.0, 10.5, 11.0])
    ledger = EnergyLedger(3)
    died = apply_drain(nodes, _bill([30.0, 50.0, 2.0], 3), ledger)
    assert nodes.residual.tolist() == [70.0, 0.0, 9.0]
    assert sorted(died.tolist()) == [1, 2]
    assert ledger.total().tolist() == [30.0, 10.5, 2.0]
    assert not drain_node(nodes, 0, 5.0, ledger)


def test_zero_workload_head_drain():
    head_of = np.array([0, 0])
    counts = np.array([1, 0])
    act = window_activity(head_of, counts, np.array([True, True]), Workload(0.0, 0.0), 60.0)
    joules, secs = window_drain(act, 60.0)
    total = sum(joules[c] for c in CATEGORIES)
    assert total[0] == pytest.approx((0.88 + 0.12) * 60, abs=TOL)
    assert total[1] == pytest.approx(7.2, abs=TOL)


def test_window_matches_closed_forms():
    """Per-window billing equals the per-cluster formulas plus idle fill."""
    load = Workload(0.5e6, 20.0)
    head_of = np.array([0, 0, 0, 3])
    counts = np.array([2, 0, 0, 0])
    act = window_activity(head_of, counts, np.ones(4, bool), load, 60.0)
    joules, secs = window_drain(act, 60.0)
    total = sum(joules[c] for c in CATEGORIES)
    r = RadioParams()
    files = file_dissemination_energy(Cluster(0, [1, 2]), load.file_bytes)
    live = realtime_session_energy(Cluster(0, [1, 2]), load.realtime_seconds)
    tw, tb = wlan_transfer_time(load.file_bytes), bt_transfer_time(load.file_bytes)
    ch_idle = r.p_wlan_idle * (60 - tw - 20) + r.p_bt_idle * (60 - 2 * tb - 20)
    assert total[0] == pytest.approx(files[0] + live[0] + ch_idle, abs=TOL)
    rn_idle = r.p_bt_idle * (60 - 2 * tb - 20)
    assert total[1] == pytest.approx(files[1] + live[1] + rn_idle, abs=TOL)
    single = file_dissemination_energy(Cluster(3), load.file_bytes)[3]
    single += realtime_session_energy(Cluster(3), load.realtime_seconds)[3]
    assert total[3] == pytest.approx(single + r.p_wlan_idle * (60 - tw - 20), abs=TOL)


def test_window_overflow_is_clipped():
    head_of = np.zeros(8, dtype=np.int64)
    counts = np.array([7, 0, 0, 0, 0, 0, 0, 0])
    act = window_activity(head_of, counts, np.ones(8, bool), Workload(5e6, 30.0), 60.0)
    assert act.overflow == 1
    assert act.bt_active[0] == 60.0


@given(st.lists(st.tuples(st.floats(0, 200), st.floats(0, 200)), min_size=1, max_size=8),
       st.lists(st.floats(0, 5000), min_size=1, max_size=8))
def test_conservation_and_monotonicity(steps, start):
    n = len(start)
    nodes = Nodes(np.zeros((n, 2)), initial_energy=5000.0, residual=start)
    ledger = EnergyLedger(n)
    prev = nodes.residual.copy()
    for a, b in steps:
        bill = {c: np.zeros(n) for c in CATEGORIES}
        bill["wlan_active"][:] = a
        bill["bt_idle"][:] = b
        apply_drain(nodes, bill, ledger)
        assert np.all(nodes.residual <= prev)
        assert np.all(nodes.residual >= 0)
        prev = nodes.residual.copy()
    for c in CATEGORIES:
        assert np.all(ledger.joules[c] >= 0)
    assert np.allclose(ledger.total(), np.asarray(start) - nodes.residual, atol=1e-6)


def test_activity_never_exceeds_window():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = 30
        heads = rng.choice(n, 6, replace=False)
        head_of = rng.choice(heads, n)
        head_of[heads] = heads
        counts = np.bincount(head_of, minlength=n) - np.isin(np.arange(n), heads)
        act = window_activity(head_of, counts, np.ones(n, bool), Workload.draw(rng).share(0.1), 60.0)
        _, secs = window_drain(act, 60.0)
        assert np.all(secs["wlan_active"] + secs["wlan_idle"] <= 60.0 + 1e-9)
        assert np.all(secs["bt_active"] + secs["bt_idle"] <= 60.0 + 1e-9)
        assert isinstance(act, Activity)
