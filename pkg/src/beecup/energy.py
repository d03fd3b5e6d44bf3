"""Dual-radio power model, traffic workload and per-node joule accounting.

Radio duty model: a head keeps WLAN and Bluetooth on, a regular node keeps
only Bluetooth on and a single-node cluster keeps only WLAN on. Any second
a powered radio is not active it draws idle power.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .world import Cluster, Nodes, Role

log = logging.getLogger(__name__)

MB = 1_000_000  # bytes


@dataclass(frozen=True)
class RadioParams:
    p_wlan_active: float = 1.100  # W
    p_wlan_idle: float = 0.880
    p_bt_active: float = 0.220
    p_bt_idle: float = 0.120
    rate_wlan: float = 54e6  # bit/s
    rate_bt: float = 2e6
    r_wlan: float = 100.0  # m
    r_bt: float = 10.0

    def __post_init__(self):
        if self.p_wlan_active < self.p_wlan_idle or self.p_bt_active < self.p_bt_idle:
            raise ValueError("active power must not be below idle power")
        if self.rate_wlan <= 0 or self.rate_bt <= 0:
            raise ValueError("bit rates must be positive")


DEFAULT_RADIO = RadioParams()


def wlan_transfer_time(nbytes: float, radio: RadioParams = DEFAULT_RADIO) -> float:
    return 8.0 * nbytes / radio.rate_wlan


def bt_transfer_time(nbytes: float, radio: RadioParams = DEFAULT_RADIO) -> float:
    return 8.0 * nbytes / radio.rate_bt


def file_dissemination_energy(cluster: Cluster, nbytes: float,
                              radio: RadioParams = DEFAULT_RADIO) -> dict[int, float]:
    """Joules to push one file from the server through a cluster.

    The head receives over WLAN and then serves its members one Bluetooth
    slot at a time; a member is active in its own slot and idles through
    its siblings' slots.
    """
    if nbytes < 0:
        raise ValueError("negative size")
    tw = wlan_transfer_time(nbytes, radio)
    tb = bt_transfer_time(nbytes, radio)
    s = cluster.size
    out = {cluster.head: radio.p_wlan_active * tw + radio.p_bt_active * s * tb}
    for m in cluster.members:
        out[m] = radio.p_bt_active * tb + radio.p_bt_idle * (s - 1) * tb
    return out


def realtime_session_energy(cluster: Cluster, duration: float,
                            radio: RadioParams = DEFAULT_RADIO) -> dict[int, float]:
    """Live stream relayed by the head and broadcast to all members at once."""
    if duration < 0:
        raise ValueError("negative duration")
    if cluster.size == 0:
        return {cluster.head: radio.p_wlan_active * duration}
    out = {cluster.head: (radio.p_wlan_active + radio.p_bt_active) * duration}
    for m in cluster.members:
        out[m] = radio.p_bt_active * duration
    return out


def baseline_idle_energy(role: Role | None, dt: float, radio: RadioParams = DEFAULT_RADIO) -> float:
    """Idle draw over ``dt`` seconds; ``role=None`` stands for a dead node."""
    if dt < 0:
        raise ValueError("negative interval")
    if role is Role.CH:
        return (radio.p_wlan_idle + radio.p_bt_idle) * dt
    if role is Role.RN:
        return radio.p_bt_idle * dt
    if role is Role.SINGLE:
        return radio.p_wlan_idle * dt
    return 0.0


@dataclass(frozen=True)
class WorkloadParams:
    file_mb_min: float = 30.0
    file_mb_max: float = 60.0
    realtime_s_min: float = 50.0
    realtime_s_max: float = 100.0
    uplink_mirror: bool = False


@dataclass(frozen=True)
class Workload:
    """Traffic of one re-clustering round."""

    file_bytes: float
    realtime_seconds: float

    @classmethod
    def draw(cls, rng: np.random.Generator, params: WorkloadParams = WorkloadParams()) -> "Workload":
        mb = rng.uniform(params.file_mb_min, params.file_mb_max)
        rt = rng.uniform(params.realtime_s_min, params.realtime_s_max)
        return cls(float(mb * MB), float(rt))

    def share(self, fraction: float) -> "Workload":
        return Workload(self.file_bytes * fraction, self.realtime_seconds * fraction)


CATEGORIES = ("wlan_active", "wlan_idle", "bt_active", "bt_idle")


@dataclass
class Activity:
    """Seconds each radio is active during one accounting window."""

    wlan_active: np.ndarray
    bt_active: np.ndarray
    wlan_on: np.ndarray
    bt_on: np.ndarray
    overflow: int = 0  # windows whose demanded airtime exceeded the window


def window_activity(head_of: np.ndarray, counts: np.ndarray, alive: np.ndarray,
                    load: Workload, dt: float, radio: RadioParams = DEFAULT_RADIO,
                    uplink_mirror: bool = False) -> Activity:
    """Per-node active seconds for one window, given a per-node head array.

    ``counts[h]`` is the member count of head ``h``. Demanded airtime above
    ``dt`` is clipped to ``dt`` and counted in ``overflow``.
    """
    n = len(head_of)
    reps = 2.0 if uplink_mirror else 1.0
    tw = wlan_transfer_time(load.file_bytes, radio) * reps
    tb = bt_transfer_time(load.file_bytes, radio) * reps
    rt = load.realtime_seconds
    ids = np.arange(n)
    present = alive & (head_of >= 0)
    is_head = present & (head_of == ids)
    is_rn = present & ~is_head
    size = np.where(is_head, counts, 0)
    with_members = is_head & (size > 0)

    wlan = np.where(is_head, tw + rt, 0.0)
    bt = np.where(with_members, size * tb + rt, 0.0)
    bt = np.where(is_rn, tb + rt, bt)
    demand = np.maximum(wlan, bt)
    over = int(np.count_nonzero(demand > dt + 1e-9))
    if over:
        log.debug("%d nodes demanded more airtime than the %.0f s window", over, dt)
    return Activity(np.minimum(wlan, dt), np.minimum(bt, dt), is_head.copy(),
                    with_members | is_rn, over)


class EnergyLedger:
    """Joules and seconds billed per node, split by radio and activity."""

    def __init__(self, n: int):
        self.joules = {c: np.zeros(n) for c in CATEGORIES}
        self.seconds = {c: np.zeros(n) for c in CATEGORIES}

    def total(self) -> np.ndarray:
        return sum(self.joules[c] for c in CATEGORIES)

    def as_rows(self):
        n = len(self.joules[CATEGORIES[0]])
        for i in range(n):
            yield i, tuple(float(self.joules[c][i]) for c in CATEGORIES)


def window_drain(act: Activity, dt: float, radio: RadioParams = DEFAULT_RADIO):
    """Joules and seconds per category for one window of length ``dt``."""
    w_idle_t = np.where(act.wlan_on, dt - act.wlan_active, 0.0)
    b_idle_t = np.where(act.bt_on, dt - act.bt_active, 0.0)
    seconds = {
        "wlan_active": act.wlan_active,
        "wlan_idle": w_idle_t,
        "bt_active": act.bt_active,
        "bt_idle": b_idle_t,
    }
    joules = {
        "wlan_active": act.wlan_active * radio.p_wlan_active,
        "wlan_idle": w_idle_t * radio.p_wlan_idle,
        "bt_active": act.bt_active * radio.p_bt_active,
        "bt_idle": b_idle_t * radio.p_bt_idle,
    }
    return joules, seconds


def apply_drain(nodes: Nodes, joules: dict[str, np.ndarray], ledger: EnergyLedger,
                seconds: dict[str, np.ndarray] | None = None) -> np.ndarray:
    """Debit every node, flooring residual energy at zero.

    When a node cannot pay the full bill its categories are scaled down
    pro rata, so the ledger always sums to initial minus residual.
    Returns the ids that died.
    """
    total = sum(joules[c] for c in CATEGORIES)
    if np.any(total < 0):
        raise ValueError("negative drain")
    paid = np.minimum(total, nodes.residual)
    scale = np.divide(paid, total, out=np.zeros_like(paid), where=total > 0)
    for c in CATEGORIES:
        ledger.joules[c] += joules[c] * scale
        if seconds is not None:
            ledger.seconds[c] += seconds[c]
    nodes.residual -= paid
    np.maximum(nodes.residual, 0.0, out=nodes.residual)
    return nodes.update_alive()


def drain_node(nodes: Nodes, i: int, joules: float, ledger: EnergyLedger,
               category: str = "wlan_idle") -> bool:
    """Single-node convenience wrapper around :func:`apply_drain`; True if it died."""
    bill = {c: np.zeros(len(nodes)) for c in CATEGORIES}
    bill[category][i] = joules
    return i in apply_drain(nodes, bill, ledger)
