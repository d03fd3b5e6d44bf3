"""Between-round upkeep: energy prediction, head shifting and member rebalancing."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .clustering import nearest_open_head
from .world import R_B, S_MAX, Cluster, ClusterSet, Nodes

R_N = 15.0  # neighbour-head radius used for the remaining-time average, m
R_WLAN = 100.0


@dataclass(frozen=True)
class EnergyHistory:
    """Smoothed per-period consumption of one node.

    ``k`` is the index of the next period to be recorded, starting at 1.
    After recording period ``k``, ``e_last`` holds its consumption and
    ``e_average`` the mean of periods ``1..k-1`` (both equal after the first).
    """

    alpha: float = 0.5
    e_last: float = 0.0
    e_average: float = 0.0
    k: int = 1

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.k < 1:
            raise ValueError("period index starts at 1")

    def predict(self) -> float:
        return self.alpha * self.e_last + (1.0 - self.alpha) * self.e_average


def update_energy_history(h: EnergyHistory, consumed: float) -> tuple[float, EnergyHistory]:
    """Return the prediction made from ``h`` and the history after recording ``consumed``."""
    if h.k == 1:
        return consumed, replace(h, e_last=consumed, e_average=consumed, k=2)
    e_current = h.predict()
    avg = ((h.k - 2) * h.e_average + h.e_last) / (h.k - 1)
    return e_current, replace(h, e_last=consumed, e_average=avg, k=h.k + 1)


class HistoryBank:
    """Array form of :class:`EnergyHistory` for a whole network."""

    def __init__(self, n: int, alpha: float = 0.5):
        if not 0.0 <= alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        self.alpha = alpha
        self.e_last = np.zeros(n)
        self.e_average = np.zeros(n)
        self.k = 1

    def record(self, consumed: np.ndarray) -> None:
        consumed = np.asarray(consumed, dtype=float)
        if self.k == 1:
            self.e_last = consumed.copy()
            self.e_average = consumed.copy()
        else:
            self.e_average = ((self.k - 2) * self.e_average + self.e_last) / (self.k - 1)
            self.e_last = consumed.copy()
        self.k += 1

    def predict(self) -> np.ndarray:
        return self.alpha * self.e_last + (1.0 - self.alpha) * self.e_average

    def get(self, i: int) -> EnergyHistory:
        return EnergyHistory(self.alpha, float(self.e_last[i]), float(self.e_average[i]), self.k)


@dataclass(frozen=True)
class ShiftAction:
    kind: str  # "none", "promote", "join" or "stay"
    head: int
    target: int | None = None


def _take_cluster(cs: ClusterSet, head: int) -> Cluster:
    for t, c in enumerate(cs.clusters):
        if c.head == head:
            return cs.clusters.pop(t)
    raise KeyError(f"{head} heads no cluster")


def ch_shift(cs: ClusterSet, head: int, e_current: float, nodes: Nodes,
             r_b: float = R_B, s_max: int = S_MAX) -> ShiftAction:
    """Hand over a head role that the head can no longer afford; edits ``cs`` in place.

    A head whose residual covers ``e_current`` keeps its role. Otherwise its
    most charged member takes over and the rest of the cluster, old head
    included, re-joins the new head where range and capacity allow. A lone
    head instead joins the nearest open head in range, if one exists.
    """
    if nodes.residual[head] >= e_current:
        return ShiftAction("none", head)
    c = next(c for c in cs.clusters if c.head == head)
    if not c.members:
        target = nearest_open_head(head, cs, nodes, r_b, s_max)
        if target is None:
            return ShiftAction("stay", head)
        _take_cluster(cs, head)
        target.members.append(head)
        target.members.sort()
        return ShiftAction("join", head, target.head)

    _take_cluster(cs, head)
    new = max(c.members, key=lambda m: (nodes.residual[m], -m))
    fresh = Cluster(new, [])
    leftovers = []
    for x in sorted([head, *(m for m in c.members if m != new)]):
        d = math.hypot(*(nodes.pos[x] - nodes.pos[new]))
        if d < r_b and fresh.size < s_max:
            fresh.members.append(x)
        else:
            leftovers.append(Cluster(x, [], forced=True))
    cs.clusters.extend([fresh, *leftovers])
    cs.clusters.sort(key=lambda cl: cl.head)
    return ShiftAction("promote", head, new)


@dataclass(frozen=True)
class NeighborChEntry:
    ch_id: int
    distance: float
    remaining_time: float


def average_remaining_time(entries, r_n: float | None = None) -> float:
    """Mean remaining time over the table (only entries closer than ``r_n`` if given)."""
    times = [e.remaining_time for e in entries if r_n is None or e.distance < r_n]
    return float(np.mean(times)) if times else math.nan


def remaining_time(residual: float, e_current: float, tiny_period: float) -> float:
    return math.inf if e_current <= 0 else residual / e_current * tiny_period


def neighbor_table(head: int, heads, nodes: Nodes, times: dict[int, float],
                   r_wlan: float = R_WLAN) -> list[NeighborChEntry]:
    out = []
    for h in heads:
        if h == head:
            continue
        d = math.hypot(*(nodes.pos[h] - nodes.pos[head]))
        if d <= r_wlan:
            out.append(NeighborChEntry(h, d, times[h]))
    return out


@dataclass(frozen=True)
class Move:
    node: int
    source: int
    target: int


def rn_adjustment(cs: ClusterSet, nodes: Nodes, e_current: np.ndarray, tiny_period: float,
                  r_n: float = R_N, r_b: float = R_B, s_max: int = S_MAX,
                  r_wlan: float = R_WLAN) -> list[Move]:
    """Shift members away from heads that will run dry before their neighbours.

    Each head, in id order, compares its remaining time with the mean of the
    heads within ``r_n``. While it falls short it hands its farthest movable
    member to the nearest neighbour head (within ``r_n`` of the source and
    ``r_b`` of the member) that has spare capacity and more remaining time.
    A head never gives away its last member, so no new singles appear.
    Predicted consumption scales with the number of nodes a head serves.
    Edits ``cs`` in place and returns the moves made.
    """
    elected = sorted((c for c in cs.clusters if not c.forced), key=lambda cl: cl.head)
    if len(elected) < 2:
        return []
    heads = np.array([c.head for c in elected])
    hpos = nodes.pos[heads]
    dist = np.hypot(hpos[:, None, 0] - hpos[None, :, 0], hpos[:, None, 1] - hpos[None, :, 1])
    load = np.array([float(e_current[h]) for h in heads])
    resid = nodes.residual[heads]
    with np.errstate(divide="ignore"):
        times = np.where(load > 0, resid / np.where(load > 0, load, 1.0) * tiny_period, np.inf)

    def rescale(t: int, old_size: int) -> None:
        load[t] *= (1 + elected[t].size) / (1 + old_size)
        times[t] = remaining_time(resid[t], load[t], tiny_period)

    moves: list[Move] = []
    for a, c in enumerate(elected):
        near = np.flatnonzero((dist[a] < r_n) & (dist[a] <= r_wlan))
        near = near[near != a]
        if near.size == 0:
            continue
        while c.size > 1 and times[a] < times[near].mean():
            hp = nodes.pos[c.head]
            order = sorted(c.members, key=lambda m: (-math.hypot(*(nodes.pos[m] - hp)), m))
            moved = False
            for m in order:
                cand = near[(times[near] > times[a])
                            & np.array([elected[t].size < s_max for t in near])]
                if cand.size == 0:
                    break
                d = np.hypot(*(hpos[cand] - nodes.pos[m]).T)
                ok = np.flatnonzero(d < r_b)
                if ok.size == 0:
                    continue
                t = cand[ok[np.lexsort((heads[cand[ok]], d[ok]))[0]]]
                tgt = elected[t]
                c.members.remove(m)
                tgt.members.append(m)
                tgt.members.sort()
                rescale(a, c.size + 1)
                rescale(t, tgt.size - 1)
                moves.append(Move(m, c.head, tgt.head))
                moved = True
                break
            if not moved:
                break
    return moves
