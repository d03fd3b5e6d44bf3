"""Membership assignment shared by every protocol."""

from __future__ import annotations

import numpy as np

from . import _kernels
from .world import R_B, S_MAX, ClusterSet, Cluster, Nodes


class Snapshot:
    """Frozen view of the alive nodes at one clustering instant.

    Local index ``i`` refers to global node ``ids[i]``; ids are ascending so
    local order equals id order.
    """

    def __init__(self, nodes: Nodes, base_station=(40.0, 0.0), r_b: float = R_B, s_max: int = S_MAX):
        self.ids = nodes.alive_ids
        self.m = len(self.ids)
        self.r_b = r_b
        self.s_max = s_max
        self.pos = np.ascontiguousarray(nodes.pos[self.ids])
        self.speed = np.ascontiguousarray(nodes.speed[self.ids])
        self.speed_total = float(self.speed.sum())
        e_ref = float(nodes.initial.max()) if len(nodes) else 1.0
        self.e_norm = np.ascontiguousarray(nodes.residual[self.ids] / e_ref)
        bs = np.asarray(base_station, dtype=float)
        self.base_dist = np.hypot(*(self.pos - bs).T) if self.m else np.zeros(0)
        self.base_total = float(self.base_dist.sum())
        self.nbr_ptr, self.nbr_idx = _neighbour_csr(self.pos, r_b)
        self._head = np.empty(self.m, dtype=np.int64)
        self._count = np.empty(self.m, dtype=np.int64)

    def local(self, global_ids) -> np.ndarray:
        return np.searchsorted(self.ids, np.asarray(global_ids, dtype=np.int64))

    def assign_local(self, is_ch: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
        singles = _kernels.assign(is_ch, self.nbr_ptr, self.nbr_idx, self.s_max, self._head, self._count)
        return self._head.copy(), self._count.copy(), singles

    def cluster_set(self, is_ch: np.ndarray) -> ClusterSet:
        head, _, _ = self.assign_local(np.asarray(is_ch, dtype=np.bool_))
        clusters: dict[int, Cluster] = {}
        for j in range(self.m):
            h = int(head[j])
            if h == j:
                clusters.setdefault(j, Cluster(int(self.ids[j]), [], forced=not is_ch[j]))
        for j in range(self.m):
            h = int(head[j])
            if h != j:
                clusters[h].members.append(int(self.ids[j]))
        return ClusterSet([clusters[h] for h in sorted(clusters)])


def _neighbour_csr(pos: np.ndarray, r_b: float):
    m = len(pos)
    if m == 0:
        return np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    d = np.hypot(pos[:, None, 0] - pos[None, :, 0], pos[:, None, 1] - pos[None, :, 1])
    np.fill_diagonal(d, np.inf)
    ptr = np.zeros(m + 1, dtype=np.int64)
    rows = []
    for j in range(m):
        cand = np.flatnonzero(d[j] < r_b)
        # lexsort: last key is primary -> distance, then id
        cand = cand[np.lexsort((cand, d[j, cand]))]
        rows.append(cand)
        ptr[j + 1] = ptr[j] + len(cand)
    idx = np.concatenate(rows).astype(np.int64) if ptr[-1] else np.zeros(0, dtype=np.int64)
    return ptr, idx


def assign_members(ch_ids, nodes: Nodes, r_b: float = R_B, s_max: int = S_MAX,
                   base_station=(40.0, 0.0)) -> ClusterSet:
    """Cluster the alive nodes around the given heads.

    Non-head nodes, in ascending id order, join the nearest head closer
    than ``r_b`` that still has fewer than ``s_max`` members (ties go to the
    lower head id). Nodes left over become forced single-node clusters.
    """
    snap = Snapshot(nodes, base_station, r_b, s_max)
    ch = np.asarray(sorted(set(int(c) for c in ch_ids)), dtype=np.int64)
    if ch.size and not np.all(nodes.alive[ch]):
        raise ValueError("cluster heads must be alive nodes")
    is_ch = np.zeros(snap.m, dtype=np.bool_)
    is_ch[snap.local(ch)] = True
    return snap.cluster_set(is_ch)


def nearest_open_head(node: int, cs: ClusterSet, nodes: Nodes, r_b: float = R_B,
                      s_max: int = S_MAX, exclude=()) -> Cluster | None:
    """Nearest elected head within ``r_b`` of ``node`` with spare capacity."""
    skip = set(exclude) | {node}
    open_ = [c for c in cs.clusters if not c.forced and c.size < s_max and c.head not in skip]
    if not open_:
        return None
    heads = np.array([c.head for c in open_])
    d = np.hypot(*(nodes.pos[heads] - nodes.pos[node]).T)
    ok = np.flatnonzero(d < r_b)
    if ok.size == 0:
        return None
    best = ok[np.lexsort((heads[ok], d[ok]))[0]]
    return open_[best]


def repair_membership(cs: ClusterSet, nodes: Nodes, r_b: float = R_B, s_max: int = S_MAX) -> ClusterSet:
    """Restore the cluster constraints after movement or deaths.

    Dead nodes are dropped. A dead head's members and members that drifted
    out of range are released; released nodes and forced singles then join
    the nearest open head, or stay (become) forced singles.
    """
    kept: list[Cluster] = []
    loose: list[int] = []
    alive = nodes.alive
    for c in cs.clusters:
        if not alive[c.head]:
            loose.extend(m for m in c.members if alive[m])
            continue
        if c.forced:
            loose.append(c.head)
            continue
        mem = np.array(c.members, dtype=np.int64)
        if mem.size:
            mem = mem[alive[mem]]
            near = np.hypot(*(nodes.pos[mem] - nodes.pos[c.head]).T) <= r_b
            loose.extend(mem[~near].tolist())
            mem = mem[near]
        kept.append(Cluster(c.head, mem.tolist()))
    out = ClusterSet(kept)
    if loose:
        heads = np.array([c.head for c in kept], dtype=np.int64)
        sizes = np.array([c.size for c in kept], dtype=np.int64)
        for j in sorted(loose):
            t = -1
            if heads.size:
                d = np.hypot(*(nodes.pos[heads] - nodes.pos[j]).T)
                ok = np.flatnonzero((d < r_b) & (sizes < s_max))
                if ok.size:
                    t = ok[np.lexsort((heads[ok], d[ok]))[0]]
            if t < 0:
                out.clusters.append(Cluster(j, [], forced=True))
            else:
                kept[t].members.append(j)
                sizes[t] += 1
        for c in kept:
            c.members.sort()
    out.clusters.sort(key=lambda c: c.head)
    return out
