"""Region geometry, node state and cluster structures.

Nodes are identified by their index into the :class:`Nodes` arrays. A
:class:`ClusterSet` is a partition of the alive nodes into clusters, each
rooted at a head. Clusters flagged ``forced`` hold a node that was not
elected as head but found no cluster to join.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

R_B = 10.0  # Bluetooth cluster radius, m
S_MAX = 7  # piconet slaves per master
DEATH_FRACTION = 0.001  # dead once residual <= 0.1% of initial energy

RECT_SIDE = 80.0
CLASSROOM_BACK = RECT_SIDE / 3.0  # back edge 26.667 m gives 2/3 of the square's area
BASE_STATION = (40.0, 0.0)


def distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


class RegionKind(str, Enum):
    RECT80 = "rect80"
    CLASSROOM = "classroom"


@dataclass(frozen=True)
class Region:
    """Deployment field.

    ``rect80`` is an 80 m square. ``classroom`` is an isosceles trapezoid
    with an 80 m front edge on y = 0 and a 26.667 m back edge at y = 80,
    so it is wider (and holds more nodes) near the front.
    """

    kind: RegionKind = RegionKind.RECT80
    base_station: tuple[float, float] = BASE_STATION

    @classmethod
    def from_name(cls, name: str | RegionKind) -> "Region":
        try:
            return cls(RegionKind(name))
        except ValueError:
            raise ValueError(
                f"unknown region {name!r}; expected one of "
                f"{[k.value for k in RegionKind]}"
            ) from None

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (0.0, 0.0, RECT_SIDE, RECT_SIDE)

    @property
    def area(self) -> float:
        if self.kind is RegionKind.RECT80:
            return RECT_SIDE * RECT_SIDE
        return (RECT_SIDE + CLASSROOM_BACK) / 2.0 * RECT_SIDE

    def _x_limits(self, y):
        if self.kind is RegionKind.RECT80:
            return 0.0, RECT_SIDE
        inset = (RECT_SIDE - CLASSROOM_BACK) / 2.0 * (y / RECT_SIDE)
        return inset, RECT_SIDE - inset

    def contains(self, points) -> np.ndarray:
        """Vectorised containment test for an ``(n, 2)`` array (or one point)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        lo, hi = self._x_limits(y)
        return (y >= 0.0) & (y <= RECT_SIDE) & (x >= lo) & (x <= hi)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` uniform points by rejection from the bounding box."""
        out = np.empty((n, 2))
        filled = 0
        while filled < n:
            need = n - filled
            cand = rng.uniform(0.0, RECT_SIDE, size=(max(2 * need, 8), 2))
            cand = cand[self.contains(cand)][:need]
            out[filled:filled + len(cand)] = cand
            filled += len(cand)
        return out


def sample_positions(region: Region, n: int, seed) -> np.ndarray:
    if n <= 0:
        raise ValueError("need at least one node")
    return region.sample(n, np.random.default_rng(seed))


class Role(str, Enum):
    CH = "CH"
    RN = "RN"
    SINGLE = "single-CH"


@dataclass
class Node:
    """Convenience record for one device; simulations use :class:`Nodes`."""

    id: int
    position: tuple[float, float]
    speed: float = 0.0
    heading: float = 0.0
    residual_energy: float = 10_000.0
    initial_energy: float = 10_000.0
    role: Role = Role.SINGLE

    @property
    def alive(self) -> bool:
        return self.residual_energy > DEATH_FRACTION * self.initial_energy


class Nodes:
    """Struct-of-arrays node state owned by one simulation engine."""

    def __init__(self, positions, initial_energy=10_000.0, speed=None, residual=None):
        self.pos = np.array(positions, dtype=float).reshape(-1, 2)
        n = len(self.pos)
        self.initial = np.broadcast_to(np.asarray(initial_energy, dtype=float), (n,)).copy()
        self.residual = self.initial.copy() if residual is None else np.array(residual, dtype=float)
        self.speed = np.zeros(n) if speed is None else np.array(speed, dtype=float)
        self.alive = self.residual > DEATH_FRACTION * self.initial

    @classmethod
    def from_nodes(cls, nodes: Sequence[Node]) -> "Nodes":
        ordered = sorted(nodes, key=lambda nd: nd.id)
        if [nd.id for nd in ordered] != list(range(len(ordered))):
            raise ValueError("node ids must be exactly 0..n-1")
        return cls(
            [nd.position for nd in ordered],
            initial_energy=[nd.initial_energy for nd in ordered],
            speed=[nd.speed for nd in ordered],
            residual=[nd.residual_energy for nd in ordered],
        )

    def __len__(self) -> int:
        return len(self.pos)

    @property
    def alive_ids(self) -> np.ndarray:
        return np.flatnonzero(self.alive)

    def copy(self) -> "Nodes":
        other = Nodes.__new__(Nodes)
        other.pos = self.pos.copy()
        other.initial = self.initial.copy()
        other.residual = self.residual.copy()
        other.speed = self.speed.copy()
        other.alive = self.alive.copy()
        return other

    def update_alive(self) -> np.ndarray:
        """Refresh the alive flags; returns ids that died in this call."""
        now = self.residual > DEATH_FRACTION * self.initial
        died = np.flatnonzero(self.alive & ~now)
        self.alive &= now
        return died


@dataclass
class Cluster:
    head: int
    members: list[int] = field(default_factory=list)
    forced: bool = False

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def nodes(self) -> list[int]:
        return [self.head, *self.members]


@dataclass
class ClusterSet:
    clusters: list[Cluster] = field(default_factory=list)

    def __iter__(self):
        return iter(self.clusters)

    def __len__(self) -> int:
        return len(self.clusters)

    @property
    def heads(self) -> list[int]:
        return [c.head for c in self.clusters]

    @property
    def elected_heads(self) -> list[int]:
        return [c.head for c in self.clusters if not c.forced]

    def non_single(self) -> list[Cluster]:
        return [c for c in self.clusters if c.size > 0]

    def head_of(self, n: int) -> np.ndarray:
        """Per-node head id, or -1 for nodes not in any cluster."""
        out = np.full(n, -1, dtype=np.int64)
        for c in self.clusters:
            out[c.head] = c.head
            if c.members:
                out[c.members] = c.head
        return out

    def roles(self, n: int) -> list[Role | None]:
        out: list[Role | None] = [None] * n
        for c in self.clusters:
            out[c.head] = Role.CH if c.members else Role.SINGLE
            for m in c.members:
                out[m] = Role.RN
        return out

    def avg_cluster_size(self) -> float:
        """Mean node count (head included) over clusters that have members."""
        ns = self.non_single()
        if not ns:
            return 0.0
        return sum(c.size + 1 for c in ns) / len(ns)

    @classmethod
    def from_head_array(cls, head_of: np.ndarray, elected: Iterable[int] = ()) -> "ClusterSet":
        """Build from a per-node head array (-1 = absent).

        Nodes that head their own cluster without being ``elected`` are
        marked as forced singles.
        """
        elected = set(int(i) for i in elected)
        members: dict[int, list[int]] = {}
        for j, h in enumerate(head_of.tolist()):
            if h < 0:
                continue
            members.setdefault(h, [])
            if h != j:
                members[h].append(j)
        clusters = [
            Cluster(h, mem, forced=(h not in elected and not mem))
            for h, mem in sorted(members.items())
        ]
        return cls(clusters)


def count_single_node_clusters(cs: ClusterSet) -> int:
    return sum(1 for c in cs.clusters if c.size == 0)


@dataclass(frozen=True)
class Violation:
    constraint: str  # "coverage", "disjoint", "capacity", "radius", "dead", "head-in-members"
    ids: tuple[int, ...]
    detail: str = ""


def validate_partition(
    cs: ClusterSet,
    nodes: Nodes,
    r_b: float = R_B,
    s_max: int = S_MAX,
    tol: float = 1e-9,
) -> list[Violation]:
    """Check the cluster constraints; an empty list means they all hold.

    Coverage and disjointness apply to alive nodes, a cluster may hold at
    most ``s_max`` members, and every member must lie within ``r_b`` of its
    head.
    """
    report: list[Violation] = []
    n = len(nodes)
    seen = np.zeros(n, dtype=np.int64)
    for c in cs.clusters:
        if c.head in c.members:
            report.append(Violation("head-in-members", (c.head,)))
        ids = c.nodes
        bad = [i for i in ids if not (0 <= i < n)]
        if bad:
            report.append(Violation("coverage", tuple(bad), "unknown node id"))
            continue
        seen[ids] += 1
        dead = [i for i in ids if not nodes.alive[i]]
        if dead:
            report.append(Violation("dead", tuple(dead), f"cluster {c.head}"))
        if c.size > s_max:
            report.append(
                Violation("capacity", (c.head,), f"{c.size} members > S_max={s_max}")
            )
        if c.members:
            d = np.hypot(*(nodes.pos[c.members] - nodes.pos[c.head]).T)
            far = [m for m, dm in zip(c.members, d) if dm > r_b + tol]
            if far:
                report.append(Violation("radius", (c.head, *far), f"beyond r_B={r_b}"))
    dup = np.flatnonzero(seen > 1)
    if dup.size:
        report.append(Violation("disjoint", tuple(int(i) for i in dup)))
    missing = np.flatnonzero(nodes.alive & (seen == 0))
    if missing.size:
        report.append(Violation("coverage", tuple(int(i) for i in missing)))
    return report
