"""Two-phase BeeCup clustering: head-count estimation, then head selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from itertools import combinations

import numpy as np

from . import _abc_jit, _kernels
from .abc import AbcParams, AbcResult, BinaryEncoding, IndexEncoding, Problem, run_abc
from .clustering import Snapshot
from .world import R_B, S_MAX, ClusterSet, Nodes, count_single_node_clusters

WEIGHT_TOL = 1e-9


class FitnessMode(str, Enum):
    CORRECTED = "corrected"
    LITERAL = "literal"


@dataclass(frozen=True)
class FitnessWeights:
    """Weights of both fitness functions.

    ``ch_number`` weighs (single-node share, head mobility); ``ch_select``
    weighs (distance, energy, mobility, single-node share).
    """

    ch_number: tuple[float, float] = (0.5, 0.5)
    ch_select: tuple[float, float, float, float] = (0.3, 0.3, 0.2, 0.2)
    mode: FitnessMode = FitnessMode.CORRECTED

    def __post_init__(self):
        object.__setattr__(self, "mode", FitnessMode(self.mode))
        for name, ws in (("ch_number", self.ch_number), ("ch_select", self.ch_select)):
            if any(w < 0 for w in ws):
                raise ValueError(f"{name} weights must be non-negative: {ws}")
            if abs(sum(ws) - 1.0) > WEIGHT_TOL:
                raise ValueError(f"{name} weights must sum to 1 (got {sum(ws):.6g})")

    @property
    def literal(self) -> bool:
        return self.mode is FitnessMode.LITERAL


def _snapshot(nodes, base_station, r_b, s_max) -> Snapshot:
    return nodes if isinstance(nodes, Snapshot) else Snapshot(nodes, base_station, r_b, s_max)


def ch_number_cost(solution, nodes, weights: FitnessWeights = FitnessWeights(),
                   base_station=(40.0, 0.0), r_b: float = R_B, s_max: int = S_MAX) -> float:
    """Head-count fitness of a bit vector over the alive nodes (lower is better)."""
    snap = _snapshot(nodes, base_station, r_b, s_max)
    x = np.asarray(solution, dtype=np.uint8)
    if x.shape != (snap.m,):
        raise ValueError(f"solution has dimension {x.size}, expected {snap.m} alive nodes")
    w1, w2 = weights.ch_number
    return float(_kernels.ch_number_cost(
        x, snap.speed, snap.speed_total, snap.nbr_ptr, snap.nbr_idx, snap.s_max,
        w1, w2, weights.literal, snap._head, snap._count))


def ch_select_terms(solution, nodes, weights: FitnessWeights = FitnessWeights(),
                    base_station=(40.0, 0.0), r_b: float = R_B, s_max: int = S_MAX):
    """(distance, energy, mobility, single-node) terms for local head indices."""
    snap = _snapshot(nodes, base_station, r_b, s_max)
    idx = np.asarray(solution, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("need at least one head")
    if len(set(idx.tolist())) != idx.size:
        raise ValueError("duplicate head ids")
    return _kernels.ch_select_terms(
        idx, snap.pos, snap.base_dist, snap.base_total, snap.e_norm, snap.speed,
        snap.speed_total, snap.nbr_ptr, snap.nbr_idx, snap.s_max, weights.literal,
        snap._head, snap._count)


def ch_select_cost(solution, nodes, weights: FitnessWeights = FitnessWeights(),
                   base_station=(40.0, 0.0), r_b: float = R_B, s_max: int = S_MAX) -> float:
    terms = ch_select_terms(solution, nodes, weights, base_station, r_b, s_max)
    return float(sum(w * t for w, t in zip(weights.ch_select, terms)))


@dataclass
class ChCountEstimate:
    k: int  # clusters that have members
    layout: ClusterSet
    singles: int
    heads: np.ndarray  # global ids of the heads of non-empty clusters
    result: AbcResult | None = None

    @property
    def avg_cluster_size(self) -> float:
        return self.layout.avg_cluster_size()


def _binary_problem(snap: Snapshot, weights: FitnessWeights) -> Problem:
    w1, w2 = weights.ch_number
    lit = weights.literal
    speed, vt, ptr, idx, smax = snap.speed, snap.speed_total, snap.nbr_ptr, snap.nbr_idx, snap.s_max
    head, count = snap._head, snap._count
    kernel = _kernels.ch_number_cost

    def cost(x):
        return kernel(x, speed, vt, ptr, idx, smax, w1, w2, lit, head, count)

    return Problem(BinaryEncoding(snap.m), cost)


def _compiled_abc(kind: int, snap: Snapshot, dim: int, weights: FitnessWeights,
                  abc: AbcParams, initial=(), record: bool = False) -> AbcResult:
    binary = kind == _abc_jit.KIND_CHNUM
    w = np.array(weights.ch_number if binary else weights.ch_select, dtype=float)
    init = np.zeros((max(1, len(initial)), dim), dtype=np.int64)
    for i, x in enumerate(initial):
        init[i] = x
    limit = abc.limit if abc.limit is not None else abc.sn * dim
    best, cost, hist, evals, scouts, rec_old, rec_new = _abc_jit.run(
        kind, binary, dim, snap.m, abc.sn, abc.mcn, limit, abc.seed % 2**32, init, len(initial),
        0.5, 0.5, snap.pos, snap.base_dist, snap.base_total, snap.e_norm, snap.speed,
        snap.speed_total, snap.nbr_ptr, snap.nbr_idx, snap.s_max, weights.literal, w,
        snap._head, snap._count, record)
    res = AbcResult(best, float(cost), hist.tolist(), int(evals), int(scouts))
    if record:
        res.trace = np.column_stack([rec_old, rec_new])
    return res


def estimate_ch_count(nodes, weights: FitnessWeights = FitnessWeights(),
                      abc: AbcParams = AbcParams(), base_station=(40.0, 0.0),
                      r_b: float = R_B, s_max: int = S_MAX, solver: str = "compiled") -> ChCountEstimate:
    """Phase one: search head layouts to find how many clusters the field needs.

    ``solver="python"`` runs the generic :func:`beecup.abc.run_abc` instead of
    the compiled driver (same algorithm, different random stream).
    """
    snap = _snapshot(nodes, base_station, r_b, s_max)
    if snap.m == 0:
        raise ValueError("no alive nodes")
    if snap.m == 1:
        layout = snap.cluster_set(np.zeros(1, dtype=np.bool_))
        return ChCountEstimate(0, layout, 1, np.zeros(0, dtype=np.int64))
    if solver == "python":
        res = run_abc(_binary_problem(snap, weights), abc)
    else:
        res = _compiled_abc(_abc_jit.KIND_CHNUM, snap, snap.m, weights, abc)
    layout = snap.cluster_set(res.solution.astype(np.bool_))
    heads = np.array([c.head for c in layout.non_single()], dtype=np.int64)
    return ChCountEstimate(len(heads), layout, count_single_node_clusters(layout), heads, res)


def _index_problem(snap: Snapshot, k: int, weights: FitnessWeights) -> Problem:
    wd, we, wm, ws = weights.ch_select
    lit = weights.literal
    args = (snap.pos, snap.base_dist, snap.base_total, snap.e_norm, snap.speed,
            snap.speed_total, snap.nbr_ptr, snap.nbr_idx, snap.s_max, lit, wd, we, wm, ws,
            snap._head, snap._count)
    kernel = _kernels.ch_select_cost

    def cost(x):
        return kernel(x, *args)

    return Problem(IndexEncoding(k, snap.m), cost)


@dataclass
class Selection:
    clusters: ClusterSet
    heads: np.ndarray  # global ids
    cost: float
    result: AbcResult | None = None


def select_cluster_heads(nodes, k: int, weights: FitnessWeights = FitnessWeights(),
                         abc: AbcParams = AbcParams(), base_station=(40.0, 0.0),
                         r_b: float = R_B, s_max: int = S_MAX, warm_start=None,
                         solver: str = "compiled") -> Selection:
    """Phase two: choose ``k`` heads minimising the selection fitness.

    ``warm_start`` is an optional sequence of global head ids seeding one
    food source.
    """
    snap = _snapshot(nodes, base_station, r_b, s_max)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > snap.m:
        raise ValueError(f"k={k} exceeds the {snap.m} alive nodes")
    initial = []
    if warm_start is not None and len(warm_start) == k:
        initial.append(snap.local(warm_start))
    if solver == "python":
        res = run_abc(_index_problem(snap, k, weights), abc, initial=initial)
    else:
        res = _compiled_abc(_abc_jit.KIND_SELECT, snap, k, weights, abc, initial)
    is_ch = np.zeros(snap.m, dtype=np.bool_)
    is_ch[res.solution] = True
    return Selection(snap.cluster_set(is_ch), snap.ids[np.sort(res.solution)], res.cost, res)


def exhaustive_select(nodes, k: int, weights: FitnessWeights = FitnessWeights(),
                      base_station=(40.0, 0.0), r_b: float = R_B, s_max: int = S_MAX):
    """Brute-force minimum of the selection fitness over all k-subsets."""
    snap = _snapshot(nodes, base_station, r_b, s_max)
    if math.comb(snap.m, k) > 200_000:
        raise ValueError("instance too large for exhaustive search")
    best = None
    for combo in combinations(range(snap.m), k):
        c = ch_select_cost(np.array(combo), snap, weights)
        if best is None or c < best[0]:
            best = (c, combo)
    return best[0], snap.ids[list(best[1])]


def beecup_cluster(nodes: Nodes, weights: FitnessWeights = FitnessWeights(),
                   abc: AbcParams = AbcParams(), base_station=(40.0, 0.0),
                   r_b: float = R_B, s_max: int = S_MAX, seed: int = 0,
                   chnum_abc: AbcParams | None = None):
    """Run both phases; the phase-one layout warm-starts phase two.

    ``chnum_abc`` overrides the colony settings of phase one only.
    """
    snap = Snapshot(nodes, base_station, r_b, s_max)
    est = estimate_ch_count(snap, weights, replace(chnum_abc or abc, seed=seed), base_station,
                            r_b, s_max)
    if est.k == 0:
        return est, Selection(est.layout, np.zeros(0, dtype=np.int64), float("nan"))
    sel = select_cluster_heads(snap, est.k, weights, replace(abc, seed=seed + 1),
                               base_station, r_b, s_max, warm_start=est.heads)
    return est, sel
