"""Artificial bee colony search over discrete encodings.

The colony minimises a cost. Employed bees perturb their own food source,
onlookers revisit sources in proportion to ``1 / (1 + cost)`` and a scout
restarts the most stagnant source once it exceeds the trial limit.

>>> enc = BinaryEncoding(8)
>>> res = run_abc(Problem(enc, lambda x: float(x.sum())), AbcParams(sn=6, mcn=80, seed=1))
>>> res.cost
0.0
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class AbcParams:
    sn: int = 30
    mcn: int = 200
    limit: int | None = None  # None -> sn * dimension
    seed: int = 0

    def __post_init__(self):
        if self.sn < 2:
            raise ValueError("colony size must be at least 2")
        if self.mcn < 1:
            raise ValueError("need at least one cycle")
        if self.limit is not None and self.limit < 1:
            raise ValueError("limit must be >= 1")


def neighbor_value(x_ij: float, x_kj: float, phi: float) -> float:
    return x_ij + phi * (x_ij - x_kj)


def _round_half_up(v: float) -> int:
    return math.floor(v + 0.5)


class BinaryEncoding:
    """``dim`` bits; the neighbour value is rounded and clamped to {0, 1}."""

    def __init__(self, dim: int, p_one: float | tuple[float, float] = 0.5):
        if dim < 1:
            raise ValueError("empty universe")
        self.dim = dim
        self.p_one = p_one

    def random(self, rng: random.Random) -> np.ndarray:
        p = self.p_one if not isinstance(self.p_one, tuple) else rng.uniform(*self.p_one)
        return np.array([rng.random() < p for _ in range(self.dim)], dtype=np.uint8)

    def perturb(self, x: np.ndarray, j: int, value: float, rng: random.Random) -> np.ndarray | None:
        bit = min(1, max(0, _round_half_up(value)))
        if bit == x[j]:
            return None
        v = x.copy()
        v[j] = bit
        return v

    def valid(self, x) -> bool:
        x = np.asarray(x)
        return x.shape == (self.dim,) and bool(np.all((x == 0) | (x == 1)))


class IndexEncoding:
    """``k`` distinct indices into a universe ``0..n-1``.

    A rounded value that collides with another entry is replaced by an
    index drawn uniformly from the unused ones.
    """

    def __init__(self, k: int, n: int):
        if n < 1:
            raise ValueError("empty universe")
        if not 1 <= k <= n:
            raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
        self.dim = k
        self.n = n

    def random(self, rng: random.Random) -> np.ndarray:
        return np.array(rng.sample(range(self.n), self.dim), dtype=np.int64)

    def perturb(self, x: np.ndarray, j: int, value: float, rng: random.Random) -> np.ndarray | None:
        idx = min(self.n - 1, max(0, _round_half_up(value)))
        if idx == x[j]:
            return None
        if idx in x:
            used = set(x.tolist())
            free = [i for i in range(self.n) if i not in used]
            if not free:
                return None
            idx = free[rng.randrange(len(free))]
        v = x.copy()
        v[j] = idx
        return v

    def valid(self, x) -> bool:
        x = np.asarray(x)
        return (x.shape == (self.dim,) and len(set(x.tolist())) == self.dim
                and bool(np.all((x >= 0) & (x < self.n))))


def neighbor(x_i: np.ndarray, x_k: np.ndarray, encoding, rng: random.Random,
             j: int | None = None, phi: float | None = None) -> np.ndarray:
    """One-dimension move ``x_ij + phi * (x_ij - x_kj)`` mapped into the encoding."""
    if j is None:
        j = rng.randrange(encoding.dim)
    if phi is None:
        phi = rng.uniform(-1.0, 1.0)
    v = encoding.perturb(x_i, j, neighbor_value(float(x_i[j]), float(x_k[j]), phi), rng)
    return x_i.copy() if v is None else v


def selection_probability(costs: Sequence[float]) -> np.ndarray:
    costs = np.asarray(costs, dtype=float)
    if costs.size == 0:
        raise ValueError("no candidates")
    fit = 1.0 / (1.0 + costs)
    return fit / fit.sum()


@dataclass
class Problem:
    encoding: BinaryEncoding | IndexEncoding
    cost: Callable[[np.ndarray], float]


@dataclass
class Candidate:
    solution: np.ndarray
    cost: float
    trials: int = 0


@dataclass
class AbcResult:
    solution: np.ndarray
    cost: float
    history: list[float] = field(default_factory=list)  # best cost after each cycle
    evaluations: int = 0
    scouts: int = 0
    trace: np.ndarray | None = None  # (cost before, cost after) per greedy step, when recorded


def run_abc(problem: Problem, params: AbcParams, initial: Sequence[np.ndarray] = (),
            trace: Callable[[str, int, float, float], None] | None = None) -> AbcResult:
    """Minimise ``problem.cost`` with the employed/onlooker/scout cycle.

    ``initial`` solutions replace the first random food sources (warm start).
    ``trace(phase, index, cost_before, cost_after)`` is called after every
    greedy comparison; it exists for tests.
    """
    enc = problem.encoding
    rng = random.Random(params.seed)
    limit = params.limit if params.limit is not None else params.sn * enc.dim
    evals = 0

    def evaluate(x):
        nonlocal evals
        evals += 1
        c = float(problem.cost(x))
        if not math.isfinite(c):
            raise ValueError("cost must be finite")
        return c

    colony: list[Candidate] = []
    for i in range(params.sn):
        if i < len(initial):
            x = np.array(initial[i], dtype=np.int64 if isinstance(enc, IndexEncoding) else np.uint8)
            if not enc.valid(x):
                raise ValueError("initial solution violates the encoding")
        else:
            x = enc.random(rng)
        colony.append(Candidate(x, evaluate(x)))

    best_i = min(range(params.sn), key=lambda i: colony[i].cost)
    best = Candidate(colony[best_i].solution.copy(), colony[best_i].cost)
    history: list[float] = []
    scouts = 0

    def try_improve(i: int, phase: str):
        nonlocal best
        cand = colony[i]
        k = rng.randrange(params.sn - 1)
        if k >= i:
            k += 1
        j = rng.randrange(enc.dim)
        phi = rng.uniform(-1.0, 1.0)
        v = enc.perturb(cand.solution, j, neighbor_value(float(cand.solution[j]),
                                                          float(colony[k].solution[j]), phi), rng)
        if v is None:  # identical solution, nothing to evaluate
            cand.trials += 1
            return
        c = evaluate(v)
        before = cand.cost
        if c <= cand.cost:
            if c < cand.cost:
                cand.trials = 0
            else:
                cand.trials += 1
            cand.solution, cand.cost = v, c
            if c < best.cost:
                best = Candidate(v.copy(), c)
        else:
            cand.trials += 1
        if trace is not None:
            trace(phase, i, before, cand.cost)

    for _ in range(params.mcn):
        for i in range(params.sn):
            try_improve(i, "employed")
        probs = selection_probability([c.cost for c in colony])
        cum = np.cumsum(probs).tolist()
        for _ in range(params.sn):
            r = rng.random() * cum[-1]
            i = next((t for t, edge in enumerate(cum) if r < edge), params.sn - 1)
            try_improve(i, "onlooker")
        worst = max(range(params.sn), key=lambda i: colony[i].trials)
        if colony[worst].trials >= limit:
            x = enc.random(rng)
            colony[worst] = Candidate(x, evaluate(x))
            scouts += 1
            if colony[worst].cost < best.cost:
                best = Candidate(x.copy(), colony[worst].cost)
        history.append(best.cost)

    return AbcResult(best.solution, best.cost, history, evals, scouts)
