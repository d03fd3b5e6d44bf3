"""LEACH and SEP head election on top of the shared membership rule.

Both protocols draw one uniform number per node per round, in id order, so
a SEP run without advanced nodes replays the LEACH run with the same seed.
A node may only stand again once a full epoch of ``ceil(1/p)`` rounds has
passed since its last election.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clustering import assign_members
from .world import R_B, S_MAX, ClusterSet, Nodes

NEVER = -(10**9)


def epoch_length(p: float) -> int:
    return math.ceil(1.0 / p - 1e-12)


def leach_threshold(p: float, r: int, in_g: bool) -> float:
    """Self-election probability; clamped to 1 where the formula overshoots."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    if not in_g:
        return 0.0
    denom = 1.0 - p * (r % epoch_length(p))
    return 1.0 if denom <= p else p / denom


@dataclass
class LeachState:
    p: float = 0.1
    n: int = 0
    r: int = 0
    last_elected: np.ndarray = field(default=None)

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie strictly between 0 and 1")
        if self.last_elected is None:
            self.last_elected = np.full(self.n, NEVER, dtype=np.int64)

    def eligible(self) -> np.ndarray:
        return self.r - self.last_elected >= epoch_length(self.p)


def _elect(draws, probs, window, last, r, alive):
    """Shared election step over per-node probabilities and epoch windows."""
    eligible = (r - last >= window) & alive
    thresholds = np.zeros(len(draws))
    for i in np.flatnonzero(eligible):
        thresholds[i] = leach_threshold(probs[i], r, True)
    return np.flatnonzero(eligible & (draws < thresholds))


def leach_round(nodes: Nodes, state: LeachState, rng: np.random.Generator,
                r_b: float = R_B, s_max: int = S_MAX) -> ClusterSet:
    n = len(nodes)
    draws = rng.random(n)
    probs = np.full(n, state.p)
    window = np.full(n, epoch_length(state.p))
    heads = _elect(draws, probs, window, state.last_elected, state.r, nodes.alive)
    state.last_elected[heads] = state.r
    state.r += 1
    return assign_members(heads, nodes, r_b, s_max)


def sep_probabilities(p: float, m: float, alpha_sep: float) -> tuple[float, float]:
    if not 0.0 <= m <= 1.0:
        raise ValueError("m must lie in [0, 1]")
    if alpha_sep < 0:
        raise ValueError("alpha must be non-negative")
    p_nm = p / (1.0 + alpha_sep * m)
    return p_nm, p_nm * (1.0 + alpha_sep)


@dataclass
class SepState:
    """Election state for a fixed normal/advanced split."""

    p: float
    m: float
    alpha: float
    advanced: np.ndarray  # bool per node
    r: int = 0
    last_elected: np.ndarray = field(default=None)

    def __post_init__(self):
        self.advanced = np.asarray(self.advanced, dtype=bool)
        if self.last_elected is None:
            self.last_elected = np.full(len(self.advanced), NEVER, dtype=np.int64)
        p_nm, p_adv = sep_probabilities(self.p, self.m, self.alpha)
        if not 0.0 < p_adv < 1.0:
            raise ValueError(f"advanced probability {p_adv:.4g} must lie in (0, 1)")
        self.p_nm, self.p_adv = p_nm, p_adv

    def probabilities(self) -> np.ndarray:
        return np.where(self.advanced, self.p_adv, self.p_nm)

    def windows(self) -> np.ndarray:
        return np.where(self.advanced, epoch_length(self.p_adv), epoch_length(self.p_nm))


def sep_round(nodes: Nodes, state: SepState, rng: np.random.Generator,
              r_b: float = R_B, s_max: int = S_MAX) -> ClusterSet:
    draws = rng.random(len(nodes))
    heads = _elect(draws, state.probabilities(), state.windows(), state.last_elected,
                   state.r, nodes.alive)
    state.last_elected[heads] = state.r
    state.r += 1
    return assign_members(heads, nodes, r_b, s_max)
