"""Random waypoint with pause, and the per-round choice of mobile nodes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .world import Nodes, Region


@dataclass(frozen=True)
class MobilityParams:
    speed_min: float = 0.5
    speed_max: float = 1.0
    pause_min: float = 30.0
    pause_max: float = 600.0
    mobile_fraction: float = 0.3


class Phase(str, Enum):
    MOVING = "moving"
    PAUSED = "paused"


@dataclass
class WaypointState:
    destination: tuple[float, float]
    speed: float
    pause_remaining: float = 0.0
    phase: Phase = Phase.MOVING

    @property
    def current_speed(self) -> float:
        return self.speed if self.phase is Phase.MOVING else 0.0


def assign_waypoint(region: Region, rng: np.random.Generator,
                    params: MobilityParams = MobilityParams()) -> WaypointState:
    dest = region.sample(1, rng)[0]
    speed = rng.uniform(params.speed_min, params.speed_max)
    return WaypointState((float(dest[0]), float(dest[1])), float(speed))


def advance(position, state: WaypointState, dt: float, region: Region,
            rng: np.random.Generator, params: MobilityParams = MobilityParams()):
    """Move for ``dt`` seconds; returns ``(new_position, new_state)``.

    A node walks straight to its destination without overshooting, pauses
    for a uniform time in [pause_min, pause_max], then picks a new
    waypoint and keeps going with whatever time is left.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    x, y = float(position[0]), float(position[1])
    left = float(dt)
    while left > 0:
        if state.phase is Phase.PAUSED:
            if state.pause_remaining > left:
                state.pause_remaining -= left
                break
            left -= state.pause_remaining
            state = assign_waypoint(region, rng, params)
            continue
        dx, dy = state.destination[0] - x, state.destination[1] - y
        gap = math.hypot(dx, dy)
        step = state.speed * left
        if step < gap:
            x += dx / gap * step
            y += dy / gap * step
            break
        x, y = state.destination
        left -= gap / state.speed if state.speed > 0 else left
        state.phase = Phase.PAUSED
        state.pause_remaining = float(rng.uniform(params.pause_min, params.pause_max))
    return (x, y), state


def select_mobile_subset(nodes: Nodes, fraction: float, rng: np.random.Generator) -> set[int]:
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    alive = nodes.alive_ids
    k = math.floor(fraction * len(alive) + 1e-9)
    return set(int(i) for i in rng.choice(alive, size=k, replace=False)) if k else set()


class MobilityModel:
    """Waypoint state for every node; only the round's mobile subset moves."""

    def __init__(self, region: Region, nodes: Nodes, rng: np.random.Generator,
                 params: MobilityParams = MobilityParams()):
        self.region = region
        self.rng = rng
        self.params = params
        self.states = [assign_waypoint(region, rng, params) for _ in range(len(nodes))]
        self.mobile: set[int] = set()

    def new_round(self, nodes: Nodes) -> set[int]:
        self.mobile = select_mobile_subset(nodes, self.params.mobile_fraction, self.rng)
        self.refresh_speeds(nodes)
        return self.mobile

    def refresh_speeds(self, nodes: Nodes) -> None:
        nodes.speed[:] = 0.0
        for i in self.mobile:
            if nodes.alive[i]:
                nodes.speed[i] = self.states[i].current_speed

    def step(self, nodes: Nodes, dt: float) -> None:
        for i in sorted(self.mobile):
            if not nodes.alive[i]:
                continue
            pos, self.states[i] = advance(nodes.pos[i], self.states[i], dt, self.region,
                                          self.rng, self.params)
            nodes.pos[i] = pos
        self.refresh_speeds(nodes)
