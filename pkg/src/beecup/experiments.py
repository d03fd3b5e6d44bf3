"""Sweeps over node counts: head-count tables and protocol comparisons."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .config import ConfigError, ScenarioConfig
from .engine import ScenarioResult, _streams, run_scenario
from .mobility import MobilityModel
from .protocol import estimate_ch_count
from .world import BASE_STATION, Nodes, Region

DEFAULT_COUNTS = {
    "rect80": list(range(30, 271, 30)),
    "classroom": list(range(20, 181, 20)),
}


def node_range(text: str) -> list[int]:
    """Parse ``"30..270:30"``, ``"30..90"`` (step 1) or ``"30,60,90"``."""
    text = text.strip()
    m = re.fullmatch(r"(\d+)\.\.(\d+)(?::(\d+))?", text)
    if m:
        lo, hi, step = int(m[1]), int(m[2]), int(m[3] or 1)
        if step < 1 or hi < lo:
            raise ConfigError(f"bad node range {text!r}")
        return list(range(lo, hi + 1, step))
    try:
        counts = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"bad node range {text!r}") from None
    if not counts or min(counts) < 1:
        raise ConfigError(f"bad node range {text!r}")
    return counts


@dataclass
class ChnumRow:
    region: str
    nodes: int
    non_single: list[int] = field(default_factory=list)
    single: list[int] = field(default_factory=list)
    avg_size: list[float] = field(default_factory=list)

    def mean(self, name: str) -> float:
        return float(np.mean(getattr(self, name)))


def chnum_instance(cfg: ScenarioConfig, seed: int):
    """Phase-one estimate on the field a simulation with ``seed`` would start from.

    A ``chnum_mobile_fraction`` share of nodes carries a waypoint speed.
    """
    rng = _streams(seed)
    region = Region.from_name(cfg.region)
    nodes = Nodes(region.sample(cfg.node_count, rng["topology"]), cfg.initial_energy)
    params = cfg.mobility
    params = type(params)(params.speed_min, params.speed_max, params.pause_min,
                          params.pause_max, cfg.chnum_mobile_fraction)
    MobilityModel(region, nodes, rng["mobility"], params).new_round(nodes)
    abc = cfg.abc_params(seed=int(rng["colony"].integers(2**31 - 2)), chnum=True)
    return estimate_ch_count(nodes, cfg.fitness, abc, BASE_STATION, cfg.r_b, cfg.s_max)


def chnum_sweep(cfg: ScenarioConfig, counts=None, progress=None) -> list[ChnumRow]:
    counts = counts or DEFAULT_COUNTS[cfg.region]
    rows = []
    for n in counts:
        row = ChnumRow(cfg.region, n)
        point = cfg.with_(node_count=n)
        for i in range(cfg.replicates):
            est = chnum_instance(point, cfg.seed + i)
            row.non_single.append(est.k)
            row.single.append(est.singles)
            row.avg_size.append(est.avg_cluster_size)
        rows.append(row)
        if progress:
            progress(f"{cfg.region} n={n}: avg size {row.mean('avg_size'):.2f}")
    return rows


def lifetime_config(cfg: ScenarioConfig, cap: float = 36_000.0) -> ScenarioConfig:
    """Run until the first node dies, giving up at ``cap`` seconds."""
    return cfg.with_(sim_duration=cap, stop_at_first_death=True)


def compare_sweep(cfg: ScenarioConfig, variants: dict[str, dict], counts=None,
                  progress=None) -> dict[str, dict[int, ScenarioResult]]:
    """Run every variant (label -> config overrides) at every node count."""
    counts = counts or DEFAULT_COUNTS[cfg.region]
    out: dict[str, dict[int, ScenarioResult]] = {}
    for label, overrides in variants.items():
        out[label] = {}
        for n in counts:
            out[label][n] = run_scenario(cfg.with_(node_count=n, **overrides))
            if progress:
                progress(f"{label} n={n} done")
    return out


def protocol_variants(protocols=("beecup", "leach")) -> dict[str, dict]:
    return {p: {"protocol": p} for p in protocols}


def hetero_variants(alphas=(2.0, 3.0)) -> dict[str, dict]:
    out = {}
    for a in alphas:
        out[f"beecup-a{a:g}"] = {"protocol": "beecup", "heterogeneous": True, "sep.alpha": a}
        out[f"sep-a{a:g}"] = {"protocol": "sep", "sep.alpha": a}
    return out
