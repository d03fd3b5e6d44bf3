"""Round-driven simulation of one scenario.

Each round re-clusters the network, then steps through its tiny periods:
mobility, workload and idle billing, maintenance (BeeCup only) and death
pruning. Random streams for topology, mobility, workload, node classes and
protocol decisions are independent, so two protocols run on the same seed
see the same field, the same movement and the same traffic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .baselines import LeachState, SepState, leach_round, sep_round
from .clustering import repair_membership
from .config import ScenarioConfig
from .energy import EnergyLedger, Workload, apply_drain, window_activity, window_drain
from .maintenance import HistoryBank, ch_shift, rn_adjustment
from .mobility import MobilityModel
from .protocol import beecup_cluster
from .world import BASE_STATION, ClusterSet, Nodes, Region, count_single_node_clusters, validate_partition

log = logging.getLogger(__name__)


class InvariantError(AssertionError):
    """Raised in validating runs when a cluster set breaks a constraint."""


@dataclass
class MetricsSeries:
    """One replicate: per-round metrics plus end-of-run state."""

    seed: int
    consumed_per_alive: list[float] = field(default_factory=list)  # J this round / alive at its start
    mean_consumed: list[float] = field(default_factory=list)  # cumulative J per node at round end
    ch_residual: list[float] = field(default_factory=list)  # mean head residual right after clustering
    singles: list[int] = field(default_factory=list)
    clusters: list[int] = field(default_factory=list)
    alive: list[int] = field(default_factory=list)  # at round end
    first_death: float | None = None  # None means the network survived
    ledger: EnergyLedger | None = None
    initial: np.ndarray | None = None
    residual: np.ndarray | None = None
    overflow_windows: int = 0
    maintenance: dict[str, int] = field(default_factory=dict)

    @property
    def rounds(self) -> int:
        return len(self.singles)

    def consumed_at(self, t: float, round_length: float) -> float:
        """Cumulative mean consumption per node at the round boundary ``t``."""
        r = round(t / round_length)
        if not 1 <= r <= len(self.mean_consumed):
            raise ValueError(f"no round boundary at {t} s")
        return self.mean_consumed[r - 1]


def first_death_time(series: MetricsSeries) -> float | None:
    return series.first_death


def _streams(seed: int) -> dict[str, np.random.Generator]:
    names = ("topology", "mobility", "workload", "classes", "election", "colony")
    kids = np.random.SeedSequence(seed).spawn(len(names))
    return {k: np.random.default_rng(s) for k, s in zip(names, kids)}


def advanced_mask(n: int, m: float, rng: np.random.Generator) -> np.ndarray:
    k = int(np.floor(m * n + 0.5))
    mask = np.zeros(n, dtype=bool)
    mask[rng.choice(n, size=k, replace=False)] = True
    return mask


class Simulation:
    """Mutable state of one replicate."""

    def __init__(self, cfg: ScenarioConfig, seed: int | None = None):
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        self.rng = _streams(self.seed)
        self.region = Region.from_name(cfg.region)
        n = cfg.node_count
        pos = self.region.sample(n, self.rng["topology"])
        self.advanced = np.zeros(n, dtype=bool)
        energy = np.full(n, cfg.initial_energy)
        if cfg.is_heterogeneous:
            self.advanced = advanced_mask(n, cfg.sep.m, self.rng["classes"])
            energy[self.advanced] *= 1.0 + cfg.sep.alpha
        self.nodes = Nodes(pos, initial_energy=energy)
        self.mobility = MobilityModel(self.region, self.nodes, self.rng["mobility"], cfg.mobility)
        self.ledger = EnergyLedger(n)
        self.history = HistoryBank(n, cfg.ewma_alpha)
        self.radio = cfg.radio
        self.weights = cfg.fitness
        self.clusters = ClusterSet()
        self.time = 0.0
        self.round_index = 0
        if cfg.protocol == "leach":
            self.election = LeachState(cfg.leach.p, n)
        elif cfg.protocol == "sep":
            self.election = SepState(cfg.sep.p, cfg.sep.m, cfg.sep.alpha, self.advanced)
        self.series = MetricsSeries(self.seed, initial=self.nodes.initial.copy())
        self.series.maintenance = {"promote": 0, "join": 0, "moves": 0}

    def _check(self, where: str) -> None:
        if not self.cfg.validate:
            return
        bad = validate_partition(self.clusters, self.nodes, self.cfg.r_b, self.cfg.s_max)
        if bad:
            raise InvariantError(f"{where} at t={self.time:g}: {bad}")

    def recluster(self) -> ClusterSet:
        cfg = self.cfg
        if self.cfg.protocol == "beecup":
            seed = int(self.rng["colony"].integers(2**31 - 2))
            est, sel = beecup_cluster(
                self.nodes, self.weights, cfg.abc_params(), BASE_STATION, cfg.r_b, cfg.s_max,
                seed=seed, chnum_abc=cfg.abc_params(chnum=True))
            return sel.clusters
        if self.cfg.protocol == "leach":
            return leach_round(self.nodes, self.election, self.rng["election"], cfg.r_b, cfg.s_max)
        return sep_round(self.nodes, self.election, self.rng["election"], cfg.r_b, cfg.s_max)

    def _maintain(self, consumed: np.ndarray) -> None:
        cfg = self.cfg
        self.history.record(consumed)
        e_current = self.history.predict()
        for head in list(self.clusters.heads):
            if not any(c.head == head for c in self.clusters.clusters):
                continue
            act = ch_shift(self.clusters, head, float(e_current[head]), self.nodes, cfg.r_b, cfg.s_max)
            if act.kind in ("promote", "join"):
                self.series.maintenance[act.kind] += 1
        moves = rn_adjustment(self.clusters, self.nodes, e_current, cfg.tiny_period, cfg.r_n,
                              cfg.r_b, cfg.s_max, cfg.r_wlan)
        self.series.maintenance["moves"] += len(moves)

    def run_round(self) -> None:
        cfg, nodes, s = self.cfg, self.nodes, self.series
        dt = cfg.tiny_period
        start_alive = int(nodes.alive.sum())
        start_residual = nodes.residual.sum()
        if start_alive == 0:
            self.clusters = ClusterSet()
            s.consumed_per_alive.append(0.0)
            s.mean_consumed.append(float(np.mean(nodes.initial - nodes.residual)))
            s.ch_residual.append(0.0)
            s.singles.append(0)
            s.clusters.append(0)
            s.alive.append(0)
            self.time += cfg.recluster_interval
            self.round_index += 1
            return

        self.mobility.new_round(nodes)
        self.clusters = self.recluster()
        self._check("clustering")
        heads = [c.head for c in self.clusters.non_single()]
        s.ch_residual.append(float(nodes.residual[heads].mean()) if heads else 0.0)
        s.singles.append(count_single_node_clusters(self.clusters))
        s.clusters.append(len(self.clusters))

        load = Workload.draw(self.rng["workload"], cfg.workload)
        share = load.share(1.0 / cfg.periods_per_round)
        for _ in range(cfg.periods_per_round):
            self.mobility.step(nodes, dt)
            self.clusters = repair_membership(self.clusters, nodes, cfg.r_b, cfg.s_max)
            self._check("mobility")
            head_of = self.clusters.head_of(len(nodes))
            counts = np.zeros(len(nodes), dtype=np.int64)
            for c in self.clusters.clusters:
                counts[c.head] = c.size
            act = window_activity(head_of, counts, nodes.alive, share, dt, self.radio,
                                  cfg.uplink_mirror)
            s.overflow_windows += act.overflow
            joules, secs = window_drain(act, dt, self.radio)
            before = nodes.residual.copy()
            died = apply_drain(nodes, joules, self.ledger, secs)
            self.time += dt
            if cfg.protocol == "beecup":
                self._maintain(before - nodes.residual)
            if died.size:
                if s.first_death is None:
                    s.first_death = self.time
                self.clusters = repair_membership(self.clusters, nodes, cfg.r_b, cfg.s_max)
            self._check("maintenance and pruning")
            if cfg.stop_at_first_death and s.first_death is not None:
                break

        s.consumed_per_alive.append(float((start_residual - nodes.residual.sum()) / start_alive))
        s.mean_consumed.append(float(np.mean(nodes.initial - nodes.residual)))
        s.alive.append(int(nodes.alive.sum()))
        self.round_index += 1

    def run(self) -> MetricsSeries:
        for _ in range(self.cfg.rounds):
            self.run_round()
            if self.cfg.stop_at_first_death and self.series.first_death is not None:
                break
        if self.series.overflow_windows:
            log.warning("seed %d: %d node-periods demanded more airtime than a tiny period; clipped",
                        self.seed, self.series.overflow_windows)
        self.series.ledger = self.ledger
        self.series.residual = self.nodes.residual.copy()
        return self.series


def run_once(cfg: ScenarioConfig, seed: int | None = None) -> MetricsSeries:
    return Simulation(cfg, seed).run()


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    replicates: list[MetricsSeries]

    def mean(self, metric: str) -> np.ndarray:
        """Per-round mean over replicates (rounds a replicate lacks are skipped)."""
        rows = [getattr(r, metric) for r in self.replicates]
        width = max(len(r) for r in rows)
        grid = np.full((len(rows), width), np.nan)
        for i, r in enumerate(rows):
            grid[i, : len(r)] = r
        return np.nanmean(grid, axis=0)

    def lifetimes(self, censor: float | None = None) -> np.ndarray:
        """First-death times; survivors count as ``censor`` (default: the horizon)."""
        cap = self.config.sim_duration if censor is None else censor
        return np.array([cap if r.first_death is None else r.first_death for r in self.replicates])


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    return ScenarioResult(cfg, [run_once(cfg, cfg.seed + i) for i in range(cfg.replicates)])
