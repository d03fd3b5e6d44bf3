"""CSV writers with fixed column order and locale-free number formatting."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .energy import CATEGORIES
from .engine import ScenarioResult

PER_ROUND = {
    "energy_per_round": "consumed_per_alive",
    "cumulative_energy": "mean_consumed",
    "ch_residual": "ch_residual",
    "single_clusters": "singles",
    "alive": "alive",
}


def fmt(x) -> str:
    """Shortest round-tripping text for a number; blank for missing."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def write_rows(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def emit_csv(result: ScenarioResult, outdir, prefix: str = "") -> list[Path]:
    """One file per metric family; per-round files carry a ``mean`` column."""
    outdir = Path(outdir)
    reps = result.replicates
    rep_cols = [f"rep{i}" for i in range(len(reps))]
    written = []
    for name, attr in PER_ROUND.items():
        series = [getattr(r, attr) for r in reps]
        width = max(len(s) for s in series)
        rows = []
        for k in range(width):
            vals = [s[k] if k < len(s) else None for s in series]
            present = [float(v) for v in vals if v is not None]
            rows.append([k, *vals, float(np.mean(present))])
        written.append(write_rows(outdir / f"{prefix}{name}.csv", ["round_index", *rep_cols, "mean"], rows))

    cap = result.config.sim_duration
    life = [[i, r.seed, r.first_death if r.first_death is not None else cap,
             "0" if r.first_death is not None else "1"] for i, r in enumerate(reps)]
    written.append(write_rows(outdir / f"{prefix}lifetime.csv",
                              ["replicate", "seed", "first_death_s", "survived"], life))

    rows = []
    for i, r in enumerate(reps):
        for node in range(len(r.initial)):
            parts = [r.ledger.joules[c][node] for c in CATEGORIES]
            rows.append([i, node, *parts, sum(parts), r.initial[node], r.residual[node]])
    written.append(write_rows(outdir / f"{prefix}ledger.csv",
                              ["replicate", "node", *(f"{c}_j" for c in CATEGORIES), "total_j",
                               "initial_j", "residual_j"], rows))
    return written


def write_chnum(rows, path) -> Path:
    out = []
    for r in rows:
        out.append([r.region, r.nodes, r.mean("non_single"), r.mean("single"), r.mean("avg_size"),
                    float(np.std(r.avg_size)), len(r.avg_size)])
    return write_rows(Path(path), ["region", "nodes", "non_single", "single", "avg_cluster_size",
                                   "avg_cluster_size_sd", "replicates"], out)


def compare_rows(results: dict, energy_at: float = 7200.0):
    """Summary per (label, node count) from :func:`beecup.experiments.compare_sweep`."""
    rows = []
    for label, by_n in results.items():
        for n, res in by_n.items():
            rl = res.config.recluster_interval
            reps = res.replicates
            energy = [r.consumed_at(energy_at, rl) for r in reps if len(r.mean_consumed) * rl >= energy_at]
            survived = sum(r.first_death is None for r in reps)
            rows.append([label, n, float(np.mean(energy)) if energy else None,
                         float(res.lifetimes().mean()), survived,
                         float(np.mean([np.mean(r.singles) for r in reps])),
                         float(np.mean([np.mean(r.ch_residual) for r in reps])), len(reps)])
    return rows


COMPARE_HEADER = ["protocol", "nodes", "energy_per_node_j", "lifetime_s", "survived",
                  "single_clusters", "ch_residual_j", "replicates"]


def write_compare(results: dict, path, energy_at: float = 7200.0) -> Path:
    return write_rows(Path(path), COMPARE_HEADER, compare_rows(results, energy_at))
