"""Command-line front end: ``beecup {chnum,run,compare,sweep}``.

Any config key can be given as a long flag of the same dotted name, for
example ``--sep.alpha 3`` or ``--abc.chnum_mcn 2000``.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, known_keys, parse_config
from .engine import run_scenario
from .experiments import (DEFAULT_COUNTS, chnum_sweep, compare_sweep, lifetime_config,
                          node_range, protocol_variants)
from .output import (COMPARE_HEADER, compare_rows, emit_csv, fmt, write_chnum, write_compare,
                     write_rows)

OUTPUT_ENV = "BEECUP_OUTPUT_DIR"
EXIT_CONFIG = 2
EXIT_IO = 3


def _config_flags(extra: list[str]) -> dict[str, str]:
    """Turn leftover ``--key value`` / ``--key=value`` tokens into overrides."""
    keys = known_keys()
    out: dict[str, str] = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        name, eq, value = tok[2:].partition("=")
        name = name.replace("-", "_")
        if name not in keys:
            raise ConfigError(f"unknown option --{name}")
        if not eq:
            if i + 1 < len(extra) and not extra[i + 1].startswith("--"):
                value = extra[i + 1]
                i += 1
            else:
                value = "true"
        out[name] = value
        i += 1
    return out


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="beecup", description=__doc__.splitlines()[0], allow_abbrev=False)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML file with scenario settings")
        p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./beecup-out)")

    p = sub.add_parser("chnum", allow_abbrev=False, help="head-count table over node counts")
    common(p)
    p.add_argument("--nodes", help="node counts, e.g. 30..270:30")

    p = sub.add_parser("run", allow_abbrev=False, help="one scenario, all replicates")
    common(p)
    p.add_argument("--nodes", type=int, help="node count")

    p = sub.add_parser("compare", allow_abbrev=False, help="protocols side by side over node counts")
    common(p)
    p.add_argument("--nodes", help="node counts, e.g. 20..180:20")
    p.add_argument("--protocols", default="beecup,leach,sep")
    p.add_argument("--lifetime-cap", type=float, default=36_000.0,
                   help="run until first death, at most this many seconds (0: fixed duration)")

    p = sub.add_parser("sweep", allow_abbrev=False, help="grid over arbitrary config keys")
    common(p)
    p.add_argument("--axis", action="append", required=True,
                   help="KEY=V1,V2,... (repeat for a grid)")
    return ap


def _outdir(args) -> Path:
    return Path(args.out or os.environ.get(OUTPUT_ENV) or "beecup-out")


def _table(header, rows) -> str:
    cells = [[str(h) for h in header]] + [[v if isinstance(v, str) else fmt_short(v) for v in r]
                                          for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells)


def fmt_short(v) -> str:
    if isinstance(v, float):
        return f"{v:.2f}"
    return fmt(v)


def cmd_chnum(args, overrides) -> None:
    cfg = parse_config(args.config, overrides)
    counts = node_range(args.nodes) if args.nodes else DEFAULT_COUNTS[cfg.region]
    rows = chnum_sweep(cfg, counts, progress=logging.info)
    path = write_chnum(rows, _outdir(args) / f"chnum_{cfg.region}.csv")
    print(_table(["nodes", "non-single", "single", "avg size"],
                 [[r.nodes, r.mean("non_single"), r.mean("single"), r.mean("avg_size")] for r in rows]))
    print(f"wrote {path}")


def cmd_run(args, overrides) -> None:
    if args.nodes is not None:
        overrides["node_count"] = args.nodes
    cfg = parse_config(args.config, overrides)
    res = run_scenario(cfg)
    files = emit_csv(res, _outdir(args), prefix=f"{cfg.protocol}_{cfg.region}_{cfg.node_count}_")
    reps = res.replicates
    print(f"{cfg.protocol} on {cfg.region}, {cfg.node_count} nodes, {len(reps)} replicates")
    print(f"  mean energy per node at end: {res.mean('mean_consumed')[-1]:.1f} J")
    print(f"  mean single-node clusters per round: {res.mean('singles').mean():.2f}")
    dead = [r.first_death for r in reps if r.first_death is not None]
    print(f"  runs with a death: {len(dead)}/{len(reps)}"
          + (f", mean first death {sum(dead) / len(dead):.0f} s" if dead else ""))
    print(f"wrote {len(files)} files to {_outdir(args)}")


def cmd_compare(args, overrides) -> None:
    cfg = parse_config(args.config, overrides)
    if args.lifetime_cap:
        cfg = lifetime_config(cfg, args.lifetime_cap)
    counts = node_range(args.nodes) if args.nodes else DEFAULT_COUNTS[cfg.region]
    protos = [p.strip() for p in args.protocols.split(",") if p.strip()]
    for p in protos:
        cfg.with_(protocol=p)  # reject unknown names before running anything
    results = compare_sweep(cfg, protocol_variants(protos), counts, progress=logging.info)
    path = write_compare(results, _outdir(args) / f"compare_{cfg.region}.csv")
    print(_table(COMPARE_HEADER[:-1], [r[:-1] for r in compare_rows(results)]))
    print(f"wrote {path}")


def cmd_sweep(args, overrides) -> None:
    base = parse_config(args.config, overrides)
    axes = []
    for spec in args.axis:
        key, eq, vals = spec.partition("=")
        if not eq or not vals:
            raise ConfigError(f"bad axis {spec!r}; expected KEY=V1,V2")
        axes.append((key.strip(), [v.strip() for v in vals.split(";" if ";" in vals else ",")]))
    rows = []
    for combo in itertools.product(*(vals for _, vals in axes)):
        point = dict(zip((k for k, _ in axes), combo))
        cfg = base.with_(**point)
        res = run_scenario(cfg)
        rows.append([*combo, float(res.mean("mean_consumed")[-1]), float(res.lifetimes().mean()),
                     float(res.mean("singles").mean())])
        logging.info("sweep point %s done", point)
    header = [k for k, _ in axes] + ["energy_per_node_j", "lifetime_s", "single_clusters"]
    path = write_rows(_outdir(args) / "sweep.csv", header, rows)
    print(_table(header, rows))
    print(f"wrote {path}")


COMMANDS = {"chnum": cmd_chnum, "run": cmd_run, "compare": cmd_compare, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args, extra = _parser().parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args, _config_flags(extra))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
