"""Command-line entry point: ``manetsim run | sweep | figures``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from manetsim.config import ConfigError, ScenarioConfig, load_config, set_value
from manetsim.harness import (COLUMNS, SchemaError, figures, format_row, result_row,
                              sweep)
from manetsim.network import Simulation, write_event_log

log = logging.getLogger("manetsim")

# flag name -> config key
FLAG_KEYS = {
    "protocol": "protocol",
    "strategy": "strategy",
    "nodes": "nodes",
    "range": "range_m",
    "adversary_fraction": "adversary.fraction",
    "tolerance": "trust.tolerance",
    "duration": "duration",
}


def _split(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="INI file with [scenario] and per-module sections")
    p.add_argument("--protocol")
    p.add_argument("--strategy")
    p.add_argument("--nodes")
    p.add_argument("--range", metavar="METERS")
    p.add_argument("--adversary-fraction", metavar="F")
    p.add_argument("--tolerance")
    p.add_argument("--duration", metavar="SECONDS")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key, e.g. trust.penalty=0.2")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="manetsim",
                                 description="AODV/DSR simulator with trust-based misbehavior handling")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and print its result row")
    _add_common(run)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", metavar="PATH", help="write the CSV row here instead of stdout")
    run.add_argument("--event-log", metavar="PATH", help="dump raw packet events (TSV)")
    run.add_argument("--decision-log", metavar="PATH", help="dump trust decisions (CSV)")

    sw = sub.add_parser("sweep", help="run a grid of scenarios over seeds (comma lists allowed)")
    _add_common(sw)
    seeds = sw.add_mutually_exclusive_group()
    seeds.add_argument("--seeds", type=int, default=None, metavar="N", help="seeds 1..N")
    seeds.add_argument("--seed", help="explicit comma-separated seed list")
    sw.add_argument("--out", required=True, metavar="PATH")
    sw.add_argument("--jobs", type=int, default=1)

    fig = sub.add_parser("figures", help="derive the four figure tables from a sweep CSV")
    fig.add_argument("csv", metavar="CSV")
    fig.add_argument("--out", metavar="DIR", help="output directory (default: next to the CSV)")
    return ap


def _base_config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set {item!r}: expected KEY=VALUE")
        set_value(cfg, key.strip(), value)
    return cfg


def _cmd_run(args) -> int:
    cfg = _base_config(args)
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag)
        if value is not None:
            set_value(cfg, key, value)
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.validate()
    sim = Simulation(cfg, event_log=bool(args.event_log))
    row = result_row(sim, sim.run())
    if args.event_log:
        write_event_log(sim.events, args.event_log)
    if args.decision_log:
        sim.trust.write_decisions(args.decision_log)
    text = ",".join(COLUMNS) + "\n" + format_row(row)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_sweep(args) -> int:
    base = _base_config(args)
    grid = {}
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag)
        if value is not None:
            grid[key] = _split(value)
    if args.seed is not None:
        seeds = [int(s) for s in _split(args.seed)]
    else:
        seeds = list(range(1, (args.seeds if args.seeds is not None else 1) + 1))
    if not seeds:
        raise ConfigError("--seeds must be at least 1")
    rows = sweep(base, grid, seeds, args.out, jobs=args.jobs)
    log.info("wrote %d rows to %s", len(rows), args.out)
    return 0


def _cmd_figures(args) -> int:
    for path in figures(args.csv, args.out):
        print(path)
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("MANETSIM_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "sweep": _cmd_sweep, "figures": _cmd_figures}[args.command]
    try:
        return handler(args)
    except (ConfigError, SchemaError, OSError, ValueError) as exc:
        print(f"manetsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
