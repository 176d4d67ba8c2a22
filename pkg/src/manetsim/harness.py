"""Single runs, parameter sweeps to CSV, and the four figure tables."""

from __future__ import annotations

import copy
import csv
import io
import itertools
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, Sequence

from manetsim.config import CONFIG_COLUMNS, ScenarioConfig, flatten, set_value
from manetsim.network import Simulation
from manetsim.trust import Status

log = logging.getLogger(__name__)

METRIC_COLUMNS = ("pdr", "overhead", "overhead_conv", "avg_delay", "throughput",
                  "data_sent", "data_delivered", "data_dropped",
                  "control_transmitted", "control_received", "control_rejected",
                  "eliminated", "reintegrated")
COLUMNS = CONFIG_COLUMNS + METRIC_COLUMNS
SUMMARY_MARKER = "# summary"
SUMMARY_METRICS = ("pdr", "overhead", "overhead_conv", "avg_delay", "throughput")


class SchemaError(ValueError):
    pass


def _num(value) -> str:
    if value is None:
        return ""
    return repr(float(value)) if isinstance(value, float) else str(value)


def run_scenario(cfg: ScenarioConfig) -> dict[str, str]:
    """Run one scenario and return its result row (column -> text)."""
    sim = Simulation(cfg)
    return result_row(sim, sim.run())


def result_row(sim: Simulation, report) -> dict[str, str]:
    cfg = sim.cfg
    statuses = [r.status for r in sim.trust.records.values()]
    row = flatten(cfg)
    row.update({
        "pdr": _num(report.pdr),
        "overhead": _num(report.overhead),
        "overhead_conv": _num(report.overhead_conv),
        "avg_delay": _num(report.avg_delay),
        "throughput": _num(report.throughput),
        "data_sent": str(report.data_sent),
        "data_delivered": str(report.data_delivered),
        "data_dropped": str(report.data_dropped),
        "control_transmitted": str(report.control_transmitted),
        "control_received": str(report.control_received),
        "control_rejected": str(report.control_rejected),
        "eliminated": str(statuses.count(Status.ELIMINATED)),
        "reintegrated": str(sum(1 for r in sim.trust.records.values() if r.chances_used)),
    })
    return row


def format_row(row: dict[str, str]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow([row[c] for c in COLUMNS])
    return buf.getvalue()


def expand_grid(base: ScenarioConfig, grid: dict[str, Sequence[str]],
                seeds: Iterable[int]) -> list[tuple[tuple[str, ...], ScenarioConfig]]:
    """Configs in grid order (first key outermost), seeds innermost."""
    keys = list(grid)
    out = []
    seeds = list(seeds)
    for combo in itertools.product(*(grid[k] for k in keys)):
        for seed in seeds:
            cfg = copy.deepcopy(base)
            for k, v in zip(keys, combo):
                set_value(cfg, k, str(v))
            cfg.seed = int(seed)
            cfg.validate()
            out.append((tuple(str(v) for v in combo), cfg))
    return out


def _stats(values: list[float]) -> tuple[str, str]:
    if not values:
        return "", ""
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else None
    return _num(mean), _num(std)


def summarize(rows: list[dict[str, str]], keys: Sequence[str]) -> list[dict[str, str]]:
    groups: dict[tuple, list[dict[str, str]]] = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in keys), []).append(row)
    out = []
    for combo, members in groups.items():
        entry = dict(zip(keys, combo))
        entry["n"] = str(len(members))
        for m in SUMMARY_METRICS:
            vals = [float(r[m]) for r in members if r[m] != ""]
            entry[f"{m}_mean"], entry[f"{m}_std"] = _stats(vals)
        out.append(entry)
    return out


def sweep(base: ScenarioConfig, grid: dict[str, Sequence[str]], seeds: Sequence[int],
          out_path, jobs: int = 1) -> list[dict[str, str]]:
    """Run every grid point for every seed and write the CSV plus a summary block."""
    if not grid and not seeds:
        raise ValueError("empty sweep")
    if not seeds:
        raise ValueError("seed list must not be empty")
    out_path = Path(out_path)
    try:
        fh = open(out_path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {out_path}: {exc}") from exc
    points = expand_grid(base, grid, seeds)
    keys = list(grid)
    rows: list[dict[str, str]] = []
    with fh:
        fh.write(",".join(COLUMNS) + "\n")
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = pool.map(run_scenario, [cfg for _, cfg in points])
                for row in results:
                    rows.append(row)
                    fh.write(format_row(row))
        else:
            for i, (_, cfg) in enumerate(points):
                log.info("run %d/%d: %s %s nodes=%d seed=%d", i + 1, len(points),
                         cfg.protocol, cfg.strategy, cfg.nodes, cfg.seed)
                row = run_scenario(cfg)
                rows.append(row)
                fh.write(format_row(row))
                fh.flush()
        summary = summarize(rows, keys)
        fields = keys + ["n"] + [f"{m}_{s}" for m in SUMMARY_METRICS for s in ("mean", "std")]
        fh.write(SUMMARY_MARKER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for entry in summary:
            w.writerow([entry[f] for f in fields])
    return rows


def read_sweep(path) -> tuple[list[dict[str, str]], list[dict[str, str]]]:
    """Parse a sweep CSV into (run rows, summary rows)."""
    with open(path, newline="") as fh:
        text = fh.read()
    main, _, summary = text.partition(SUMMARY_MARKER + "\n")
    rows = list(csv.DictReader(io.StringIO(main)))
    summ = list(csv.DictReader(io.StringIO(summary))) if summary else []
    return rows, summ


FIGURES = (
    ("fig1_pdr_presence.tsv", "pdr", "none",
     "PDR vs nodes, malicious nodes present (strategy=none)"),
    ("fig2_pdr_absence.tsv", "pdr", "eliminate",
     "PDR vs nodes, malicious nodes eliminated (strategy=eliminate)"),
    ("fig3_overhead_presence.tsv", "overhead", "none",
     "overhead (control tx / control rx) vs nodes, malicious nodes present"),
    ("fig4_overhead_absence.tsv", "overhead", "eliminate",
     "overhead (control tx / control rx) vs nodes, malicious nodes eliminated"),
)
REQUIRED = ("protocol", "strategy", "nodes", "adversary.fraction", "pdr", "overhead")


def figures(csv_path, out_dir=None) -> list[Path]:
    """Write the four figure tables next to ``csv_path`` (or into ``out_dir``)."""
    rows, _ = read_sweep(csv_path)
    header = set(rows[0]) if rows else set()
    missing = [c for c in REQUIRED if c not in header]
    if missing:
        raise SchemaError(f"{csv_path}: missing required columns {missing}")
    out_dir = Path(out_dir) if out_dir is not None else Path(csv_path).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    malicious = [r for r in rows if float(r["adversary.fraction"]) > 0]
    fractions = sorted({r["adversary.fraction"] for r in malicious})
    written = []
    for name, metric, strategy, title in FIGURES:
        lines = [f"# {title}",
                 "# assumption: one series per protocol, adversary fraction(s) "
                 f"{', '.join(fractions) or 'none found'}",
                 "protocol\tnodes\tmean\tstd\tn"]
        for proto in ("aodv", "dsr"):
            subset = [r for r in malicious if r["protocol"] == proto and r["strategy"] == strategy]
            if not subset:
                log.warning("%s: no %s rows with strategy=%s; series omitted",
                            name, proto, strategy)
                continue
            for nodes in sorted({int(r["nodes"]) for r in subset}):
                vals = [float(r[metric]) for r in subset
                        if int(r["nodes"]) == nodes and r[metric] != ""]
                mean, std = _stats(vals)
                lines.append(f"{proto}\t{nodes}\t{mean}\t{std}\t{len(vals)}")
        path = out_dir / name
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


def pooled_se(a: Sequence[float], b: Sequence[float]) -> float:
    """Standard error of the difference of two sample means."""
    return math.sqrt(statistics.variance(a) / len(a) + statistics.variance(b) / len(b))
