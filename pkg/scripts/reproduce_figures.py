"""Run the default comparison sweep and derive the four figure tables.

The sweep covers both protocols, all three strategies and 30/40/50 nodes at
the default adversary fraction.  With ten seeds that is 180 runs.

    python scripts/reproduce_figures.py --seeds 10 --out results/
"""

import argparse
from pathlib import Path

from manetsim.config import ScenarioConfig
from manetsim.harness import figures, sweep


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--out", default="results")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = {"protocol": ["aodv", "dsr"],
            "strategy": ["none", "eliminate", "second-chance"],
            "nodes": ["30", "40", "50"]}
    csv_path = out / "sweep.csv"
    rows = sweep(ScenarioConfig(), grid, range(1, args.seeds + 1), csv_path, jobs=args.jobs)
    print(f"{len(rows)} rows -> {csv_path}")
    for path in figures(csv_path, out):
        print(path)


if __name__ == "__main__":
    main()
