"""Compare eliminate against second-chance over seeds, per protocol and node count.

Prints mean PDR and overhead for both strategies, the standard error of the
difference, and whether second-chance wins by at least one standard error.

    python scripts/trend_check.py --seeds 10 --nodes 30 40 50
"""

import argparse
import statistics
import sys

from manetsim.config import ScenarioConfig, set_value
from manetsim.harness import pooled_se, run_scenario


def collect(protocol, strategy, nodes, seeds, overrides):
    pdr, ovh = [], []
    for seed in seeds:
        cfg = ScenarioConfig(protocol=protocol, strategy=strategy, nodes=nodes, seed=seed)
        for key, value in overrides:
            set_value(cfg, key, value)
        row = run_scenario(cfg)
        pdr.append(float(row["pdr"]))
        ovh.append(float(row["overhead"]))
    return pdr, ovh


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--nodes", type=int, nargs="+", default=[30, 40, 50])
    ap.add_argument("--protocols", nargs="+", default=["aodv", "dsr"])
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    args = ap.parse_args(argv)
    overrides = [kv.split("=", 1) for kv in args.set]
    seeds = list(range(1, args.seeds + 1))
    failures = 0
    for proto in args.protocols:
        for n in args.nodes:
            pe, oe = collect(proto, "eliminate", n, seeds, overrides)
            ps, os_ = collect(proto, "second-chance", n, seeds, overrides)
            se_p, se_o = pooled_se(pe, ps), pooled_se(oe, os_)
            ok_p = statistics.fmean(ps) - statistics.fmean(pe) >= se_p and se_p >= 0
            ok_o = statistics.fmean(oe) - statistics.fmean(os_) >= se_o
            ok_p = ok_p and statistics.fmean(ps) > statistics.fmean(pe)
            ok_o = ok_o and statistics.fmean(oe) > statistics.fmean(os_)
            print(f"{proto:4s} n={n}: PDR elim={statistics.fmean(pe):.4f} "
                  f"sc={statistics.fmean(ps):.4f} se={se_p:.4f} {'PASS' if ok_p else 'FAIL'} | "
                  f"OVH elim={statistics.fmean(oe):.5f} sc={statistics.fmean(os_):.5f} "
                  f"se={se_o:.5f} {'PASS' if ok_o else 'FAIL'}")
            if not (ok_p and ok_o):
                failures += 1
                diffs = [(s, round(b - a, 4), round(c - d, 5))
                         for s, a, b, c, d in zip(seeds, pe, ps, oe, os_)]
                print(f"    seeds (seed, pdr sc-elim, ovh elim-sc): {diffs}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
