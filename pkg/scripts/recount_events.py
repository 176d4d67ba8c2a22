"""Recompute PDR and overhead from a raw event log and compare with a result row.

    manetsim run --seed 3 --event-log ev.tsv --out row.csv
    python scripts/recount_events.py ev.tsv row.csv

Exits non-zero on any mismatch.  Only the log is trusted here; nothing from
the simulator is imported.
"""

import argparse
import csv
import sys
from collections import Counter


def recount(path):
    kinds = Counter()
    with open(path) as fh:
        for line in fh:
            fields = line.rstrip("\n").split("\t")
            if fields[0] == "ctrl_rx" and fields[5] != "True":
                kinds["ctrl_rejected"] += 1
            else:
                kinds[fields[0]] += 1
    sent, delivered = kinds["data_orig"], kinds["data_deliver"]
    tx, rx = kinds["ctrl_tx"], kinds["ctrl_rx"]
    return {
        "data_sent": sent,
        "data_delivered": delivered,
        "data_dropped": kinds["data_drop"],
        "control_transmitted": tx,
        "control_received": rx,
        "pdr": delivered / sent if sent else None,
        "overhead": tx / rx if rx else None,
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("event_log")
    ap.add_argument("row_csv")
    args = ap.parse_args(argv)
    counted = recount(args.event_log)
    with open(args.row_csv, newline="") as fh:
        row = next(csv.DictReader(fh))
    failures = 0
    for key, value in counted.items():
        text = "" if value is None else repr(float(value)) if isinstance(value, float) else str(value)
        ok = text == row[key]
        failures += not ok
        print(f"{key:20s} log={text:24s} row={row[key]:24s} {'ok' if ok else 'MISMATCH'}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
