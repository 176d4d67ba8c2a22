"""Independent reference computations used as test oracles."""

from __future__ import annotations

import math
from collections import Counter, deque


def brute_neighbors(points, radius):
    """All-pairs unit-disk adjacency, one set per node."""
    out = [set() for _ in points]
    for i, (xi, yi) in enumerate(points):
        for j, (xj, yj) in enumerate(points):
            if i != j and math.hypot(xi - xj, yi - yj) <= radius:
                out[i].add(j)
    return out


def bfs_hops(adjacency, src, dst):
    """Shortest hop count from src to dst, or None if unreachable."""
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            return dist[u]
        for v in sorted(adjacency[u]):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return None


def recount(events):
    """PDR and overhead straight from a raw event list.

    Works on the tuples the simulator records (or the split lines of a
    written log) and knows nothing about the ledger.
    """
    kinds = Counter()
    for ev in events:
        tag = ev[0]
        if tag == "ctrl_rx":
            accepted = ev[5] in (True, "True")
            kinds["ctrl_rx" if accepted else "ctrl_rejected"] += 1
        else:
            kinds[tag] += 1
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
