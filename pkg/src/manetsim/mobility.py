"""Random waypoint movement on a rectangular terrain and unit-disk links."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Terrain:
    width: float = 500.0
    height: float = 550.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("terrain dimensions must be strictly positive")

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


@dataclass(frozen=True)
class Position:
    x: float
    y: float


@dataclass(frozen=True)
class WaypointState:
    current: Position
    target: Position
    speed: float
    # seconds of pause still owed at the current waypoint
    pause_left: float = 0.0


def _random_point(terrain: Terrain, rng: random.Random) -> Position:
    return Position(rng.uniform(0.0, terrain.width), rng.uniform(0.0, terrain.height))


def init_positions(n: int, terrain: Terrain, rng: random.Random,
                   v_max: float = 20.0) -> list[WaypointState]:
    """Uniform placement with a first waypoint and a speed in [0, v_max] per node."""
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    states = []
    for _ in range(n):
        start = _random_point(terrain, rng)
        target = _random_point(terrain, rng)
        states.append(WaypointState(start, target, rng.uniform(0.0, v_max)))
    return states


def advance(state: WaypointState, dt: float, terrain: Terrain, rng: random.Random,
            v_max: float = 20.0, pause: float = 0.0) -> WaypointState:
    """Move a node for ``dt`` seconds under the random waypoint automaton.

    On reaching its target the node waits ``pause`` seconds, then draws a new
    target and a new speed.  A node with speed 0 never reaches its target and
    so stays where it is for the whole run.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    cur, target, speed, pause_left = state.current, state.target, state.speed, state.pause_left
    remaining = dt
    while remaining > 0:
        if pause_left > 0:
            if pause_left > remaining:
                return WaypointState(cur, target, speed, pause_left - remaining)
            remaining -= pause_left
            pause_left = 0.0
            target = _random_point(terrain, rng)
            speed = rng.uniform(0.0, v_max)
            continue
        if speed <= 0.0:
            break
        dx, dy = target.x - cur.x, target.y - cur.y
        dist = math.sqrt(dx * dx + dy * dy)
        reach = speed * remaining
        if reach < dist:
            frac = reach / dist
            cur = Position(min(max(cur.x + dx * frac, 0.0), terrain.width),
                           min(max(cur.y + dy * frac, 0.0), terrain.height))
            break
        remaining -= dist / speed
        cur = target
        if pause > 0:
            pause_left = pause
        else:
            target = _random_point(terrain, rng)
            speed = rng.uniform(0.0, v_max)
    return WaypointState(cur, target, speed, pause_left)


def neighbors(node: int, positions: Sequence[Position], radius: float) -> set[int]:
    """Nodes within ``radius`` of ``node`` (distance equal to radius counts)."""
    p = positions[node]
    out = set()
    for j, q in enumerate(positions):
        if j == node:
            continue
        dx, dy = p.x - q.x, p.y - q.y
        if math.sqrt(dx * dx + dy * dy) <= radius:
            out.add(j)
    return out


def neighbor_table(xy: np.ndarray, radius: float) -> list[frozenset[int]]:
    """All neighbor sets at once for an ``(n, 2)`` coordinate array."""
    dx = xy[:, 0][:, None] - xy[:, 0][None, :]
    dy = xy[:, 1][:, None] - xy[:, 1][None, :]
    linked = np.sqrt(dx * dx + dy * dy) <= radius
    np.fill_diagonal(linked, False)
    return [frozenset(np.flatnonzero(row).tolist()) for row in linked]
