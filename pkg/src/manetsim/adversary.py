"""Misbehaving nodes: who misbehaves, why, and what happens to packets they touch.

Deliberate causes (data dropping, black-hole route forgery) persist for the
whole run.  Fault causes are node failures, link failures and energy
exhaustion: a node failure is an outage after which the node comes back, a
link failure silently breaks one link for a while (the node neither delivers
over it nor reports the error), and energy exhaustion is permanent.
"""

from __future__ import annotations

import enum
import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Sequence

from manetsim.engine import seconds
from manetsim.trust import CauseClass


class CauseKind(enum.Enum):
    DELIBERATE_DROP = "DeliberateDrop"
    BLACK_HOLE = "BlackHole"
    NODE_FAILURE = "NodeFailure"
    LINK_FAILURE = "LinkFailure"
    ENERGY_DEPLETION = "EnergyDepletion"


FAULT_KINDS = frozenset({CauseKind.NODE_FAILURE, CauseKind.LINK_FAILURE,
                         CauseKind.ENERGY_DEPLETION})


class ForwardVerdict(enum.Enum):
    FORWARD = "Forward"
    DROP = "Drop"


@dataclass
class AdversarySpec:
    fraction: float = 0.2
    weight_deliberate_drop: float = 1.0
    weight_black_hole: float = 1.0
    weight_node_failure: float = 1.0
    weight_link_failure: float = 1.0
    weight_energy_depletion: float = 1.0
    drop_prob: float = 0.5
    seq_boost: int = 10
    # one failure episode per node/link failure: onset drawn as a fraction of
    # the run, then an outage of fixed length (s) after which the fault clears
    failure_onset_min: float = 0.1
    failure_onset_max: float = 0.5
    failure_outage: float = 20.0
    energy_initial: float = 1000.0
    energy_tx_cost: float = 1.0
    energy_rx_cost: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.fraction < 1.0:
            raise ValueError("adversary fraction must lie in [0, 1)")
        if not 0.0 <= self.drop_prob <= 1.0:
            raise ValueError("drop_prob must lie in [0, 1]")
        weights = self.weights()
        if any(w < 0 for w in weights.values()) or sum(weights.values()) <= 0:
            raise ValueError("cause weights must be non-negative and not all zero")
        if min(self.energy_initial, self.energy_tx_cost, self.energy_rx_cost) < 0:
            raise ValueError("energy values must be non-negative")
        if not 0.0 <= self.failure_onset_min <= self.failure_onset_max <= 1.0:
            raise ValueError("need 0 <= failure_onset_min <= failure_onset_max <= 1")
        if self.failure_outage <= 0:
            raise ValueError("failure_outage must be positive")

    def weights(self) -> dict[CauseKind, float]:
        return {
            CauseKind.DELIBERATE_DROP: self.weight_deliberate_drop,
            CauseKind.BLACK_HOLE: self.weight_black_hole,
            CauseKind.NODE_FAILURE: self.weight_node_failure,
            CauseKind.LINK_FAILURE: self.weight_link_failure,
            CauseKind.ENERGY_DEPLETION: self.weight_energy_depletion,
        }


@dataclass
class MisbehaviorCause:
    kind: CauseKind
    drop_prob: float = 0.0
    # failure episodes as [start, end) microsecond pairs, sorted
    windows: tuple[tuple[int, int], ...] = ()

    def active_window(self, now: int) -> int:
        """Index of the episode covering ``now``, or -1."""
        i = bisect_right(self.windows, (now, math.inf)) - 1
        if i >= 0 and self.windows[i][0] <= now < self.windows[i][1]:
            return i
        return -1


@dataclass
class EnergyState:
    remaining: float
    tx_cost: float
    rx_cost: float


@dataclass
class AdversaryProfile:
    assignments: dict[int, MisbehaviorCause] = field(default_factory=dict)
    fraction: float = 0.0


def _episodes(rng: random.Random, spec: AdversarySpec, duration: float) -> tuple:
    onset = rng.uniform(spec.failure_onset_min, spec.failure_onset_max) * duration
    return ((seconds(onset), seconds(onset + spec.failure_outage)),)


def assign(spec: AdversarySpec, nodes: Sequence[int], rng: random.Random,
           duration: float = 300.0) -> AdversaryProfile:
    """Pick ``floor(fraction * n)`` misbehaving nodes and give each a cause."""
    if spec.fraction >= 1.0:
        raise ValueError("adversary fraction must be below 1")
    count = math.floor(spec.fraction * len(nodes) + 1e-9)
    chosen = sorted(rng.sample(sorted(nodes), count))
    weights = spec.weights()
    kinds = list(weights)
    profile = AdversaryProfile(fraction=spec.fraction)
    for node in chosen:
        kind = rng.choices(kinds, weights=[weights[k] for k in kinds])[0]
        if kind is CauseKind.DELIBERATE_DROP:
            cause = MisbehaviorCause(kind, drop_prob=spec.drop_prob)
        elif kind in (CauseKind.NODE_FAILURE, CauseKind.LINK_FAILURE):
            cause = MisbehaviorCause(kind, windows=_episodes(rng, spec, duration))
        else:
            cause = MisbehaviorCause(kind)
        profile.assignments[node] = cause
    return profile


class Adversary:
    """Runtime state of the misbehaving nodes in one run."""

    def __init__(self, profile: AdversaryProfile, spec: AdversarySpec,
                 rng: random.Random):
        self.profile = profile
        self.spec = spec
        self.rng = rng
        self.causes = profile.assignments
        self.energy = {
            n: EnergyState(spec.energy_initial, spec.energy_tx_cost, spec.energy_rx_cost)
            for n, c in self.causes.items() if c.kind is CauseKind.ENERGY_DEPLETION
        }
        # link failure: (episode index, designated peer) per node
        self._broken_link: dict[int, tuple[int, int]] = {}

    def cause_of(self, node: int) -> MisbehaviorCause | None:
        return self.causes.get(node)

    def is_black_hole(self, node: int) -> bool:
        c = self.causes.get(node)
        return c is not None and c.kind is CauseKind.BLACK_HOLE

    def attribute(self, node: int) -> CauseClass:
        c = self.causes.get(node)
        if c is None:
            return CauseClass.UNKNOWN
        return CauseClass.FAULTY if c.kind in FAULT_KINDS else CauseClass.SELFISH

    def is_down(self, node: int, now: int) -> bool:
        c = self.causes.get(node)
        return (c is not None and c.kind is CauseKind.NODE_FAILURE
                and c.active_window(now) >= 0)

    def can_transmit(self, node: int, now: int) -> bool:
        if self.is_down(node, now):
            return False
        e = self.energy.get(node)
        return e is None or e.remaining >= e.tx_cost

    def can_receive(self, node: int, now: int) -> bool:
        if self.is_down(node, now):
            return False
        e = self.energy.get(node)
        return e is None or e.remaining >= e.rx_cost

    def debit_tx(self, node: int) -> None:
        e = self.energy.get(node)
        if e is not None:
            e.remaining = max(0.0, e.remaining - e.tx_cost)

    def debit_rx(self, node: int) -> None:
        e = self.energy.get(node)
        if e is not None:
            e.remaining = max(0.0, e.remaining - e.rx_cost)

    def link_broken(self, a: int, b: int, now: int) -> bool:
        """Whether the link a-b is inside a designated link-failure episode."""
        if not self._broken_link:
            return False
        for node, peer in ((a, b), (b, a)):
            current = self._broken_link.get(node)
            if current is not None and current[1] == peer:
                c = self.causes[node]
                if c.active_window(now) == current[0]:
                    return True
        return False

    def intercept_forward(self, node: int, packet, now: int,
                          next_hop: int | None = None) -> ForwardVerdict:
        """Whether ``node`` relays ``packet`` towards ``next_hop``.

        Control messages pass except while a node is down or out of energy.
        """
        c = self.causes.get(node)
        if c is None:
            return ForwardVerdict.FORWARD
        kind = c.kind
        if kind is CauseKind.NODE_FAILURE:
            return ForwardVerdict.DROP if c.active_window(now) >= 0 else ForwardVerdict.FORWARD
        if kind is CauseKind.ENERGY_DEPLETION:
            e = self.energy[node]
            return ForwardVerdict.DROP if e.remaining < e.tx_cost else ForwardVerdict.FORWARD
        if packet.is_control:
            return ForwardVerdict.FORWARD
        if kind is CauseKind.BLACK_HOLE:
            return ForwardVerdict.DROP
        if kind is CauseKind.DELIBERATE_DROP:
            p = c.drop_prob
            if p >= 1.0:
                return ForwardVerdict.DROP
            if p <= 0.0:
                return ForwardVerdict.FORWARD
            return ForwardVerdict.DROP if self.rng.random() < p else ForwardVerdict.FORWARD
        # link failure: only the designated link of the current episode is broken
        w = c.active_window(now)
        if w < 0 or next_hop is None:
            return ForwardVerdict.FORWARD
        current = self._broken_link.get(node)
        if current is None or current[0] != w:
            self._broken_link[node] = current = (w, next_hop)
        return ForwardVerdict.DROP if current[1] == next_hop else ForwardVerdict.FORWARD
