"""CBR traffic and the run-wide packet and control-message ledger."""

from __future__ import annotations

import random
import statistics
from collections import Counter
from dataclasses import dataclass, field

from manetsim.engine import US_PER_S


@dataclass(frozen=True)
class CbrFlow:
    src: int
    dst: int
    rate: float = 4.0
    payload: int = 512
    start: int = 0  # microseconds
    stop: int = 0

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError("flow source and destination must differ")
        if self.rate <= 0 or self.payload <= 0:
            raise ValueError("rate and payload must be positive")

    @property
    def interval(self) -> int:
        return int(round(US_PER_S / self.rate))

    def emission_times(self) -> list[int]:
        """Send instants in ``[start, stop)``."""
        return list(range(self.start, self.stop, self.interval)) if self.stop > self.start else []


def draw_flows(n: int, count: int, rng: random.Random, rate: float, payload: int,
               start_window: tuple[float, float], stop: int) -> list[CbrFlow]:
    """``count`` distinct source/destination pairs with staggered start times."""
    pairs: list[tuple[int, int]] = []
    while len(pairs) < count:
        src, dst = rng.sample(range(n), 2)
        if (src, dst) not in pairs:
            pairs.append((src, dst))
    flows = []
    for src, dst in pairs:
        start = int(round(rng.uniform(*start_window) * US_PER_S))
        flows.append(CbrFlow(src, dst, rate, payload, start, stop))
    return flows


class ConservationError(AssertionError):
    pass


class MetricsLedger:
    """Counters behind PDR, overhead, delay and throughput.

    ``live`` holds the uids of data packets that are neither delivered nor
    dropped, so packet conservation can be checked at any instant.
    """

    def __init__(self):
        self.data_sent = 0
        self.data_delivered = 0
        self.data_dropped_by_cause: Counter[str] = Counter()
        self.control_transmitted = 0
        self.control_received = 0
        self.control_rejected = 0
        self.control_lost = 0
        self.path_rejections = 0
        self.control_by_kind: Counter[str] = Counter()
        self.delay_samples: list[float] = []
        self.live: set[int] = set()
        self.snapshots: list[dict] = []

    @property
    def data_dropped(self) -> int:
        return sum(self.data_dropped_by_cause.values())

    @property
    def in_flight(self) -> int:
        return len(self.live)

    def sent(self, uid: int) -> None:
        self.data_sent += 1
        self.live.add(uid)

    def delivered(self, uid: int, delay_s: float) -> None:
        self.live.remove(uid)
        self.data_delivered += 1
        self.delay_samples.append(delay_s)

    def dropped(self, uid: int, cause: str) -> None:
        self.live.remove(uid)
        self.data_dropped_by_cause[cause] += 1

    def control_tx(self, kind: str) -> None:
        self.control_transmitted += 1
        self.control_by_kind[kind] += 1

    def control_rx(self) -> None:
        self.control_received += 1

    def check_conservation(self) -> None:
        lhs = self.data_delivered + self.data_dropped + self.in_flight
        if lhs != self.data_sent:
            raise ConservationError(
                f"delivered+dropped+in_flight={lhs} but sent={self.data_sent}")

    def snapshot(self, now: int) -> dict:
        self.check_conservation()
        snap = {
            "time": now,
            "data_sent": self.data_sent,
            "data_delivered": self.data_delivered,
            "data_dropped": self.data_dropped,
            "in_flight": self.in_flight,
            "control_transmitted": self.control_transmitted,
            "control_received": self.control_received,
        }
        self.snapshots.append(snap)
        return snap


def pdr(ledger: MetricsLedger) -> float | None:
    """Delivered over sent; ``None`` when nothing was sent."""
    if ledger.data_sent == 0:
        return None
    return ledger.data_delivered / ledger.data_sent


def overhead(ledger: MetricsLedger) -> float | None:
    """Control messages transmitted over control messages received.

    A broadcast counts once on the transmit side and once per accepting
    receiver on the receive side.
    """
    if ledger.control_received == 0:
        return None
    return ledger.control_transmitted / ledger.control_received


def overhead_conv(ledger: MetricsLedger) -> float | None:
    if ledger.data_delivered == 0:
        return None
    return ledger.control_transmitted / ledger.data_delivered


@dataclass
class MetricsReport:
    pdr: float | None
    overhead: float | None
    overhead_conv: float | None
    avg_delay: float | None
    throughput: float
    data_sent: int
    data_delivered: int
    data_dropped: int
    control_transmitted: int
    control_received: int
    control_rejected: int
    dropped_by_cause: dict[str, int] = field(default_factory=dict)


def finalize(ledger: MetricsLedger, duration_s: float, payload: int) -> MetricsReport:
    """Close the books: anything still in flight is dropped as EndOfRun."""
    for uid in sorted(ledger.live):
        ledger.dropped(uid, "EndOfRun")
    ledger.check_conservation()
    delays = ledger.delay_samples
    return MetricsReport(
        pdr=pdr(ledger),
        overhead=overhead(ledger),
        overhead_conv=overhead_conv(ledger),
        avg_delay=statistics.fmean(delays) if delays else None,
        throughput=ledger.data_delivered * payload / duration_s,
        data_sent=ledger.data_sent,
        data_delivered=ledger.data_delivered,
        data_dropped=ledger.data_dropped,
        control_transmitted=ledger.control_transmitted,
        control_received=ledger.control_received,
        control_rejected=ledger.control_rejected,
        dropped_by_cause=dict(sorted(ledger.data_dropped_by_cause.items())),
    )
