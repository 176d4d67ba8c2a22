"""Trust bookkeeping and the none / eliminate / second-chance strategies."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable


class Strategy(enum.Enum):
    NONE = "none"
    ELIMINATE = "eliminate"
    SECOND_CHANCE = "second-chance"


class Outcome(enum.Enum):
    FORWARDED = "Forwarded"
    DROPPED = "Dropped"


class CauseClass(enum.Enum):
    FAULTY = "Faulty"
    SELFISH = "Selfish/Deliberate"
    UNKNOWN = "Unknown"


class Status(enum.Enum):
    ACTIVE = "Active"
    ELIMINATED = "Eliminated"
    REINTEGRATED = "Reintegrated"


class Verdict(enum.Enum):
    USE_AS_NEXT_HOP = "UseAsNextHop"
    GIVE_SECOND_CHANCE = "GiveSecondChance"
    ELIMINATE = "Eliminate"


PARDONABLE = (CauseClass.FAULTY, CauseClass.UNKNOWN)


@dataclass
class StrategyConfig:
    strategy: Strategy = Strategy.NONE
    tolerance: float = 0.4
    reward: float = 0.05
    penalty: float = 0.15
    reintegration_trust: float | None = None  # None means "same as tolerance"
    max_second_chances: int = 1
    initial_trust: float = 1.0
    watchdog_timeout: float = 0.5
    blind_attribution: bool = False
    per_watcher: bool = False

    def __post_init__(self):
        if isinstance(self.strategy, str):
            self.strategy = Strategy(self.strategy)
        if not 0.0 < self.tolerance < 1.0:
            raise ValueError("tolerance must lie in (0, 1)")
        if self.reward <= 0 or self.penalty <= 0:
            raise ValueError("reward and penalty must be positive")
        if not 0.0 <= self.initial_trust <= 1.0:
            raise ValueError("initial_trust must lie in [0, 1]")
        if self.reintegration_trust is not None and not 0.0 <= self.reintegration_trust <= 1.0:
            raise ValueError("reintegration_trust must lie in [0, 1]")
        if self.max_second_chances < 0:
            raise ValueError("max_second_chances must be non-negative")
        if self.watchdog_timeout <= 0:
            raise ValueError("watchdog_timeout must be positive")

    @property
    def reset_value(self) -> float:
        return self.tolerance if self.reintegration_trust is None else self.reintegration_trust


@dataclass
class TrustRecord:
    subject: int
    trust: float = 1.0
    forwards_seen: int = 0
    drops_seen: int = 0
    attributed_cause: CauseClass | None = None
    status: Status = Status.ACTIVE
    last_update: int = 0
    chances_used: int = 0
    reintegrated_at: int = -1

    @property
    def observations(self) -> int:
        return self.forwards_seen + self.drops_seen


def _clamp(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def observe(record: TrustRecord, outcome: Outcome, cfg: StrategyConfig,
            now: int = 0) -> TrustRecord:
    """Apply one watchdog observation to ``record`` in place and return it."""
    if outcome is Outcome.FORWARDED:
        record.trust = _clamp(record.trust + cfg.reward)
        record.forwards_seen += 1
    else:
        record.trust = _clamp(record.trust - cfg.penalty)
        record.drops_seen += 1
    record.last_update = now
    return record


def decide(record: TrustRecord, cfg: StrategyConfig, now: int = 0) -> Verdict:
    """Verdict on using ``record.subject`` as a next hop.

    A second chance resets trust and consumes one chance; it is only granted
    to subjects whose misbehavior is attributed to a fault (or is unknown).
    """
    strategy = cfg.strategy
    if strategy is Strategy.NONE:
        return Verdict.USE_AS_NEXT_HOP
    if record.status is Status.ELIMINATED:
        return Verdict.ELIMINATE
    if record.trust >= cfg.tolerance:
        return Verdict.USE_AS_NEXT_HOP
    if (strategy is Strategy.SECOND_CHANCE
            and record.chances_used < cfg.max_second_chances
            and (record.attributed_cause or CauseClass.UNKNOWN) in PARDONABLE):
        record.status = Status.REINTEGRATED
        record.trust = cfg.reset_value
        record.chances_used += 1
        record.reintegrated_at = now
        record.last_update = now
        return Verdict.GIVE_SECOND_CHANCE
    record.status = Status.ELIMINATED
    record.last_update = now
    return Verdict.ELIMINATE


@dataclass
class Decision:
    time: int
    watcher: int
    subject: int
    trust: float
    verdict: Verdict


class TrustLedger:
    """Trust records for a whole run.

    By default one record per subject is shared by every watcher; with
    ``per_watcher`` each watcher keeps its own view.  ``attribute`` maps a
    subject to the class of its misbehavior and is supplied by the simulator.
    """

    def __init__(self, cfg: StrategyConfig,
                 attribute: Callable[[int], CauseClass] | None = None):
        self.cfg = cfg
        self._attribute = attribute or (lambda subject: CauseClass.UNKNOWN)
        self.records: dict[tuple[int, int] | int, TrustRecord] = {}
        self.decisions: list[Decision] = []
        self.elimination_count = 0

    def _key(self, watcher: int, subject: int):
        return (watcher, subject) if self.cfg.per_watcher else subject

    def record(self, watcher: int, subject: int) -> TrustRecord:
        key = self._key(watcher, subject)
        rec = self.records.get(key)
        if rec is None:
            rec = self.records[key] = TrustRecord(subject, trust=self.cfg.initial_trust)
        return rec

    def observe(self, watcher: int, subject: int, outcome: Outcome, now: int,
                handed_at: int | None = None) -> TrustRecord:
        rec = self.record(watcher, subject)
        if handed_at is not None and handed_at < rec.reintegrated_at:
            # packets handed over before a second chance don't count against it
            return rec
        observe(rec, outcome, self.cfg, now)
        if outcome is Outcome.DROPPED:
            if self.cfg.blind_attribution:
                rec.attributed_cause = CauseClass.UNKNOWN
            else:
                rec.attributed_cause = self._attribute(subject)
        return rec

    def is_eliminated(self, watcher: int, subject: int) -> bool:
        if self.cfg.strategy is Strategy.NONE:
            return False
        rec = self.records.get(self._key(watcher, subject))
        return rec is not None and rec.status is Status.ELIMINATED

    def check(self, watcher: int, subject: int, now: int) -> Verdict:
        """Decision point when ``watcher`` is about to hand data to ``subject``."""
        if self.cfg.strategy is Strategy.NONE:
            return Verdict.USE_AS_NEXT_HOP
        rec = self.records.get(self._key(watcher, subject))
        if rec is None:
            return Verdict.USE_AS_NEXT_HOP
        if rec.status is Status.ELIMINATED:
            return Verdict.ELIMINATE
        if rec.trust >= self.cfg.tolerance:
            return Verdict.USE_AS_NEXT_HOP
        trust_before = rec.trust
        verdict = decide(rec, self.cfg, now)
        if verdict is Verdict.ELIMINATE:
            self.elimination_count += 1
        self.decisions.append(Decision(now, watcher, subject, trust_before, verdict))
        return verdict

    def route_filter(self, watcher: int, candidates: Iterable[int], now: int) -> list[int]:
        """Admissible next hops, highest trust first (ties by node id)."""
        admissible = []
        for c in candidates:
            if self.check(watcher, c, now) is not Verdict.ELIMINATE:
                admissible.append(c)
        return sorted(admissible, key=lambda c: (-self.trust_of(watcher, c), c))

    def trust_of(self, watcher: int, subject: int) -> float:
        rec = self.records.get(self._key(watcher, subject))
        return self.cfg.initial_trust if rec is None else rec.trust

    def write_decisions(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time", "watcher", "subject", "trust", "verdict"])
            for d in self.decisions:
                w.writerow([f"{d.time / 1e6:.6f}", d.watcher, d.subject,
                            f"{d.trust:.6f}", d.verdict.value])
