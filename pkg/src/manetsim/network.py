"""One simulation run: nodes, links, protocol agents, adversary and trust."""

from __future__ import annotations

import logging
from typing import Callable

import numpy as np

from manetsim import mobility
from manetsim.adversary import (Adversary, AdversaryProfile, CauseKind, ForwardVerdict,
                                MisbehaviorCause, assign)
from manetsim.config import ConfigError, ScenarioConfig
from manetsim.engine import Engine, EventKind, rng_stream, seconds, to_seconds
from manetsim.metrics import MetricsLedger, MetricsReport, draw_flows, finalize
from manetsim.packets import DataPacket
from manetsim.trust import Outcome, TrustLedger

log = logging.getLogger(__name__)

SENT, DROPPED, NO_LINK = "sent", "dropped", "nolink"


def generate(engine: Engine, flows, emit: Callable) -> int:
    """Schedule one TrafficTick per CBR emission; return how many were scheduled."""
    count = 0
    for flow in flows:
        for t in flow.emission_times():
            engine.schedule(t, EventKind.TRAFFIC_TICK, emit, flow)
            count += 1
    return count


class Simulation:
    def __init__(self, cfg: ScenarioConfig, event_log: bool = False):
        cfg.validate()
        self.cfg = cfg
        self.engine = Engine()
        self.n = cfg.nodes
        self.duration = seconds(cfg.duration)
        self.terrain = mobility.Terrain(cfg.mobility.width, cfg.mobility.height)
        self.mobility_rng = rng_stream(cfg.seed, "mobility")
        self.traffic_rng = rng_stream(cfg.seed, "traffic")
        self.adversary_rng = rng_stream(cfg.seed, "adversary")
        self.jitter_rng = rng_stream(cfg.seed, "jitter")
        self.events: list[tuple] | None = [] if event_log else None
        self.snapshot_hooks: list[Callable[["Simulation"], None]] = []

        self._init_mobility()
        self._init_adversary()
        self.trust = TrustLedger(cfg.strategy_config(), self.adversary.attribute)
        self.ledger = MetricsLedger()
        self.data_delay = seconds(cfg.link.data_delay)
        self.control_delay = seconds(cfg.link.control_delay)
        self.jitter = cfg.link.jitter
        self.watchdog_timeout = seconds(cfg.trust.watchdog_timeout)
        self._uid = 0
        # per-node count of relayed data packets actually transmitted
        self.data_forwarded = [0] * self.n

        if cfg.protocol == "aodv":
            from manetsim.aodv import AodvAgent
            self.agents = [AodvAgent(i, self, cfg.aodv) for i in range(self.n)]
        else:
            from manetsim.dsr import DsrAgent
            self.agents = [DsrAgent(i, self, cfg.dsr) for i in range(self.n)]

        self.flows = self._init_flows()
        generate(self.engine, self.flows, self._emit)
        if not self.frozen:
            self.engine.schedule(seconds(cfg.mobility.tick), EventKind.MOBILITY_UPDATE,
                                 self._mobility_tick)
        self.engine.schedule(seconds(cfg.snapshot_interval), EventKind.METRIC_SNAPSHOT,
                             self._snapshot)

    # -- setup ------------------------------------------------------------------

    def _init_mobility(self):
        cfg = self.cfg
        if cfg.positions is not None:
            self.states = [mobility.WaypointState(mobility.Position(x, y),
                                                  mobility.Position(x, y), 0.0)
                           for x, y in cfg.positions]
            self.frozen = True
        else:
            self.states = mobility.init_positions(cfg.nodes, self.terrain, self.mobility_rng,
                                                  cfg.mobility.speed_max)
            self.frozen = cfg.mobility.frozen or cfg.mobility.speed_max == 0
        self.xy = np.array([(s.current.x, s.current.y) for s in self.states], dtype=float)
        self.neighbors = mobility.neighbor_table(self.xy, cfg.range_m)

    def _init_adversary(self):
        cfg = self.cfg
        if cfg.assignments is not None:
            profile = AdversaryProfile(fraction=cfg.adversary.fraction)
            for node, kind in cfg.assignments:
                kind = CauseKind(kind)
                if kind in (CauseKind.NODE_FAILURE, CauseKind.LINK_FAILURE):
                    cause = MisbehaviorCause(kind, windows=((0, self.duration + 1),))
                else:
                    cause = MisbehaviorCause(kind, drop_prob=cfg.adversary.drop_prob)
                profile.assignments[node] = cause
        else:
            profile = assign(cfg.adversary, range(cfg.nodes), self.adversary_rng, cfg.duration)
        self.adversary = Adversary(profile, cfg.adversary, self.adversary_rng)

    def _init_flows(self):
        cfg = self.cfg
        t = cfg.traffic
        if cfg.flow_pairs is not None:
            from manetsim.metrics import CbrFlow
            start = seconds(t.start_min)
            return [CbrFlow(s, d, t.rate, t.payload, start, self.duration)
                    for s, d in cfg.flow_pairs]
        if cfg.flow_count() > cfg.nodes * (cfg.nodes - 1):
            raise ConfigError("traffic.flows: more flows than ordered node pairs")
        return draw_flows(cfg.nodes, cfg.flow_count(), self.traffic_rng, t.rate, t.payload,
                          (t.start_min, t.start_max), self.duration)

    # -- running ----------------------------------------------------------------

    @property
    def now(self) -> int:
        return self.engine.now

    def run(self) -> MetricsReport:
        self.engine.run_until(self.duration)
        self.ledger.snapshot(self.now)
        for hook in self.snapshot_hooks:
            hook(self)
        still_live = sorted(self.ledger.live)
        report = finalize(self.ledger, self.cfg.duration, self.cfg.traffic.payload)
        if self.events is not None:
            for uid in still_live:
                self.events.append(("data_drop", self.now, uid, -1, "EndOfRun"))
        return report

    def _snapshot(self):
        self.ledger.snapshot(self.now)
        for hook in self.snapshot_hooks:
            hook(self)
        nxt = self.now + seconds(self.cfg.snapshot_interval)
        if nxt < self.duration:
            self.engine.schedule(nxt, EventKind.METRIC_SNAPSHOT, self._snapshot)

    def _mobility_tick(self):
        cfg = self.cfg
        dt = cfg.mobility.tick
        adv = mobility.advance
        states = self.states
        for i, s in enumerate(states):
            if s.speed > 0 or s.pause_left > 0:
                s = states[i] = adv(s, dt, self.terrain, self.mobility_rng,
                                    cfg.mobility.speed_max, cfg.mobility.pause)
                self.xy[i, 0] = s.current.x
                self.xy[i, 1] = s.current.y
        old = self.neighbors
        self.neighbors = new = mobility.neighbor_table(self.xy, cfg.range_m)
        for i in range(self.n):
            lost = old[i] - new[i]
            if lost:
                agent = self.agents[i]
                for j in sorted(lost):
                    agent.link_lost(j)
        nxt = self.now + seconds(dt)
        if nxt <= self.duration:
            self.engine.schedule(nxt, EventKind.MOBILITY_UPDATE, self._mobility_tick)

    def _emit(self, flow):
        self._uid += 1
        pkt = DataPacket(self._uid, flow.src, flow.dst, self.now, flow.payload,
                         self.cfg.aodv.ttl if self.cfg.protocol == "aodv" else self.cfg.dsr.ttl)
        self.ledger.sent(pkt.uid)
        if self.events is not None:
            self.events.append(("data_orig", self.now, pkt.uid, flow.src, flow.dst))
        if not self.adversary.can_transmit(flow.src, self.now):
            cause = self.adversary.cause_of(flow.src)
            self.drop(pkt, flow.src, cause.kind.value if cause else "NodeDown")
            return
        self.agents[flow.src].originate(pkt)

    # -- link layer ---------------------------------------------------------------

    def _transmit_control(self, node: int, msg) -> bool:
        if not self.adversary.can_transmit(node, self.now):
            return False
        self.adversary.debit_tx(node)
        self.ledger.control_tx(msg.kind)
        if self.events is not None:
            self.events.append(("ctrl_tx", self.now, node, msg.kind))
        return True

    def broadcast(self, node: int, msg) -> None:
        if not self._transmit_control(node, msg):
            return
        delay = self.control_delay
        if self.jitter > 0:
            delay += seconds(self.jitter_rng.uniform(0.0, self.jitter))
        at = self.now + delay
        adv = self.adversary
        for nb in sorted(self.neighbors[node]):
            if adv.link_broken(node, nb, self.now):
                self.ledger.control_lost += 1
                continue
            self.engine.schedule(at, EventKind.PACKET_ARRIVAL, self._arrive, nb, msg, node)

    def unicast_control(self, node: int, nxt: int, msg) -> bool:
        """Send a control message to one neighbor; ``False`` if the link is gone."""
        if nxt not in self.neighbors[node]:
            self.ledger.control_lost += 1
            return False
        if not self._transmit_control(node, msg):
            self.ledger.control_lost += 1
            return False
        if self.adversary.link_broken(node, nxt, self.now):
            # silently lost: the faulty end neither delivers nor reports it
            self.ledger.control_lost += 1
            return True
        self.engine.schedule(self.now + self.control_delay, EventKind.PACKET_ARRIVAL,
                             self._arrive, nxt, msg, node)
        return True

    def forward_data(self, node: int, nxt: int, pkt: DataPacket, relay: bool) -> str:
        """Hand ``pkt`` to neighbor ``nxt``.

        Returns SENT, DROPPED (the packet is gone) or NO_LINK (``nxt`` is out
        of range and the caller still owns the packet).
        """
        adv = self.adversary
        now = self.now
        if relay:
            cause = adv.causes.get(node)
            if (cause is not None and cause.kind is CauseKind.LINK_FAILURE
                    and adv.intercept_forward(node, pkt, now, nxt) is ForwardVerdict.DROP):
                self.drop(pkt, node, cause.kind.value, misbehavior=True)
                return DROPPED
        if nxt not in self.neighbors[node]:
            return NO_LINK
        if not adv.can_transmit(node, now):
            cause = adv.causes.get(node)
            self.drop(pkt, node, cause.kind.value if cause else "NodeDown", misbehavior=relay)
            return DROPPED
        adv.debit_tx(node)
        if relay:
            self.data_forwarded[node] += 1
            self._watch(pkt, node, Outcome.FORWARDED)
        pkt.prev_hop = node
        pkt.handed_at = now
        if adv.link_broken(node, nxt, now):
            self.drop(pkt, nxt, CauseKind.LINK_FAILURE.value, misbehavior=True)
            return SENT
        self.engine.schedule(now + self.data_delay, EventKind.PACKET_ARRIVAL,
                             self._arrive, nxt, pkt, node)
        return SENT

    def _arrive(self, node: int, msg, frm: int) -> None:
        adv = self.adversary
        now = self.now
        if not adv.can_receive(node, now):
            if msg.is_control:
                self.ledger.control_lost += 1
            else:
                cause = adv.causes.get(node)
                self.drop(msg, node, cause.kind.value if cause else "NodeDown",
                          misbehavior=node != msg.dst)
            return
        adv.debit_rx(node)
        agent = self.agents[node]
        if msg.is_control:
            if self.trust.is_eliminated(node, frm):
                self.ledger.control_rejected += 1
                if self.events is not None:
                    self.events.append(("ctrl_rx", now, node, frm, msg.kind, False))
                return
            self.ledger.control_rx()
            if self.events is not None:
                self.events.append(("ctrl_rx", now, node, frm, msg.kind, True))
            agent.receive_control(msg, frm)
            return
        if self.trust.is_eliminated(node, frm):
            # eliminated nodes are cut off from the network in both directions
            self.drop(msg, node, "Isolated")
            return
        if msg.dst == node:
            self.deliver(msg, node)
            return
        msg.ttl -= 1
        if msg.ttl <= 0:
            self.drop(msg, node, "TTL")
            return
        if node in adv.causes:
            if adv.intercept_forward(node, msg, now) is ForwardVerdict.DROP:
                self.drop(msg, node, adv.causes[node].kind.value, misbehavior=True)
                return
        agent.receive_data(msg, frm)

    # -- bookkeeping ----------------------------------------------------------------

    def deliver(self, pkt: DataPacket, node: int) -> None:
        self.ledger.delivered(pkt.uid, to_seconds(self.now - pkt.created_at))
        if self.events is not None:
            self.events.append(("data_deliver", self.now, pkt.uid, node))

    def drop(self, pkt: DataPacket, node: int, cause: str, misbehavior: bool = False) -> None:
        self.ledger.dropped(pkt.uid, cause)
        if self.events is not None:
            self.events.append(("data_drop", self.now, pkt.uid, node, cause))
        if misbehavior:
            self._watch(pkt, node, Outcome.DROPPED)

    def _watch(self, pkt: DataPacket, subject: int, outcome: Outcome) -> None:
        """Report what ``subject`` did with a packet to whoever handed it over."""
        watcher = pkt.prev_hop
        if watcher is None or watcher == subject or subject == pkt.dst:
            return
        if self.now - pkt.handed_at > self.watchdog_timeout:
            return
        self.trust.observe(watcher, subject, outcome, self.now, pkt.handed_at)


def run_simulation(cfg: ScenarioConfig, event_log: bool = False) -> tuple[Simulation, MetricsReport]:
    sim = Simulation(cfg, event_log=event_log)
    report = sim.run()
    return sim, report


def write_event_log(events, path) -> None:
    """Dump raw events as tab-separated lines, one event per line."""
    with open(path, "w") as fh:
        for ev in events:
            fh.write("\t".join(str(x) for x in ev) + "\n")


def read_event_log(path) -> list[list[str]]:
    with open(path) as fh:
        return [line.rstrip("\n").split("\t") for line in fh if line.strip()]
