"""AODV: flooded route requests, unicast replies with destination sequence
numbers, route errors on link breaks, hop-by-hop data forwarding."""

from __future__ import annotations

from collections import deque

from manetsim.config import AodvConfig
from manetsim.engine import EventKind, seconds
from manetsim.network import NO_LINK, SENT
from manetsim.packets import DataPacket, Rerr, Rrep, Rreq
from manetsim.trust import Verdict


class RouteEntry:
    __slots__ = ("dest", "next_hop", "hop_count", "dest_seq", "expires_at", "valid")

    def __init__(self, dest, next_hop, hop_count, dest_seq, expires_at):
        self.dest = dest
        self.next_hop = next_hop
        self.hop_count = hop_count
        self.dest_seq = dest_seq
        self.expires_at = expires_at
        self.valid = True

    def __repr__(self):
        flag = "" if self.valid else " invalid"
        return (f"RouteEntry({self.dest} via {self.next_hop}, hops={self.hop_count}, "
                f"seq={self.dest_seq}{flag})")


class AodvAgent:
    def __init__(self, node: int, sim, cfg: AodvConfig):
        self.node = node
        self.sim = sim
        self.cfg = cfg
        self.lifetime = seconds(cfg.route_lifetime)
        self.own_seq = 0
        self.rreq_id = 0
        self.table: dict[int, RouteEntry] = {}
        self.seen: set[tuple[int, int]] = set()
        self.pending: deque[DataPacket] = deque()
        # dest -> [retries so far, timer handle, rreq_id of the last attempt]
        self.discovery: dict[int, list] = {}

    # -- routing table ------------------------------------------------------------

    def valid_route(self, dest: int) -> RouteEntry | None:
        e = self.table.get(dest)
        if e is None or not e.valid:
            return None
        if e.expires_at < self.sim.now:
            # expiry invalidates like a break so stale info can't be relearned
            e.valid = False
            e.dest_seq += 1
            return None
        return e

    def update_route(self, dest: int, next_hop: int, hop_count: int, seq: int) -> bool:
        """Install or replace the route to ``dest`` if the offer is fresher."""
        e = self.table.get(dest)
        expires = self.sim.now + self.lifetime
        if e is None:
            self.table[dest] = RouteEntry(dest, next_hop, hop_count, seq, expires)
            return True
        live = self.valid_route(dest) is not None
        if seq > e.dest_seq or (seq == e.dest_seq and (not live or hop_count < e.hop_count)):
            e.next_hop, e.hop_count, e.dest_seq = next_hop, hop_count, seq
            e.expires_at, e.valid = expires, True
            return True
        if live and e.next_hop == next_hop and e.dest_seq == seq and e.hop_count == hop_count:
            e.expires_at = expires
        return False

    # -- discovery ------------------------------------------------------------------

    def originate_rreq(self, dest: int) -> Rreq:
        state = self.discovery.get(dest)
        retries = 0 if state is None else state[0]
        self.own_seq += 1
        self.rreq_id += 1
        e = self.table.get(dest)
        rreq = Rreq(self.node, self.own_seq, self.rreq_id, dest,
                    e.dest_seq if e is not None else 0, 0, self.cfg.ttl)
        self.seen.add((self.node, self.rreq_id))
        self.sim.broadcast(self.node, rreq)
        timeout = seconds(self.cfg.rreq_timeout * 2 ** retries)
        handle = self.sim.engine.schedule_in(timeout, EventKind.TIMER_EXPIRY,
                                             self._rreq_timeout, dest)
        self.discovery[dest] = [retries, handle, self.rreq_id]
        return rreq

    def _rreq_timeout(self, dest: int) -> None:
        state = self.discovery.get(dest)
        if state is None:
            return
        if self.valid_route(dest) is not None or not any(p.dst == dest for p in self.pending):
            del self.discovery[dest]
            return
        if state[0] < self.cfg.rreq_retries:
            state[0] += 1
            self.originate_rreq(dest)
            return
        del self.discovery[dest]
        self._drop_pending(dest, "NoRoute")

    def _finish_discovery(self, dest: int) -> None:
        state = self.discovery.pop(dest, None)
        if state is not None:
            self.sim.engine.cancel(state[1])

    def handle_rreq(self, rreq: Rreq, frm: int) -> str:
        key = (rreq.origin, rreq.rreq_id)
        if key in self.seen:
            return "ignore"
        self.seen.add(key)
        if rreq.origin == self.node:
            return "ignore"
        sim = self.sim
        self.update_route(rreq.origin, frm, rreq.hop_count + 1, rreq.origin_seq)
        if sim.adversary.is_black_hole(self.node):
            forged = Rrep(rreq.dest, rreq.dest_seq_known + sim.adversary.spec.seq_boost, 1,
                          rreq.origin, self.node)
            sim.unicast_control(self.node, frm, forged)
            return "reply"
        if rreq.dest == self.node:
            self.own_seq = max(self.own_seq, rreq.dest_seq_known)
            self._send_rrep(Rrep(self.node, self.own_seq, 0, rreq.origin, self.node))
            return "reply"
        if self.cfg.intermediate_reply:
            e = self.valid_route(rreq.dest)
            if e is not None and e.next_hop != frm and e.dest_seq >= rreq.dest_seq_known:
                self._send_rrep(Rrep(rreq.dest, e.dest_seq, e.hop_count, rreq.origin, self.node))
                return "reply"
        if rreq.ttl > 1:
            sim.broadcast(self.node, Rreq(rreq.origin, rreq.origin_seq, rreq.rreq_id, rreq.dest,
                                          rreq.dest_seq_known, rreq.hop_count + 1, rreq.ttl - 1))
            return "rebroadcast"
        return "ignore"

    def _send_rrep(self, rrep: Rrep) -> bool:
        back = self.valid_route(rrep.origin)
        if back is None:
            self.sim.ledger.control_lost += 1
            return False
        return self.sim.unicast_control(self.node, back.next_hop, rrep)

    def handle_rrep(self, rrep: Rrep, frm: int) -> str:
        installed = self.update_route(rrep.dest, frm, rrep.hop_count + 1, rrep.dest_seq)
        if rrep.origin == self.node:
            if self.valid_route(rrep.dest) is not None:
                self._finish_discovery(rrep.dest)
                self._flush(rrep.dest)
            return "consume"
        if not installed:
            return "ignore"
        self._send_rrep(Rrep(rrep.dest, rrep.dest_seq, rrep.hop_count + 1, rrep.origin,
                             rrep.replier))
        return "forward"

    # -- maintenance ----------------------------------------------------------------

    def handle_link_break(self, broken: int) -> list[tuple[int, int]]:
        lost = []
        now = self.sim.now
        for dest in sorted(self.table):
            e = self.table[dest]
            if e.valid and e.next_hop == broken and e.expires_at >= now:
                e.valid = False
                e.dest_seq += 1
                lost.append((dest, e.dest_seq))
        if lost:
            self.sim.broadcast(self.node, Rerr(lost, self.node))
        return lost

    def handle_rerr(self, rerr: Rerr, frm: int) -> list[tuple[int, int]]:
        lost = []
        for dest, seq in rerr.unreachable:
            e = self.valid_route(dest)
            if e is not None and e.next_hop == frm:
                e.valid = False
                e.dest_seq = max(e.dest_seq, seq)
                lost.append((dest, e.dest_seq))
        if lost:
            self.sim.broadcast(self.node, Rerr(lost, self.node))
        return lost

    def link_lost(self, neighbor: int) -> None:
        now = self.sim.now
        if any(e.valid and e.next_hop == neighbor and e.expires_at >= now
               for e in self.table.values()):
            self.handle_link_break(neighbor)

    # -- data -------------------------------------------------------------------------

    def originate(self, pkt: DataPacket) -> str:
        return self.forward_data(pkt, relay=False)

    def receive_data(self, pkt: DataPacket, frm: int) -> None:
        self.forward_data(pkt, relay=True)

    def forward_data(self, pkt: DataPacket, relay: bool) -> str:
        sim = self.sim
        if pkt.dst == self.node:
            sim.deliver(pkt, self.node)
            return "deliver"
        while True:
            e = self.valid_route(pkt.dst)
            if e is None:
                self._buffer(pkt)
                if pkt.dst not in self.discovery:
                    self.originate_rreq(pkt.dst)
                return "buffer"
            nh = e.next_hop
            if sim.trust.check(self.node, nh, sim.now) is not Verdict.USE_AS_NEXT_HOP:
                self.handle_link_break(nh)
                continue
            result = sim.forward_data(self.node, nh, pkt, relay)
            if result == NO_LINK:
                self.handle_link_break(nh)
                continue
            if result == SENT:
                e.expires_at = sim.now + self.lifetime
                return "send"
            return "drop"

    def _buffer(self, pkt: DataPacket) -> None:
        self.pending.append(pkt)
        if len(self.pending) > self.cfg.buffer_size:
            oldest = self.pending.popleft()
            self.sim.drop(oldest, self.node, "BufferOverflow")

    def _drop_pending(self, dest: int, cause: str) -> None:
        keep = deque()
        for p in self.pending:
            if p.dst == dest:
                self.sim.drop(p, self.node, cause)
            else:
                keep.append(p)
        self.pending = keep

    def _flush(self, dest: int) -> None:
        ready = [p for p in self.pending if p.dst == dest]
        if not ready:
            return
        self.pending = deque(p for p in self.pending if p.dst != dest)
        for p in ready:
            self.forward_data(p, relay=p.src != self.node)

    def receive_control(self, msg, frm: int) -> None:
        kind = msg.kind
        if kind == "RREQ":
            self.handle_rreq(msg, frm)
        elif kind == "RREP":
            self.handle_rrep(msg, frm)
        elif kind == "RERR":
            self.handle_rerr(msg, frm)
