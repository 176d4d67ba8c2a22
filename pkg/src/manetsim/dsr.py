"""DSR: route discovery that accumulates the full path, a per-node cache of
complete source routes, and route maintenance with error reports and
salvaging."""

from __future__ import annotations

from collections import deque

from manetsim.config import DsrConfig
from manetsim.engine import EventKind, seconds
from manetsim.network import DROPPED, NO_LINK, SENT
from manetsim.packets import DataPacket, DsrError, DsrReply, DsrRequest
from manetsim.trust import Verdict


def is_source_route(route) -> bool:
    return len(route) >= 2 and len(set(route)) == len(route)


def uses_link(route, a: int, b: int) -> bool:
    for u, v in zip(route, route[1:]):
        if (u == a and v == b) or (u == b and v == a):
            return True
    return False


class RouteCache:
    """Up to ``capacity`` routes per destination; the oldest is evicted first."""

    def __init__(self, capacity: int = 3):
        self.capacity = capacity
        self.entries: dict[int, list[tuple[tuple[int, ...], int]]] = {}

    def add(self, route: tuple[int, ...], now: int) -> None:
        if not is_source_route(route):
            raise ValueError(f"not a loop-free source route: {route}")
        dest = route[-1]
        lst = self.entries.setdefault(dest, [])
        for i, (r, _) in enumerate(lst):
            if r == route:
                lst[i] = (route, now)
                return
        lst.append((route, now))
        if len(lst) > self.capacity:
            lst.remove(min(lst, key=lambda item: item[1]))

    def routes(self, dest: int) -> list[tuple[int, ...]]:
        return [r for r, _ in self.entries.get(dest, ())]

    def best(self, dest: int, admissible=None) -> tuple[int, ...] | None:
        """Shortest route, freshest first on ties."""
        best = None
        for r, learned in self.entries.get(dest, ()):
            if admissible is not None and not admissible(r):
                continue
            key = (len(r), -learned, r)
            if best is None or key < best[0]:
                best = (key, r)
        return None if best is None else best[1]

    def purge_link(self, a: int, b: int) -> int:
        removed = 0
        for dest in list(self.entries):
            lst = self.entries[dest]
            keep = [(r, t) for r, t in lst if not uses_link(r, a, b)]
            removed += len(lst) - len(keep)
            if keep:
                self.entries[dest] = keep
            else:
                del self.entries[dest]
        return removed

    def purge_node(self, x: int) -> int:
        removed = 0
        for dest in list(self.entries):
            lst = self.entries[dest]
            keep = [(r, t) for r, t in lst if x not in r[1:]]
            removed += len(lst) - len(keep)
            if keep:
                self.entries[dest] = keep
            else:
                del self.entries[dest]
        return removed

    def all_routes(self):
        for lst in self.entries.values():
            for r, _ in lst:
                yield r


class DsrAgent:
    def __init__(self, node: int, sim, cfg: DsrConfig):
        self.node = node
        self.sim = sim
        self.cfg = cfg
        self.cache = RouteCache(cfg.cache_size)
        self.request_id = 0
        self.seen: set[tuple[int, int]] = set()
        self.pending: deque[DataPacket] = deque()
        self.discovery: dict[int, list] = {}

    def _admissible(self, route) -> bool:
        trust = self.sim.trust
        return not any(trust.is_eliminated(self.node, h) for h in route[1:])

    def best_route(self, dest: int):
        return self.cache.best(dest, self._admissible)

    # -- discovery ------------------------------------------------------------------

    def discover_route(self, dest: int) -> DsrRequest:
        state = self.discovery.get(dest)
        retries = 0 if state is None else state[0]
        self.request_id += 1
        req = DsrRequest(self.node, self.request_id, dest, (self.node,), self.cfg.ttl)
        self.seen.add((self.node, self.request_id))
        self.sim.broadcast(self.node, req)
        timeout = seconds(self.cfg.request_timeout * 2 ** retries)
        handle = self.sim.engine.schedule_in(timeout, EventKind.TIMER_EXPIRY,
                                             self._request_timeout, dest)
        self.discovery[dest] = [retries, handle, self.request_id]
        return req

    def _request_timeout(self, dest: int) -> None:
        state = self.discovery.get(dest)
        if state is None:
            return
        if self.best_route(dest) is not None or not any(p.dst == dest for p in self.pending):
            del self.discovery[dest]
            return
        if state[0] < self.cfg.request_retries:
            state[0] += 1
            self.discover_route(dest)
            return
        del self.discovery[dest]
        self._drop_pending(dest, "NoRoute")

    def handle_request(self, req: DsrRequest, frm: int) -> str:
        key = (req.origin, req.request_id)
        if key in self.seen or self.node in req.accumulated:
            return "ignore"
        self.seen.add(key)
        sim = self.sim
        if sim.adversary.is_black_hole(self.node) and req.dest != self.node:
            self._send_reply(req.accumulated + (self.node, req.dest))
            return "reply"
        if req.dest == self.node:
            self._send_reply(req.accumulated + (self.node,))
            return "reply"
        if self.cfg.cache_replies:
            cached = self.best_route(req.dest)
            if cached is not None:
                route = req.accumulated + cached
                if is_source_route(route):
                    self._send_reply(route)
                    return "reply"
        if req.ttl > 1:
            sim.broadcast(self.node, DsrRequest(req.origin, req.request_id, req.dest,
                                                req.accumulated + (self.node,), req.ttl - 1))
            return "rebroadcast"
        return "ignore"

    def _send_reply(self, route: tuple[int, ...]) -> None:
        # back along the accumulated part, starting here
        at = route.index(self.node)
        path = tuple(reversed(route[:at + 1]))
        self.sim.unicast_control(self.node, path[1], DsrReply(route, path, 1))

    def handle_reply(self, reply: DsrReply, frm: int) -> str:
        path = reply.path
        if reply.index == len(path) - 1:
            route = reply.route
            dest = route[-1]
            if not self._admissible(route):
                self.sim.ledger.path_rejections += 1
                return "reject"
            self.cache.add(route, self.sim.now)
            state = self.discovery.pop(dest, None)
            if state is not None:
                self.sim.engine.cancel(state[1])
            self._flush(dest)
            return "consume"
        self.sim.unicast_control(self.node, path[reply.index + 1],
                                 DsrReply(reply.route, path, reply.index + 1))
        return "forward"

    # -- maintenance ----------------------------------------------------------------

    def maintain_route(self, broken_from: int, broken_to: int, pkt: DataPacket | None = None) -> None:
        self.cache.purge_link(broken_from, broken_to)
        if pkt is None or pkt.route is None or pkt.route[0] == self.node:
            return
        back = tuple(reversed(pkt.route[:pkt.hop_index + 1]))
        self.sim.unicast_control(self.node, back[1],
                                 DsrError(broken_from, broken_to, back, 1))

    def handle_error(self, err: DsrError, frm: int) -> None:
        self.cache.purge_link(err.broken_from, err.broken_to)
        if err.index < len(err.path) - 1:
            self.sim.unicast_control(self.node, err.path[err.index + 1],
                                     DsrError(err.broken_from, err.broken_to, err.path,
                                              err.index + 1))

    def link_lost(self, neighbor: int) -> None:
        # DSR detects breaks when a packet is actually sent
        pass

    # -- data -------------------------------------------------------------------------

    def originate(self, pkt: DataPacket) -> str:
        return self._send_from_here(pkt, relay=False)

    def _send_from_here(self, pkt: DataPacket, relay: bool) -> str:
        """Send with a route from this node's own cache (source or salvage)."""
        sim = self.sim
        while True:
            route = self.best_route(pkt.dst)
            if route is None:
                if relay:
                    return "none"
                self._buffer(pkt)
                if pkt.dst not in self.discovery:
                    self.discover_route(pkt.dst)
                return "buffer"
            nh = route[1]
            if sim.trust.check(self.node, nh, sim.now) is not Verdict.USE_AS_NEXT_HOP:
                self.cache.purge_node(nh)
                continue
            pkt.route = route
            pkt.hop_index = 1
            result = sim.forward_data(self.node, nh, pkt, relay)
            if result == NO_LINK:
                self.cache.purge_link(self.node, nh)
                continue
            return "send" if result == SENT else "drop"

    def receive_data(self, pkt: DataPacket, frm: int) -> None:
        self.source_forward(pkt)

    def source_forward(self, pkt: DataPacket) -> str:
        """Relay a packet along its embedded source route."""
        sim = self.sim
        route = pkt.route
        i = pkt.hop_index
        if route[-1] == self.node or pkt.dst == self.node:
            sim.deliver(pkt, self.node)
            return "deliver"
        nxt = route[i + 1]
        rejected = sim.trust.check(self.node, nxt, sim.now) is not Verdict.USE_AS_NEXT_HOP
        if not rejected:
            pkt.hop_index = i + 1
            result = sim.forward_data(self.node, nxt, pkt, relay=True)
            if result != NO_LINK:
                return "send" if result == SENT else "drop"
            pkt.hop_index = i
        self.maintain_route(self.node, nxt, pkt)
        if rejected:
            self.cache.purge_node(nxt)
        if self.cfg.salvage and not pkt.salvaged:
            pkt.salvaged = True
            outcome = self._send_from_here(pkt, relay=True)
            if outcome != "none":
                return "salvage"
        sim.drop(pkt, self.node, "PathRejected" if rejected else "LinkBreak")
        return "drop"

    def _buffer(self, pkt: DataPacket) -> None:
        self.pending.append(pkt)
        if len(self.pending) > self.cfg.buffer_size:
            self.sim.drop(self.pending.popleft(), self.node, "BufferOverflow")

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
            self._send_from_here(p, relay=False)

    def receive_control(self, msg, frm: int) -> None:
        kind = msg.kind
        if kind == "REQUEST":
            self.handle_request(msg, frm)
        elif kind == "REPLY":
            self.handle_reply(msg, frm)
        elif kind == "ERROR":
            self.handle_error(msg, frm)
