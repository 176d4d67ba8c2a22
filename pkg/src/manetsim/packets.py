"""Data packets and the routing control messages of both protocols."""

from __future__ import annotations

from dataclasses import dataclass, field

BROADCAST = -1


@dataclass(slots=True, eq=False)
class DataPacket:
    uid: int
    src: int
    dst: int
    created_at: int
    payload: int = 512
    ttl: int = 32
    # DSR source route and the index of the node currently holding the packet
    route: tuple[int, ...] | None = None
    hop_index: int = 0
    salvaged: bool = False
    # watchdog bookkeeping: who handed the packet over, and when
    prev_hop: int | None = None
    handed_at: int = 0

    is_control = False
    kind = "DATA"


@dataclass(slots=True, eq=False)
class Rreq:
    origin: int
    origin_seq: int
    rreq_id: int
    dest: int
    dest_seq_known: int
    hop_count: int = 0
    ttl: int = 32

    is_control = True
    kind = "RREQ"


@dataclass(slots=True, eq=False)
class Rrep:
    dest: int
    dest_seq: int
    hop_count: int
    origin: int
    # node that generated the reply (the destination, an intermediate, or a forger)
    replier: int = -1

    is_control = True
    kind = "RREP"


@dataclass(slots=True, eq=False)
class Rerr:
    unreachable: list[tuple[int, int]] = field(default_factory=list)
    reporter: int = -1

    is_control = True
    kind = "RERR"


@dataclass(slots=True, eq=False)
class DsrRequest:
    origin: int
    request_id: int
    dest: int
    accumulated: tuple[int, ...]
    ttl: int = 32

    is_control = True
    kind = "REQUEST"


@dataclass(slots=True, eq=False)
class DsrReply:
    route: tuple[int, ...]
    # reversed route the reply travels along, and the current position in it
    path: tuple[int, ...]
    index: int = 0

    is_control = True
    kind = "REPLY"


@dataclass(slots=True, eq=False)
class DsrError:
    broken_from: int
    broken_to: int
    path: tuple[int, ...]
    index: int = 0

    is_control = True
    kind = "ERROR"


CONTROL_KINDS = ("RREQ", "RREP", "RERR", "REQUEST", "REPLY", "ERROR")
