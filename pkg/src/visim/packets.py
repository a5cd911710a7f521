"""Packet value types shared by the MAC, routing and traffic layers."""

from dataclasses import dataclass, replace
from typing import Any

BROADCAST = -1


@dataclass
class Packet:
    """One logical packet. uid survives forwarding and retransmission."""
    uid: int
    cls: str          # data | ack | rreq | rrep | rerr | update
    size: int
    src: int          # originating endpoint
    dst: int          # final endpoint (BROADCAST for flooded control)
    payload: Any = None

    def clone(self, **changes) -> "Packet":
        return replace(self, **changes)


@dataclass(frozen=True)
class DataPayload:
    flow_id: int
    seq: int
    route: tuple[int, ...] | None = None   # full source route when DSR carries it


@dataclass(frozen=True)
class AckPayload:
    flow_id: int
    cum: int                               # highest contiguously received seq
    route: tuple[int, ...] | None = None


@dataclass(frozen=True)
class DsdvAdvert:
    # (dest, dest_seq, hop_count) triples; hop_count may be inf for broken
    entries: tuple[tuple[int, int, float], ...]


@dataclass(frozen=True)
class DsrRreq:
    request_id: int
    route_record: tuple[int, ...]          # nodes traversed so far, origin first


@dataclass(frozen=True)
class DsrRrep:
    route: tuple[int, ...]                 # full route origin..destination


@dataclass(frozen=True)
class DsrRerr:
    broken: tuple[int, int]                # failed hop (u, v)
    route: tuple[int, ...]                 # return path detector..origin


@dataclass(frozen=True)
class AodvRreq:
    rreq_id: int
    origin_seq: int
    dst_seq: int                           # last seq known at the origin, 0 if none
    hop_count: int


@dataclass(frozen=True)
class AodvRrep:
    dest: int                              # destination the route leads to
    dest_seq: int
    hop_count: int


@dataclass(frozen=True)
class AodvRerr:
    # (dest, dest_seq) pairs now unreachable through the sender
    dests: tuple[tuple[int, int], ...]
