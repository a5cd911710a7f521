"""Trace records, line format, writer/parser for .tr files.

Packet line:    evt time node layer pkt_uid class size src dst reason
Mobility line:  M time node x y speed

Times carry six decimals; mobility coordinates and speed carry two. Files are
append-only and nondecreasing in time.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Union

EVENTS = ("s", "r", "d", "f")
LAYERS = ("AGT", "RTR", "MAC")
CLASSES = ("data", "ack", "rreq", "rrep", "rerr", "update")
ROUTING_CLASSES = ("rreq", "rrep", "rerr", "update")
REASONS = ("IFQ", "RET", "CBK", "---")

DATA_SIZE = 1040
ACK_SIZE = 40
ROUTING_SIZE = 60

# class -> required on-air size in bytes
CANONICAL_SIZES = {
    "data": DATA_SIZE,
    "ack": ACK_SIZE,
    "rreq": ROUTING_SIZE,
    "rrep": ROUTING_SIZE,
    "rerr": ROUTING_SIZE,
    "update": ROUTING_SIZE,
}


class TraceError(Exception):
    pass


class TraceParseError(TraceError):
    def __init__(self, msg, line_no=None):
        super().__init__(f"line {line_no}: {msg}" if line_no else msg)
        self.line_no = line_no


@dataclass(slots=True)
class TraceRecord:
    evt: str
    time: float
    node: int
    layer: str
    pkt_uid: int
    cls: str
    size: int
    src: int
    dst: int
    reason: str = "---"


@dataclass(slots=True)
class MobilityRecord:
    time: float
    node: int
    x: float
    y: float
    speed: float


Record = Union[TraceRecord, MobilityRecord]


def format_record(rec: Record) -> str:
    if isinstance(rec, MobilityRecord):
        return (f"M {rec.time:.6f} {rec.node} "
                f"{rec.x:.2f} {rec.y:.2f} {rec.speed:.2f}")
    return (f"{rec.evt} {rec.time:.6f} {rec.node} {rec.layer} {rec.pkt_uid} "
            f"{rec.cls} {rec.size} {rec.src} {rec.dst} {rec.reason}")


def validate_record(rec: Record, sizes=CANONICAL_SIZES, area=None) -> None:
    """Writer-side invariants; raises TraceError on the first violation."""
    if isinstance(rec, MobilityRecord):
        if rec.time < 0:
            raise TraceError(f"negative time {rec.time}")
        if area is not None:
            w, h = area
            if not (0.0 <= rec.x <= w and 0.0 <= rec.y <= h):
                raise TraceError(
                    f"position ({rec.x}, {rec.y}) outside area {area}")
        return
    if rec.evt not in EVENTS:
        raise TraceError(f"unknown event {rec.evt!r}")
    if rec.layer not in LAYERS:
        raise TraceError(f"unknown layer {rec.layer!r}")
    if rec.cls not in CLASSES:
        raise TraceError(f"unknown class {rec.cls!r}")
    if rec.reason not in REASONS:
        raise TraceError(f"unknown reason {rec.reason!r}")
    if rec.time < 0:
        raise TraceError(f"negative time {rec.time}")
    if rec.size <= 0:
        raise TraceError(f"non-positive size {rec.size}")
    want = sizes.get(rec.cls)
    if want is not None and rec.size != want:
        raise TraceError(
            f"class {rec.cls!r} requires size {want}, got {rec.size}")


def parse_line(line: str, line_no: int | None = None) -> Record:
    """Exact inverse of format_record for well-formed lines."""
    parts = line.split()
    if not parts:
        raise TraceParseError("empty line", line_no)
    try:
        if parts[0] == "M":
            if len(parts) != 6:
                raise TraceParseError(
                    f"mobility line needs 6 fields, got {len(parts)}", line_no)
            return MobilityRecord(
                time=float(parts[1]), node=int(parts[2]),
                x=float(parts[3]), y=float(parts[4]), speed=float(parts[5]))
        if len(parts) != 10:
            raise TraceParseError(
                f"packet line needs 10 fields, got {len(parts)}", line_no)
        evt, t, node, layer, uid, cls, size, src, dst, reason = parts
        if evt not in EVENTS:
            raise TraceParseError(f"unknown event {evt!r}", line_no)
        if layer not in LAYERS:
            raise TraceParseError(f"unknown layer {layer!r}", line_no)
        if cls not in CLASSES:
            raise TraceParseError(f"unknown class {cls!r}", line_no)
        return TraceRecord(
            evt=evt, time=float(t), node=int(node), layer=layer,
            pkt_uid=int(uid), cls=cls, size=int(size),
            src=int(src), dst=int(dst), reason=reason)
    except ValueError as exc:
        raise TraceParseError(str(exc), line_no) from exc


class Trace:
    """In-memory record sequence with writer-side validation on append."""

    def __init__(self, sizes=CANONICAL_SIZES, area=None):
        self.records: list[Record] = []
        self.sizes = sizes
        self.area = area
        self._last_time = 0.0

    def append(self, rec: Record) -> None:
        validate_record(rec, self.sizes, self.area)
        if rec.time < self._last_time:
            raise TraceError(
                f"time went backwards: {rec.time} after {self._last_time}")
        self._last_time = rec.time
        self.records.append(rec)

    def __iter__(self) -> Iterator[Record]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            for rec in self.records:
                fh.write(format_record(rec))
                fh.write("\n")

    @staticmethod
    def load(path) -> "Trace":
        tr = Trace(sizes={})  # parsed files are taken as-is
        for rec in read_trace(path):
            tr.records.append(rec)
        return tr


def write_trace(records: Iterable[Record], path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(format_record(rec))
            fh.write("\n")


def read_trace(path) -> Iterator[Record]:
    """Yields records in file order; raises on the first malformed line."""
    with open(path) as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            yield parse_line(line, line_no=i)
