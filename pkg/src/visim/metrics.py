"""Performance indicators computed from trace records.

Transmissions are MAC-layer 's' and 'f' events. Goodput is the data share of
those, routing load the control share, ack share the rest; the three ratios
partition 1 exactly. Throughput is bytes received at a node per time bucket.
"""

import math
from dataclasses import dataclass, field
from typing import Iterable

from .trace import MobilityRecord, ROUTING_CLASSES, Record

GOODPUT_MODES = ("network", "source")


class MetricsError(Exception):
    pass


@dataclass
class MetricCounts:
    """Raw MAC transmission tallies; summing these aggregates runs."""
    total_packets: int = 0
    total_bytes: int = 0
    data_packets: int = 0
    data_bytes: int = 0
    routing_packets: int = 0
    routing_bytes: int = 0
    ack_packets: int = 0
    ack_bytes: int = 0
    source_data_packets: int = 0
    source_data_bytes: int = 0

    def add(self, other: "MetricCounts") -> None:
        for f in self.__dataclass_fields__:
            setattr(self, f, getattr(self, f) + getattr(other, f))


@dataclass
class MetricSummary:
    goodput_packets: float
    goodput_bytes: float
    routing_load_packets: float
    routing_load_bytes: float
    ack_share_packets: float
    ack_share_bytes: float
    mode: str = "network"
    counts: MetricCounts = field(default_factory=MetricCounts)


def count_transmissions(records: Iterable[Record]) -> MetricCounts:
    c = MetricCounts()
    for rec in records:
        if isinstance(rec, MobilityRecord):
            continue
        if rec.layer != "MAC" or rec.evt not in ("s", "f"):
            continue
        c.total_packets += 1
        c.total_bytes += rec.size
        if rec.cls == "data":
            c.data_packets += 1
            c.data_bytes += rec.size
            if rec.node == rec.src:
                c.source_data_packets += 1
                c.source_data_bytes += rec.size
        elif rec.cls in ROUTING_CLASSES:
            c.routing_packets += 1
            c.routing_bytes += rec.size
        elif rec.cls == "ack":
            c.ack_packets += 1
            c.ack_bytes += rec.size
    return c


def summarize(records_or_counts, mode: str = "network") -> MetricSummary:
    if mode not in GOODPUT_MODES:
        raise MetricsError(f"unknown goodput mode {mode!r}")
    if isinstance(records_or_counts, MetricCounts):
        c = records_or_counts
    else:
        c = count_transmissions(records_or_counts)
    if c.total_packets == 0:
        raise MetricsError("no MAC transmissions in trace")
    dp = c.source_data_packets if mode == "source" else c.data_packets
    db = c.source_data_bytes if mode == "source" else c.data_bytes
    return MetricSummary(
        goodput_packets=dp / c.total_packets,
        goodput_bytes=db / c.total_bytes,
        routing_load_packets=c.routing_packets / c.total_packets,
        routing_load_bytes=c.routing_bytes / c.total_bytes,
        ack_share_packets=c.ack_packets / c.total_packets,
        ack_share_bytes=c.ack_bytes / c.total_bytes,
        mode=mode,
        counts=c)


def goodput(records: Iterable[Record], mode: str = "network"):
    s = summarize(records, mode)
    return s.goodput_packets, s.goodput_bytes


def routing_load(records: Iterable[Record]):
    s = summarize(records)
    return s.routing_load_packets, s.routing_load_bytes


def ack_share(records: Iterable[Record]):
    s = summarize(records)
    return s.ack_share_packets, s.ack_share_bytes


def ratio_parts(summary: MetricSummary, metric: str):
    """(value, numerator, denominator) for one flat ratio metric name."""
    c = summary.counts
    source = summary.mode == "source"
    parts = {
        "goodput_packets": (summary.goodput_packets,
                            c.source_data_packets if source
                            else c.data_packets, c.total_packets),
        "goodput_bytes": (summary.goodput_bytes,
                          c.source_data_bytes if source
                          else c.data_bytes, c.total_bytes),
        "routing_load_packets": (summary.routing_load_packets,
                                 c.routing_packets, c.total_packets),
        "routing_load_bytes": (summary.routing_load_bytes,
                               c.routing_bytes, c.total_bytes),
        "ack_share_packets": (summary.ack_share_packets,
                              c.ack_packets, c.total_packets),
        "ack_share_bytes": (summary.ack_share_bytes,
                            c.ack_bytes, c.total_bytes),
    }
    if metric not in parts:
        raise MetricsError(f"unknown ratio metric {metric!r}")
    return parts[metric]


def aggregate(summaries: Iterable[MetricSummary]) -> MetricSummary:
    """Pooled ratios: total numerators over total denominators."""
    summaries = list(summaries)
    if not summaries:
        raise MetricsError("nothing to aggregate")
    modes = {s.mode for s in summaries}
    if len(modes) > 1:
        raise MetricsError(f"mixed goodput modes {sorted(modes)}")
    pooled = MetricCounts()
    for s in summaries:
        pooled.add(s.counts)
    return summarize(pooled, mode=summaries[0].mode)


def throughput_series(records: Iterable[Record], dst: int,
                      bucket: float = 1.0, duration: float | None = None):
    """Bytes/second received at dst (MAC 'r', every class) per bucket.

    Returns a list of (bucket_start_time, value). With no duration the series
    runs to the last nonempty bucket.
    """
    if bucket <= 0:
        raise MetricsError(f"bucket width must be > 0, got {bucket}")
    sums: dict[int, float] = {}
    for rec in records:
        if isinstance(rec, MobilityRecord):
            continue
        if rec.layer == "MAC" and rec.evt == "r" and rec.node == dst:
            k = int(rec.time / bucket)
            sums[k] = sums.get(k, 0) + rec.size
    if duration is not None:
        n = math.ceil(duration / bucket)
    else:
        n = max(sums) + 1 if sums else 0
    return [(k * bucket, sums.get(k, 0) / bucket) for k in range(n)]


def first_delivery_time(records: Iterable[Record]) -> float | None:
    """Time of the first data packet handed to a destination agent."""
    for rec in records:
        if isinstance(rec, MobilityRecord):
            continue
        if rec.layer == "AGT" and rec.evt == "r" and rec.cls == "data":
            return rec.time
    return None


def coefficient_of_variation(values: Iterable[float]) -> float:
    """Population CoV (std/mean) of the nonzero entries."""
    vals = [v for v in values if v != 0]
    if not vals:
        return 0.0
    mean = sum(vals) / len(vals)
    var = sum((v - mean) ** 2 for v in vals) / len(vals)
    return math.sqrt(var) / mean
