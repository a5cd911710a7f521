"""Simulated wireless world: random-waypoint mobility, two-ray ground
propagation with threshold reception, and a simplified CSMA MAC with
per-interface drop-tail queues.
"""

import math
from dataclasses import dataclass, field

from .packets import BROADCAST, Packet

DEFAULT_AREA = (500.0, 400.0)
DEFAULT_BANDWIDTH = 2_000_000.0          # bit/s
DEFAULT_IFQ_CAPACITY = 50
SLOT_TIME = 20e-6
# Backoff windows must outgrow the longest airtime (1040 B at 2 Mb/s is
# 4.16 ms = 208 slots) or hidden senders phase-lock into repeat collisions.
CW_MIN = 64                              # slots; doubles per attempt
CW_MAX = 8192
UNICAST_RETRY_LIMIT = 4                  # failures allowed before a RET drop
BROADCAST_DEFER_LIMIT = 8
MOBILITY_SAMPLE_INTERVAL = 0.5


@dataclass
class NodePose:
    node_id: int
    x: float
    y: float
    speed: float = 0.0                   # current travel speed, 0 while idle
    heading: tuple[float, float] = (0.0, 0.0)
    waypoint: tuple[float, float] | None = None
    pause_until: float = 0.0
    static: bool = False


def distance(a: NodePose, b: NodePose) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass
class ChannelParams:
    """Two-ray ground channel: d^-2 below the crossover, d^-4 above it.

    The d^-2 branch is calibrated so received power is continuous at the
    crossover distance.
    """
    tx_power: float = 0.28183815         # W
    gain_tx: float = 1.0
    gain_rx: float = 1.0
    height_tx: float = 1.5               # m
    height_rx: float = 1.5
    crossover: float = 86.1424
    rx_threshold: float = 3.652e-10      # W
    tx_range: float = field(init=False)

    def __post_init__(self):
        self.tx_range = self._solve_range()

    def _k(self) -> float:
        return (self.tx_power * self.gain_tx * self.gain_rx
                * self.height_tx ** 2 * self.height_rx ** 2)

    def power_at(self, d: float) -> float:
        if d <= 0:
            return self.tx_power
        k = self._k()
        if d < self.crossover:
            return k / (self.crossover ** 2 * d ** 2)
        return k / d ** 4

    def _solve_range(self) -> float:
        k = self._k()
        d4 = (k / self.rx_threshold) ** 0.25
        if d4 >= self.crossover:
            return d4
        return math.sqrt(k / (self.crossover ** 2 * self.rx_threshold))


def default_channel(tx_range: float = 250.0) -> ChannelParams:
    """Channel with rx_threshold back-solved for the requested radio range."""
    ch = ChannelParams()
    if tx_range >= ch.crossover:
        thresh = ch._k() / tx_range ** 4
    else:
        thresh = ch._k() / (ch.crossover ** 2 * tx_range ** 2)
    return ChannelParams(rx_threshold=thresh)


def received_power(tx: NodePose, rx: NodePose, ch: ChannelParams) -> float:
    d = distance(tx, rx)
    if d <= 0:
        raise ValueError("co-located nodes: distance must be > 0")
    return ch.power_at(d)


def step_mobility(pose: NodePose, dt: float, now: float, rng, area,
                  speed_range, pause: float) -> None:
    """Advance one node by dt seconds of random-waypoint motion (in place)."""
    if pose.static:
        pose.speed = 0.0
        return
    if now < pose.pause_until:
        pose.speed = 0.0
        return
    if pose.waypoint is None:
        _pick_waypoint(pose, rng, area, speed_range)
    wx, wy = pose.waypoint
    dx, dy = wx - pose.x, wy - pose.y
    dist = math.hypot(dx, dy)
    step = pose.speed * dt
    if step >= dist:
        # arrival; leftover motion within this dt is discarded
        pose.x, pose.y = wx, wy
        pose.waypoint = None
        pose.heading = (0.0, 0.0)
        pose.pause_until = now + pause
        return
    pose.x += dx / dist * step
    pose.y += dy / dist * step
    pose.heading = (dx / dist, dy / dist)


def _pick_waypoint(pose: NodePose, rng, area, speed_range) -> None:
    w, h = area
    pose.waypoint = (rng.uniform(0.0, w), rng.uniform(0.0, h))
    pose.speed = rng.uniform(*speed_range)
    dx, dy = pose.waypoint[0] - pose.x, pose.waypoint[1] - pose.y
    d = math.hypot(dx, dy)
    pose.heading = (dx / d, dy / d) if d > 0 else (0.0, 0.0)


class Mobility:
    """Samples and advances all poses every MOBILITY_SAMPLE_INTERVAL seconds."""

    def __init__(self, engine, poses, area, speed_range, pause, duration,
                 record_cb):
        self.engine = engine
        self.poses = poses
        self.area = area
        self.speed_range = speed_range
        self.pause = pause
        self.duration = duration
        self.record = record_cb
        self.interval = MOBILITY_SAMPLE_INTERVAL

    def start(self) -> None:
        self._sample(first=True)

    def _sample(self, first=False) -> None:
        now = self.engine.now
        rng = self.engine.rng("mobility")
        for nid in sorted(self.poses):
            pose = self.poses[nid]
            if not first:
                step_mobility(pose, self.interval, now, rng, self.area,
                              self.speed_range, self.pause)
            self.record(now, nid, pose.x, pose.y,
                        0.0 if pose.static or now < pose.pause_until
                        else pose.speed)
        nxt = now + self.interval
        if nxt <= self.duration:
            self.engine.schedule(nxt, self._sample, kind="mobility-step")


class IfaceQueue:
    """Drop-tail FIFO; enqueue reports acceptance so callers can trace drops."""

    def __init__(self, capacity: int = DEFAULT_IFQ_CAPACITY):
        self.capacity = capacity
        self.items: list = []

    def enqueue(self, item) -> bool:
        if len(self.items) >= self.capacity:
            return False
        self.items.append(item)
        return True

    def dequeue(self):
        return self.items.pop(0)

    def __len__(self):
        return len(self.items)


@dataclass
class MacState:
    in_service: Packet | None = None
    mac_dst: int = BROADCAST
    attempts: int = 0


@dataclass
class ActiveTx:
    src: int
    pkt: Packet
    mac_dst: int
    start: float
    end: float
    receivers: list[int]                 # in range at send time, src excluded
    corrupted: set[int] = field(default_factory=set)


class Network:
    """Shared medium plus per-node MAC state.

    Callbacks:
      trace_pkt(evt, node, layer, pkt, reason)  -- trace hook
      on_deliver(node, pkt, mac_src)            -- successful MAC reception
      on_link_failure(node, mac_dst, pkt)       -- unicast retry exhaustion
    """

    def __init__(self, engine, poses, channel, *, trace_pkt, on_deliver,
                 on_link_failure=None, bandwidth=DEFAULT_BANDWIDTH,
                 ifq_capacity=DEFAULT_IFQ_CAPACITY):
        self.engine = engine
        self.poses = poses
        self.channel = channel
        self.trace_pkt = trace_pkt
        self.on_deliver = on_deliver
        self.on_link_failure = on_link_failure or (lambda n, d, p: None)
        self.bandwidth = bandwidth
        self.queues = {nid: IfaceQueue(ifq_capacity) for nid in sorted(poses)}
        self.mac = {nid: MacState() for nid in sorted(poses)}
        self.active: list[ActiveTx] = []

    # -- queueing ---------------------------------------------------------

    def send(self, src: int, pkt: Packet, mac_dst: int) -> None:
        if not self.queues[src].enqueue((pkt, mac_dst)):
            self.trace_pkt("d", src, "MAC", pkt, "IFQ")
            return
        self._kick(src)

    def _kick(self, node: int) -> None:
        st = self.mac[node]
        if st.in_service is not None or not len(self.queues[node]):
            return
        st.in_service, st.mac_dst = self.queues[node].dequeue()
        st.attempts = 0
        jitter = SLOT_TIME * self.engine.rng("mac").randrange(CW_MIN)
        self.engine.schedule(self.engine.now + jitter,
                             lambda: self._attempt(node),
                             kind="mac-attempt", target=node)

    def _finish(self, node: int) -> None:
        st = self.mac[node]
        st.in_service = None
        st.attempts = 0
        self._kick(node)

    # -- carrier sense / backoff ------------------------------------------

    def _in_range(self, a: NodePose, b: NodePose) -> bool:
        return distance(a, b) <= self.channel.tx_range

    def _busy_until(self, node: int) -> float:
        now = self.engine.now
        pose = self.poses[node]
        latest = 0.0
        for tx in self.active:
            if tx.end > now and (node in tx.receivers or node == tx.src):
                latest = max(latest, tx.end)
        return latest

    def _backoff(self, attempts: int) -> float:
        cw = min(CW_MIN << attempts, CW_MAX)
        return SLOT_TIME * self.engine.rng("mac").randrange(cw)

    def _attempt(self, node: int) -> None:
        st = self.mac[node]
        if st.in_service is None:
            return
        busy = self._busy_until(node)
        if busy > self.engine.now:
            st.attempts += 1
            limit = (UNICAST_RETRY_LIMIT if st.mac_dst != BROADCAST
                     else BROADCAST_DEFER_LIMIT)
            if st.attempts > limit:
                self._drop_ret(node)
                return
            self.engine.schedule(busy + self._backoff(st.attempts),
                                 lambda: self._attempt(node),
                                 kind="mac-attempt", target=node)
            return
        self._transmit(node)

    def _drop_ret(self, node: int) -> None:
        st = self.mac[node]
        pkt, mac_dst = st.in_service, st.mac_dst
        self.trace_pkt("d", node, "MAC", pkt, "RET")
        self._finish(node)
        if mac_dst != BROADCAST:
            self.on_link_failure(node, mac_dst, pkt)

    # -- air time ----------------------------------------------------------

    def _transmit(self, node: int) -> None:
        st = self.mac[node]
        pkt = st.in_service
        now = self.engine.now
        end = now + pkt.size * 8 / self.bandwidth
        me = self.poses[node]
        receivers = [nid for nid in sorted(self.poses)
                     if nid != node and self._in_range(me, self.poses[nid])]
        tx = ActiveTx(node, pkt, st.mac_dst, now, end, receivers)
        self.active = [a for a in self.active if a.end > now]
        for other in self.active:
            oset = set(other.receivers)
            for r in receivers:
                if r == other.src:
                    tx.corrupted.add(r)      # half-duplex: r is on air itself
                elif r in oset:
                    tx.corrupted.add(r)      # overlap audible at r kills both
                    other.corrupted.add(r)
        self.active.append(tx)
        self.trace_pkt("s", node, "MAC", pkt, "---")
        self.engine.schedule(end, lambda: self._tx_end(tx), kind="mac-end",
                             target=node)

    def _tx_end(self, tx: ActiveTx) -> None:
        if tx in self.active:
            self.active.remove(tx)
        st = self.mac[tx.src]
        if tx.mac_dst == BROADCAST:
            for r in tx.receivers:
                if r in tx.corrupted:
                    self.trace_pkt("d", r, "MAC", tx.pkt, "CBK")
                else:
                    self.trace_pkt("r", r, "MAC", tx.pkt, "---")
                    self.on_deliver(r, tx.pkt, tx.src)
            self._finish(tx.src)
            return
        r = tx.mac_dst
        ok = r in tx.receivers and r not in tx.corrupted
        if r in tx.receivers and r in tx.corrupted:
            self.trace_pkt("d", r, "MAC", tx.pkt, "CBK")
        if ok:
            self.trace_pkt("r", r, "MAC", tx.pkt, "---")
            self._finish(tx.src)
            self.on_deliver(r, tx.pkt, tx.src)
            return
        st.attempts += 1
        if st.attempts > UNICAST_RETRY_LIMIT:
            self._drop_ret(tx.src)
            return
        self.engine.schedule(self.engine.now + self._backoff(st.attempts),
                             lambda: self._attempt(tx.src),
                             kind="mac-attempt", target=tx.src)
