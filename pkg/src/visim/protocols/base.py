"""Shared routing-layer plumbing."""

from ..packets import Packet

SEND_BUFFER_CAPACITY = 64
SEND_BUFFER_TIMEOUT = 30.0


class RoutingProtocol:
    """Per-node routing instance.

    The sim handle provides: now, schedule(t, fn), rng(stream), new_uid(),
    mac_send(node, pkt, mac_dst), trace_pkt(evt, node, layer, pkt, reason),
    deliver_agent(node, pkt).
    """

    name = "base"

    def __init__(self, sim, node_id: int):
        self.sim = sim
        self.node_id = node_id

    def start(self) -> None:
        """Called once before the clock starts."""

    def send_from_agent(self, pkt: Packet) -> None:
        """Route a locally originated data or ack packet."""
        raise NotImplementedError

    def on_packet(self, pkt: Packet, mac_src: int) -> None:
        """Handle a packet received by the MAC."""
        raise NotImplementedError

    def on_link_failure(self, neighbor: int, pkt: Packet) -> None:
        """MAC retry exhaustion while unicasting pkt to neighbor."""

    # small helpers shared by subclasses

    def _rtr(self, evt: str, pkt: Packet, reason: str = "---") -> None:
        self.sim.trace_pkt(evt, self.node_id, "RTR", pkt, reason)

    def _send(self, pkt: Packet, mac_dst: int) -> None:
        """Trace at RTR (s if self-originated, f if relayed) and hand to MAC."""
        self._rtr("s" if pkt.src == self.node_id else "f", pkt)
        self.sim.mac_send(self.node_id, pkt, mac_dst)


class SendBuffer:
    """Per-destination holding area for data awaiting a route.

    Oldest entries fall out on overflow; stale entries expire on access.
    """

    def __init__(self, capacity=SEND_BUFFER_CAPACITY,
                 timeout=SEND_BUFFER_TIMEOUT, on_drop=None):
        self.capacity = capacity
        self.timeout = timeout
        self.on_drop = on_drop or (lambda pkt: None)
        self._buf: dict[int, list[tuple[float, Packet]]] = {}

    def add(self, dst: int, pkt: Packet, now: float) -> None:
        self.expire(now)
        q = self._buf.setdefault(dst, [])
        # retransmit clones share the uid; keep only the newest copy
        q[:] = [(t, p) for t, p in q if p.uid != pkt.uid]
        if len(q) >= self.capacity:
            _, old = q.pop(0)
            self.on_drop(old)
        q.append((now, pkt))

    def expire(self, now: float) -> None:
        for dst in list(self._buf):
            q = self._buf[dst]
            while q and now - q[0][0] > self.timeout:
                _, old = q.pop(0)
                self.on_drop(old)
            if not q:
                del self._buf[dst]

    def pop_all(self, dst: int, now: float) -> list[Packet]:
        self.expire(now)
        q = self._buf.pop(dst, [])
        return [pkt for _, pkt in q]

    def pending(self, dst: int) -> bool:
        return bool(self._buf.get(dst))

    def destinations(self) -> list[int]:
        return sorted(self._buf)
