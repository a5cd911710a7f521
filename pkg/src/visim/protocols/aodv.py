"""AODV: on-demand distance-vector routing.

Route requests flood the network installing reverse paths; the reply retraces
them, installing forward entries hop by hop. Entries expire unless used, and
breaks propagate route errors back toward active sources.
"""

from dataclasses import dataclass

from ..packets import (AodvRerr, AodvRrep, AodvRreq, BROADCAST, Packet)
from ..trace import ROUTING_SIZE
from .base import RoutingProtocol, SendBuffer

ROUTE_LIFETIME = 10.0
RREQ_RETRIES = 1                         # re-floods after the first rreq
RREQ_WAIT = 1.0                          # doubles per retry
RREQ_HOLDDOWN = 4.0                      # min gap between floods per dest
FORWARD_JITTER = 0.01


@dataclass
class AodvEntry:
    dest: int
    next_hop: int
    hop_count: int
    dest_seq: int
    expires_at: float
    valid: bool = True


class Aodv(RoutingProtocol):
    name = "aodv"

    def __init__(self, sim, node_id):
        super().__init__(sim, node_id)
        self.table: dict[int, AodvEntry] = {}
        self.seen: set[tuple[int, int]] = set()
        self.own_seq = 0
        self.next_rreq_id = 0
        self.buffer = SendBuffer(on_drop=lambda p: self._rtr("d", p))
        self._pending: dict[int, tuple[int, object]] = {}  # dst -> (tries, ev)
        self._last_flood: dict[int, float] = {}

    # -- table --------------------------------------------------------------

    def _alive(self, e: AodvEntry | None) -> bool:
        return (e is not None and e.valid
                and self.sim.now < e.expires_at)

    def _refresh(self, e: AodvEntry) -> None:
        e.expires_at = self.sim.now + ROUTE_LIFETIME

    def _update(self, dest: int, next_hop: int, hops: int, seq: int) -> None:
        """Install (dest -> next_hop) if fresher or better than what we hold."""
        e = self.table.get(dest)
        if (e is None or seq > e.dest_seq
                or (seq == e.dest_seq and hops < e.hop_count)
                or not self._alive(e)):
            self.table[dest] = AodvEntry(
                dest, next_hop, hops, seq,
                self.sim.now + ROUTE_LIFETIME)

    # -- data plane ---------------------------------------------------------

    def send_from_agent(self, pkt: Packet) -> None:
        if pkt.dst == self.node_id:
            self.sim.deliver_agent(self.node_id, pkt)
            return
        e = self.table.get(pkt.dst)
        if self._alive(e):
            self._refresh(e)
            self._send(pkt, e.next_hop)
            return
        self.buffer.add(pkt.dst, pkt, self.sim.now)
        self._discover(pkt.dst)

    def on_packet(self, pkt: Packet, mac_src: int) -> None:
        if pkt.cls == "rreq":
            self._on_rreq(pkt, mac_src)
        elif pkt.cls == "rrep":
            self._on_rrep(pkt, mac_src)
        elif pkt.cls == "rerr":
            self._on_rerr(pkt, mac_src)
        else:
            self._on_data(pkt, mac_src)

    def _on_data(self, pkt: Packet, mac_src: int) -> None:
        back = self.table.get(pkt.src)
        if back is not None and back.valid:
            self._refresh(back)          # active sources stay reachable
        if pkt.dst == self.node_id:
            self.sim.deliver_agent(self.node_id, pkt)
            return
        e = self.table.get(pkt.dst)
        if not self._alive(e):
            self._rtr("d", pkt)
            self._report_no_route(pkt)
            return
        self._refresh(e)
        self._send(pkt, e.next_hop)

    def _report_no_route(self, pkt: Packet) -> None:
        """A forwarder without a live route owes the source a route error."""
        if pkt.src == self.node_id:
            return
        e = self.table.get(pkt.dst)
        seq = e.dest_seq if e is not None else 0
        back = self.table.get(pkt.src)
        if not self._alive(back):
            return
        rerr = Packet(self.sim.new_uid(), "rerr", ROUTING_SIZE,
                      self.node_id, pkt.src, AodvRerr(((pkt.dst, seq),)))
        self._send(rerr, back.next_hop)

    # -- discovery ----------------------------------------------------------

    def _discover(self, dst: int) -> None:
        if dst in self._pending:
            return
        earliest = self._last_flood.get(dst, -RREQ_HOLDDOWN) + RREQ_HOLDDOWN
        if self.sim.now >= earliest:
            self._flood(dst, tries=0)
            return
        # Back-to-back break storms collapse into one delayed discovery.
        ev = self.sim.schedule(earliest, lambda: self._held_flood(dst),
                               kind="aodv-rreq-hold", target=self.node_id)
        self._pending[dst] = (0, ev)

    def _held_flood(self, dst: int) -> None:
        if self._pending.pop(dst, None) is None:
            return
        if self._alive(self.table.get(dst)) or not self.buffer.pending(dst):
            return
        self._flood(dst, tries=0)

    def _flood(self, dst: int, tries: int) -> None:
        self._last_flood[dst] = self.sim.now
        self.own_seq += 1
        self.next_rreq_id += 1
        known = self.table.get(dst)
        payload = AodvRreq(self.next_rreq_id, self.own_seq,
                           known.dest_seq if known is not None else 0, 0)
        pkt = Packet(self.sim.new_uid(), "rreq", ROUTING_SIZE,
                     self.node_id, dst, payload)
        self.seen.add((self.node_id, self.next_rreq_id))
        self._send(pkt, BROADCAST)
        wait = RREQ_WAIT * (2 ** tries)
        ev = self.sim.schedule(self.sim.now + wait,
                               lambda: self._retry(dst, tries),
                               kind="aodv-rreq-retry", target=self.node_id)
        self._pending[dst] = (tries, ev)

    def _retry(self, dst: int, tries: int) -> None:
        if self._pending.pop(dst, None) is None:
            return
        if self._alive(self.table.get(dst)) or not self.buffer.pending(dst):
            return
        if tries < RREQ_RETRIES:
            self._flood(dst, tries + 1)
            return
        for queued in self.buffer.pop_all(dst, self.sim.now):
            self._rtr("d", queued)

    def _on_rreq(self, pkt: Packet, mac_src: int) -> None:
        req: AodvRreq = pkt.payload
        if pkt.src == self.node_id:
            return
        key = (pkt.src, req.rreq_id)
        if key in self.seen:
            return
        self.seen.add(key)
        hops = req.hop_count + 1
        self._update(pkt.src, mac_src, hops, req.origin_seq)
        if pkt.dst == self.node_id:
            self.own_seq = max(self.own_seq, req.dst_seq)
            self._reply(pkt.src, mac_src, self.node_id, self.own_seq, 0)
            return
        e = self.table.get(pkt.dst)
        if req.dst_seq > 0 and self._alive(e) and e.dest_seq >= req.dst_seq:
            self._reply(pkt.src, mac_src, pkt.dst, e.dest_seq, e.hop_count)
            return
        fwd = pkt.clone(payload=AodvRreq(req.rreq_id, req.origin_seq,
                                         req.dst_seq, hops))
        jit = self.sim.rng("protocol").uniform(0, FORWARD_JITTER)
        self.sim.schedule(self.sim.now + jit,
                          lambda: self._send(fwd, BROADCAST),
                          kind="aodv-rreq-fwd", target=self.node_id)

    def _reply(self, origin: int, via: int, dest: int, dest_seq: int,
               hop_count: int) -> None:
        rrep = Packet(self.sim.new_uid(), "rrep", ROUTING_SIZE,
                      self.node_id, origin, AodvRrep(dest, dest_seq, hop_count))
        self._send(rrep, via)

    def _on_rrep(self, pkt: Packet, mac_src: int) -> None:
        rep: AodvRrep = pkt.payload
        hops = rep.hop_count + 1
        self._update(rep.dest, mac_src, hops, rep.dest_seq)
        if pkt.dst == self.node_id:
            pending = self._pending.pop(rep.dest, None)
            if pending is not None:
                self.sim.cancel(pending[1])
            e = self.table.get(rep.dest)
            for queued in self.buffer.pop_all(rep.dest, self.sim.now):
                if self._alive(e):
                    self._refresh(e)
                    self._send(queued, e.next_hop)
                else:
                    self._rtr("d", queued)
            return
        back = self.table.get(pkt.dst)
        if not self._alive(back):
            self._rtr("d", pkt)          # reverse path gone; reply dies here
            return
        self._refresh(back)
        fwd = pkt.clone(payload=AodvRrep(rep.dest, rep.dest_seq, hops))
        self._send(fwd, back.next_hop)

    # -- maintenance --------------------------------------------------------

    def on_link_failure(self, neighbor: int, pkt: Packet) -> None:
        dead: list[tuple[int, int]] = []
        for d in sorted(self.table):
            e = self.table[d]
            if e.next_hop == neighbor and e.valid:
                e.valid = False
                e.dest_seq += 1
                dead.append((d, e.dest_seq))
        if pkt.cls not in ("data", "ack"):
            return
        if pkt.src == self.node_id:
            if self.buffer.pending(pkt.dst):
                self._discover(pkt.dst)
            return
        if not dead:
            dead = [(pkt.dst, 0)]
        back = self.table.get(pkt.src)
        if not self._alive(back):
            return
        rerr = Packet(self.sim.new_uid(), "rerr", ROUTING_SIZE,
                      self.node_id, pkt.src, AodvRerr(tuple(dead)))
        self._send(rerr, back.next_hop)

    def _on_rerr(self, pkt: Packet, mac_src: int) -> None:
        err: AodvRerr = pkt.payload
        hit = False
        for dest, seq in err.dests:
            e = self.table.get(dest)
            if e is not None and e.valid and e.next_hop == mac_src:
                e.valid = False
                e.dest_seq = max(e.dest_seq, seq)
                hit = True
        if pkt.dst == self.node_id:
            for dst in self.buffer.destinations():
                if not self._alive(self.table.get(dst)) \
                        and dst not in self._pending:
                    self._discover(dst)
            return
        if not hit:
            return                       # nothing we relayed through is affected
        back = self.table.get(pkt.dst)
        if not self._alive(back):
            self._rtr("d", pkt)
            return
        fwd = pkt.clone()
        self._send(fwd, back.next_hop)
