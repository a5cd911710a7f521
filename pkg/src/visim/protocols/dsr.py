"""DSR: on-demand source routing with route caches.

Data carries its full route in the header. Routes come from flooded route
requests; the request accumulates the nodes it traversed, and the reply ships
the completed route back along the reversed record.
"""

import dataclasses
from dataclasses import dataclass

from ..packets import (BROADCAST, DsrRerr, DsrRrep, DsrRreq, Packet)
from ..trace import ROUTING_SIZE
from .base import RoutingProtocol, SendBuffer

RREQ_RETRY_BASE = 1.0                    # seconds; doubles per re-flood
RREQ_RETRY_CAP = 4.0
FORWARD_JITTER = 0.01                    # de-syncs sibling rebroadcasts


@dataclass
class CachedRoute:
    route: tuple[int, ...]               # self .. destination
    install_time: float


class Dsr(RoutingProtocol):
    name = "dsr"

    def __init__(self, sim, node_id):
        super().__init__(sim, node_id)
        self.cache: dict[int, list[CachedRoute]] = {}
        self.seen: set[tuple[int, int]] = set()
        self.next_request_id = 0
        self.buffer = SendBuffer(on_drop=lambda p: self._rtr("d", p))
        self._pending: dict[int, object] = {}    # dst -> retry event
        self._retry_wait: dict[int, float] = {}

    # -- route cache --------------------------------------------------------

    def cache_route(self, route: tuple[int, ...]) -> None:
        """Store a loop-free route starting at this node."""
        if len(route) < 2 or route[0] != self.node_id:
            return
        if len(set(route)) != len(route):
            return
        dst = route[-1]
        routes = self.cache.setdefault(dst, [])
        for cr in routes:
            if cr.route == route:
                cr.install_time = self.sim.now
                return
        routes.append(CachedRoute(route, self.sim.now))

    def best_route(self, dst: int) -> tuple[int, ...] | None:
        routes = self.cache.get(dst)
        if not routes:
            return None
        best = min(routes, key=lambda cr: (len(cr.route), -cr.install_time))
        return best.route

    def purge_hop(self, u: int, v: int) -> None:
        for dst in list(self.cache):
            kept = [cr for cr in self.cache[dst]
                    if not self._contains_hop(cr.route, u, v)]
            if kept:
                self.cache[dst] = kept
            else:
                del self.cache[dst]

    @staticmethod
    def _contains_hop(route, u, v) -> bool:
        for a, b in zip(route, route[1:]):
            if a == u and b == v:
                return True
        return False

    # -- data plane ---------------------------------------------------------

    def send_from_agent(self, pkt: Packet) -> None:
        if pkt.dst == self.node_id:
            self.sim.deliver_agent(self.node_id, pkt)
            return
        route = self.best_route(pkt.dst)
        if route is None:
            self.buffer.add(pkt.dst, pkt, self.sim.now)
            self._start_discovery(pkt.dst)
            return
        self._send_source_routed(pkt, route)

    def _send_source_routed(self, pkt: Packet, route: tuple[int, ...]) -> None:
        routed = pkt.clone(payload=dataclasses.replace(pkt.payload, route=route))
        self._send(routed, route[1])

    def on_packet(self, pkt: Packet, mac_src: int) -> None:
        if pkt.cls == "rreq":
            self._on_rreq(pkt)
        elif pkt.cls == "rrep":
            self._on_rrep(pkt)
        elif pkt.cls == "rerr":
            self._on_rerr(pkt)
        else:
            self._on_data(pkt)

    def _on_data(self, pkt: Packet) -> None:
        route = pkt.payload.route
        if pkt.dst == self.node_id:
            # Reverse of the carried header routes replies; requests stay the
            # only way a sender learns routes, so breaks cost a fresh flood.
            if route is not None and pkt.cls == "data":
                self.cache_route(tuple(reversed(route)))
            self.sim.deliver_agent(self.node_id, pkt)
            return
        if route is None or self.node_id not in route:
            self._rtr("d", pkt)
            return
        i = route.index(self.node_id)
        if i + 1 >= len(route):
            self._rtr("d", pkt)
            return
        self._send(pkt, route[i + 1])

    # -- discovery ----------------------------------------------------------

    def _start_discovery(self, dst: int) -> None:
        if dst in self._pending:
            return
        self._flood(dst)

    def _flood(self, dst: int) -> None:
        self.next_request_id += 1
        payload = DsrRreq(self.next_request_id, (self.node_id,))
        pkt = Packet(self.sim.new_uid(), "rreq", ROUTING_SIZE,
                     self.node_id, dst, payload)
        self.seen.add((self.node_id, self.next_request_id))
        self._send(pkt, BROADCAST)
        wait = self._retry_wait.get(dst, RREQ_RETRY_BASE)
        self._retry_wait[dst] = min(wait * 2, RREQ_RETRY_CAP)
        self._pending[dst] = self.sim.schedule(
            self.sim.now + wait, lambda: self._retry(dst),
            kind="dsr-rreq-retry", target=self.node_id)

    def _retry(self, dst: int) -> None:
        self._pending.pop(dst, None)
        if self.buffer.pending(dst) and self.best_route(dst) is None:
            self._flood(dst)
        else:
            self._retry_wait.pop(dst, None)

    def _on_rreq(self, pkt: Packet) -> None:
        req: DsrRreq = pkt.payload
        if pkt.src == self.node_id:
            return
        key = (pkt.src, req.request_id)
        if key in self.seen:
            return
        self.seen.add(key)
        if self.node_id in req.route_record:
            return
        if pkt.dst == self.node_id:
            full = req.route_record + (self.node_id,)
            self.cache_route(tuple(reversed(full)))
            self._reply(pkt.src, full)
            return
        cached = self.best_route(pkt.dst)
        if cached is not None:
            candidate = req.route_record + cached
            if len(set(candidate)) == len(candidate):
                self._reply(pkt.src, candidate)
                return
        fwd = pkt.clone(payload=DsrRreq(
            req.request_id, req.route_record + (self.node_id,)))
        jit = self.sim.rng("protocol").uniform(0, FORWARD_JITTER)
        self.sim.schedule(self.sim.now + jit,
                          lambda: self._send(fwd, BROADCAST),
                          kind="dsr-rreq-fwd", target=self.node_id)

    def _reply(self, origin: int, route: tuple[int, ...]) -> None:
        rrep = Packet(self.sim.new_uid(), "rrep", ROUTING_SIZE,
                      self.node_id, origin, DsrRrep(route))
        i = route.index(self.node_id)
        self._send(rrep, route[i - 1])

    def _on_rrep(self, pkt: Packet) -> None:
        route: tuple[int, ...] = pkt.payload.route
        if pkt.dst == self.node_id:
            self.cache_route(route)
            ev = self._pending.pop(route[-1], None)
            if ev is not None:
                self.sim.cancel(ev)
            self._retry_wait.pop(route[-1], None)
            for queued in self.buffer.pop_all(route[-1], self.sim.now):
                self._send_source_routed(queued, route)
            return
        if self.node_id not in route:
            self._rtr("d", pkt)
            return
        i = route.index(self.node_id)
        if i == 0:
            self._rtr("d", pkt)
            return
        self._send(pkt, route[i - 1])

    # -- maintenance --------------------------------------------------------

    def on_link_failure(self, neighbor: int, pkt: Packet) -> None:
        u, v = self.node_id, neighbor
        self.purge_hop(u, v)
        if pkt.cls not in ("data", "ack"):
            return                       # control losses purge locally only
        if pkt.src == self.node_id:
            self._reroute_or_flood(pkt)
            return
        route = getattr(pkt.payload, "route", None)
        if route is None or self.node_id not in route:
            return
        i = route.index(self.node_id)
        back = tuple(reversed(route[:i + 1]))
        rerr = Packet(self.sim.new_uid(), "rerr", ROUTING_SIZE,
                      self.node_id, pkt.src, DsrRerr((u, v), back))
        if len(back) > 1:
            self._send(rerr, back[1])

    def _on_rerr(self, pkt: Packet) -> None:
        err: DsrRerr = pkt.payload
        self.purge_hop(*err.broken)
        if pkt.dst == self.node_id:
            for dst in self.buffer.destinations():
                route = self.best_route(dst)
                if route is not None:
                    for queued in self.buffer.pop_all(dst, self.sim.now):
                        self._send_source_routed(queued, route)
                else:
                    self._after_break(dst)
            return
        route = err.route
        if self.node_id not in route:
            self._rtr("d", pkt)
            return
        i = route.index(self.node_id)
        if i + 1 >= len(route):
            self._rtr("d", pkt)
            return
        self._send(pkt, route[i + 1])

    def _reroute_or_flood(self, pkt: Packet) -> None:
        """Own traffic hit a dead hop: the packet is lost (the agent resends
        it later), follow-up sends take the next cached route if any."""
        if self.best_route(pkt.dst) is not None:
            return
        self.buffer.add(pkt.dst, pkt, self.sim.now)
        self._after_break(pkt.dst)

    def _after_break(self, dst: int) -> None:
        if self.buffer.pending(dst) and self.best_route(dst) is None \
                and dst not in self._pending:
            self._flood(dst)
