"""DSDV: proactive distance-vector routing with destination sequence numbers.

Every node advertises its table periodically; even sequence numbers mark live
routes (owned by the destination), odd ones mark breaks (stamped by whoever
detected the break). Higher sequence wins; equal sequence prefers fewer hops.
"""

from dataclasses import dataclass, field

from ..packets import BROADCAST, DsdvAdvert, Packet
from ..trace import ROUTING_SIZE
from .base import RoutingProtocol, SendBuffer

INF_HOPS = float("inf")


@dataclass
class DsdvConfig:
    periodic_interval: float = 30.0
    settling_time: float = 6.0
    npdu_size: int = 60                 # advertisement payload budget, bytes
    entry_bytes: int = 12
    broken_hop_count: float = INF_HOPS
    missed_adverts: int = 3             # silent periods before a neighbor is dead
    min_triggered_gap: float = 5.0
    urgent_gap: float = 2.0             # still batches back-to-back break waves
    trigger_jitter: float = 0.3
    break_confirm: int = 5              # retry exhaustions before a break
    break_confirm_window: float = 3.0
    start_delay: float = 1.5            # quiet boot before the first dump
    start_spread: float = 3.0           # first-dump desync window


@dataclass
class DsdvEntry:
    dest: int
    next_hop: int
    hop_count: float
    dest_seq: int
    install_time: float
    changed_at: float                   # last (next_hop, hop_count) change
    advertised: bool = False
    urgent: bool = False                # break news skips settling


class Dsdv(RoutingProtocol):
    name = "dsdv"

    def __init__(self, sim, node_id, config: DsdvConfig | None = None):
        super().__init__(sim, node_id)
        self.cfg = config or DsdvConfig()
        self.own_seq = 0
        self.table: dict[int, DsdvEntry] = {
            node_id: DsdvEntry(node_id, node_id, 0.0, 0, 0.0, 0.0)
        }
        self.last_heard: dict[int, float] = {}
        self._fail_streak: dict[int, tuple[float, int]] = {}
        self._pending_significant: set[int] = set()
        self._trigger_ev = None
        self._last_triggered = -1e9
        # own packets wait out a blackout; one periodic cycle, then give up
        self.buffer = SendBuffer(capacity=16, timeout=16.0,
                                 on_drop=lambda p: self._rtr("d", p))

    def start(self) -> None:
        # cold-start dumps land early but desynced; steady state keeps the
        # full period between dumps per node
        offset = self.cfg.start_delay + \
            self.sim.rng("protocol").uniform(0, self.cfg.start_spread)
        self.sim.schedule(self.sim.now + offset, self._periodic,
                          kind="dsdv-periodic", target=self.node_id)

    # -- data plane ---------------------------------------------------------

    def send_from_agent(self, pkt: Packet) -> None:
        if pkt.dst == self.node_id:
            self.sim.deliver_agent(self.node_id, pkt)
            return
        self._route_or_drop(pkt)

    def on_packet(self, pkt: Packet, mac_src: int) -> None:
        if pkt.cls == "update":
            self._on_advertisement(pkt.payload, mac_src)
            return
        if pkt.dst == self.node_id:
            self.sim.deliver_agent(self.node_id, pkt)
            return
        self._route_or_drop(pkt)

    def _route_or_drop(self, pkt: Packet) -> None:
        e = self.table.get(pkt.dst)
        if e is None or e.hop_count >= INF_HOPS:
            if pkt.src == self.node_id:
                self.buffer.add(pkt.dst, pkt, self.sim.now)
            else:
                self._rtr("d", pkt)
            return
        self._send(pkt, e.next_hop)

    def _flush(self, dest: int) -> None:
        e = self.table.get(dest)
        for pkt in self.buffer.pop_all(dest, self.sim.now):
            if e is not None and e.hop_count < INF_HOPS:
                self._send(pkt, e.next_hop)
            else:
                self._rtr("d", pkt)

    # -- advertisements -----------------------------------------------------

    def _periodic(self) -> None:
        now = self.sim.now
        self.own_seq += 2
        own = self.table[self.node_id]
        own.dest_seq = self.own_seq
        own.advertised = False
        self._check_neighbors(now)
        self._broadcast(self._select_batch(now))
        self._pending_significant = {
            d for d in self._pending_significant
            if d in self.table and not self.table[d].advertised}
        self.sim.schedule(now + self.cfg.periodic_interval, self._periodic,
                          kind="dsdv-periodic", target=self.node_id)

    def _select_batch(self, now: float) -> list[DsdvEntry]:
        """Incremental update while the changed entries fit in one NPDU;
        a full table dump once they outgrow it. Settling withholds recent
        non-break changes from either form."""
        own = self.table[self.node_id]
        changed = [e for d, e in sorted(self.table.items())
                   if d != self.node_id and not e.advertised
                   and self._advertisable(e, now)]
        if len(changed) * self.cfg.entry_bytes <= self.cfg.npdu_size:
            return [own] + changed
        return [own] + [e for d, e in sorted(self.table.items())
                        if d != self.node_id and self._advertisable(e, now)]

    def _advertisable(self, e: DsdvEntry, now: float) -> bool:
        if e.hop_count >= INF_HOPS or e.urgent:
            return True                  # break news skips settling
        return now - e.changed_at >= self.cfg.settling_time

    def _broadcast(self, entries: list[DsdvEntry]) -> None:
        max_entries = self.cfg.npdu_size // self.cfg.entry_bytes
        for i in range(0, len(entries), max_entries):
            chunk = entries[i:i + max_entries]
            payload = DsdvAdvert(tuple(
                (e.dest, e.dest_seq, e.hop_count) for e in chunk))
            pkt = Packet(self.sim.new_uid(), "update", ROUTING_SIZE,
                         self.node_id, BROADCAST, payload)
            self._send(pkt, BROADCAST)
        for e in entries:
            e.advertised = True
            e.urgent = False

    def _schedule_trigger(self, at_hint: float, urgent: bool = False) -> None:
        """Queue an event-driven update no earlier than at_hint.

        Routine metric improvements wait out the settling time (at_hint =
        change + settling) plus the minimum gap between updates; break news
        and repairs of broken routes relay at the tighter urgent gap so
        stale paths die fast and traffic resumes without waiting for the
        next full periodic dump.
        """
        gap = self.cfg.urgent_gap if urgent else self.cfg.min_triggered_gap
        at = max(at_hint, self._last_triggered + gap)
        at += self.sim.rng("protocol").uniform(0, self.cfg.trigger_jitter)
        if self._trigger_ev is not None:
            if self._trigger_ev.fire_time <= at:
                return
            self.sim.cancel(self._trigger_ev)
        self._trigger_ev = self.sim.schedule(
            at, self._send_triggered, kind="dsdv-trigger", target=self.node_id)

    def _send_triggered(self) -> None:
        self._trigger_ev = None
        now = self.sim.now
        ready, waiting = [], []
        for d in sorted(self._pending_significant):
            e = self.table.get(d)
            if e is None or d == self.node_id:
                continue
            (ready if self._advertisable(e, now) else waiting).append(d)
        self._pending_significant = set(waiting)
        own = self.table[self.node_id]
        if ready or not own.advertised:
            self._last_triggered = now
            if len(ready) * self.cfg.entry_bytes <= self.cfg.npdu_size:
                self._broadcast([own] + [self.table[d] for d in ready])
            else:
                self._broadcast(self._select_batch(now))
        if waiting:
            next_at = min(self.table[d].changed_at + self.cfg.settling_time
                          for d in waiting)
            self._schedule_trigger(next_at)

    def _on_advertisement(self, adv: DsdvAdvert, sender: int) -> None:
        now = self.sim.now
        self.last_heard[sender] = now
        self._fail_streak.pop(sender, None)
        for dest, seq, hops in adv.entries:
            if dest == self.node_id:
                if seq > self.own_seq:
                    # someone marked us broken; reclaim with a fresher even seq
                    self.own_seq = seq + 1 if seq % 2 else seq + 2
                    own = self.table[self.node_id]
                    own.dest_seq = self.own_seq
                    own.advertised = False
                    self._schedule_trigger(now, urgent=True)
                continue
            metric = hops + 1 if hops < INF_HOPS else INF_HOPS
            e = self.table.get(dest)
            if e is not None and not (
                    seq > e.dest_seq
                    or (seq == e.dest_seq and metric < e.hop_count)):
                continue
            became_broken = metric >= INF_HOPS and (
                e is not None and e.hop_count < INF_HOPS)
            repaired = metric < INF_HOPS and (
                e is not None and e.hop_count >= INF_HOPS)
            significant = e is None or e.next_hop != sender or became_broken
            metric_changed = (e is None or e.hop_count != metric
                              or e.next_hop != sender)
            changed_at = now if metric_changed else e.changed_at
            # breaks and their repairs both count as important news
            urgent = became_broken
            self.table[dest] = DsdvEntry(dest, sender, metric, seq, now,
                                         changed_at, urgent=urgent)
            if metric < INF_HOPS and self.buffer.pending(dest):
                self._flush(dest)
            if significant or repaired:
                self._pending_significant.add(dest)
                hint = now if urgent else changed_at + self.cfg.settling_time
                self._schedule_trigger(hint, urgent=urgent)

    # -- breakage -----------------------------------------------------------

    def on_link_failure(self, neighbor: int, pkt: Packet) -> None:
        # One exhausted retry can be a collision streak on a live link;
        # tearing down every route through the hop costs a full dump cycle.
        now = self.sim.now
        last, streak = self._fail_streak.get(neighbor, (-1e9, 0))
        streak = streak + 1 if now - last <= self.cfg.break_confirm_window else 1
        if streak < self.cfg.break_confirm:
            self._fail_streak[neighbor] = (now, streak)
            return
        self._fail_streak.pop(neighbor, None)
        self._break_via(neighbor)

    def _check_neighbors(self, now: float) -> None:
        horizon = self.cfg.missed_adverts * self.cfg.periodic_interval
        for n in sorted(self.last_heard):
            if now - self.last_heard[n] > horizon:
                del self.last_heard[n]
                self._break_via(n)

    def _break_via(self, neighbor: int) -> None:
        now = self.sim.now
        hit = False
        for d in sorted(self.table):
            e = self.table[d]
            if d == self.node_id or e.next_hop != neighbor:
                continue
            if e.hop_count >= INF_HOPS:
                continue
            e.hop_count = INF_HOPS
            if e.dest_seq % 2 == 0:
                e.dest_seq += 1
            e.changed_at = now
            e.advertised = False
            self._pending_significant.add(d)
            hit = True
        if hit:
            self._schedule_trigger(now, urgent=True)
