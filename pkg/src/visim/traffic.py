"""Reliable windowed traffic, a deliberately small TCP stand-in.

Each flow fills a fixed window at every tick; the receiver acks cumulatively,
acks slide the window, and per-seq timers retransmit with doubling timeouts.
"""

from dataclasses import dataclass, field

from .packets import AckPayload, DataPayload, Packet

RTO_CAP_FACTOR = 8
SEND_JITTER = 0.05                       # smear window bursts below the MAC


@dataclass
class FlowSpec:
    src: int
    dst: int
    start_time: float = 0.0
    data_size: int = 1040
    ack_size: int = 40
    window: int = 4
    rto_initial: float = 1.0
    tick_interval: float = 0.5


@dataclass
class _InFlight:
    pkt: Packet
    timer: object
    rto: float


@dataclass
class FlowState:
    spec: FlowSpec
    flow_id: int
    next_seq: int = 0
    acked_upto: int = 0                  # lowest unacked seq
    in_flight: dict[int, _InFlight] = field(default_factory=dict)
    received: set[int] = field(default_factory=set)
    next_expected: int = 0               # receiver side cumulative pointer
    first_delivery: float | None = None


class TrafficManager:
    """Owns every flow in a run; protocols hand delivered packets back here."""

    def __init__(self, sim, specs: list[FlowSpec]):
        self.sim = sim
        self.flows = [FlowState(spec, i) for i, spec in enumerate(specs)]

    def start(self) -> None:
        for flow in self.flows:
            self.sim.schedule(flow.spec.start_time,
                              lambda f=flow: self._tick(f),
                              kind="traffic-tick", target=flow.spec.src)

    # -- sender side ----------------------------------------------------------

    def _tick(self, flow: FlowState) -> None:
        spec = flow.spec
        while len(flow.in_flight) < spec.window:
            self._send_data(flow, flow.next_seq)
            flow.next_seq += 1
        nxt = self.sim.now + spec.tick_interval
        if nxt <= self.sim.duration:
            self.sim.schedule(nxt, lambda: self._tick(flow),
                              kind="traffic-tick", target=spec.src)

    def _send_data(self, flow: FlowState, seq: int, retransmit=False) -> None:
        spec = flow.spec
        if retransmit:
            entry = flow.in_flight[seq]
            pkt = entry.pkt.clone()      # same uid: a fresh MAC life, not AGT
            entry.rto = min(entry.rto * 2, RTO_CAP_FACTOR * spec.rto_initial)
            rto = entry.rto
        else:
            pkt = Packet(self.sim.new_uid(), "data", spec.data_size,
                         spec.src, spec.dst, DataPayload(flow.flow_id, seq))
            rto = spec.rto_initial
            self.sim.trace_pkt("s", spec.src, "AGT", pkt)
        timer = self.sim.schedule(self.sim.now + rto,
                                  lambda: self._timeout(flow, seq),
                                  kind="traffic-rto", target=spec.src)
        if retransmit:
            entry.timer = timer
            entry.pkt = pkt
        else:
            flow.in_flight[seq] = _InFlight(pkt, timer, rto)
        self._handoff(spec.src, pkt)

    def _handoff(self, node: int, pkt: Packet) -> None:
        # Same-tick sends otherwise hit the MAC in lockstep with peer nodes.
        delay = self.sim.rng("traffic").uniform(0.0, SEND_JITTER)
        self.sim.schedule(self.sim.now + delay,
                          lambda: self.sim.protocols[node].send_from_agent(pkt),
                          kind="traffic-handoff", target=node)

    def _timeout(self, flow: FlowState, seq: int) -> None:
        if seq < flow.acked_upto or seq not in flow.in_flight:
            return
        self._send_data(flow, seq, retransmit=True)

    def on_ack(self, node: int, pkt: Packet) -> None:
        ack: AckPayload = pkt.payload
        flow = self.flows[ack.flow_id]
        self.sim.trace_pkt("r", node, "AGT", pkt)
        if ack.cum + 1 <= flow.acked_upto:
            return
        for seq in range(flow.acked_upto, ack.cum + 1):
            entry = flow.in_flight.pop(seq, None)
            if entry is not None:
                self.sim.cancel(entry.timer)
        flow.acked_upto = ack.cum + 1

    # -- receiver side ---------------------------------------------------------

    def on_data(self, node: int, pkt: Packet) -> None:
        data: DataPayload = pkt.payload
        flow = self.flows[data.flow_id]
        self.sim.trace_pkt("r", node, "AGT", pkt)
        if flow.first_delivery is None:
            flow.first_delivery = self.sim.now
        flow.received.add(data.seq)
        while flow.next_expected in flow.received:
            flow.next_expected += 1
        ack = Packet(self.sim.new_uid(), "ack", flow.spec.ack_size,
                     node, pkt.src, AckPayload(data.flow_id,
                                               flow.next_expected - 1))
        self.sim.trace_pkt("s", node, "AGT", ack)
        self._handoff(node, ack)
