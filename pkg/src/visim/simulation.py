"""Assembles one run: engine + world + one routing protocol + traffic."""

from .engine import Engine
from .packets import Packet
from .protocols import PROTOCOLS
from .scenario import ScenarioSpec
from .trace import MobilityRecord, Trace, TraceRecord
from .traffic import TrafficManager
from .world import Mobility, Network, NodePose, default_channel


class Simulation:
    """One protocol, one scenario, one seed, one trace."""

    def __init__(self, protocol: str, spec: ScenarioSpec, *, seed=None,
                 duration=None, channel=None):
        if protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {protocol!r}")
        spec.validate()
        self.protocol_name = protocol
        self.spec = spec
        self.duration = float(duration if duration is not None
                              else spec.duration)
        self.engine = Engine(seed if seed is not None else spec.seed)
        self.trace = Trace(area=spec.area)
        self._uid = 0

        poses = {}
        for nid, (x, y) in sorted(spec.placements.items()):
            poses[nid] = NodePose(nid, x, y, static=nid in spec.static_nodes)
        self.poses = poses

        self.network = Network(
            self.engine, poses, channel or default_channel(spec.tx_range),
            trace_pkt=self.trace_pkt,
            on_deliver=self._mac_deliver,
            on_link_failure=self._mac_link_failure)
        self.mobility = Mobility(
            self.engine, poses, spec.area, spec.speed_range, spec.pause,
            self.duration, self._record_pose)
        cls = PROTOCOLS[protocol]
        self.protocols = {nid: cls(self, nid) for nid in sorted(poses)}
        self.traffic = TrafficManager(self, spec.flows)

    # -- services used by the layers ---------------------------------------

    @property
    def now(self) -> float:
        return self.engine.now

    def schedule(self, at, fn, kind="timer", target=None):
        return self.engine.schedule(at, fn, kind, target)

    def cancel(self, ev) -> None:
        self.engine.cancel(ev)

    def rng(self, stream_id: str):
        return self.engine.rng(stream_id)

    def new_uid(self) -> int:
        uid = self._uid
        self._uid += 1
        return uid

    def trace_pkt(self, evt: str, node: int, layer: str, pkt: Packet,
                  reason: str = "---") -> None:
        self.trace.append(TraceRecord(
            evt, self.engine.now, node, layer, pkt.uid, pkt.cls, pkt.size,
            pkt.src, pkt.dst, reason))

    def _record_pose(self, t, node, x, y, speed) -> None:
        self.trace.append(MobilityRecord(t, node, x, y, speed))

    def mac_send(self, node: int, pkt: Packet, mac_dst: int) -> None:
        self.network.send(node, pkt, mac_dst)

    def deliver_agent(self, node: int, pkt: Packet) -> None:
        if pkt.cls == "data":
            self.traffic.on_data(node, pkt)
        elif pkt.cls == "ack":
            self.traffic.on_ack(node, pkt)

    # -- callbacks from the MAC ---------------------------------------------

    def _mac_deliver(self, node: int, pkt: Packet, mac_src: int) -> None:
        self.protocols[node].on_packet(pkt, mac_src)

    def _mac_link_failure(self, node: int, mac_dst: int, pkt: Packet) -> None:
        self.protocols[node].on_link_failure(mac_dst, pkt)

    # -- run ------------------------------------------------------------------

    def run(self) -> Trace:
        self.mobility.start()
        for nid in sorted(self.protocols):
            self.protocols[nid].start()
        self.traffic.start()
        self.engine.run_until(self.duration)
        return self.trace


def run_simulation(protocol: str, spec: ScenarioSpec, *, seed=None,
                   duration=None) -> Trace:
    return Simulation(protocol, spec, seed=seed, duration=duration).run()
