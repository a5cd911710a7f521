"""Shared test scaffolding.

Static topology builders, brute-force graph oracles, and a harness that
builds a real Simulation but lets tests drive protocol handlers directly,
with the radio either stubbed out or tapped.
"""

import math
import random
from collections import deque

from visim.packets import AckPayload, DataPayload, Packet
from visim.scenario import ScenarioSpec
from visim.simulation import Simulation
from visim.trace import CANONICAL_SIZES


def static_spec(placements, flows=(), *, duration=60.0, seed=5,
                tx_range=250.0, area=None, scenario_id=1):
    """All-static scenario; the area grows to fit the placements."""
    if area is None:
        w = max(x for x, _ in placements.values()) + 50.0
        h = max(y for _, y in placements.values()) + 50.0
        area = (max(w, 500.0), max(h, 400.0))
    return ScenarioSpec(
        scenario_id=scenario_id,
        placements=dict(placements),
        static_nodes=set(placements),
        flows=list(flows),
        duration=duration,
        area=area,
        tx_range=tx_range,
        seed=seed)


def chain(n, spacing=200.0, flows=(), **kw):
    """n nodes in a line; at 200 m spacing only neighbors hear each other."""
    placements = {i: (50.0 + i * spacing, 100.0) for i in range(n)}
    return static_spec(placements, flows, **kw)


def random_static_spec(n, seed, *, side=600.0, min_dist=40.0, flows=()):
    """n nodes scattered over a square, never closer than min_dist."""
    rnd = random.Random(seed)
    placements = {}
    while len(placements) < n:
        x, y = rnd.uniform(0, side), rnd.uniform(0, side)
        if all(math.hypot(x - px, y - py) >= min_dist
               for px, py in placements.values()):
            placements[len(placements)] = (x, y)
    return static_spec(placements, flows, area=(side, side), seed=seed)


# -- graph oracles ------------------------------------------------------------

def adjacency(spec):
    pos = spec.placements
    return {a: {b for b in pos
                if b != a and math.dist(pos[a], pos[b]) <= spec.tx_range}
            for a in pos}


def bfs_hops(adj, src):
    """Hop counts from src to every reachable node."""
    dist = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        for v in sorted(adj[u]):
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def farthest_pair(adj):
    """The (src, dst, hops) pair maximizing BFS distance; ties stay stable."""
    best = None
    for src in sorted(adj):
        hops = bfs_hops(adj, src)
        for dst in sorted(hops):
            if dst != src and (best is None or hops[dst] > best[2]):
                best = (src, dst, hops[dst])
    return best


# -- radio hooks ----------------------------------------------------------------

def stub_radio(sim):
    """Swallow mac_send; returns the recorded (time, node, pkt, mac_dst) list.

    Nothing propagates: tests hand-deliver packets to on_packet themselves.
    """
    sent = []

    def record(node, pkt, mac_dst):
        sent.append((sim.now, node, pkt, mac_dst))

    sim.mac_send = record
    return sent


def tap_radio(sim):
    """Record mac_send calls while still delivering them over the radio."""
    sent = []
    real = sim.mac_send

    def record(node, pkt, mac_dst):
        sent.append((sim.now, node, pkt, mac_dst))
        real(node, pkt, mac_dst)

    sim.mac_send = record
    return sent


def drain(sim, dt=0.1):
    """Advance the engine a little so jittered forwards fire."""
    sim.engine.run_until(sim.engine.now + dt)


def sends(sent, cls=None, node=None):
    return [(t, n, pkt, mac_dst) for t, n, pkt, mac_dst in sent
            if (cls is None or pkt.cls == cls)
            and (node is None or n == node)]


# -- packet builders -------------------------------------------------------------

def data_pkt(sim, src, dst, seq=0, flow_id=0):
    return Packet(sim.new_uid(), "data", CANONICAL_SIZES["data"],
                  src, dst, DataPayload(flow_id, seq))


def ack_pkt(sim, src, dst, cum, flow_id=0):
    return Packet(sim.new_uid(), "ack", CANONICAL_SIZES["ack"],
                  src, dst, AckPayload(flow_id, cum))


# -- protocol property validators (shared with the acceptance gates) -----------

def check_dsdv_quiescent(spec, seed, *, settle=82.0):
    """Run DSDV to quiescence; verify loop freedom and minimal hop counts."""
    sim = Simulation("dsdv", spec, seed=seed, duration=settle)
    sim.run()
    adj = adjacency(spec)
    for src in sorted(spec.placements):
        table = sim.protocols[src].table
        want = bfs_hops(adj, src)
        for dst in sorted(spec.placements):
            if dst == src:
                continue
            e = table.get(dst)
            if dst not in want:
                assert e is None or e.hop_count == math.inf, \
                    f"{src}->{dst}: route to unreachable node"
                continue
            assert e is not None and e.hop_count < math.inf, \
                f"{src}->{dst}: missing route"
            assert e.hop_count == want[dst], \
                f"{src}->{dst}: hops {e.hop_count}, shortest {want[dst]}"
            # walk next hops; the metric must strictly fall until arrival
            at, guard = src, 0
            while at != dst:
                step = sim.protocols[at].table[dst]
                assert step.hop_count < math.inf
                nxt = step.next_hop
                assert sim.protocols[nxt].table[dst].hop_count < step.hop_count \
                    or nxt == dst, f"{src}->{dst}: metric loop at {at}"
                at = nxt
                guard += 1
                assert guard <= len(spec.placements), \
                    f"{src}->{dst}: forwarding loop"


def check_aodv_discovery(spec, seed, src, dst, want_hops, *, duration=6.0):
    """Run an AODV discovery; the installed route must be shortest."""
    sim = Simulation("aodv", spec, seed=seed, duration=duration)
    sim.run()
    e = sim.protocols[src].table.get(dst)
    assert e is not None and e.valid, f"{src}->{dst}: no route discovered"
    assert e.hop_count == want_hops, \
        f"{src}->{dst}: hops {e.hop_count}, shortest {want_hops}"


def check_flood_discipline(protocol, spec, seed, *, duration=10.0):
    """Tap a live run; route requests must dedup and never loop.

    Every node relays a given (origin, request id) at most once, and DSR
    route records never name a node twice.
    """
    sim = Simulation(protocol, spec, seed=seed, duration=duration)
    sent = tap_radio(sim)
    sim.run()
    forwarded = {}
    for _, node, pkt, _ in sent:
        if pkt.cls != "rreq":
            continue
        rid = (pkt.payload.request_id if protocol == "dsr"
               else pkt.payload.rreq_id)
        key = (node, pkt.src, rid)
        forwarded[key] = forwarded.get(key, 0) + 1
        assert forwarded[key] == 1, f"{key}: duplicate rreq relay"
        if protocol == "dsr":
            record = pkt.payload.route_record
            assert len(set(record)) == len(record), \
                f"route record repeats a node: {record}"
    assert forwarded, "run produced no route requests"
