"""World model: waypoint motion, two-ray channel, interface queue, MAC."""

import math
import random

import pytest

from visim.engine import Engine
from visim.packets import BROADCAST, Packet
from visim.world import (CW_MIN, UNICAST_RETRY_LIMIT, ChannelParams,
                         IfaceQueue, Mobility, Network, NodePose,
                         default_channel, distance, received_power,
                         step_mobility)

AREA = (500.0, 400.0)
SPEEDS = (3.0, 10.0)


# -- mobility -------------------------------------------------------------------

def test_arrival_lands_exactly_on_the_waypoint():
    pose = NodePose(0, 0.0, 0.0, speed=5.0, waypoint=(3.0, 4.0))
    step_mobility(pose, 1.0, 0.0, random.Random(1), AREA, SPEEDS, pause=2.0)
    assert (pose.x, pose.y) == (3.0, 4.0)
    assert pose.waypoint is None
    assert pose.pause_until == 2.0      # leftover motion within dt discarded


def test_motion_advances_along_the_heading():
    pose = NodePose(0, 0.0, 0.0, speed=5.0, waypoint=(30.0, 40.0))
    step_mobility(pose, 1.0, 0.0, random.Random(1), AREA, SPEEDS, pause=2.0)
    assert math.isclose(pose.x, 3.0) and math.isclose(pose.y, 4.0)
    assert pose.heading == (0.6, 0.8)


def test_static_nodes_never_move():
    pose = NodePose(0, 7.0, 8.0, static=True)
    for _ in range(10):
        step_mobility(pose, 1.0, 0.0, random.Random(1), AREA, SPEEDS, 2.0)
    assert (pose.x, pose.y, pose.speed) == (7.0, 8.0, 0.0)


def test_paused_nodes_wait_out_the_pause():
    pose = NodePose(0, 1.0, 1.0, pause_until=5.0)
    step_mobility(pose, 1.0, 4.0, random.Random(1), AREA, SPEEDS, 2.0)
    assert (pose.x, pose.y, pose.speed) == (1.0, 1.0, 0.0)
    step_mobility(pose, 1.0, 5.0, random.Random(1), AREA, SPEEDS, 2.0)
    assert (pose.x, pose.y) != (1.0, 1.0)


def test_picked_speeds_stay_within_the_configured_range():
    rng = random.Random(3)
    pose = NodePose(0, 250.0, 200.0)
    for _ in range(200):
        pose.waypoint = None
        step_mobility(pose, 0.5, 0.0, rng, AREA, SPEEDS, pause=0.0)
        assert SPEEDS[0] <= pose.speed <= SPEEDS[1]


def test_sampled_positions_stay_inside_the_area():
    eng = Engine(seed=9)
    poses = {i: NodePose(i, 50.0 * (i + 1), 40.0 * (i + 1)) for i in range(5)}
    samples = []
    mob = Mobility(eng, poses, AREA, SPEEDS, pause=1.0, duration=120.0,
                   record_cb=lambda t, n, x, y, v: samples.append((x, y)))
    mob.start()
    eng.run_until(120.0)
    assert len(samples) == 5 * (int(120.0 / mob.interval) + 1)
    assert all(0.0 <= x <= AREA[0] and 0.0 <= y <= AREA[1]
               for x, y in samples)


# -- channel --------------------------------------------------------------------

def test_far_field_attenuates_with_the_fourth_power():
    ch = ChannelParams()
    d = 100.0                            # beyond the 86.14 m crossover
    assert math.isclose(ch.power_at(d) / ch.power_at(2 * d), 16.0,
                        rel_tol=1e-12)


def test_near_field_attenuates_with_the_square():
    ch = ChannelParams()
    assert math.isclose(ch.power_at(20.0) / ch.power_at(40.0), 4.0,
                        rel_tol=1e-12)


def test_power_is_continuous_at_the_crossover():
    ch = ChannelParams()
    c = ch.crossover
    below, above = ch.power_at(c * (1 - 1e-9)), ch.power_at(c * (1 + 1e-9))
    assert math.isclose(below, above, rel_tol=1e-6)


def test_received_power_rejects_colocated_nodes():
    ch = ChannelParams()
    a, b = NodePose(0, 5.0, 5.0), NodePose(1, 5.0, 5.0)
    with pytest.raises(ValueError):
        received_power(a, b, ch)


def test_received_power_uses_the_node_distance():
    ch = ChannelParams()
    a, b = NodePose(0, 0.0, 0.0), NodePose(1, 300.0, 400.0)
    assert received_power(a, b, ch) == ch.power_at(500.0)
    assert distance(a, b) == 500.0


@pytest.mark.parametrize("want", [50.0, 250.0, 600.0])
def test_default_channel_solves_range_in_both_branches(want):
    ch = default_channel(want)
    assert math.isclose(ch.tx_range, want, rel_tol=1e-9)
    # bisect the threshold crossing independently of the closed form
    lo, hi = 1.0, 2000.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if ch.power_at(mid) >= ch.rx_threshold:
            lo = mid
        else:
            hi = mid
    assert math.isclose(lo, want, rel_tol=1e-9)


# -- interface queue --------------------------------------------------------------

def test_ifq_is_a_bounded_fifo():
    q = IfaceQueue(capacity=3)
    assert all(q.enqueue(i) for i in range(3))
    assert not q.enqueue(3)              # drop-tail at capacity
    assert [q.dequeue(), q.dequeue(), q.dequeue()] == [0, 1, 2]


# -- MAC --------------------------------------------------------------------------

def _net(positions, *, tx_range=250.0, seed=3):
    eng = Engine(seed=seed)
    poses = {nid: NodePose(nid, x, y, static=True)
             for nid, (x, y) in positions.items()}
    traced, delivered, failures = [], [], []
    net = Network(
        eng, poses, default_channel(tx_range),
        trace_pkt=lambda evt, node, layer, pkt, reason:
            traced.append((evt, node, pkt.uid, reason)),
        on_deliver=lambda node, pkt, mac_src:
            delivered.append((node, pkt.uid, mac_src)),
        on_link_failure=lambda node, mac_dst, pkt:
            failures.append((node, mac_dst, pkt.uid)))
    return eng, net, traced, delivered, failures


def _pkt(uid, src, dst, size=60):
    return Packet(uid, "rreq" if size == 60 else "data", size, src, dst, None)


def test_broadcast_reaches_only_nodes_in_range():
    eng, net, traced, delivered, _ = _net({0: (0, 0), 1: (100, 0),
                                           2: (300, 0)})
    net.send(0, _pkt(7, 0, BROADCAST), BROADCAST)
    eng.run_until(1.0)
    assert delivered == [(1, 7, 0)]
    assert [x for x in traced if x[0] == "r"] == [("r", 1, 7, "---")]


def test_unicast_delivers_to_the_addressed_node():
    eng, net, traced, delivered, failures = _net({0: (0, 0), 1: (100, 0)})
    net.send(0, _pkt(9, 0, 1, size=1040), 1)
    eng.run_until(1.0)
    assert delivered == [(1, 9, 0)]
    assert failures == []


def test_unicast_retries_then_reports_link_failure():
    eng, net, traced, delivered, failures = _net({0: (0, 0), 1: (300, 0)})
    net.send(0, _pkt(4, 0, 1, size=1040), 1)
    eng.run_until(2.0)
    assert delivered == []
    sends = [x for x in traced if x[0] == "s"]
    assert len(sends) == 1 + UNICAST_RETRY_LIMIT
    assert traced[-1] == ("d", 0, 4, "RET")
    assert failures == [(0, 1, 4)]


def test_hidden_senders_corrupt_the_node_between_them():
    # 0 and 2 cannot hear each other; both transmissions overlap at 1
    eng, net, traced, delivered, _ = _net({0: (0, 0), 1: (210, 0),
                                           2: (420, 0)})
    net.send(0, _pkt(1, 0, BROADCAST, size=1040), BROADCAST)
    net.send(2, _pkt(2, 2, BROADCAST, size=1040), BROADCAST)
    eng.run_until(1.0)
    assert delivered == []
    assert sorted(x[2] for x in traced if x[0] == "d" and x[3] == "CBK") \
        == [1, 2]


def test_carrier_sense_serializes_mutually_audible_senders():
    eng, net, traced, delivered, _ = _net({0: (0, 0), 1: (100, 0)})
    net.send(0, _pkt(1, 0, BROADCAST, size=1040), BROADCAST)
    net.send(1, _pkt(2, 1, BROADCAST, size=1040), BROADCAST)
    eng.run_until(1.0)
    assert sorted(delivered) == [(0, 2, 1), (1, 1, 0)]


def test_queue_overflow_drops_with_ifq_reason_and_keeps_fifo_order():
    eng, net, traced, delivered, _ = _net({0: (0, 0), 1: (100, 0)})
    # one in service + a full queue of 50; the 52nd has nowhere to go
    for uid in range(52):
        net.send(0, _pkt(uid, 0, 1, size=1040), 1)
    drops = [x for x in traced if x[0] == "d"]
    assert drops == [("d", 0, 51, "IFQ")]
    eng.run_until(10.0)
    assert [uid for _, uid, _ in delivered] == list(range(51))
