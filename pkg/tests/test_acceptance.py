"""End-to-end acceptance checks, one test per shipped guarantee.

Everything here reads the session-scoped 45-run suite or runs small pinned
simulations of its own; nothing is mocked.
"""

import math
import random

import pytest
import trace_scan_oracle

from visim import cli, metrics
from visim.scenario import (PROTOCOL_ORDER, ScenarioError, builtin,
                            format_run_name, resolve_run_name, with_seed)
from visim.simulation import Simulation, run_simulation
from visim.traffic import FlowSpec

from helpers import (chain, check_dsdv_quiescent, check_flood_discipline,
                     random_static_spec)


def _aggregate(suite):
    agg = {}
    for proto in PROTOCOL_ORDER:
        pooled = metrics.MetricCounts()
        for run in suite.runs:
            if run.protocol == proto:
                pooled.add(run.counts)
        agg[proto] = metrics.summarize(pooled)
    return agg


def test_acceptance_1_transmission_partition_and_time_budget(suite):
    # every MAC transmission is data, routing or ack: shares sum to one
    for run in suite.runs:
        s = run.summary
        for gp, rl, ack in (
                (s.goodput_packets, s.routing_load_packets,
                 s.ack_share_packets),
                (s.goodput_bytes, s.routing_load_bytes, s.ack_share_bytes)):
            assert abs(gp + rl + ack - 1.0) <= 1e-12, run.path
    assert suite.suite_elapsed + suite.scan_elapsed < 120.0


def test_acceptance_2_oracle_reproduces_all_metrics(tmp_path):
    rng = random.Random(8164)
    for i in range(10):
        proto = PROTOCOL_ORDER[i % 3]
        sid = rng.randint(1, 3)
        seed = rng.randint(1000, 9999)
        spec = with_seed(builtin(sid), seed)
        trace = run_simulation(proto, spec)
        path = tmp_path / f"oracle_{i}_{proto}_s{sid}_{seed}.tr"
        trace.save(path)

        dst = spec.flows[0].dst
        want = trace_scan_oracle.scan(path, dst, bucket=1.0)
        s = metrics.summarize(trace)
        for f in ("goodput_packets", "goodput_bytes",
                  "routing_load_packets", "routing_load_bytes"):
            assert math.isclose(getattr(s, f), want[f],
                                rel_tol=1e-9, abs_tol=1e-12), (path, f)
        series = [v for _, v in metrics.throughput_series(trace, dst)]
        assert len(series) == len(want["throughput"]), path
        for mine, theirs in zip(series, want["throughput"]):
            assert math.isclose(mine, theirs,
                                rel_tol=1e-9, abs_tol=1e-9), path


def test_acceptance_3_goodput_ordering(suite):
    agg = _aggregate(suite)
    assert agg["dsdv"].goodput_packets > agg["aodv"].goodput_packets
    assert agg["aodv"].goodput_packets > agg["dsr"].goodput_packets
    assert agg["dsdv"].goodput_bytes > agg["aodv"].goodput_bytes
    assert agg["aodv"].goodput_bytes > agg["dsr"].goodput_bytes


def test_acceptance_4_dsdv_lowest_routing_load(suite):
    agg = _aggregate(suite)
    others = ("aodv", "dsr")
    assert all(agg["dsdv"].routing_load_packets
               < agg[p].routing_load_packets for p in others)
    assert all(agg["dsdv"].routing_load_bytes
               < agg[p].routing_load_bytes for p in others)


def test_acceptance_5_dsdv_first_delivery_lags_on_demand_protocols(suite):
    for sid in (2, 3):
        seed = builtin(sid).seed
        fd = {r.protocol: r.first_delivery for r in suite.runs
              if r.scenario_id == sid and r.seed == seed}
        assert fd["dsdv"] is not None
        assert fd["aodv"] is not None and fd["dsdv"] > fd["aodv"]
        assert fd["dsr"] is not None and fd["dsdv"] > fd["dsr"]


def test_acceptance_6_dsr_throughput_more_variable_than_dsdv(suite):
    pooled = {p: [] for p in PROTOCOL_ORDER}
    for run in suite.runs:
        pooled[run.protocol].extend(run.buckets)
    cov = {p: metrics.coefficient_of_variation(v)
           for p, v in pooled.items()}
    assert cov["dsr"] > cov["dsdv"]


def test_acceptance_7_byte_goodput_dominates_packet_goodput(suite):
    for run in suite.runs:
        assert run.summary.goodput_bytes >= run.summary.goodput_packets, \
            run.path


def test_acceptance_8_deterministic_reruns(suite, tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    for d in (first, second):
        assert cli.main(["run", "a00", "--seed", "7",
                         "--out-dir", str(d)]) == 0
    a = (first / "a00_seed7.tr").read_bytes()
    b = (second / "a00_seed7.tr").read_bytes()
    assert a == b and a

    again = tmp_path / "suite_again"
    assert cli.main(["suite", "--out-dir", str(again)]) == 0
    for name in ("suite_aggregate.csv", "suite_runs.csv"):
        assert (again / name).read_bytes() == \
            (suite.out_dir / name).read_bytes()


def test_acceptance_9_protocol_properties_hold_on_small_topologies():
    # DSDV: converged tables are loop-free and shortest against BFS
    check_dsdv_quiescent(chain(5), seed=11)
    check_dsdv_quiescent(random_static_spec(6, seed=52), seed=12)

    # DSR and AODV: each flood relayed at most once per node, and DSR
    # route records never name a node twice
    flood_spec = random_static_spec(6, seed=53, flows=[FlowSpec(0, 5)])
    check_flood_discipline("dsr", flood_spec, seed=9)
    check_flood_discipline("aodv", flood_spec, seed=9)

    # AODV: discovery installs the shortest route forward and a reverse
    # path back toward the origin at every hop it crossed
    spec = chain(4, flows=[FlowSpec(0, 3, start_time=1.0)])
    sim = Simulation("aodv", spec, seed=3, duration=6.0)
    sim.run()
    fwd = sim.protocols[0].table.get(3)
    assert fwd is not None and fwd.valid and fwd.hop_count == 3
    for node in (1, 2, 3):
        back = sim.protocols[node].table.get(0)
        assert back is not None and back.valid
        assert back.hop_count == node


def test_acceptance_10_run_name_mapping():
    protos = {"0": "aodv", "1": "dsr", "2": "dsdv"}
    for x, proto in protos.items():
        for y, sid in (("0", 1), ("1", 2), ("2", 3)):
            name = f"a{x}{y}"
            assert resolve_run_name(name) == (proto, sid)
            assert format_run_name(proto, sid) == name
    for bad in ("a30", "a03", "a33", "b00", "a0", "a000", "", "axy"):
        with pytest.raises(ScenarioError):
            resolve_run_name(bad)
