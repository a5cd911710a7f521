"""Session fixtures: the pinned 45-run suite, executed once and rescanned."""

import time
from types import SimpleNamespace

import pytest
from hypothesis import HealthCheck, settings

from visim import cli, metrics
from visim.scenario import builtin, format_run_name, suite_runs
from visim.trace import Trace

settings.register_profile(
    "pinned", derandomize=True, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pinned")


@pytest.fixture(scope="session")
def suite(tmp_path_factory):
    """One full suite run via the CLI, plus a scan of every written trace.

    Scanning recomputes all indicators from the on-disk artifacts so the
    acceptance checks exercise exactly what a user would read back.
    """
    out_dir = tmp_path_factory.mktemp("suite")
    t0 = time.perf_counter()
    assert cli.main(["suite", "--out-dir", str(out_dir)]) == 0
    suite_elapsed = time.perf_counter() - t0

    t0 = time.perf_counter()
    runs = []
    for proto, sid, seed in suite_runs():
        name = format_run_name(proto, sid)
        path = out_dir / "traces" / f"{name}_seed{seed}.tr"
        trace = Trace.load(path)
        spec = builtin(sid)
        s = metrics.summarize(trace)
        series = metrics.throughput_series(trace, spec.flows[0].dst,
                                           duration=spec.duration)
        runs.append(SimpleNamespace(
            protocol=proto, scenario_id=sid, seed=seed, path=path,
            summary=s, counts=s.counts,
            buckets=[v for _, v in series],
            first_delivery=metrics.first_delivery_time(trace)))
    scan_elapsed = time.perf_counter() - t0
    return SimpleNamespace(out_dir=out_dir, runs=runs,
                           suite_elapsed=suite_elapsed,
                           scan_elapsed=scan_elapsed)
