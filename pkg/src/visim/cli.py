"""Command line interface: run, compare, suite, plot, serve.

Exit codes: 0 ok, 2 usage, 3 I/O, 4 simulation failure.
"""

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import metrics, plotting
from .scenario import (PROTOCOL_ORDER, ScenarioError, ScenarioSpec, builtin,
                       format_run_name, load_scenario, resolve_run_name,
                       suite_pairs, with_seed)
from .simulation import run_simulation

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SIM = 4

# aggregate reference targets for the suite report (informational)
REFERENCE_GOODPUT = {
    "aodv": (0.19, 0.36),
    "dsr": (0.16, 0.28),
    "dsdv": (0.24, 0.48),
}

RATIO_FIELDS = (
    "goodput_packets", "goodput_bytes",
    "routing_load_packets", "routing_load_bytes",
    "ack_share_packets", "ack_share_bytes",
)

COMPARE_METRICS = ("throughput", "goodput_packets", "goodput_bytes",
                   "routing_load_packets", "routing_load_bytes")


class CliError(Exception):
    def __init__(self, msg, code=EXIT_USAGE):
        super().__init__(msg)
        self.code = code


def out_dir_from(args) -> Path:
    d = Path(args.out_dir or os.environ.get("VISIM_OUT_DIR") or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _load_spec(args) -> ScenarioSpec:
    if getattr(args, "scenario_file", None):
        if getattr(args, "scenario", None):
            raise CliError("--scenario and --scenario-file are exclusive")
        return load_scenario(args.scenario_file)
    sid = getattr(args, "scenario", None)
    if sid is None:
        raise CliError("one of --scenario or --scenario-file is required")
    return builtin(int(sid))


def _fmt9(x) -> str:
    return "" if x is None else f"{x:.9f}"


# -- run ------------------------------------------------------------------------

def cmd_run(args) -> int:
    if args.name:
        protocol, sid = resolve_run_name(args.name)
        spec = builtin(sid)
    else:
        if not args.protocol:
            raise CliError("either a run name or --protocol is required")
        protocol = args.protocol
        spec = _load_spec(args)
    seed = args.seed if args.seed is not None else spec.seed
    trace = run_simulation(protocol, spec, seed=seed, duration=args.duration)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
    else:
        name = format_run_name(protocol, spec.scenario_id)
        out = out_dir_from(args) / f"{name}_seed{seed}.tr"
    trace.save(out)
    s = metrics.summarize(trace, mode=args.goodput_mode)
    print(f"wrote {out} ({len(trace)} records)")
    print(f"goodput_packets {s.goodput_packets:.6f} "
          f"goodput_bytes {s.goodput_bytes:.6f} "
          f"routing_load_packets {s.routing_load_packets:.6f} "
          f"routing_load_bytes {s.routing_load_bytes:.6f}")
    return EXIT_OK


# -- compare ----------------------------------------------------------------------

def _compare_csv_rows(protocols, spec, seed, args):
    rows = []
    for proto in protocols:
        trace = run_simulation(proto, spec, seed=seed, duration=args.duration)
        if args.metric == "throughput":
            dst = spec.flows[0].dst if spec.flows else 0
            series = metrics.throughput_series(trace, dst, bucket=args.bucket,
                                               duration=args.duration
                                               or spec.duration)
            rows += [(proto, f"{t:.6f}", _fmt9(v)) for t, v in series]
        else:
            s = metrics.summarize(trace, mode=args.goodput_mode)
            v, num, den = metrics.ratio_parts(s, args.metric)
            rows.append((proto, args.metric, _fmt9(v), str(num), str(den)))
    return rows


def cmd_compare(args) -> int:
    protocols = [p.strip() for p in args.protocols.split(",") if p.strip()]
    for p in protocols:
        if p not in PROTOCOL_ORDER:
            raise CliError(f"unknown protocol {p!r}")
    if not protocols:
        raise CliError("--protocols must name at least one protocol")
    spec = _load_spec(args)
    seed = args.seed if args.seed is not None else spec.seed
    out_dir = out_dir_from(args)
    base = f"compare_s{spec.scenario_id}_{args.metric}"
    csv_path = out_dir / f"{base}.csv"
    rows = _compare_csv_rows(protocols, spec, seed, args)
    header = (("protocol", "t", "value") if args.metric == "throughput"
              else ("protocol", "metric", "value", "numerator", "denominator"))
    _write_csv(csv_path, header, rows)
    svg_path = out_dir / f"{base}.svg"
    plot_from_csv(csv_path, svg_path)
    print(f"wrote {csv_path}")
    print(f"wrote {svg_path}")
    return EXIT_OK


# -- suite -----------------------------------------------------------------------

def _suite_worker(task):
    """Run one (protocol, scenario_id, seed) and report counts; used by the
    process pool, so arguments and results stay picklable."""
    proto, sid, seed, trace_path, goodput_mode = task
    try:
        spec = with_seed(builtin(sid), seed)
        trace = run_simulation(proto, spec)
        trace.save(trace_path)
        s = metrics.summarize(trace, mode=goodput_mode)
        dst = spec.flows[0].dst
        series = metrics.throughput_series(trace, dst, duration=spec.duration)
    except Exception as exc:
        name = format_run_name(proto, sid)
        raise RuntimeError(f"run {name} seed {seed} failed: {exc}") from exc
    return {
        "protocol": proto,
        "scenario_id": sid,
        "seed": seed,
        "counts": s.counts.__dict__,
        "summary": {f: getattr(s, f) for f in RATIO_FIELDS},
        "first_delivery": metrics.first_delivery_time(trace),
        "buckets": [v for _, v in series],
    }


def run_suite(out_dir: Path, jobs: int = 0, goodput_mode: str = "network"):
    """All 45 suite runs; returns (per-run results, aggregate by protocol)."""
    traces_dir = out_dir / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)
    tasks = []
    for proto in PROTOCOL_ORDER:
        for sid, seed in suite_pairs():
            name = format_run_name(proto, sid)
            path = traces_dir / f"{name}_seed{seed}.tr"
            tasks.append((proto, sid, seed, str(path), goodput_mode))
    if jobs == 0:
        jobs = min(os.cpu_count() or 1, 8)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_suite_worker, tasks))
    else:
        results = [_suite_worker(t) for t in tasks]

    agg = {}
    for proto in PROTOCOL_ORDER:
        pooled = metrics.MetricCounts()
        for r in results:
            if r["protocol"] == proto:
                pooled.add(metrics.MetricCounts(**r["counts"]))
        agg[proto] = metrics.summarize(pooled, mode=goodput_mode)
    return results, agg


def cmd_suite(args) -> int:
    out_dir = out_dir_from(args)
    try:
        results, agg = run_suite(out_dir, jobs=args.jobs,
                                 goodput_mode=args.goodput_mode)
    except Exception as exc:
        raise CliError(f"suite run failed: {exc}", EXIT_SIM) from exc

    runs_csv = out_dir / "suite_runs.csv"
    header = ("run", "protocol", "scenario_id", "seed") + RATIO_FIELDS + (
        "first_delivery", "total_tx_packets", "total_tx_bytes")
    rows = []
    for r in results:
        name = format_run_name(r["protocol"], r["scenario_id"])
        rows.append((name, r["protocol"], str(r["scenario_id"]),
                     str(r["seed"]))
                    + tuple(_fmt9(r["summary"][f]) for f in RATIO_FIELDS)
                    + (_fmt9(r["first_delivery"]),
                       str(r["counts"]["total_packets"]),
                       str(r["counts"]["total_bytes"])))
    _write_csv(runs_csv, header, rows)

    agg_csv = out_dir / "suite_aggregate.csv"
    agg_header = ("protocol",) + RATIO_FIELDS + (
        "ref_goodput_packets", "ref_goodput_bytes")
    agg_rows = []
    for proto in PROTOCOL_ORDER:
        s = agg[proto]
        ref_p, ref_b = REFERENCE_GOODPUT[proto]
        agg_rows.append((proto,)
                        + tuple(_fmt9(getattr(s, f)) for f in RATIO_FIELDS)
                        + (f"{ref_p:.2f}", f"{ref_b:.2f}"))
    _write_csv(agg_csv, agg_header, agg_rows)

    for metric in ("goodput", "routing_load"):
        svg = out_dir / f"suite_{metric}.svg"
        plot_aggregate_csv(agg_csv, svg, metric)
        print(f"wrote {svg}")
    print(f"wrote {runs_csv}")
    print(f"wrote {agg_csv}")
    w = max(len(p) for p in PROTOCOL_ORDER)
    print(f"{'protocol':<{w}}  goodput_p  goodput_b  routing_p  routing_b")
    for proto in PROTOCOL_ORDER:
        s = agg[proto]
        print(f"{proto:<{w}}  {s.goodput_packets:9.4f}  "
              f"{s.goodput_bytes:9.4f}  {s.routing_load_packets:9.4f}  "
              f"{s.routing_load_bytes:9.4f}")
    return EXIT_OK


# -- plot -------------------------------------------------------------------------

def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def plot_from_csv(csv_path, svg_path) -> None:
    """Chart whatever the CSV holds; the CSV is the only numeric source."""
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    if header[:3] == ["protocol", "t", "value"]:
        # display in KB; the unit scale is the only transform applied
        series: dict[str, list[tuple[float, float]]] = {}
        for proto, t, v in rows:
            series.setdefault(proto, []).append((float(t), float(v) / 1024.0))
        svg = plotting.line_chart(series, "Throughput vs Time",
                                  "Time (seconds)", "Throughput (KB)")
    elif header[:3] == ["protocol", "metric", "value"]:
        groups: dict[str, dict[str, float]] = {}
        for row in rows:
            proto, name, v = row[0], row[1], float(row[2])
            groups.setdefault(name, {})[proto] = v
        svg = plotting.bar_chart(groups, "Protocol comparison", "ratio")
    elif header and header[0] == "protocol":
        groups = {}
        for row in rows:
            proto = row[0]
            for name, v in zip(header[1:], row[1:]):
                if name.startswith("ref_") or v == "":
                    continue
                groups.setdefault(name, {})[proto] = float(v)
        svg = plotting.bar_chart(groups, "Suite aggregate", "ratio")
    else:
        raise CliError(f"unrecognized CSV header {header!r}")
    Path(svg_path).write_text(svg)


def plot_aggregate_csv(csv_path, svg_path, metric) -> None:
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    groups: dict[str, dict[str, float]] = {}
    for row in rows:
        proto = row[0]
        for name, v in zip(header[1:], row[1:]):
            if name.startswith(metric):
                groups.setdefault(name, {})[proto] = float(v)
    title = {"goodput": "Goodput (share of MAC transmissions)",
             "routing_load": "Routing load (share of MAC transmissions)"}
    svg = plotting.bar_chart(groups, title.get(metric, metric), "ratio")
    Path(svg_path).write_text(svg)


def cmd_plot(args) -> int:
    plot_from_csv(args.csv, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


# -- serve ------------------------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app
    app = create_app(out_dir=args.out_dir or os.environ.get("VISIM_OUT_DIR"),
                     ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="visim",
        description="Simulate and compare DSDV, DSR and AODV routing.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, scenario=True):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--duration", type=float, default=None)
        sp.add_argument("--out-dir", default=None,
                        help="defaults to $VISIM_OUT_DIR or .")
        sp.add_argument("--goodput-mode", choices=("network", "source"),
                        default="network")
        if scenario:
            sp.add_argument("--scenario", type=int, default=None)
            sp.add_argument("--scenario-file", default=None)

    sp = sub.add_parser("run", help="one simulation, writes a .tr trace")
    sp.add_argument("name", nargs="?", default=None,
                    help="run name a<x><y> (a00..a22)")
    sp.add_argument("--protocol", choices=PROTOCOL_ORDER, default=None)
    sp.add_argument("--out", default=None, help="trace file path")
    add_common(sp)
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("compare",
                        help="run protocols on one scenario, write CSV + SVG")
    sp.add_argument("--protocols", default="aodv,dsr,dsdv")
    sp.add_argument("--metric", default="throughput",
                    choices=COMPARE_METRICS)
    sp.add_argument("--bucket", type=float, default=1.0)
    add_common(sp)
    sp.set_defaults(fn=cmd_compare)

    sp = sub.add_parser("suite",
                        help="all 45 pinned runs, reports and charts")
    sp.add_argument("--jobs", type=int, default=0,
                    help="parallel workers (0 = auto)")
    add_common(sp, scenario=False)
    sp.set_defaults(fn=cmd_suite)

    sp = sub.add_parser("plot", help="re-plot an existing CSV")
    sp.add_argument("--csv", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_plot)

    sp = sub.add_parser("serve", help="start the local compare server")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8537)
    sp.add_argument("--out-dir", default=None)
    sp.add_argument("--ui", default=None,
                    help="directory of static UI files to serve at /")
    sp.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM


if __name__ == "__main__":
    sys.exit(main())
