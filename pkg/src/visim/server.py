"""Local HTTP server for browsing scenarios, launching runs and reading
results. Runs execute on background threads; everything they produce lands
under <out_dir>/runs/<run_id>/ so a restarted server can list old runs.

Endpoints:
    GET  /scenarios
    POST /runs                  {"protocols": [...], "scenario_id": n,
                                 "seed": optional, "duration": optional}
    GET  /runs
    GET  /runs/{run_id}
    GET  /runs/{run_id}/metrics?metric=summary|throughput|goodput|
                                routing_load|ack_share&bucket=1.0&mode=network
    GET  /runs/{run_id}/timeline?from=0&to=100
"""

import heapq
import json
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import metrics
from .scenario import (PROTOCOL_ORDER, SCENARIO_IDS, builtin,
                       format_run_name, with_seed)
from .simulation import run_simulation
from .trace import MobilityRecord, Trace

DEFAULT_PORT = 8537
RATIO_METRICS = ("goodput_packets", "goodput_bytes",
                 "routing_load_packets", "routing_load_bytes")

TERMINAL = ("done", "failed")
# forward-only lifecycle
NEXT_STATES = {
    "queued": ("running", "failed"),
    "running": ("done", "failed"),
    "done": (),
    "failed": (),
}


class RunRequest(BaseModel):
    protocols: list[str] = Field(min_length=1)
    scenario_id: int
    seed: int | None = None
    duration: float | None = None


class RunStore:
    """Run registry backed by meta.json files under out_dir/runs/."""

    def __init__(self, out_dir: Path):
        self.root = out_dir / "runs"
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._meta: dict[str, dict] = {}
        self._reindex()

    def _reindex(self) -> None:
        for meta_path in sorted(self.root.glob("*/meta.json")):
            try:
                meta = json.loads(meta_path.read_text())
            except (OSError, ValueError):
                continue
            # a run mid-flight when the previous server died never finished
            if meta.get("status") not in TERMINAL:
                meta["status"] = "failed"
                meta["error"] = "interrupted by server restart"
                meta_path.write_text(json.dumps(meta, indent=2))
            self._meta[meta["run_id"]] = meta

    def run_dir(self, run_id: str) -> Path:
        return self.root / run_id

    def create(self, protocol, scenario_id, seed, duration) -> dict:
        run_id = uuid.uuid4().hex
        meta = {
            "run_id": run_id,
            "name": format_run_name(protocol, scenario_id),
            "protocol": protocol,
            "scenario_id": scenario_id,
            "seed": seed,
            "duration": duration,
            "status": "queued",
            "error": None,
        }
        d = self.run_dir(run_id)
        d.mkdir(parents=True)
        with self._lock:
            self._meta[run_id] = meta
            self._flush(meta)
        return meta

    def _flush(self, meta) -> None:
        path = self.run_dir(meta["run_id"]) / "meta.json"
        path.write_text(json.dumps(meta, indent=2))

    def get(self, run_id: str) -> dict:
        with self._lock:
            meta = self._meta.get(run_id)
        if meta is None:
            raise HTTPException(404, f"no run {run_id!r}")
        return meta

    def list(self) -> list[dict]:
        with self._lock:
            return sorted(self._meta.values(), key=lambda m: m["run_id"])

    def transition(self, run_id: str, status: str, error=None) -> None:
        with self._lock:
            meta = self._meta[run_id]
            if status not in NEXT_STATES[meta["status"]]:
                return  # terminal states never move again
            meta["status"] = status
            if error is not None:
                meta["error"] = error
            self._flush(meta)


def _execute(store: RunStore, meta: dict) -> None:
    run_id = meta["run_id"]
    store.transition(run_id, "running")
    try:
        spec = with_seed(builtin(meta["scenario_id"]), meta["seed"])
        trace = run_simulation(meta["protocol"], spec,
                               duration=meta["duration"])
        d = store.run_dir(run_id)
        trace.save(d / "trace.tr")
        s = metrics.summarize(trace)
        summary = {
            "values": {f: getattr(s, f) for f in (
                "goodput_packets", "goodput_bytes",
                "routing_load_packets", "routing_load_bytes",
                "ack_share_packets", "ack_share_bytes")},
            "counts": s.counts.__dict__,
            "first_delivery": metrics.first_delivery_time(trace),
        }
        (d / "summary.json").write_text(json.dumps(summary, indent=2))
        store.transition(run_id, "done")
    except Exception as exc:  # run failures surface via status, not logs
        store.transition(run_id, "failed", error=str(exc))


def _scenario_listing() -> list[dict]:
    out = []
    for sid in SCENARIO_IDS:
        spec = builtin(sid)
        out.append({
            "scenario_id": sid,
            "description": spec.description,
            "nodes": spec.node_count,
            "duration": spec.duration,
            "area": list(spec.area),
            "speed": list(spec.speed_range),
            "pause": spec.pause,
            "default_seed": spec.seed,
            "flows": [{"src": f.src, "dst": f.dst} for f in spec.flows],
        })
    return out


def _load_trace(store: RunStore, run_id: str) -> Trace:
    meta = store.get(run_id)
    if meta["status"] != "done":
        raise HTTPException(409, f"run {run_id} is {meta['status']}")
    return Trace.load(store.run_dir(run_id) / "trace.tr")


def _timeline_frames(trace: Trace) -> list[dict]:
    """Pose samples and MAC events merged into one replayable stream.

    Receive/drop frames carry the transmitting node as "peer", recovered
    from the latest MAC send of the same packet uid.
    """
    poses = []
    events = []
    for rec in trace:
        if isinstance(rec, MobilityRecord):
            poses.append({"t": rec.time, "kind": "pose", "node": rec.node,
                          "x": rec.x, "y": rec.y, "speed": rec.speed})
        elif rec.layer == "MAC":
            kind = {"s": "send", "f": "forward",
                    "r": "recv", "d": "drop"}[rec.evt]
            events.append({"t": rec.time, "kind": kind, "node": rec.node,
                           "uid": rec.pkt_uid, "cls": rec.cls,
                           "src": rec.src, "dst": rec.dst,
                           "reason": rec.reason, "peer": None})
    # poses first at equal times so receivers already stand where they hear
    merged = heapq.merge(
        ((f["t"], 0, i, f) for i, f in enumerate(poses)),
        ((f["t"], 1, i, f) for i, f in enumerate(events)))
    frames = []
    last_sender: dict[int, int] = {}
    for i, (_, _, _, frame) in enumerate(merged):
        if frame["kind"] in ("send", "forward"):
            last_sender[frame["uid"]] = frame["node"]
        elif frame["kind"] in ("recv", "drop"):
            frame["peer"] = last_sender.get(frame["uid"])
        frame["i"] = i
        frames.append(frame)
    return frames


def create_app(out_dir=None, ui_dir=None) -> FastAPI:
    out = Path(out_dir or ".")
    store = RunStore(out)
    app = FastAPI(title="visim compare server")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"])
    app.state.store = store

    @app.get("/scenarios")
    def scenarios():
        return {"scenarios": _scenario_listing()}

    @app.post("/runs", status_code=201)
    def create_runs(req: RunRequest):
        for p in req.protocols:
            if p not in PROTOCOL_ORDER:
                raise HTTPException(400, f"unknown protocol {p!r}")
        if req.scenario_id not in SCENARIO_IDS:
            raise HTTPException(404, f"no scenario {req.scenario_id}")
        if req.duration is not None and req.duration <= 0:
            raise HTTPException(400, "duration must be positive")
        seed = req.seed if req.seed is not None else builtin(
            req.scenario_id).seed
        created = []
        for proto in req.protocols:
            meta = store.create(proto, req.scenario_id, seed, req.duration)
            threading.Thread(target=_execute, args=(store, meta),
                             daemon=True).start()
            created.append(meta)
        return {"runs": created}

    @app.get("/runs")
    def list_runs():
        return {"runs": store.list()}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        meta = dict(store.get(run_id))
        if meta["status"] == "done":
            summary_path = store.run_dir(run_id) / "summary.json"
            meta["summary"] = json.loads(summary_path.read_text())
        return meta

    @app.get("/runs/{run_id}/metrics")
    def run_metrics(run_id: str, metric: str = "summary",
                    bucket: float = 1.0,
                    mode: str = Query("network", pattern="^(network|source)$")):
        if bucket <= 0:
            raise HTTPException(400, "bucket must be positive")
        if metric not in RATIO_METRICS + ("throughput", "summary"):
            raise HTTPException(400, f"unknown metric {metric!r}")
        meta = store.get(run_id)
        trace = _load_trace(store, run_id)
        if metric == "throughput":
            spec = builtin(meta["scenario_id"])
            duration = meta["duration"] or spec.duration
            series = metrics.throughput_series(
                trace, spec.flows[0].dst, bucket=bucket, duration=duration)
            return {"run_id": run_id, "metric": metric, "bucket": bucket,
                    "points": [{"t": t, "v": v} for t, v in series]}
        try:
            s = metrics.summarize(trace, mode=mode)
        except metrics.MetricsError as exc:
            raise HTTPException(409, str(exc)) from exc
        if metric == "summary":
            return {"run_id": run_id, "metric": metric, "mode": mode,
                    "values": {f: getattr(s, f) for f in RATIO_METRICS
                               + ("ack_share_packets", "ack_share_bytes")},
                    "counts": s.counts.__dict__,
                    "first_delivery": metrics.first_delivery_time(trace)}
        value, numerator, denominator = metrics.ratio_parts(s, metric)
        return {"run_id": run_id, "metric": metric, "mode": mode,
                "value": value, "numerator": numerator,
                "denominator": denominator}

    @app.get("/runs/{run_id}/timeline")
    def run_timeline(run_id: str,
                     t_from: float = Query(0.0, alias="from"),
                     t_to: float | None = Query(None, alias="to")):
        meta = store.get(run_id)
        trace = _load_trace(store, run_id)
        frames = _timeline_frames(trace)
        if t_to is not None:
            frames = [f for f in frames if t_from <= f["t"] <= t_to]
        else:
            frames = [f for f in frames if t_from <= f["t"]]
        spec = builtin(meta["scenario_id"])
        return {"run_id": run_id, "from": t_from, "to": t_to,
                "area": list(spec.area),
                "duration": meta["duration"] or spec.duration,
                "frames": frames}

    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
