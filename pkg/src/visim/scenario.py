"""Scenario definitions, run naming, suite expansion, .scn files."""

from dataclasses import dataclass, field, replace

from .traffic import FlowSpec

PROTOCOL_ORDER = ("aodv", "dsr", "dsdv")
PROTOCOL_BY_CODE = {"0": "aodv", "1": "dsr", "2": "dsdv"}
CODE_BY_PROTOCOL = {v: k for k, v in PROTOCOL_BY_CODE.items()}
SCENARIO_IDS = (1, 2, 3)

DEFAULT_AREA = (500.0, 400.0)
DEFAULT_TX_RANGE = 250.0
DEFAULT_DURATION = 150.0
SPEED_FLOOR = 3.0
SPEED_CEIL = 10.0


class ScenarioError(Exception):
    pass


@dataclass
class ScenarioSpec:
    scenario_id: int
    placements: dict[int, tuple[float, float]]
    speed_range: tuple[float, float] = (SPEED_FLOOR, SPEED_CEIL)
    pause: float = 2.0
    static_nodes: set[int] = field(default_factory=set)
    flows: list[FlowSpec] = field(default_factory=list)
    duration: float = DEFAULT_DURATION
    area: tuple[float, float] = DEFAULT_AREA
    tx_range: float = DEFAULT_TX_RANGE
    seed: int = 1
    description: str = ""

    @property
    def node_count(self) -> int:
        return len(self.placements)

    def validate(self) -> None:
        if self.scenario_id < 1:
            raise ScenarioError(f"scenario_id must be >= 1, got {self.scenario_id}")
        if not self.placements:
            raise ScenarioError("placements: at least one node required")
        w, h = self.area
        if w <= 0 or h <= 0:
            raise ScenarioError(f"area must be positive, got {self.area}")
        for nid, (x, y) in self.placements.items():
            if nid < 0:
                raise ScenarioError(f"node ids must be >= 0, got {nid}")
            if not (0 <= x <= w and 0 <= y <= h):
                raise ScenarioError(
                    f"node {nid}: position ({x}, {y}) outside area {self.area}")
        lo, hi = self.speed_range
        if not (SPEED_FLOOR <= lo <= hi <= SPEED_CEIL):
            raise ScenarioError(
                f"speed_range must satisfy {SPEED_FLOOR} <= lo <= hi <= "
                f"{SPEED_CEIL}, got {self.speed_range}")
        if self.pause < 0:
            raise ScenarioError(f"pause must be >= 0, got {self.pause}")
        if self.duration <= 0:
            raise ScenarioError(f"duration must be > 0, got {self.duration}")
        if self.tx_range <= 0:
            raise ScenarioError(f"tx_range must be > 0, got {self.tx_range}")
        for nid in self.static_nodes:
            if nid not in self.placements:
                raise ScenarioError(f"static node {nid} is not placed")
        for i, f in enumerate(self.flows):
            if f.src not in self.placements or f.dst not in self.placements:
                raise ScenarioError(
                    f"flow {i}: endpoints ({f.src}, {f.dst}) must be placed nodes")
            if f.src == f.dst:
                raise ScenarioError(f"flow {i}: src == dst == {f.src}")
            if f.start_time < 0 or f.start_time > self.duration:
                raise ScenarioError(
                    f"flow {i}: start_time {f.start_time} outside run")


# -- run names ---------------------------------------------------------------

def resolve_run_name(name: str) -> tuple[str, int]:
    """a{x}{y}: x picks the protocol (0 aodv, 1 dsr, 2 dsdv), y the scenario."""
    if len(name) != 3 or name[0] != "a" or not name[1:].isdigit():
        raise ScenarioError(f"bad run name {name!r}: expected a<x><y>")
    proto = PROTOCOL_BY_CODE.get(name[1])
    if proto is None:
        raise ScenarioError(f"bad run name {name!r}: protocol digit 0-2")
    sid = int(name[2]) + 1
    if sid not in SCENARIO_IDS:
        raise ScenarioError(f"bad run name {name!r}: scenario digit 0-2")
    return proto, sid


def format_run_name(protocol: str, scenario_id: int) -> str:
    if protocol not in CODE_BY_PROTOCOL:
        raise ScenarioError(f"unknown protocol {protocol!r}")
    if scenario_id not in SCENARIO_IDS:
        raise ScenarioError(f"unknown scenario {scenario_id}")
    return f"a{CODE_BY_PROTOCOL[protocol]}{scenario_id - 1}"


def run_label(name: str) -> str:
    proto, sid = resolve_run_name(name)
    return f"{proto.upper()} Simulation for scenario {sid}"


# -- built-ins ----------------------------------------------------------------

_CHAIN_PLACEMENTS = {0: (50.0, 200.0), 1: (250.0, 200.0), 2: (450.0, 200.0)}

_FIELD_PLACEMENTS = {
    0: (40.0, 60.0),
    1: (150.0, 120.0),
    2: (260.0, 70.0),
    3: (370.0, 130.0),
    4: (460.0, 60.0),
    5: (60.0, 250.0),
    6: (180.0, 320.0),
    7: (300.0, 260.0),
    8: (400.0, 330.0),
    9: (460.0, 210.0),
}


def _field_flows() -> list[FlowSpec]:
    # Staggered starts keep the discovery floods from landing in one burst.
    pairs = [(0, 9), (9, 0), (2, 7), (6, 3)]
    return [FlowSpec(src=s, dst=d, start_time=1.0 + 0.5 * i)
            for i, (s, d) in enumerate(pairs)]


def builtin(scenario_id: int) -> ScenarioSpec:
    """The three pinned scenarios; returns a fresh copy each call."""
    if scenario_id == 1:
        return ScenarioSpec(
            scenario_id=1,
            placements=dict(_CHAIN_PLACEMENTS),
            speed_range=(3.0, 10.0),
            pause=2.0,
            static_nodes={0, 1, 2},
            flows=[FlowSpec(src=0, dst=2, start_time=1.0)],
            seed=1,
            description="3 static nodes in a chain; source reaches the "
                        "destination only through the middle node")
    if scenario_id == 2:
        return ScenarioSpec(
            scenario_id=2,
            placements=dict(_FIELD_PLACEMENTS),
            speed_range=(3.0, 6.0),
            pause=10.0,
            flows=_field_flows(),
            seed=2,
            description="10 nodes, moderate mobility (3-6 m/s, 10 s pauses)")
    if scenario_id == 3:
        return ScenarioSpec(
            scenario_id=3,
            placements=dict(_FIELD_PLACEMENTS),
            speed_range=(6.0, 10.0),
            pause=0.0,
            flows=_field_flows(),
            seed=3,
            description="10 nodes, high mobility (6-10 m/s, no pauses)")
    raise ScenarioError(f"unknown scenario {scenario_id}")


# seed variants per scenario; the first is the scenario default
SUITE_SEEDS = {
    1: (1, 101, 201, 301, 401),
    2: (2, 102, 202, 302, 402),
    3: (3, 103, 203, 303, 403),
}


def suite_pairs() -> list[tuple[int, int]]:
    """The 15 (scenario_id, seed) pairs every protocol runs."""
    return [(sid, seed) for sid in SCENARIO_IDS for seed in SUITE_SEEDS[sid]]


def suite_runs() -> list[tuple[str, int, int]]:
    """(protocol, scenario_id, seed) for all 45 suite runs."""
    return [(proto, sid, seed)
            for proto in PROTOCOL_ORDER
            for sid, seed in suite_pairs()]


# -- .scn files -----------------------------------------------------------------

def save_scenario(spec: ScenarioSpec, path) -> None:
    spec.validate()
    lines = []
    if spec.description:
        lines.append(f"# {spec.description}")
    lines.append(f"scenario_id {spec.scenario_id}")
    lines.append(f"seed {spec.seed}")
    lines.append(f"duration {spec.duration}")
    lines.append(f"area {spec.area[0]} {spec.area[1]}")
    lines.append(f"tx_range {spec.tx_range}")
    lines.append(f"speed {spec.speed_range[0]} {spec.speed_range[1]}")
    lines.append(f"pause {spec.pause}")
    for nid in sorted(spec.placements):
        x, y = spec.placements[nid]
        suffix = " static" if nid in spec.static_nodes else ""
        lines.append(f"node {nid} {x} {y}{suffix}")
    for f in spec.flows:
        lines.append(f"flow {f.src} {f.dst} {f.start_time}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_scenario(path) -> ScenarioSpec:
    placements: dict[int, tuple[float, float]] = {}
    static: set[int] = set()
    flows: list[FlowSpec] = []
    fields: dict[str, object] = {}
    description = ""
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if not description:
                    description = line.lstrip("# ").strip()
                continue
            parts = line.split()
            key = parts[0]
            try:
                if key == "scenario_id":
                    fields["scenario_id"] = int(parts[1])
                elif key == "seed":
                    fields["seed"] = int(parts[1])
                elif key == "duration":
                    fields["duration"] = float(parts[1])
                elif key == "area":
                    fields["area"] = (float(parts[1]), float(parts[2]))
                elif key == "tx_range":
                    fields["tx_range"] = float(parts[1])
                elif key == "speed":
                    fields["speed_range"] = (float(parts[1]), float(parts[2]))
                elif key == "pause":
                    fields["pause"] = float(parts[1])
                elif key == "node":
                    nid = int(parts[1])
                    placements[nid] = (float(parts[2]), float(parts[3]))
                    if len(parts) > 4 and parts[4] == "static":
                        static.add(nid)
                elif key == "flow":
                    flows.append(FlowSpec(src=int(parts[1]), dst=int(parts[2]),
                                          start_time=float(parts[3])))
                else:
                    raise ScenarioError(
                        f"{path}:{line_no}: unknown key {key!r}")
            except (IndexError, ValueError) as exc:
                raise ScenarioError(
                    f"{path}:{line_no}: bad {key!r} line: {exc}") from exc
    if "scenario_id" not in fields:
        raise ScenarioError(f"{path}: missing scenario_id")
    spec = ScenarioSpec(placements=placements, static_nodes=static,
                        flows=flows, description=description, **fields)
    spec.validate()
    return spec


def with_seed(spec: ScenarioSpec, seed: int) -> ScenarioSpec:
    return replace(spec, seed=seed,
                   placements=dict(spec.placements),
                   static_nodes=set(spec.static_nodes),
                   flows=list(spec.flows))
