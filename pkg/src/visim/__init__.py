"""visim: simulate DSDV, DSR and AODV over a shared wireless world and
compare them on trace-derived performance indicators."""

__version__ = "1.0.0"

from .scenario import ScenarioSpec, builtin, format_run_name, resolve_run_name
from .simulation import Simulation, run_simulation
from .traffic import FlowSpec

__all__ = [
    "ScenarioSpec", "FlowSpec", "Simulation", "run_simulation",
    "builtin", "resolve_run_name", "format_run_name", "__version__",
]
