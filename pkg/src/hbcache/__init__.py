"""Deterministic simulator of a Home-Box overlay doing collaborative edge
caching in front of a CDN origin."""

from .config import PushSpec, SimConfig, SweepSpec, parse_config, parse_sweep
from .engine import RunMetrics, overall_cost, run
from .topology import Topology, generate_power_law, load_edge_list

__version__ = "0.1.0"

__all__ = [
    "PushSpec",
    "RunMetrics",
    "SimConfig",
    "SweepSpec",
    "Topology",
    "generate_power_law",
    "load_edge_list",
    "overall_cost",
    "parse_config",
    "parse_sweep",
    "run",
]
