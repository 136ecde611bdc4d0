"""Seedable simulator of a multi-channel hybrid ad-hoc network.

Channel assignment is driven by a per-node air-time metric and negotiated in
rounds under mutual exclusion, with power raised under an interference tax.
"""

from .errors import (
    ConfigurationError,
    DivergenceError,
    ParameterError,
    ProtocolError,
    SummaryError,
    UnknownNodeError,
    UnroutableError,
)
from .harness import SweepConfig, SweepTable, emit_csv, improvement_summary, read_csv, run_sweep, traffic_requirement
from .metric import MtmReport, mtm, node_mtm, total_mtm
from .network import ChannelAssignment, NetworkState, World
from .radio import RadioParams, poisson_boolean_connected
from .routing import RoutingParams, discover_routes, max_permitted_hops, split_flow
from .scheduler import ScheduleLimits, run_schedule
from .topology import TerrainConfig, Topology, build_cross_scenario, build_terrain_scenario

__version__ = "0.1.0"

__all__ = [
    "ChannelAssignment",
    "ConfigurationError",
    "DivergenceError",
    "MtmReport",
    "NetworkState",
    "ParameterError",
    "ProtocolError",
    "RadioParams",
    "RoutingParams",
    "ScheduleLimits",
    "SummaryError",
    "SweepConfig",
    "SweepTable",
    "TerrainConfig",
    "Topology",
    "UnknownNodeError",
    "UnroutableError",
    "World",
    "build_cross_scenario",
    "build_terrain_scenario",
    "discover_routes",
    "emit_csv",
    "improvement_summary",
    "max_permitted_hops",
    "mtm",
    "node_mtm",
    "poisson_boolean_connected",
    "read_csv",
    "run_schedule",
    "run_sweep",
    "split_flow",
    "total_mtm",
    "traffic_requirement",
]
