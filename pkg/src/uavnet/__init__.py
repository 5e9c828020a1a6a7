"""Discrete-time simulator of an SDN-controlled UAV base-station network over a circular venue."""

from .model import (
    ConfigError,
    ControllerPos,
    Role,
    Sector,
    SimConfig,
    UavNode,
    UserDevice,
    init_scenario,
    load_config,
    parse_config,
    validate_config,
)
from .placement import PlacementError, PlacementState, initial_placement
from .radio import SnrGrid, compute_grid, friis_received_power, snr_db
from .routing import RoutingTree, UavGraph, build_graph, dijkstra_tree
from .sectors import assign_users_to_sectors, compute_sector_count, required_uavs
from .sim import RunReport, Simulation, SimulationError, run

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ControllerPos",
    "PlacementError",
    "PlacementState",
    "Role",
    "RoutingTree",
    "RunReport",
    "Sector",
    "SimConfig",
    "Simulation",
    "SimulationError",
    "SnrGrid",
    "UavGraph",
    "UavNode",
    "UserDevice",
    "assign_users_to_sectors",
    "build_graph",
    "compute_grid",
    "compute_sector_count",
    "dijkstra_tree",
    "friis_received_power",
    "init_scenario",
    "initial_placement",
    "load_config",
    "parse_config",
    "required_uavs",
    "run",
    "snr_db",
    "validate_config",
]
