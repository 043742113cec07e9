"""Discrete-event simulator of dense 802.11ax WLANs with OBSS PD-based spatial reuse."""
from .scenario import (DeploymentSpec, MapSpec, SimulationConfig, generate_deployment, load_config,
                       parse_config, validate_config, with_spatial_reuse)
from .simulation import Simulation, run_simulation

__version__ = "0.1.0"

__all__ = [
    "DeploymentSpec", "MapSpec", "SimulationConfig", "Simulation", "generate_deployment", "load_config",
    "parse_config", "run_simulation", "validate_config", "with_spatial_reuse",
]
