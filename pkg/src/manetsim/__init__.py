"""Discrete-event MANET simulator: AODV and DSR under misbehaving nodes,
with none / eliminate / second-chance trust strategies."""

from manetsim.config import ScenarioConfig
from manetsim.harness import run_scenario, sweep, figures

__all__ = ["ScenarioConfig", "run_scenario", "sweep", "figures"]
__version__ = "0.1.0"
