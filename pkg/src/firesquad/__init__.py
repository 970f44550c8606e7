"""Self-stabilizing firing squad: protocol, simulator, oracles, checkers and sweeps."""

from .core import (
    Config,
    Crash,
    FailurePattern,
    InputPattern,
    ProcessState,
    Trace,
    ValidationError,
    canonical_state,
)
from .engine import Scenario, Simulation, run
from .protocol import VARIANTS, step

__all__ = [
    "Config", "Crash", "FailurePattern", "InputPattern", "ProcessState", "Trace",
    "ValidationError", "canonical_state", "Scenario", "Simulation", "run", "VARIANTS", "step",
]
__version__ = "0.1.0"
