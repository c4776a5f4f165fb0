"""Continuous-variable entanglement and teleportation over free-space links."""

from .beam_optics import Beam, Direction, Receiver
from .errors import ConfigError, CvlinkError, DomainError, NumericalError, RegimeError
from .fading_channel import FadingParams, Regime
from .gaussian_cv import Observable, TwoModeCM
from .geometry import LinkGeometry
from .link_scenarios import LinkResult, Relay, ScenarioConfig, ScenarioKind, evaluate, optimize_station

__version__ = "0.1.0"

__all__ = [
    "Beam",
    "ConfigError",
    "CvlinkError",
    "Direction",
    "DomainError",
    "FadingParams",
    "LinkGeometry",
    "LinkResult",
    "NumericalError",
    "Observable",
    "Receiver",
    "RegimeError",
    "Regime",
    "Relay",
    "ScenarioConfig",
    "ScenarioKind",
    "TwoModeCM",
    "evaluate",
    "optimize_station",
]
