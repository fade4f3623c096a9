"""Agent-based simulation of fake-news spread with an SIS epidemic view."""

__version__ = "0.1.0"

from .agent import AgentState, Message, Opinion, init_agent
from .epidemic import SISParams, SISRegressor, fit_sis, integrate_sis, relabel_for_sis
from .exceptions import (
    ArtifactError,
    BackendError,
    ConfigError,
    FPSError,
    IntegrationError,
    PipelineOrderError,
)
from .labels import PopulationLabel, classify_state
from .metrics import MetricsReport, compute_metrics, distinct_n
from .persona import Persona, TraitProfile, generate_persona, generate_population
from .simulator import (
    InterventionSchedule,
    PopulationCounts,
    SimulationConfig,
    SimulationTrace,
    run_simulation,
)

__all__ = [
    "AgentState",
    "ArtifactError",
    "BackendError",
    "ConfigError",
    "FPSError",
    "IntegrationError",
    "InterventionSchedule",
    "Message",
    "MetricsReport",
    "Opinion",
    "Persona",
    "PipelineOrderError",
    "PopulationCounts",
    "PopulationLabel",
    "SISParams",
    "SISRegressor",
    "SimulationConfig",
    "SimulationTrace",
    "TraitProfile",
    "classify_state",
    "compute_metrics",
    "distinct_n",
    "fit_sis",
    "generate_persona",
    "generate_population",
    "init_agent",
    "integrate_sis",
    "relabel_for_sis",
    "run_simulation",
]
