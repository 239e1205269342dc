"""socsynth: a deterministic agent-based society simulator.

Generates synthetic rare-event incident data (attack death tolls with a
dominant zero mass and a heavy right tail) by evolving a profile-seeded
agent graph under simple interaction rules, and validates the synthetic
distribution against recorded-incident statistics. A steering server lets
a researcher pause a run, tune parameters and watch polarization and tail
behaviour live.
"""

from .config import (
    GraphConfig,
    IncrementTable,
    SimulationConfig,
    config_from_text,
    config_to_text,
)
from .interact import (
    AttackEvent,
    EncounterMemory,
    InteractionOutcome,
    OutcomeKind,
    attempt_attack,
    interaction_success_probability,
    resolve_interaction,
    sample_death_toll,
)
from .kernel import HAVE_COMPILED, active_lane
from .regions import (
    IncidentDataset,
    RegionIndicators,
    compare,
    load_incidents,
    load_region,
)
from .roles import (
    AgentState,
    FeatureTensor,
    Role,
    RoleThresholds,
    classify_role,
    signed_predisposition,
)
from .scheduler import Simulation, SimulationLog, Snapshot, TickReport, replay, run
from .society import Society, build_society
from .stats import (
    GammaFit,
    Histogram,
    SummaryStats,
    fit_gamma_moments,
    kde,
    kl_divergence,
    polarization_index,
    predisposition_histogram,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "AgentState",
    "AttackEvent",
    "EncounterMemory",
    "FeatureTensor",
    "GammaFit",
    "GraphConfig",
    "HAVE_COMPILED",
    "Histogram",
    "IncidentDataset",
    "IncrementTable",
    "InteractionOutcome",
    "OutcomeKind",
    "RegionIndicators",
    "Role",
    "RoleThresholds",
    "Simulation",
    "SimulationConfig",
    "SimulationLog",
    "Snapshot",
    "Society",
    "SummaryStats",
    "TickReport",
    "active_lane",
    "attempt_attack",
    "build_society",
    "classify_role",
    "compare",
    "config_from_text",
    "config_to_text",
    "fit_gamma_moments",
    "interaction_success_probability",
    "kde",
    "kl_divergence",
    "load_incidents",
    "load_region",
    "polarization_index",
    "predisposition_histogram",
    "replay",
    "resolve_interaction",
    "run",
    "sample_death_toll",
    "signed_predisposition",
    "summarize",
]
