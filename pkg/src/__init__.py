"""
sparls - MCP-regularized sparse adaptive filtering.

Batch (SPALS) and recursive (SPARLS) expectation-maximization estimators with
minimax-concave and l1 penalties, RLS baselines, error-bound diagnostics and
the simulation studies used to compare them.
"""

__version__ = "0.1.0"

# Core domain exports
from .core.errors import (
    SparlsError, PenaltyDomainError, DimensionError, ConvergenceError,
    DiagnosticsError, MetricsError, StreamError, ConfigError, PlotError, TrialError,
)
from .core.penalty import (
    PenaltyConfig, GroupLayout, TiePolicy, ThresholdRegime,
    mcp_value, moreau_env, prox_scalar, prox_vector, prox_group,
)
from .core.estimators import (
    BatchProblem, EMTrace, PenaltyKind, spals_mcp, spals_l1, select_xi2, calibrate_xi2,
    sparls_mcp_init, sparls_mcp_step, rls_step, RLSFilter, SparlsFilter,
)
from .core.diagnostics import ErrorBoundReport, theorem2_bound, contraction_audit, lipschitz_C
from .core.metrics import nmse, mc_aggregate, pred_error_stats, to_db

# Port interfaces
from .ports.stream_source import Stream, StreamSource, sigma2_from_snr
from .ports.plotter import Plotter

# Scenario adapters
from .adapters.jakes_source import JakesConfig, JakesSource
from .adapters.volterra_source import VolterraConfig, VolterraSource
from .adapters.mts_source import MTSConfig, MTSSource

# Pipeline, presets and configuration
from .pipeline.trial_queue import TrialQueue, QueueMode
from .templates.presets import Preset, PresetLibrary, default_library
from .config import ExperimentConfig, Scenario, Algorithm, load_config

# Application layer
from .app import ExperimentRunner, run_trial, quick_run

__all__ = [
    # Errors
    "SparlsError",
    "PenaltyDomainError",
    "DimensionError",
    "ConvergenceError",
    "DiagnosticsError",
    "MetricsError",
    "StreamError",
    "ConfigError",
    "PlotError",
    "TrialError",

    # Core domain
    "PenaltyConfig",
    "GroupLayout",
    "TiePolicy",
    "ThresholdRegime",
    "mcp_value",
    "moreau_env",
    "prox_scalar",
    "prox_vector",
    "prox_group",
    "BatchProblem",
    "EMTrace",
    "PenaltyKind",
    "spals_mcp",
    "spals_l1",
    "select_xi2",
    "calibrate_xi2",
    "sparls_mcp_init",
    "sparls_mcp_step",
    "rls_step",
    "RLSFilter",
    "SparlsFilter",
    "ErrorBoundReport",
    "theorem2_bound",
    "contraction_audit",
    "lipschitz_C",
    "nmse",
    "mc_aggregate",
    "pred_error_stats",
    "to_db",

    # Ports and adapters
    "Stream",
    "StreamSource",
    "sigma2_from_snr",
    "Plotter",
    "JakesConfig",
    "JakesSource",
    "VolterraConfig",
    "VolterraSource",
    "MTSConfig",
    "MTSSource",

    # Pipeline, presets and configuration
    "TrialQueue",
    "QueueMode",
    "Preset",
    "PresetLibrary",
    "default_library",
    "ExperimentConfig",
    "Scenario",
    "Algorithm",
    "load_config",

    # Application layer
    "ExperimentRunner",
    "run_trial",
    "quick_run",
]

# Adapter imports (optional dependencies)
try:
    from .adapters.matplotlib_plotter import MATPLOTLIB_AVAILABLE, MatplotlibPlotter
    if MATPLOTLIB_AVAILABLE:
        __all__.append("MatplotlibPlotter")
except ImportError:
    pass
