"""Deterministic co-simulation of a host CPU and NN inference accelerators
under monolithic, DMA-coupled, and shared-buffer coupling."""

from .costmodel import (
    ACTIVATION_KEYS,
    SHIPPED_ACCELERATORS,
    STAGE_NAMES,
    AcceleratorSpec,
    CostQuote,
    SimConfig,
    TransferParams,
)
from .errors import (
    CapacityExceededError,
    ConfigurationError,
    FenceViolationError,
    FlagNotRaisedError,
    NoFeasiblePointError,
    NotOwnerError,
    OutOfBoundsError,
    ProtocolError,
    SimulationError,
    UnknownFunctionError,
    UsageError,
)
from .protocol import FunctionTable, Owner, SidebarBuffer, SidebarLayout
from .scenarios import (
    SCENARIO_NAMES,
    ScenarioResult,
    relative_to_monolithic,
    run_all,
    run_scenario,
)
from .simcore import (
    EventKind,
    RunMetrics,
    SimEvent,
    Simulator,
    replay_totals,
    serialize_trace,
    trace_digest,
)
from .workload import (
    ActivationKind,
    Model,
    NetworkParams,
    SplitMix64,
    activation_from_key,
    apply_activation,
    build_model,
    init_params,
    make_input,
    run_network,
    run_stage,
)

__version__ = "0.1.0"

__all__ = [
    "ACTIVATION_KEYS",
    "SHIPPED_ACCELERATORS",
    "STAGE_NAMES",
    "SCENARIO_NAMES",
    "AcceleratorSpec",
    "ActivationKind",
    "CapacityExceededError",
    "ConfigurationError",
    "CostQuote",
    "EventKind",
    "FenceViolationError",
    "FlagNotRaisedError",
    "FunctionTable",
    "Model",
    "NetworkParams",
    "NoFeasiblePointError",
    "NotOwnerError",
    "OutOfBoundsError",
    "Owner",
    "ProtocolError",
    "RunMetrics",
    "ScenarioResult",
    "SidebarBuffer",
    "SidebarLayout",
    "SimConfig",
    "SimEvent",
    "SimulationError",
    "Simulator",
    "SplitMix64",
    "TransferParams",
    "UnknownFunctionError",
    "UsageError",
    "activation_from_key",
    "apply_activation",
    "build_model",
    "init_params",
    "make_input",
    "relative_to_monolithic",
    "replay_totals",
    "run_all",
    "run_network",
    "run_scenario",
    "run_stage",
    "serialize_trace",
    "trace_digest",
    "__version__",
]
