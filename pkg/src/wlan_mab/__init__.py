"""WLAN MAB - a seedable flow-level simulator of decentralized AP selection in WLANs."""

from .agents import (
    AgentConfig,
    AgentState,
    ArmStats,
    eps_greedy_decide,
    eps_sticky_decide,
    load_aware_decide,
    maybe_reset,
    ss_decide,
    update_reward,
)
from .base import (
    APPlacement,
    Bandwidth,
    ChannelMode,
    EpsilonSchedule,
    LoadMode,
    PolicyType,
    RewardStrategyType,
    STAPlacement,
    WLANBaseModel,
)
from .config import (
    ExperimentConfig,
    PhyConfig,
    PolicySpec,
    ScenarioConfig,
    SimulationConfig,
    StaOverride,
    parse_config,
)
from .engine import (
    RoundRecord,
    Simulation,
    SimulationResult,
    raw_occupancy,
    run_simulation,
    sta_throughput,
)
from .enumeration import AssignmentRow, enumerate_associations, enumerate_scenario
from .errors import ConfigError, ContractViolation, InvalidInputError, SimulationError, WLANMabError
from .links import LinkTable
from .metrics import (
    ExperimentReport,
    PolicyReport,
    SeedSummary,
    aggregate_seeds,
    ecdf,
    summarize_seed,
)
from .phy import (
    PathLossParams,
    RateEntry,
    TimingParams,
    frame_tx_time,
    path_loss,
    required_airtime,
    select_rates,
)
from .presets import get_preset, list_presets, run_preset
from .runner import run_experiment, run_seeds
from .scenario import (
    ArrivalSchedule,
    Deployment,
    DeploymentSpec,
    LoadModel,
    MobilityModel,
    allocate_channels,
    apply_mobility,
    place_aps,
    place_stas,
)

__version__ = "0.1.0"

__all__ = [
    "APPlacement",
    "AgentConfig",
    "AgentState",
    "ArmStats",
    "ArrivalSchedule",
    "AssignmentRow",
    "Bandwidth",
    "ChannelMode",
    "ConfigError",
    "ContractViolation",
    "Deployment",
    "DeploymentSpec",
    "EpsilonSchedule",
    "ExperimentConfig",
    "ExperimentReport",
    "InvalidInputError",
    "LinkTable",
    "LoadMode",
    "LoadModel",
    "MobilityModel",
    "PathLossParams",
    "PhyConfig",
    "PolicyReport",
    "PolicySpec",
    "PolicyType",
    "RateEntry",
    "RewardStrategyType",
    "RoundRecord",
    "STAPlacement",
    "ScenarioConfig",
    "SeedSummary",
    "Simulation",
    "SimulationConfig",
    "SimulationError",
    "SimulationResult",
    "StaOverride",
    "TimingParams",
    "WLANBaseModel",
    "WLANMabError",
    "aggregate_seeds",
    "allocate_channels",
    "apply_mobility",
    "ecdf",
    "enumerate_associations",
    "enumerate_scenario",
    "eps_greedy_decide",
    "eps_sticky_decide",
    "frame_tx_time",
    "get_preset",
    "list_presets",
    "load_aware_decide",
    "maybe_reset",
    "parse_config",
    "path_loss",
    "place_aps",
    "place_stas",
    "raw_occupancy",
    "required_airtime",
    "run_experiment",
    "run_preset",
    "run_seeds",
    "run_simulation",
    "select_rates",
    "ss_decide",
    "sta_throughput",
    "summarize_seed",
    "update_reward",
]
