"""Experiment configuration: models, YAML parsing and dotted-key overrides."""

import difflib
import logging
import typing
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .agents import AgentConfig
from .base import Bandwidth, ChannelMode, Dbm, PolicyType, STAPlacement, WLANBaseModel
from .errors import ConfigError
from .phy import PathLossParams, RateEntry, TimingParams, default_rate_table, load_rate_table
from .scenario import DeploymentSpec, LoadModel, MobilityModel
from .yaml_io import dump_yaml, load_yaml

logger = logging.getLogger(__name__)


class PhyConfig(WLANBaseModel):
    """Radio parameters shared by every link."""

    tx_power_dbm: Dbm = 20.0
    sensitivity_dbm: Dbm = -82.0
    path_loss: PathLossParams = Field(default_factory=PathLossParams)
    timing: TimingParams = Field(default_factory=TimingParams)
    rate_table_path: Optional[str] = None

    def rate_table(self, bandwidth: int) -> list[RateEntry]:
        """Rate table for ``bandwidth``, from the CSV file when one is configured."""
        if self.rate_table_path is None:
            return default_rate_table(bandwidth)
        tables = load_rate_table(self.rate_table_path)
        if bandwidth not in tables:
            raise ConfigError(f"Rate table {self.rate_table_path} has no {bandwidth} MHz entries")
        return tables[bandwidth]


class ScenarioConfig(WLANBaseModel):
    """Where the nodes are and what they request."""

    deployment: DeploymentSpec = Field(default_factory=DeploymentSpec)
    deployment_file: Optional[str] = Field(None, description="Fixed scenario file; replaces the generated deployment")
    bandwidth: Bandwidth = Bandwidth.MHZ_20
    channel_mode: ChannelMode = ChannelMode.AUTO
    reuse_factor: float = Field(2.0, gt=0)
    load: LoadModel = Field(default_factory=LoadModel)
    mobility: MobilityModel = Field(default_factory=MobilityModel)
    arrival_window: int = Field(1, ge=1, description="STAs arrive uniformly over this many rounds")
    phy: PhyConfig = Field(default_factory=PhyConfig)

    @model_validator(mode="after")
    def validate_mobility(self) -> "ScenarioConfig":
        """Mobility moves STAs between clusters, so generated deployments must be clustered."""
        if (
            self.mobility.active
            and self.deployment_file is None
            and self.deployment.sta_placement != STAPlacement.CLUSTERED
        ):
            raise ValueError("mobility requires clustered STA placement")
        return self


class StaOverride(WLANBaseModel):
    """Agent settings for a single STA."""

    sta: int = Field(ge=0)
    agent: AgentConfig


class PolicySpec(WLANBaseModel):
    """One policy under comparison."""

    name: str = Field(min_length=1)
    agent: AgentConfig = Field(default_factory=AgentConfig)
    agent_fraction: float = Field(1.0, ge=0.0, le=1.0, description="Share of STAs running ``agent``")
    others: AgentConfig = Field(
        default_factory=lambda: AgentConfig(policy=PolicyType.SS), description="Settings of the remaining STAs"
    )
    overrides: list[StaOverride] = Field(default_factory=list)

    def resolve(self, n_stas: int, rng: np.random.Generator) -> tuple[list[AgentConfig], np.ndarray]:
        """Per-STA agent settings and the mask of STAs running ``agent``."""
        mask = np.zeros(n_stas, dtype=bool)
        if self.agent_fraction >= 1.0:
            mask[:] = True
        elif n_stas:
            count = int(round(self.agent_fraction * n_stas))
            mask[rng.permutation(n_stas)[:count]] = True
        configs = [self.agent if mask[sta] else self.others for sta in range(n_stas)]
        for override in self.overrides:
            if override.sta >= n_stas:
                raise ConfigError(f"Policy {self.name!r} overrides STA {override.sta}, but there are {n_stas} STAs")
            configs[override.sta] = override.agent
            mask[override.sta] = override.agent.policy != PolicyType.SS
        return configs, mask


class SimulationConfig(WLANBaseModel):
    """Everything one seeded simulation needs."""

    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    policy: PolicySpec = Field(default_factory=lambda: PolicySpec(name="ss", agent=AgentConfig(policy=PolicyType.SS)))
    rounds: int = Field(240, ge=0)
    master_seed: int = Field(0, ge=0)


def default_policies() -> list[PolicySpec]:
    """SS against both bandit policies at their best exploration rates."""
    return [
        PolicySpec(name="ss", agent=AgentConfig(policy=PolicyType.SS)),
        PolicySpec(name="eps_greedy", agent=AgentConfig(policy=PolicyType.EPS_GREEDY, epsilon=0.05)),
        PolicySpec(name="eps_sticky", agent=AgentConfig(policy=PolicyType.EPS_STICKY, epsilon=0.1, sticky_max=2)),
    ]


class ExperimentConfig(WLANBaseModel):
    """A policy comparison over a set of seeds."""

    name: str = "experiment"
    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    policies: list[PolicySpec] = Field(default_factory=default_policies)
    rounds: int = Field(240, ge=1)
    seeds: Optional[list[int]] = None
    base_seed: int = Field(0, ge=0)
    seed_count: int = Field(100, ge=1)
    master_seed: int = Field(0, ge=0)
    parallelism: int = Field(1, ge=1)
    output_dir: Optional[str] = None
    write_traces: bool = False
    enumerate_associations: bool = Field(False, description="Write the exhaustive association table of the scenario")

    @field_validator("seeds")
    @classmethod
    def validate_seeds(cls, v: Optional[list[int]]) -> Optional[list[int]]:
        """Seeds are unique and non-negative."""
        if v is None:
            return v
        if not v:
            raise ValueError("seeds cannot be empty")
        if any(seed < 0 for seed in v):
            raise ValueError("seeds must be non-negative")
        if len(set(v)) != len(v):
            raise ValueError("seeds must be unique")
        return v

    @field_validator("policies")
    @classmethod
    def validate_policies(cls, v: list[PolicySpec]) -> list[PolicySpec]:
        """At least one policy, names unique."""
        if not v:
            raise ValueError("at least one policy is required")
        names = [policy.name for policy in v]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ValueError(f"duplicate policy names: {', '.join(duplicates)}")
        return v

    def seed_list(self) -> list[int]:
        """Seeds to run, in ascending order."""
        if self.seeds is not None:
            return sorted(self.seeds)
        return list(range(self.base_seed, self.base_seed + self.seed_count))

    def policy(self, name: str) -> PolicySpec:
        for policy in self.policies:
            if policy.name == name:
                return policy
        raise ConfigError(f"Unknown policy {name!r}")

    def simulation(self, policy: PolicySpec) -> SimulationConfig:
        """Single-policy view used by the engine."""
        return SimulationConfig(
            scenario=self.scenario, policy=policy, rounds=self.rounds, master_seed=self.master_seed
        )

    def model_dump_yaml(self) -> str:
        """Resolved configuration as YAML."""
        return dump_yaml(self.model_dump(mode="json"))


def _model_types(annotation: Any) -> Iterable[type[BaseModel]]:
    if isinstance(annotation, type) and issubclass(annotation, BaseModel):
        yield annotation
    for arg in typing.get_args(annotation):
        yield from _model_types(arg)


def known_keys(model: type[BaseModel] = ExperimentConfig) -> set[str]:
    """Every field name reachable from ``model``."""
    keys: set[str] = set()
    pending = [model]
    seen: set[type[BaseModel]] = set()
    while pending:
        current = pending.pop()
        if current in seen:
            continue
        seen.add(current)
        for name, info in current.model_fields.items():
            keys.add(name)
            pending.extend(_model_types(info.annotation))
    return keys


def suggest_key(key: str) -> Optional[str]:
    """Closest known key to a misspelt one."""
    matches = difflib.get_close_matches(key, sorted(known_keys()), n=1, cutoff=0.7)
    return matches[0] if matches else None


def format_validation_error(exc: ValidationError) -> str:
    """One line per problem, each naming the dotted key."""
    lines = []
    for error in exc.errors():
        key = ".".join(str(part) for part in error["loc"]) or "<root>"
        if error["type"] == "extra_forbidden":
            message = f"{key}: unknown key"
            suggestion = suggest_key(str(error["loc"][-1]))
            if suggestion:
                message += f" (did you mean {suggestion!r}?)"
        else:
            message = f"{key}: {error['msg']}"
        lines.append(message)
    return "; ".join(lines)


def set_dotted(data: dict[str, Any], key: str, value: Any) -> None:
    """Set ``value`` at a dotted path, descending into lists by index."""
    parts = key.split(".")
    if not all(parts):
        raise ConfigError(f"Invalid override key {key!r}")
    node: Any = data
    for depth, part in enumerate(parts):
        last = depth == len(parts) - 1
        if isinstance(node, list):
            if not part.isdigit() or int(part) >= len(node):
                raise ConfigError(f"Override {key!r}: {part!r} is not a valid index")
            if last:
                node[int(part)] = value
            else:
                node = node[int(part)]
        elif isinstance(node, dict):
            if last:
                node[part] = value
            else:
                node = node.setdefault(part, {})
        else:
            raise ConfigError(f"Override {key!r}: {'.'.join(parts[:depth])!r} is not a mapping")


def parse_override(text: str) -> tuple[str, Any]:
    """Split ``key=value``; the value is read as YAML."""
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"Override {text!r} must look like key=value")
    return key.strip(), load_yaml(raw) if raw.strip() else None


def _deep_merge(base: dict[str, Any], update: Mapping[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _resolve_paths(data: dict[str, Any], root: Path) -> None:
    scenario = data.get("scenario")
    if not isinstance(scenario, dict):
        return
    targets = [(scenario, "deployment_file")]
    if isinstance(scenario.get("phy"), dict):
        targets.append((scenario["phy"], "rate_table_path"))
    for holder, key in targets:
        value = holder.get(key)
        if isinstance(value, str) and not Path(value).is_absolute():
            holder[key] = str(root / value)


def parse_config(
    source: Union[str, Path, Mapping[str, Any], None] = None,
    overrides: Union[Iterable[str], Mapping[str, Any]] = (),
) -> ExperimentConfig:
    """Build a fully resolved :class:`ExperimentConfig`.

    Args:
        source: YAML file path, an already parsed mapping, or None for defaults
        overrides: ``key=value`` strings or a mapping of dotted keys to values

    Raises:
        ConfigError: the input cannot be read or does not validate
    """
    data: Any
    if source is None:
        data = {}
    elif isinstance(source, Mapping):
        data = dict(source)
    else:
        path = Path(source)
        try:
            data = load_yaml(path.read_text())
        except OSError as exc:
            raise ConfigError(f"Cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"Cannot parse config {path}: {exc}") from exc
        if isinstance(data, dict):
            _resolve_paths(data, path.resolve().parent)
    if not isinstance(data, dict):
        raise ConfigError("Config must be a mapping at the top level")

    data = _deep_merge(ExperimentConfig().model_dump(mode="json"), data)
    items = overrides.items() if isinstance(overrides, Mapping) else (parse_override(o) for o in overrides)
    for key, value in items:
        logger.debug("Override %s=%r", key, value)
        set_dotted(data, key, value)

    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(format_validation_error(exc)) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    # surface rate table problems before any round runs
    config.scenario.phy.rate_table(int(config.scenario.bandwidth))
    return config
