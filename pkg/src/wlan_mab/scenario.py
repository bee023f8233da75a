"""Deployments, channel plans, traffic loads, arrivals and mobility."""

import math
from collections import Counter
from collections.abc import Sequence
from pathlib import Path
from typing import NamedTuple, Optional, Union

import networkx as nx
import numpy as np
import yaml
from pydantic import Field, field_validator, model_validator

from .base import CHANNELS, APPlacement, ChannelMode, LoadMode, Mbps, Meters, Point, STAPlacement, WLANBaseModel
from .errors import ConfigError
from .yaml_io import dump_yaml, load_yaml

CLUSTER_BOX: Meters = 10.0
MAX_CENTER_DRAWS = 10_000


class LinkOverride(WLANBaseModel):
    """Pinned link parameters for one (STA, AP) pair of a fixed scenario."""

    sta: int = Field(ge=0)
    ap: int = Field(ge=0)
    rssi: float
    data_rate_mbps: Optional[float] = Field(None, gt=0)
    legacy_rate_mbps: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def validate_rates(self) -> "LinkOverride":
        """Rates are pinned together or not at all."""
        if (self.data_rate_mbps is None) != (self.legacy_rate_mbps is None):
            raise ValueError("data_rate_mbps and legacy_rate_mbps must be given together")
        return self


class Deployment(WLANBaseModel):
    """Positions, channel plan and optional pinned values of one scenario."""

    area: tuple[Meters, Meters] = (80.0, 80.0)
    ap_positions: list[Point]
    sta_positions: list[Point]
    cluster_centers: list[Point] = Field(default_factory=list)
    sta_clusters: list[int] = Field(default_factory=list)
    ap_channels: list[int]
    bandwidth: int = 20
    sta_loads: Optional[list[Mbps]] = None
    link_overrides: list[LinkOverride] = Field(default_factory=list)

    @field_validator("area")
    @classmethod
    def validate_area(cls, v: tuple[Meters, Meters]) -> tuple[Meters, Meters]:
        """Area sides must be positive."""
        if v[0] <= 0 or v[1] <= 0:
            raise ValueError("Area sides must be positive")
        return v

    @field_validator("bandwidth")
    @classmethod
    def validate_bandwidth(cls, v: int) -> int:
        """Only 20, 40 and 80 MHz channels are modelled."""
        if v not in CHANNELS:
            raise ValueError(f"Unsupported bandwidth {v} MHz")
        return v

    @model_validator(mode="after")
    def validate_consistency(self) -> "Deployment":
        """Check positions, channels, clusters, loads and overrides against each other."""
        width, height = self.area
        for kind, points in (("AP", self.ap_positions), ("STA", self.sta_positions)):
            for idx, (x, y) in enumerate(points):
                if not (0.0 <= x <= width and 0.0 <= y <= height):
                    raise ValueError(f"{kind} {idx} at ({x}, {y}) lies outside the {width}x{height} area")
        if not self.ap_positions:
            raise ValueError("Deployment needs at least one AP")
        if len(self.ap_channels) != len(self.ap_positions):
            raise ValueError("ap_channels must have one entry per AP")
        allowed = CHANNELS[self.bandwidth]
        for channel in self.ap_channels:
            if channel not in allowed:
                raise ValueError(f"Channel {channel} is not a {self.bandwidth} MHz channel {allowed}")
        if self.sta_clusters:
            if len(self.sta_clusters) != len(self.sta_positions):
                raise ValueError("sta_clusters must have one entry per STA")
            if any(c < 0 or c >= len(self.cluster_centers) for c in self.sta_clusters):
                raise ValueError("sta_clusters references an unknown cluster")
        half = CLUSTER_BOX / 2.0
        for idx, (cx, cy) in enumerate(self.cluster_centers):
            if not (half <= cx <= width - half and half <= cy <= height - half):
                raise ValueError(f"Cluster {idx} box around ({cx}, {cy}) does not fit in the {width}x{height} area")
        if self.sta_loads is not None:
            if len(self.sta_loads) != len(self.sta_positions):
                raise ValueError("sta_loads must have one entry per STA")
            if any(load <= 0 for load in self.sta_loads):
                raise ValueError("sta_loads must be positive")
        for override in self.link_overrides:
            if override.sta >= len(self.sta_positions) or override.ap >= len(self.ap_positions):
                raise ValueError(f"Link override ({override.sta}, {override.ap}) references an unknown node")
        return self

    @property
    def n_aps(self) -> int:
        return len(self.ap_positions)

    @property
    def n_stas(self) -> int:
        return len(self.sta_positions)

    @property
    def clustered(self) -> bool:
        return bool(self.cluster_centers)

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "Deployment":
        """Load a deployment from a YAML scenario file."""
        try:
            data = load_yaml(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"Cannot read scenario file {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"Cannot parse scenario file {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"Scenario file {path} must contain a mapping")
        try:
            return cls(**data)
        except ValueError as exc:
            raise ConfigError(f"Invalid scenario file {path}: {exc}") from exc

    def to_yaml(self, path: Optional[Union[str, Path]] = None) -> str:
        """Serialize to YAML, optionally writing it to ``path``."""
        text = dump_yaml(self.model_dump(mode="json"))
        if path is not None:
            Path(path).write_text(text)
        return text


class DeploymentSpec(WLANBaseModel):
    """Recipe for generating a deployment."""

    area: tuple[Meters, Meters] = (80.0, 80.0)
    n_aps: int = Field(16, ge=1)
    ap_placement: APPlacement = APPlacement.GRID
    n_stas: int = Field(64, ge=0)
    sta_placement: STAPlacement = STAPlacement.CLUSTERED
    cluster_size: int = Field(10, ge=1)
    cluster_spacing: Meters = Field(CLUSTER_BOX, ge=0.0)

    @model_validator(mode="after")
    def validate_grid(self) -> "DeploymentSpec":
        """Grid placement needs a perfect-square AP count."""
        if self.ap_placement == APPlacement.GRID and math.isqrt(self.n_aps) ** 2 != self.n_aps:
            raise ValueError(f"Grid placement needs a perfect-square AP count, got {self.n_aps}")
        return self


class LoadModel(WLANBaseModel):
    """Per-STA offered load model."""

    mode: LoadMode = LoadMode.FIXED
    mean_load: Mbps = Field(4.0, gt=0)

    @model_validator(mode="after")
    def validate_variable_support(self) -> "LoadModel":
        """Variable loads are integers on [1, 2*mean-1]."""
        if self.mode == LoadMode.VARIABLE:
            upper = 2 * self.mean_load - 1
            if upper < 1 or not float(upper).is_integer():
                raise ValueError(f"Variable load mean {self.mean_load} does not give an integer range [1, 2*mean-1]")
        return self

    @property
    def variable_high(self) -> int:
        return int(2 * self.mean_load - 1)


class MobilityModel(WLANBaseModel):
    """Per-round relocation probability between clusters."""

    theta: float = Field(0.0, ge=0.0, le=1.0)
    enabled: bool = False

    @property
    def active(self) -> bool:
        return self.enabled and self.theta > 0


class ArrivalSchedule(WLANBaseModel):
    """Round in which each STA starts requesting traffic."""

    arrival_round: list[int]

    @field_validator("arrival_round")
    @classmethod
    def validate_rounds(cls, v: list[int]) -> list[int]:
        """Arrival rounds start at 1."""
        if any(r < 1 for r in v):
            raise ValueError("Arrival rounds must be >= 1")
        return v

    @classmethod
    def all_at_start(cls, n_stas: int) -> "ArrivalSchedule":
        """Every STA is active from round 1."""
        return cls(arrival_round=[1] * n_stas)


class MobilityStep(NamedTuple):
    """Outcome of one mobility round."""

    positions: np.ndarray
    moved: frozenset[int]
    clusters: np.ndarray


def place_aps(count: int, area: tuple[Meters, Meters], mode: APPlacement, rng: np.random.Generator) -> np.ndarray:
    """AP positions as an ``(count, 2)`` array, row-major for grids."""
    if count < 1:
        raise ConfigError("At least one AP is required")
    width, height = area
    if mode == APPlacement.GRID:
        side = math.isqrt(count)
        if side * side != count:
            raise ConfigError(f"Grid placement needs a perfect-square AP count, got {count}")
        pitch_x, pitch_y = width / side, height / side
        return np.array(
            [(pitch_x * (col + 0.5), pitch_y * (row + 0.5)) for row in range(side) for col in range(side)]
        )
    return np.column_stack((rng.uniform(0.0, width, count), rng.uniform(0.0, height, count)))


def initial_clusters(count: int, cluster_size: int) -> np.ndarray:
    """Cluster index of each STA; the last cluster holds the remainder."""
    return np.arange(count) // cluster_size


def _cluster_centers(
    n_clusters: int, area: tuple[Meters, Meters], half: Meters, spacing: Meters, rng: np.random.Generator
) -> np.ndarray:
    width, height = area
    centers = np.empty((n_clusters, 2))
    for k in range(n_clusters):
        for _ in range(MAX_CENTER_DRAWS):
            candidate = np.array((rng.uniform(half, width - half), rng.uniform(half, height - half)))
            if k == 0 or np.linalg.norm(centers[:k] - candidate, axis=1).min() >= spacing:
                centers[k] = candidate
                break
        else:
            raise ConfigError(f"Cannot place {n_clusters} cluster centers {spacing} m apart in a {width}x{height} area")
    return centers


def place_stas(
    count: int,
    area: tuple[Meters, Meters],
    mode: STAPlacement,
    cluster_size: int,
    rng: np.random.Generator,
    box: Meters = CLUSTER_BOX,
    spacing: Optional[Meters] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """STA positions and cluster centers (empty for uniform placement).

    Cluster centers keep their boxes inside the area and lie at least ``spacing``
    (default: the box side) from each other; ``spacing=0`` lets clusters overlap.
    """
    width, height = area
    if mode == STAPlacement.UNIFORM:
        positions = np.column_stack((rng.uniform(0.0, width, count), rng.uniform(0.0, height, count)))
        return positions, np.empty((0, 2))

    if cluster_size <= 0:
        raise ConfigError(f"cluster_size must be positive, got {cluster_size}")
    if box > width or box > height:
        raise ConfigError(f"Cluster box {box} m does not fit in a {width}x{height} area")
    n_clusters = math.ceil(count / cluster_size)
    half = box / 2.0
    centers = _cluster_centers(n_clusters, area, half, box if spacing is None else spacing, rng)
    members = initial_clusters(count, cluster_size)
    offsets = rng.uniform(-half, half, size=(count, 2))
    positions = centers[members] + offsets if count else np.empty((0, 2))
    return positions, centers


def _lattice_indices(positions: np.ndarray) -> list[tuple[int, int]]:
    xs = sorted({round(float(x), 6) for x in positions[:, 0]})
    ys = sorted({round(float(y), 6) for y in positions[:, 1]})
    if len(xs) * len(ys) != len(positions):
        raise ConfigError("grid_pattern channel allocation needs APs on a full lattice")
    col_of = {x: i for i, x in enumerate(xs)}
    row_of = {y: j for j, y in enumerate(ys)}
    return [(row_of[round(float(y), 6)], col_of[round(float(x), 6)]) for x, y in positions]


def _pattern_index(row: int, col: int, n_channels: int) -> int:
    if n_channels == 1:
        return 0
    if n_channels == 2:
        return (row + col) % 2
    if n_channels == 3:
        return (col + 2 * row) % 3
    # Two interleaved row bands; every other band pair is shifted half a period.
    period = n_channels // 2
    return (row % 2) * period + (col + (period // 2) * (row // 2 % 2)) % period


def reuse_radius(ap_positions: np.ndarray, factor: float = 2.0) -> Meters:
    """``factor`` times the mean nearest-neighbour AP distance."""
    if len(ap_positions) < 2:
        return 0.0
    diff = ap_positions[:, None, :] - ap_positions[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(dist, np.inf)
    return float(factor * dist.min(axis=1).mean())


def interference_graph(ap_positions: np.ndarray, radius: Meters) -> nx.Graph:
    """APs closer than ``radius`` are connected."""
    graph = nx.Graph()
    graph.add_nodes_from(range(len(ap_positions)))
    for a in range(len(ap_positions)):
        for b in range(a + 1, len(ap_positions)):
            if math.dist(ap_positions[a], ap_positions[b]) < radius:
                graph.add_edge(a, b)
    return graph


def allocate_channels(
    ap_positions: np.ndarray,
    channel_set: Sequence[int],
    mode: ChannelMode,
    radius: Optional[Meters] = None,
) -> list[int]:
    """Assign one channel per AP, minimising co-channel neighbours."""
    if not channel_set:
        raise ConfigError("Channel set cannot be empty")
    channels = list(channel_set)
    positions = np.asarray(ap_positions, dtype=float).reshape(-1, 2)

    if mode == ChannelMode.GRID_PATTERN:
        return [channels[_pattern_index(row, col, len(channels))] for row, col in _lattice_indices(positions)]

    graph = interference_graph(positions, reuse_radius(positions) if radius is None else radius)
    assigned: dict[int, int] = {}
    usage: Counter[int] = Counter()
    order = sorted(graph.nodes, key=lambda node: (-graph.degree[node], node))
    for node in order:
        taken = Counter(assigned[n] for n in graph.neighbors(node) if n in assigned)
        free = [c for c in channels if c not in taken]
        if free:
            choice = min(free, key=lambda c: (usage[c], channels.index(c)))
        else:
            choice = min(channels, key=lambda c: (taken[c], usage[c], channels.index(c)))
        assigned[node] = choice
        usage[choice] += 1
    return [assigned[node] for node in range(len(positions))]


def sample_round_loads(model: LoadModel, n_stas: int, rng: np.random.Generator) -> np.ndarray:
    """Offered load of each STA for one round, in Mb/s."""
    if model.mode == LoadMode.FIXED:
        return np.full(n_stas, float(model.mean_load))
    return rng.integers(1, model.variable_high + 1, size=n_stas).astype(float)


def apply_mobility(
    positions: np.ndarray,
    cluster_centers: np.ndarray,
    theta: float,
    rng: np.random.Generator,
    clusters: Optional[np.ndarray] = None,
    box: Meters = CLUSTER_BOX,
) -> MobilityStep:
    """Move each STA with probability ``theta`` into a uniformly chosen cluster."""
    if len(cluster_centers) == 0:
        raise ConfigError("Mobility needs a clustered deployment")
    if not 0.0 <= theta <= 1.0:
        raise ConfigError(f"theta must be within [0, 1], got {theta}")

    n_stas = len(positions)
    new_positions = np.array(positions, dtype=float, copy=True)
    new_clusters = np.zeros(n_stas, dtype=int) if clusters is None else np.array(clusters, copy=True)
    movers = np.flatnonzero(rng.random(n_stas) < theta)
    half = box / 2.0
    for sta in movers:
        target = int(rng.integers(len(cluster_centers)))
        new_positions[sta] = cluster_centers[target] + rng.uniform(-half, half, size=2)
        new_clusters[sta] = target
    return MobilityStep(new_positions, frozenset(int(s) for s in movers), new_clusters)


def sample_arrivals(n_stas: int, window_rounds: int, rng: np.random.Generator) -> ArrivalSchedule:
    """Arrival round of each STA, uniform on [1, window_rounds]."""
    if window_rounds < 1:
        raise ConfigError(f"Arrival window must be >= 1, got {window_rounds}")
    if window_rounds == 1:
        return ArrivalSchedule.all_at_start(n_stas)
    return ArrivalSchedule(arrival_round=[int(r) for r in rng.integers(1, window_rounds + 1, size=n_stas)])


def generate_deployment(
    spec: DeploymentSpec,
    bandwidth: int,
    channel_mode: ChannelMode,
    rng: np.random.Generator,
    reuse_factor: float = 2.0,
) -> Deployment:
    """Build a deployment from a recipe with the placement stream."""
    ap_positions = place_aps(spec.n_aps, spec.area, APPlacement(spec.ap_placement), rng)
    sta_positions, centers = place_stas(
        spec.n_stas, spec.area, STAPlacement(spec.sta_placement), spec.cluster_size, rng, spacing=spec.cluster_spacing
    )

    mode = ChannelMode(channel_mode)
    if mode == ChannelMode.AUTO:
        mode = ChannelMode.GRID_PATTERN if spec.ap_placement == APPlacement.GRID else ChannelMode.GREEDY_COLORING
    elif mode == ChannelMode.GRID_PATTERN and spec.ap_placement != APPlacement.GRID:
        raise ConfigError("grid_pattern channel allocation requires grid AP placement")
    radius = reuse_radius(ap_positions, reuse_factor)
    channels = allocate_channels(ap_positions, CHANNELS[bandwidth], mode, radius)

    clustered = spec.sta_placement == STAPlacement.CLUSTERED
    return Deployment(
        area=spec.area,
        ap_positions=[(float(x), float(y)) for x, y in ap_positions],
        sta_positions=[(float(x), float(y)) for x, y in sta_positions],
        cluster_centers=[(float(x), float(y)) for x, y in centers],
        sta_clusters=[int(c) for c in initial_clusters(spec.n_stas, spec.cluster_size)] if clustered else [],
        ap_channels=channels,
        bandwidth=bandwidth,
    )
