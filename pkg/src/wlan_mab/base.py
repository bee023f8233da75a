"""Base model, enums and unit aliases shared by the simulator."""

from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict


class WLANBaseModel(BaseModel):
    """Base model for every configuration and domain record.

    Unknown keys are rejected so that a misspelt configuration key never
    silently falls back to a default.
    """

    model_config = ConfigDict(extra="forbid", populate_by_name=True, use_enum_values=True)

    def model_dump(self, **kwargs: Any) -> dict[str, Any]:
        """Dump model excluding None values by default."""
        if "exclude_none" not in kwargs:
            kwargs["exclude_none"] = True
        return super().model_dump(**kwargs)


class Bandwidth(int, Enum):
    """Channel width in MHz."""

    MHZ_20 = 20
    MHZ_40 = 40
    MHZ_80 = 80


class APPlacement(str, Enum):
    """How APs are laid out in the area."""

    GRID = "grid"
    RANDOM = "random"


class STAPlacement(str, Enum):
    """How STAs are laid out in the area."""

    UNIFORM = "uniform"
    CLUSTERED = "clustered"


class ChannelMode(str, Enum):
    """Channel allocation procedure."""

    AUTO = "auto"
    GRID_PATTERN = "grid_pattern"
    GREEDY_COLORING = "greedy_coloring"


class LoadMode(str, Enum):
    """Per-round traffic load model."""

    FIXED = "fixed"
    VARIABLE = "variable"


class PolicyType(str, Enum):
    """AP selection policy run by a STA."""

    SS = "ss"
    EPS_GREEDY = "eps_greedy"
    EPS_STICKY = "eps_sticky"
    LOAD_AWARE = "load_aware"


class EpsilonSchedule(str, Enum):
    """Exploration rate schedule."""

    FIXED = "fixed"
    DECREASING = "decreasing"


class RewardStrategyType(str, Enum):
    """How an arm's rewards are aggregated."""

    AVERAGE = "average"
    WEIGHTED = "weighted"
    WINDOW = "window"


# Channels per bandwidth, same spectrum in every case
CHANNELS: dict[int, tuple[int, ...]] = {
    20: (36, 40, 44, 48, 52, 56, 60, 64),
    40: (38, 46, 54, 62),
    80: (42, 58),
}

# Type aliases for physical quantities
Meters = float
Db = float
Dbm = float
Mbps = float
BitsPerSecond = float
Seconds = float
Fraction = float
APId = int
STAId = int
Point = tuple[float, float]
