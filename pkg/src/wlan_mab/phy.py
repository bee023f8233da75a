"""Propagation, rate selection and airtime arithmetic.

All functions are pure; randomness is always passed in explicitly.
"""

import math
from collections.abc import Sequence
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from pydantic import Field, field_validator, model_validator

from .base import CHANNELS, BitsPerSecond, Db, Dbm, Fraction, Meters, Seconds, WLANBaseModel
from .errors import ConfigError, InvalidInputError


class PathLossParams(WLANBaseModel):
    """Indoor 5 GHz path loss model parameters."""

    l0: Db = Field(54.12, gt=0, description="Path loss at one meter")
    gamma: float = Field(2.06067, gt=0, description="Path loss exponent")
    k_wall: Db = Field(5.25, ge=0, description="Attenuation per traversed wall")
    w_bar: float = Field(0.1, ge=0, description="Average walls traversed per meter")
    shadowing_enabled: bool = True
    shadowing_max_db: Db = Field(10.0, ge=0, description="Shadowing is uniform on [0, shadowing_max_db]")


class TimingParams(WLANBaseModel):
    """PHY/MAC constants used by the airtime formulas (times in microseconds, sizes in bits)."""

    t_phy_legacy: float = Field(20.0, gt=0)
    t_phy_he_su: float = Field(52.0, gt=0)
    sigma: float = Field(16.0, gt=0)
    sigma_legacy: float = Field(4.0, gt=0)
    sifs: float = Field(16.0, gt=0)
    difs: float = Field(34.0, gt=0)
    e_psi: float = Field(7.5, gt=0, description="Average backoff in slots")
    t_e: float = Field(9.0, gt=0, description="Empty backoff slot")
    l_sf: int = Field(32, gt=0)
    l_mh: int = Field(272, gt=0)
    l_tb: int = Field(6, gt=0)
    l_ack: int = Field(112, gt=0)
    l_frame: int = Field(12000, gt=0)


class RateEntry(WLANBaseModel):
    """One row of a rate table: rates usable at or above ``min_rssi``."""

    min_rssi: Dbm
    data_rate: BitsPerSecond = Field(gt=0)
    legacy_rate: BitsPerSecond = Field(gt=0)


class RateTable(WLANBaseModel):
    """Rate table for one channel bandwidth."""

    bandwidth: int
    entries: list[RateEntry]

    @field_validator("bandwidth")
    @classmethod
    def validate_bandwidth(cls, v: int) -> int:
        """Validate bandwidth is one of the supported channel widths."""
        if v not in CHANNELS:
            raise ValueError(f"Unsupported bandwidth {v} MHz, expected one of {sorted(CHANNELS)}")
        return v

    @model_validator(mode="after")
    def validate_order(self) -> "RateTable":
        """Entries must be sorted by threshold with non-decreasing data rate."""
        if not self.entries:
            raise ValueError("Rate table cannot be empty")
        for prev, cur in zip(self.entries, self.entries[1:]):
            if cur.min_rssi < prev.min_rssi:
                raise ValueError("Rate table must be sorted ascending by min_rssi")
            if cur.data_rate < prev.data_rate:
                raise ValueError("Rate table data_rate must not decrease with min_rssi")
        return self


# Returned by select_rates when the RSSI is below every threshold
OUT_OF_RANGE = None

_LEGACY_THRESHOLDS: tuple[tuple[Dbm, BitsPerSecond], ...] = ((-70.0, 24e6), (-77.0, 12e6))
_LOWEST_LEGACY: BitsPerSecond = 6e6

# Single spatial stream MCS0-11 rates in Mb/s and 20 MHz thresholds in dBm
_MCS_RATES_MBPS: dict[int, tuple[float, ...]] = {
    20: (8.6, 17.2, 25.8, 34.4, 51.6, 68.8, 77.4, 86.0, 103.2, 114.7, 129.0, 143.4),
    40: (17.2, 34.4, 51.6, 68.8, 103.2, 137.6, 154.9, 172.1, 206.5, 229.4, 258.1, 286.8),
    80: (36.0, 72.1, 108.1, 144.1, 216.2, 288.2, 324.3, 360.3, 432.4, 480.4, 540.4, 600.5),
}
_MCS_THRESHOLDS_20MHZ: tuple[Dbm, ...] = (-82, -79, -77, -74, -70, -66, -65, -64, -59, -57, -54, -52)
_BANDWIDTH_SHIFT_DB: dict[int, Db] = {20: 0.0, 40: 3.0, 80: 6.0}


def legacy_rate_for(rssi: Dbm) -> BitsPerSecond:
    """Legacy (control frame) rate for a received power."""
    for threshold, rate in _LEGACY_THRESHOLDS:
        if rssi >= threshold:
            return rate
    return _LOWEST_LEGACY


def default_rate_table(bandwidth: int) -> list[RateEntry]:
    """Built-in rate table for a bandwidth."""
    if bandwidth not in _MCS_RATES_MBPS:
        raise ConfigError(f"No default rate table for {bandwidth} MHz")
    shift = _BANDWIDTH_SHIFT_DB[bandwidth]
    entries = []
    for threshold, rate in zip(_MCS_THRESHOLDS_20MHZ, _MCS_RATES_MBPS[bandwidth]):
        min_rssi = threshold + shift
        entries.append(RateEntry(min_rssi=min_rssi, data_rate=rate * 1e6, legacy_rate=legacy_rate_for(min_rssi)))
    return entries


RATE_TABLE_COLUMNS = ("min_rssi_dbm", "data_rate_mbps", "legacy_rate_mbps", "bandwidth_mhz")


def load_rate_table(path: Union[str, Path]) -> dict[int, list[RateEntry]]:
    """Load rate tables from a CSV file, one table per ``bandwidth_mhz`` value."""
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ConfigError(f"Cannot read rate table {path}: {exc}") from exc

    missing = [col for col in RATE_TABLE_COLUMNS if col not in frame.columns]
    if missing:
        raise ConfigError(f"Rate table {path} is missing columns: {', '.join(missing)}")

    tables: dict[int, list[RateEntry]] = {}
    for bandwidth, group in frame.groupby("bandwidth_mhz", sort=True):
        rows = group.sort_values("min_rssi_dbm")
        entries = [
            RateEntry(
                min_rssi=float(row.min_rssi_dbm),
                data_rate=float(row.data_rate_mbps) * 1e6,
                legacy_rate=float(row.legacy_rate_mbps) * 1e6,
            )
            for row in rows.itertuples(index=False)
        ]
        try:
            tables[int(bandwidth)] = RateTable(bandwidth=int(bandwidth), entries=entries).entries
        except ValueError as exc:
            raise ConfigError(f"Invalid rate table for {bandwidth} MHz in {path}: {exc}") from exc
    return tables


def path_loss(distance: Meters, params: PathLossParams, shadow: Db = 0.0) -> Db:
    """Path loss in dB; distances below one meter are clamped to one meter."""
    if not math.isfinite(distance):
        raise InvalidInputError(f"Distance must be finite, got {distance}")
    d = max(distance, 1.0)
    return params.l0 + 10.0 * params.gamma * math.log10(d) + params.k_wall * params.w_bar * d + shadow


def path_loss_array(distances: np.ndarray, params: PathLossParams, shadow: np.ndarray) -> np.ndarray:
    """Element-wise :func:`path_loss` over a distance matrix."""
    if not np.all(np.isfinite(distances)):
        raise InvalidInputError("Distances must be finite")
    d = np.maximum(distances, 1.0)
    return params.l0 + 10.0 * params.gamma * np.log10(d) + params.k_wall * params.w_bar * d + shadow


def sample_shadowing(
    rng: np.random.Generator, params: PathLossParams, size: Optional[tuple[int, ...]] = None
) -> Union[Db, np.ndarray]:
    """Draw static per-link shadowing, uniform on [0, shadowing_max_db]."""
    if not params.shadowing_enabled:
        return 0.0 if size is None else np.zeros(size)
    if size is None:
        return float(rng.uniform(0.0, params.shadowing_max_db))
    return rng.uniform(0.0, params.shadowing_max_db, size=size)


def select_rates(rssi: Dbm, table: Sequence[RateEntry]) -> Optional[tuple[BitsPerSecond, BitsPerSecond]]:
    """Rates of the highest entry whose threshold is at or below ``rssi``."""
    if not table:
        raise ConfigError("Rate table cannot be empty")
    chosen: Optional[RateEntry] = None
    for entry in table:
        if entry.min_rssi <= rssi:
            chosen = entry
        else:
            break
    if chosen is None:
        return OUT_OF_RANGE
    return chosen.data_rate, chosen.legacy_rate


def _symbols(bits: int, rate: BitsPerSecond, symbol_us: float) -> int:
    bits_per_symbol = rate * symbol_us * 1e-6
    # rounding guards against r * sigma landing a hair off an exact divisor
    return math.ceil(round(bits / bits_per_symbol, 9))


def frame_tx_time(
    l_frame: int, data_rate: BitsPerSecond, legacy_rate: BitsPerSecond, timing: TimingParams
) -> Seconds:
    """Time to send one data frame and receive its ACK, including SIFS, DIFS and one empty slot."""
    for name, rate in (("data_rate", data_rate), ("legacy_rate", legacy_rate)):
        if not math.isfinite(rate) or rate <= 0:
            raise InvalidInputError(f"{name} must be positive, got {rate}")

    data_bits = timing.l_sf + timing.l_mh + l_frame + timing.l_tb
    ack_bits = timing.l_sf + timing.l_ack + timing.l_tb
    t_data = timing.t_phy_he_su + _symbols(data_bits, data_rate, timing.sigma) * timing.sigma
    t_ack = timing.t_phy_legacy + _symbols(ack_bits, legacy_rate, timing.sigma_legacy) * timing.sigma_legacy
    total_us = t_data + timing.sifs + t_ack + timing.difs + timing.t_e
    return total_us * 1e-6


def frame_cost(l_frame: int, data_rate: BitsPerSecond, legacy_rate: BitsPerSecond, timing: TimingParams) -> Seconds:
    """Average channel time consumed per frame: backoff plus :func:`frame_tx_time`."""
    return timing.e_psi * timing.t_e * 1e-6 + frame_tx_time(l_frame, data_rate, legacy_rate, timing)


def required_airtime(
    load: BitsPerSecond,
    l_frame: int,
    data_rate: BitsPerSecond,
    legacy_rate: BitsPerSecond,
    timing: TimingParams,
) -> Fraction:
    """Fraction of each second the offered load occupies the channel; may exceed 1."""
    if not math.isfinite(load) or load < 0:
        raise InvalidInputError(f"Load must be non-negative, got {load}")
    return load / l_frame * frame_cost(l_frame, data_rate, legacy_rate, timing)
