"""Per (STA, AP) link state: path loss, RSSI, rates, visibility and per-frame cost."""

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .base import Dbm
from .phy import PathLossParams, RateEntry, TimingParams, frame_cost, path_loss_array, select_rates
from .scenario import LinkOverride


@dataclass
class LinkModel:
    """Static inputs needed to (re)compute link rows."""

    ap_positions: np.ndarray
    shadow: np.ndarray
    path_loss: PathLossParams
    timing: TimingParams
    rate_table: Sequence[RateEntry]
    tx_power: Dbm = 20.0
    sensitivity: Dbm = -82.0
    overrides: Mapping[tuple[int, int], LinkOverride] = field(default_factory=dict)


@dataclass
class LinkTable:
    """Dense ``(n_stas, n_aps)`` link arrays.

    ``visible`` marks the arms a STA may choose (in sensitivity range and
    with a defined rate); ``in_range`` is the coverage test used when an AP
    counts co-channel STAs of its neighbours. ``cost`` is the channel time per
    frame in seconds, backoff included.
    """

    path_loss: np.ndarray
    rssi: np.ndarray
    data_rate: np.ndarray
    legacy_rate: np.ndarray
    visible: np.ndarray
    in_range: np.ndarray
    cost: np.ndarray
    l_frame: int

    @property
    def n_stas(self) -> int:
        return int(self.rssi.shape[0])

    @property
    def n_aps(self) -> int:
        return int(self.rssi.shape[1])

    def visibility(self, sta: int) -> dict[int, float]:
        """Visible APs of a STA mapped to their RSSI."""
        row = self.rssi[sta]
        return {int(ap): float(row[ap]) for ap in np.flatnonzero(self.visible[sta])}


def _empty_table(n_stas: int, n_aps: int, l_frame: int) -> LinkTable:
    shape = (n_stas, n_aps)
    return LinkTable(
        path_loss=np.zeros(shape),
        rssi=np.zeros(shape),
        data_rate=np.zeros(shape),
        legacy_rate=np.zeros(shape),
        visible=np.zeros(shape, dtype=bool),
        in_range=np.zeros(shape, dtype=bool),
        cost=np.zeros(shape),
        l_frame=l_frame,
    )


def build_link_table(model: LinkModel, sta_positions: np.ndarray) -> LinkTable:
    """Compute every link row."""
    positions = np.asarray(sta_positions, dtype=float).reshape(-1, 2)
    table = _empty_table(len(positions), len(model.ap_positions), model.timing.l_frame)
    rebuild_rows(table, model, positions, range(len(positions)))
    return table


def rebuild_rows(table: LinkTable, model: LinkModel, sta_positions: np.ndarray, stas: Iterable[int]) -> None:
    """Recompute the rows of ``stas`` in place after they moved."""
    lowest = model.rate_table[0]
    cost_cache: dict[tuple[float, float], float] = {}
    for sta in stas:
        delta = model.ap_positions - sta_positions[sta]
        distances = np.hypot(delta[:, 0], delta[:, 1])
        losses = path_loss_array(distances, model.path_loss, model.shadow[sta])
        table.path_loss[sta] = losses
        for ap in range(table.n_aps):
            override = model.overrides.get((sta, ap))
            rssi = model.tx_power - float(losses[ap]) if override is None else override.rssi
            rates = select_rates(rssi, model.rate_table)
            if override is not None and override.data_rate_mbps is not None:
                rates = (override.data_rate_mbps * 1e6, float(override.legacy_rate_mbps or 0.0) * 1e6)
            in_range = rssi >= model.sensitivity
            if rates is None:
                # out of range: keep the lowest entry so a fallback association still has a cost
                rates = (lowest.data_rate, lowest.legacy_rate)
                visible = False
            else:
                visible = in_range
            if rates not in cost_cache:
                cost_cache[rates] = frame_cost(table.l_frame, rates[0], rates[1], model.timing)
            table.rssi[sta, ap] = rssi
            table.data_rate[sta, ap], table.legacy_rate[sta, ap] = rates
            table.visible[sta, ap] = visible
            table.in_range[sta, ap] = in_range
            table.cost[sta, ap] = cost_cache[rates]
