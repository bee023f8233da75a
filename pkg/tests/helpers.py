"""Test helpers shared across test packages."""

from collections.abc import Iterable
from typing import Any, Optional

import numpy as np

from wlan_mab.links import LinkTable

# Normalized throughputs of the toy scenario
BOTH_ON_AP0 = 1.0 / (0.7825 + 0.798125)
BOTH_ON_AP1 = 1.0 / (1.0585 + 0.978125)
STA0_ALONE_ON_AP1 = 1.0 / 1.0585


class ScriptedRng:
    """Stand-in generator replaying fixed draws.

    Raises AssertionError when a draw is requested that the script does not
    hold, so a test also checks that no unexpected draw happens.
    """

    def __init__(self, randoms: Iterable[float] = (), integers: Iterable[int] = ()) -> None:
        self.randoms = list(randoms)
        self.integer_draws = list(integers)

    def random(self) -> float:
        assert self.randoms, "unexpected random() draw"
        return self.randoms.pop(0)

    def integers(self, high: int, *_: Any, **__: Any) -> int:
        assert self.integer_draws, f"unexpected integers({high}) draw"
        value = self.integer_draws.pop(0)
        assert 0 <= value < high, f"scripted value {value} outside [0, {high})"
        return value

    @property
    def exhausted(self) -> bool:
        return not self.randoms and not self.integer_draws


def make_links(
    cost: Any,
    rssi: Optional[Any] = None,
    visible: Optional[Any] = None,
    in_range: Optional[Any] = None,
    l_frame: int = 12000,
) -> LinkTable:
    """Link table from a per-frame cost matrix in seconds."""
    cost = np.asarray(cost, dtype=float)
    shape = cost.shape
    rssi = np.full(shape, -60.0) if rssi is None else np.asarray(rssi, dtype=float)
    visible = np.ones(shape, dtype=bool) if visible is None else np.asarray(visible, dtype=bool)
    return LinkTable(
        path_loss=20.0 - rssi,
        rssi=rssi,
        data_rate=np.full(shape, 100e6),
        legacy_rate=np.full(shape, 24e6),
        visible=visible,
        in_range=visible.copy() if in_range is None else np.asarray(in_range, dtype=bool),
        cost=cost,
        l_frame=l_frame,
    )
