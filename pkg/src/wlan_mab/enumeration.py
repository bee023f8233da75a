"""Exhaustive enumeration of association vectors for small scenarios."""

import itertools
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from pydantic import Field

from .agents import SATISFIED_TOLERANCE
from .base import APId, Fraction, Mbps, WLANBaseModel
from .config import PhyConfig, ScenarioConfig
from .engine import build_link_model, evaluate
from .errors import ConfigError
from .links import LinkTable, build_link_table
from .rng import RandomStreams
from .scenario import Deployment, LoadModel

MAX_ASSIGNMENTS = 4096


class AssignmentRow(WLANBaseModel):
    """Outcome of one association vector."""

    associations: list[APId]
    load: list[Mbps]
    throughput: list[Mbps]
    normalized: list[Fraction]
    required_airtime: list[Fraction]
    served_airtime: list[Fraction]
    occupancy: list[Fraction]
    all_satisfied: bool = False
    unique_satisfying: bool = Field(False, description="The only vector that satisfies every STA")


def enumerate_associations(
    links: LinkTable,
    loads: np.ndarray,
    channels: np.ndarray,
    max_assignments: int = MAX_ASSIGNMENTS,
) -> list[AssignmentRow]:
    """Evaluate every association vector, in lexicographic order."""
    n_stas, n_aps = links.n_stas, links.n_aps
    total = n_aps**n_stas
    if total > max_assignments:
        raise ConfigError(f"{n_aps} APs and {n_stas} STAs give {total} assignments, above the limit {max_assignments}")

    rows = []
    for vector in itertools.product(range(n_aps), repeat=n_stas):
        outcome = evaluate(np.array(vector, dtype=int), loads, links, channels)
        rows.append(
            AssignmentRow(
                associations=list(vector),
                load=[float(x) for x in loads],
                throughput=outcome.throughput.tolist(),
                normalized=outcome.normalized.tolist(),
                required_airtime=outcome.airtime.tolist(),
                served_airtime=outcome.served_airtime.tolist(),
                occupancy=outcome.occupancy.tolist(),
                all_satisfied=bool(np.all(outcome.normalized >= 1.0 - SATISFIED_TOLERANCE)),
            )
        )
    satisfying = [row for row in rows if row.all_satisfied]
    if len(satisfying) == 1:
        satisfying[0].unique_satisfying = True
    return rows


def satisfying_assignments(rows: list[AssignmentRow]) -> list[AssignmentRow]:
    return [row for row in rows if row.all_satisfied]


def enumerate_scenario(
    deployment: Deployment,
    phy: Optional[PhyConfig] = None,
    load: Optional[LoadModel] = None,
    seed: int = 0,
    max_assignments: int = MAX_ASSIGNMENTS,
) -> list[AssignmentRow]:
    """Enumerate a fixed scenario; per-STA loads in the file win over ``load``."""
    scenario = ScenarioConfig(phy=phy or PhyConfig(), load=load or LoadModel())
    model = build_link_model(deployment, scenario, RandomStreams(seed))
    links = build_link_table(model, np.asarray(deployment.sta_positions, dtype=float).reshape(-1, 2))
    if deployment.sta_loads is not None:
        loads = np.asarray(deployment.sta_loads, dtype=float)
    else:
        loads = np.full(deployment.n_stas, float(scenario.load.mean_load))
    return enumerate_associations(links, loads, np.asarray(deployment.ap_channels), max_assignments)


def assignments_frame(rows: list[AssignmentRow]) -> pd.DataFrame:
    """One line per (assignment, STA)."""
    records = []
    for index, row in enumerate(rows):
        for sta, ap in enumerate(row.associations):
            records.append(
                {
                    "assignment": index,
                    "sta_id": sta,
                    "ap_id": ap,
                    "load_mbps": row.load[sta],
                    "required_airtime": row.required_airtime[sta],
                    "served_airtime": row.served_airtime[sta],
                    "ap_occupancy": row.occupancy[ap],
                    "throughput_mbps": row.throughput[sta],
                    "normalized_throughput": row.normalized[sta],
                    "all_satisfied": row.all_satisfied,
                    "unique_satisfying": row.unique_satisfying,
                }
            )
    return pd.DataFrame.from_records(records)


def write_assignments(rows: list[AssignmentRow], path: Union[str, Path]) -> Path:
    target = Path(path)
    assignments_frame(rows).to_csv(target, index=False)
    return target
