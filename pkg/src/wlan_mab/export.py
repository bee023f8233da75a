"""Trace, summary and report files."""

import json
import logging
import os
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import pandas as pd

from .engine import INACTIVE, RoundRecord
from .errors import InvalidInputError
from .metrics import ExperimentReport, SeedSummary

logger = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "WLAN_MAB_OUTPUT_ROOT"
DEFAULT_OUTPUT_ROOT = "results"

TRACE_COLUMNS = (
    "round",
    "sta_id",
    "ap_id",
    "load_mbps",
    "throughput_mbps",
    "normalized_throughput",
    "satisfied",
    "reassociated",
)
OCCUPANCY_COLUMNS = ("round", "ap_id", "raw_occupancy", "offered_load_mbps")


def output_root(explicit: Optional[Union[str, Path]] = None) -> Path:
    """Explicit root, else ``$WLAN_MAB_OUTPUT_ROOT``, else ``./results``."""
    if explicit is not None:
        return Path(explicit)
    return Path(os.environ.get(OUTPUT_ROOT_ENV, DEFAULT_OUTPUT_ROOT))


def fresh_output_dir(root: Union[str, Path], name: str) -> Path:
    """Create ``root/name-NNN`` with the first unused number."""
    base = Path(root)
    base.mkdir(parents=True, exist_ok=True)
    for index in range(1, 10_000):
        candidate = base / f"{name}-{index:03d}"
        try:
            candidate.mkdir()
        except FileExistsError:
            continue
        return candidate
    raise InvalidInputError(f"No free output directory for {name!r} under {base}")


def trace_frame(trace: Sequence[RoundRecord]) -> pd.DataFrame:
    """One row per (round, active STA)."""
    frames = []
    for record in trace:
        stas = np.flatnonzero(record.active)
        frames.append(
            pd.DataFrame(
                {
                    "round": record.round,
                    "sta_id": stas,
                    "ap_id": record.association[stas],
                    "load_mbps": record.load[stas],
                    "throughput_mbps": record.throughput[stas],
                    "normalized_throughput": record.normalized[stas],
                    "satisfied": record.satisfied[stas],
                    "reassociated": record.reassociated[stas],
                }
            )
        )
    if not frames:
        return pd.DataFrame(columns=list(TRACE_COLUMNS))
    return pd.concat(frames, ignore_index=True)


def occupancy_frame(trace: Sequence[RoundRecord]) -> pd.DataFrame:
    """One row per (round, AP)."""
    frames = [
        pd.DataFrame(
            {
                "round": record.round,
                "ap_id": np.arange(len(record.raw_occupancy)),
                "raw_occupancy": record.raw_occupancy,
                "offered_load_mbps": record.offered_load,
            }
        )
        for record in trace
    ]
    if not frames:
        return pd.DataFrame(columns=list(OCCUPANCY_COLUMNS))
    return pd.concat(frames, ignore_index=True)


def write_trace(trace: Sequence[RoundRecord], sta_path: Union[str, Path], ap_path: Union[str, Path]) -> None:
    """Write the per-STA trace and the parallel per-AP occupancy file."""
    trace_frame(trace).to_csv(sta_path, index=False)
    occupancy_frame(trace).to_csv(ap_path, index=False)
    logger.info("Wrote trace %s and occupancy %s", sta_path, ap_path)


def read_trace(
    sta_path: Union[str, Path], ap_path: Union[str, Path], n_stas: Optional[int] = None
) -> list[RoundRecord]:
    """Rebuild round records from exported CSV files.

    STAs that never appear are taken as inactive; ``n_stas`` widens the
    arrays when trailing STAs were inactive for the whole trace.
    """
    stas = pd.read_csv(sta_path)
    aps = pd.read_csv(ap_path)
    missing = [col for col in TRACE_COLUMNS if col not in stas.columns]
    if missing:
        raise InvalidInputError(f"Trace {sta_path} is missing columns: {', '.join(missing)}")

    width = int(stas["sta_id"].max()) + 1 if len(stas) else 0
    if n_stas is not None:
        width = max(width, n_stas)
    n_aps = int(aps["ap_id"].max()) + 1 if len(aps) else 0
    by_round = {int(r): group for r, group in stas.groupby("round")}
    ap_by_round = {int(r): group.sort_values("ap_id") for r, group in aps.groupby("round")}

    records = []
    for round_index in sorted(set(by_round) | set(ap_by_round)):
        association = np.full(width, INACTIVE, dtype=int)
        load, throughput, normalized = np.zeros(width), np.zeros(width), np.zeros(width)
        satisfied, reassociated, active = (np.zeros(width, dtype=bool) for _ in range(3))
        group = by_round.get(round_index)
        if group is not None:
            idx = group["sta_id"].to_numpy(dtype=int)
            association[idx] = group["ap_id"].to_numpy(dtype=int)
            load[idx] = group["load_mbps"].to_numpy(dtype=float)
            throughput[idx] = group["throughput_mbps"].to_numpy(dtype=float)
            normalized[idx] = group["normalized_throughput"].to_numpy(dtype=float)
            satisfied[idx] = group["satisfied"].to_numpy(dtype=bool)
            reassociated[idx] = group["reassociated"].to_numpy(dtype=bool)
            active[idx] = True
        ap_group = ap_by_round.get(round_index)
        occupancy, offered = np.zeros(n_aps), np.zeros(n_aps)
        if ap_group is not None:
            ap_idx = ap_group["ap_id"].to_numpy(dtype=int)
            occupancy[ap_idx] = ap_group["raw_occupancy"].to_numpy(dtype=float)
            offered[ap_idx] = ap_group["offered_load_mbps"].to_numpy(dtype=float)
        records.append(
            RoundRecord(
                round=round_index,
                association=association,
                load=load,
                throughput=throughput,
                normalized=normalized,
                satisfied=satisfied,
                reassociated=reassociated,
                active=active,
                fallback=np.zeros(width, dtype=bool),
                raw_occupancy=occupancy,
                offered_load=offered,
            )
        )
    return records


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")
    logger.info("Wrote %s", path)


def write_seed_summary(summary: SeedSummary, path: Union[str, Path], config: Optional[dict[str, Any]] = None) -> None:
    """JSON summary of one (seed, policy) trace with the config echo."""
    payload = {"seed": summary.seed, "policy": summary.policy, "config": config or {}}
    payload["summary"] = summary.model_dump(mode="json", exclude_none=False)
    _write_json(Path(path), payload)


def write_report(report: ExperimentReport, directory: Union[str, Path]) -> list[Path]:
    """Scalars as ``report.json``; series, CDF points and boxplots as CSV."""
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)

    scalars = {
        "name": report.name,
        "seeds": report.seeds,
        "failed_seeds": {str(seed): reason for seed, reason in report.failed_seeds.items()},
        "reassociation_ratios": report.reassociation_ratios,
        "policies": {
            name: {
                "final_mean": policy.final_mean,
                "unsatisfied_final": policy.unsatisfied_final,
                "total_reassociations": policy.total_reassociations,
                "seeds": len(policy.seeds),
            }
            for name, policy in report.policies.items()
        },
        "config": report.config,
    }
    paths = [target / "report.json", target / "per_round.csv", target / "cdf.csv", target / "boxplot.csv"]
    _write_json(paths[0], scalars)

    per_round = [
        {
            "policy": name,
            "round": index + 1,
            "mean_normalized_throughput": policy.mean[index],
            "satisfied_fraction": policy.satisfied_fraction[index],
            "agent_mean": policy.agent_mean[index],
            "non_agent_mean": policy.non_agent_mean[index],
            "mean_reassociations": policy.reassociations[index],
        }
        for name, policy in report.policies.items()
        for index in range(policy.rounds)
    ]
    pd.DataFrame.from_records(per_round).to_csv(paths[1], index=False)

    cdf = [
        {"policy": name, "value": value, "fraction": fraction}
        for name, policy in report.policies.items()
        for value, fraction in policy.cdf
    ]
    pd.DataFrame.from_records(cdf, columns=["policy", "value", "fraction"]).to_csv(paths[2], index=False)

    boxes = [
        {"policy": name, **policy.boxplot.model_dump()}
        for name, policy in report.policies.items()
        if policy.boxplot is not None
    ]
    columns = ["policy", "minimum", "q25", "median", "q75", "maximum"]
    pd.DataFrame.from_records(boxes, columns=columns).to_csv(paths[3], index=False)
    for path in paths[1:]:
        logger.info("Wrote %s", path)
    return paths
