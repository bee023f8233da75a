"""Per-seed summaries and cross-seed experiment reports."""

import itertools
from collections.abc import Iterable, Sequence
from typing import Any, Optional

import numpy as np
from pydantic import Field

from .agents import SATISFIED_TOLERANCE
from .base import Fraction, WLANBaseModel
from .engine import RoundRecord
from .errors import InvalidInputError

PERCENTILE_METHOD = "linear"


class FiveNumber(WLANBaseModel):
    """Boxplot summary."""

    minimum: float
    q25: float
    median: float
    q75: float
    maximum: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "FiveNumber":
        data = np.asarray(values, dtype=float)
        q25, median, q75 = np.percentile(data, [25, 50, 75], method=PERCENTILE_METHOD)
        return cls(
            minimum=float(data.min()), q25=float(q25), median=float(median), q75=float(q75), maximum=float(data.max())
        )


class SeedSummary(WLANBaseModel):
    """Per-round statistics of one (seed, policy) trace.

    Round series hold ``None`` for rounds without any active STA.
    """

    seed: int = 0
    policy: str = ""
    rounds: int
    mean: list[Optional[float]]
    q25: list[Optional[float]]
    q50: list[Optional[float]]
    q75: list[Optional[float]]
    minimum: list[Optional[float]]
    maximum: list[Optional[float]]
    satisfied_fraction: list[Optional[float]]
    agent_mean: list[Optional[float]]
    non_agent_mean: list[Optional[float]]
    reassociations: list[int]
    final_normalized: list[Fraction]
    total_reassociations: int = Field(ge=0)
    unsatisfied_final: Fraction = Field(ge=0.0, le=1.0)

    @property
    def final_mean(self) -> Optional[float]:
        return self.mean[-1] if self.mean else None


def _mean_or_none(values: np.ndarray) -> Optional[float]:
    return float(np.mean(values)) if len(values) else None


def summarize_seed(
    trace: Sequence[RoundRecord], seed: int = 0, policy: str = "", agent_mask: Optional[np.ndarray] = None
) -> SeedSummary:
    """Statistics over the active STAs of each round."""
    if not trace:
        raise InvalidInputError("Cannot summarize an empty trace")

    series: dict[str, list[Any]] = {
        key: []
        for key in (
            "mean", "q25", "q50", "q75", "minimum", "maximum",
            "satisfied_fraction", "agent_mean", "non_agent_mean", "reassociations",
        )
    }  # fmt: skip
    for record in trace:
        active = np.asarray(record.active, dtype=bool)
        values = np.asarray(record.normalized, dtype=float)[active]
        series["reassociations"].append(int(np.count_nonzero(record.reassociated)))
        if not len(values):
            for key in ("mean", "q25", "q50", "q75", "minimum", "maximum", "satisfied_fraction"):
                series[key].append(None)
        else:
            q25, q50, q75 = np.percentile(values, [25, 50, 75], method=PERCENTILE_METHOD)
            series["mean"].append(float(np.mean(values)))
            series["q25"].append(float(q25))
            series["q50"].append(float(q50))
            series["q75"].append(float(q75))
            series["minimum"].append(float(values.min()))
            series["maximum"].append(float(values.max()))
            series["satisfied_fraction"].append(float(np.mean(values >= 1.0 - SATISFIED_TOLERANCE)))
        if agent_mask is None:
            series["agent_mean"].append(None)
            series["non_agent_mean"].append(None)
        else:
            mask = np.asarray(agent_mask, dtype=bool)
            series["agent_mean"].append(_mean_or_none(np.asarray(record.normalized)[active & mask]))
            series["non_agent_mean"].append(_mean_or_none(np.asarray(record.normalized)[active & ~mask]))

    final = trace[-1]
    final_values = np.asarray(final.normalized, dtype=float)[np.asarray(final.active, dtype=bool)]
    unsatisfied = float(np.mean(final_values < 1.0 - SATISFIED_TOLERANCE)) if len(final_values) else 0.0
    return SeedSummary(
        seed=seed,
        policy=policy,
        rounds=len(trace),
        final_normalized=[float(v) for v in final_values],
        total_reassociations=sum(series["reassociations"]),
        unsatisfied_final=unsatisfied,
        **series,
    )


def ecdf(values: Iterable[float]) -> list[tuple[float, float]]:
    """Right-continuous empirical CDF as (value, fraction at or below value) steps."""
    data = np.sort(np.asarray(list(values), dtype=float))
    if not len(data):
        raise InvalidInputError("ecdf needs at least one value")
    points, counts = np.unique(data, return_counts=True)
    fractions = np.cumsum(counts) / len(data)
    fractions[-1] = 1.0
    return [(float(v), float(f)) for v, f in zip(points, fractions)]


def _mean_series(rows: Sequence[Sequence[Optional[float]]]) -> list[Optional[float]]:
    result: list[Optional[float]] = []
    for column in zip(*rows):
        present = [value for value in column if value is not None]
        result.append(sum(present) / len(present) if present else None)
    return result


class PolicyReport(WLANBaseModel):
    """Cross-seed aggregate for one policy."""

    policy: str
    seeds: list[int]
    rounds: int
    mean: list[Optional[float]]
    satisfied_fraction: list[Optional[float]]
    agent_mean: list[Optional[float]]
    non_agent_mean: list[Optional[float]]
    reassociations: list[float]
    final_values: list[Fraction]
    final_mean: Optional[float] = None
    unsatisfied_final: Fraction = 0.0
    boxplot: Optional[FiveNumber] = None
    cdf: list[tuple[float, float]] = Field(default_factory=list)
    total_reassociations: int = 0
    reassociations_per_seed: dict[int, int] = Field(default_factory=dict)
    final_mean_per_seed: dict[int, Optional[float]] = Field(default_factory=dict)


def aggregate_seeds(summaries: Iterable[SeedSummary]) -> PolicyReport:
    """Across-seed means and pooled final-round values of one policy."""
    ordered = sorted(summaries, key=lambda summary: summary.seed)
    if not ordered:
        raise InvalidInputError("aggregate_seeds needs at least one summary")
    rounds = {summary.rounds for summary in ordered}
    if len(rounds) != 1:
        raise InvalidInputError(f"Summaries disagree on round count: {sorted(rounds)}")
    policies = {summary.policy for summary in ordered}
    if len(policies) != 1:
        raise InvalidInputError(f"Summaries mix policies: {sorted(policies)}")

    final_values = sorted(value for summary in ordered for value in summary.final_normalized)
    mean = _mean_series([summary.mean for summary in ordered])
    unsatisfied = 0.0
    if final_values:
        unsatisfied = sum(1 for v in final_values if v < 1.0 - SATISFIED_TOLERANCE) / len(final_values)
    return PolicyReport(
        policy=ordered[0].policy,
        seeds=[summary.seed for summary in ordered],
        rounds=ordered[0].rounds,
        mean=mean,
        satisfied_fraction=_mean_series([summary.satisfied_fraction for summary in ordered]),
        agent_mean=_mean_series([summary.agent_mean for summary in ordered]),
        non_agent_mean=_mean_series([summary.non_agent_mean for summary in ordered]),
        reassociations=[sum(col) / len(col) for col in zip(*(summary.reassociations for summary in ordered))],
        final_values=final_values,
        final_mean=mean[-1] if mean else None,
        unsatisfied_final=unsatisfied,
        boxplot=FiveNumber.of(final_values) if final_values else None,
        cdf=ecdf(final_values) if final_values else [],
        total_reassociations=sum(summary.total_reassociations for summary in ordered),
        reassociations_per_seed={summary.seed: summary.total_reassociations for summary in ordered},
        final_mean_per_seed={summary.seed: summary.final_mean for summary in ordered},
    )


def reassociation_ratio(numerator: PolicyReport, denominator: PolicyReport) -> Optional[float]:
    """Reassociations of one policy over another's, on the seeds both ran."""
    paired = sorted(set(numerator.reassociations_per_seed) & set(denominator.reassociations_per_seed))
    top = sum(numerator.reassociations_per_seed[seed] for seed in paired)
    bottom = sum(denominator.reassociations_per_seed[seed] for seed in paired)
    if bottom == 0:
        return None
    return top / bottom


class ExperimentReport(WLANBaseModel):
    """All policies of one experiment."""

    name: str
    seeds: list[int]
    failed_seeds: dict[int, str] = Field(default_factory=dict)
    policies: dict[str, PolicyReport]
    reassociation_ratios: dict[str, Optional[float]] = Field(default_factory=dict)
    config: dict[str, Any] = Field(default_factory=dict)

    def policy(self, name: str) -> PolicyReport:
        return self.policies[name]

    def ratio(self, numerator: str, denominator: str) -> Optional[float]:
        return self.reassociation_ratios.get(f"{numerator}/{denominator}")


def build_report(
    name: str,
    summaries: dict[str, list[SeedSummary]],
    failed_seeds: Optional[dict[int, str]] = None,
    config: Optional[dict[str, Any]] = None,
) -> ExperimentReport:
    """Aggregate every policy and the pairwise reassociation ratios."""
    policies = {policy: aggregate_seeds(items) for policy, items in summaries.items() if items}
    ratios = {
        f"{a}/{b}": reassociation_ratio(policies[a], policies[b])
        for a, b in itertools.permutations(policies, 2)
    }
    seeds = sorted({seed for report in policies.values() for seed in report.seeds})
    return ExperimentReport(
        name=name,
        seeds=seeds,
        failed_seeds=dict(sorted((failed_seeds or {}).items())),
        policies=policies,
        reassociation_ratios=ratios,
        config=config or {},
    )
