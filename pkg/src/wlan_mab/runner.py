"""Seed-parallel execution of experiments."""

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import NamedTuple, Optional, Union

from .config import ExperimentConfig
from .engine import Simulation
from .enumeration import enumerate_scenario, write_assignments
from .errors import ConfigError, SimulationError, WLANMabError
from .export import fresh_output_dir, output_root, write_report, write_seed_summary, write_trace
from .metrics import ExperimentReport, SeedSummary, build_report, summarize_seed
from .scenario import Deployment

logger = logging.getLogger(__name__)


class SeedOutcome(NamedTuple):
    """Every policy's summary for one seed."""

    seed: int
    summaries: dict[str, SeedSummary]


def run_seed(config: ExperimentConfig, seed: int, trace_dir: Optional[str] = None) -> SeedOutcome:
    """Run all policies of ``config`` on one seed.

    Policies share the seed's deployment, shadowing and loads, so their
    results are paired.
    """
    logger.debug("Seed %d: starting %d policies", seed, len(config.policies))
    summaries: dict[str, SeedSummary] = {}
    echo = config.model_dump(mode="json")
    for policy in config.policies:
        try:
            simulation = Simulation(config.simulation(policy), seed)
            trace = simulation.run()
        except ConfigError:
            raise
        except WLANMabError as exc:
            raise SimulationError(f"Seed {seed}, policy {policy.name}: {exc}", seed=seed) from exc
        except Exception as exc:  # noqa: BLE001
            message = f"Seed {seed}, policy {policy.name}: {type(exc).__name__}: {exc}"
            raise SimulationError(message, seed=seed) from exc
        summary = summarize_seed(trace, seed=seed, policy=policy.name, agent_mask=simulation.agent_mask)
        summaries[policy.name] = summary
        if trace_dir is not None:
            stem = Path(trace_dir) / f"seed-{seed:04d}-{policy.name}"
            write_trace(trace, f"{stem}-trace.csv", f"{stem}-occupancy.csv")
            write_seed_summary(summary, f"{stem}-summary.json", echo)
    logger.debug("Seed %d: finished", seed)
    return SeedOutcome(seed, summaries)


def run_seeds(
    config: ExperimentConfig, parallelism: Optional[int] = None, trace_dir: Optional[str] = None
) -> ExperimentReport:
    """Run every seed and merge the results in seed order.

    A seed whose run fails is dropped for every policy and listed in
    ``failed_seeds``; configuration errors abort the whole experiment.
    """
    seeds = config.seed_list()
    workers = config.parallelism if parallelism is None else parallelism
    if workers < 1:
        raise ConfigError(f"parallelism must be >= 1, got {workers}")

    outcomes: dict[int, SeedOutcome] = {}
    failed: dict[int, str] = {}
    if workers == 1 or len(seeds) == 1:
        for seed in seeds:
            try:
                outcomes[seed] = run_seed(config, seed, trace_dir)
            except ConfigError:
                raise
            except Exception as exc:  # noqa: BLE001
                logger.warning("Seed %d failed: %s", seed, exc)
                failed[seed] = str(exc)
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(run_seed, config, seed, trace_dir): seed for seed in seeds}
            for future in as_completed(futures):
                seed = futures[future]
                try:
                    outcomes[seed] = future.result()
                except ConfigError:
                    raise
                except Exception as exc:  # noqa: BLE001
                    logger.warning("Seed %d failed: %s", seed, exc)
                    failed[seed] = str(exc)

    if not outcomes:
        raise SimulationError(f"All {len(seeds)} seeds failed")
    summaries = {
        policy.name: [outcomes[seed].summaries[policy.name] for seed in sorted(outcomes)]
        for policy in config.policies
    }
    return build_report(config.name, summaries, failed, config.model_dump(mode="json"))


def run_experiment(
    config: ExperimentConfig,
    output: Optional[Union[str, Path]] = None,
    parallelism: Optional[int] = None,
) -> tuple[ExperimentReport, Optional[Path]]:
    """Run an experiment and, when an output root is known, write it to a fresh directory.

    The directory receives the resolved ``config.yaml``, the report files,
    optional per-seed traces and, for fixed scenarios, the association table.
    """
    root = output if output is not None else config.output_dir
    directory = fresh_output_dir(output_root(root), config.name) if root is not None else None
    trace_dir: Optional[str] = None
    if directory is not None:
        (directory / "config.yaml").write_text(config.model_dump_yaml())
        if config.write_traces:
            traces = directory / "traces"
            traces.mkdir()
            trace_dir = str(traces)
        if config.enumerate_associations and config.scenario.deployment_file is not None:
            deployment = Deployment.from_yaml(config.scenario.deployment_file)
            rows = enumerate_scenario(deployment, config.scenario.phy, config.scenario.load)
            write_assignments(rows, directory / "associations.csv")

    logger.info("Running %s: %d policies, %d seeds", config.name, len(config.policies), len(config.seed_list()))
    report = run_seeds(config, parallelism, trace_dir)
    if directory is not None:
        write_report(report, directory)
        logger.info("Results written to %s", directory)
    if report.failed_seeds:
        logger.warning("%d seeds failed: %s", len(report.failed_seeds), sorted(report.failed_seeds))
    return report, directory
