"""Command line interface: ``wlan-mab run|preset|enumerate|validate``."""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Optional

from . import __version__
from .config import ExperimentConfig, parse_config
from .enumeration import enumerate_scenario, write_assignments
from .errors import ConfigError, WLANMabError
from .export import output_root
from .metrics import ExperimentReport
from .presets import ALIASES, PRESETS, get_preset, list_presets
from .runner import run_experiment
from .scenario import Deployment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def setup_logging(verbosity: int) -> None:
    """INFO by default, DEBUG with ``-v``, WARNING with ``-q``."""
    level = logging.INFO
    if verbosity > 0:
        level = logging.DEBUG
    elif verbosity < 0:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wlan-mab", description="Decentralized AP selection simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More log output")
    parser.add_argument("-q", "--quiet", action="count", default=0, help="Less log output")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_overrides(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="Override a config key, e.g. --set scenario.deployment.n_stas=32",
        )

    def add_run_options(p: argparse.ArgumentParser) -> None:
        add_overrides(p)
        p.add_argument("--parallelism", "-j", type=int, default=None, help="Seeds run in parallel")
        p.add_argument("--output-dir", "-o", default=None, help="Output root (default: $WLAN_MAB_OUTPUT_ROOT)")

    run = sub.add_parser("run", help="Run an experiment config")
    run.add_argument("config", type=Path)
    add_run_options(run)

    preset = sub.add_parser("preset", help="Run a named experiment")
    preset.add_argument("name", nargs="?")
    preset.add_argument("--list", action="store_true", help="List presets and exit")
    add_run_options(preset)

    enumerate_cmd = sub.add_parser("enumerate", help="Exhaustive association table of a scenario file")
    enumerate_cmd.add_argument("scenario", type=Path)
    enumerate_cmd.add_argument("--output", type=Path, default=None, help="CSV file (default: stdout)")
    enumerate_cmd.add_argument("--seed", type=int, default=0, help="Seed for shadowing of non-pinned links")

    validate = sub.add_parser("validate", help="Check a config without running it")
    validate.add_argument("config", type=Path, nargs="?")
    add_overrides(validate)
    return parser


def _print_report(report: ExperimentReport) -> None:
    print(f"{report.name}: {len(report.seeds)} seeds")
    for name, policy in report.policies.items():
        final = "n/a" if policy.final_mean is None else f"{policy.final_mean:.4f}"
        print(
            f"  {name:<28} final mean {final}  unsatisfied {policy.unsatisfied_final:.4f}"
            f"  reassociations {policy.total_reassociations}"
        )
    if report.failed_seeds:
        print(f"  failed seeds: {', '.join(str(seed) for seed in report.failed_seeds)}")


def _execute(config: ExperimentConfig, args: argparse.Namespace) -> int:
    root = args.output_dir or config.output_dir or output_root()
    report, directory = run_experiment(config, root, args.parallelism)
    _print_report(report)
    print(f"  written to {directory}")
    return EXIT_OK


def _run(args: argparse.Namespace) -> int:
    return _execute(parse_config(args.config, args.overrides), args)


def _preset(args: argparse.Namespace) -> int:
    if args.list or not args.name:
        for name in list_presets():
            print(f"{name:<28} {PRESETS[name].description}")
        for alias, name in sorted(ALIASES.items()):
            print(f"{alias:<28} alias of {name}")
        return EXIT_OK if args.list else EXIT_CONFIG
    return _execute(get_preset(args.name, args.overrides), args)


def _enumerate(args: argparse.Namespace) -> int:
    deployment = Deployment.from_yaml(args.scenario)
    rows = enumerate_scenario(deployment, seed=args.seed)
    if args.output is not None:
        write_assignments(rows, args.output)
        logger.info("Wrote %d assignments to %s", len(rows), args.output)
    for index, row in enumerate(rows):
        marker = "*" if row.unique_satisfying else ("+" if row.all_satisfied else " ")
        cells = "  ".join(
            f"STA{sta}->AP{ap} {thr:6.2f} Mb/s ({norm:.2%})"
            for sta, (ap, thr, norm) in enumerate(zip(row.associations, row.throughput, row.normalized))
        )
        print(f"{marker} {index:3d}  {cells}")
    return EXIT_OK


def _validate(args: argparse.Namespace) -> int:
    config = parse_config(args.config, args.overrides)
    print(config.model_dump_yaml(), end="")
    return EXIT_OK


COMMANDS = {"run": _run, "preset": _preset, "enumerate": _enumerate, "validate": _validate}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose - args.quiet)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        logger.error("Configuration error: %s", exc)
        return EXIT_CONFIG
    except WLANMabError as exc:
        logger.error("Run failed: %s", exc)
        return EXIT_RUNTIME
    except Exception:
        logger.exception("Unexpected failure")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
