"""Command line front end: ``fixlab run|verify|enumerate|suite|config``."""

from __future__ import annotations

import argparse
from collections.abc import Sequence
import json
from pathlib import Path
import sys

from fixpoint_lab import __version__
from fixpoint_lab.config import LabConfig, load_config
from fixpoint_lab.errors import FixlabError
from fixpoint_lab.logging import configure_cli_logging
from fixpoint_lab.runner import (
    EXIT_ERROR,
    EXIT_NOT_FIXED,
    EXIT_OK,
    RunOptions,
    enumerate_scenario,
    render_text,
    run,
    verify,
)
from fixpoint_lab.scenario import load_scenario
from fixpoint_lab.suite import BATTERIES, run_suite


def _add_budget_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--budget-steps", type=int, metavar="N", help="finite successor steps allowed")
    parser.add_argument("--budget-jumps", type=int, metavar="N", help="limit jumps allowed")
    parser.add_argument(
        "--max-stages", type=int, metavar="N", help="stage bound for reflective-game enumeration"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fixlab", description="Transordinal fixed-point laboratory."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="log info (-v) or debug (-vv) to stderr"
    )
    parser.add_argument(
        "--config", type=Path, metavar="PATH", help="fixlab.toml or pyproject.toml to read"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="run a scenario file")
    run_parser.add_argument("scenario", type=Path)
    run_parser.add_argument("--json", action="store_true", help="emit the JSON run report")
    run_parser.add_argument("--timing", action="store_true", help="include wall-clock timing")
    _add_budget_flags(run_parser)

    verify_parser = commands.add_parser(
        "verify", help="re-check a scenario or a JSON run report"
    )
    verify_parser.add_argument("document", type=Path)

    enumerate_parser = commands.add_parser(
        "enumerate", help="enumerate reflective equilibria of a game scenario"
    )
    enumerate_parser.add_argument("scenario", type=Path)
    enumerate_parser.add_argument("--json", action="store_true")
    enumerate_parser.add_argument(
        "--exhaustive",
        action="store_true",
        help="also follow payoff-dominated stage equilibria",
    )
    _add_budget_flags(enumerate_parser)

    suite_parser = commands.add_parser("suite", help="run the built-in property batteries")
    suite_parser.add_argument("--seed", type=int, default=42)
    suite_parser.add_argument(
        "--only", nargs="+", choices=sorted(BATTERIES), metavar="BATTERY", help="batteries to run"
    )
    suite_parser.add_argument("--json", action="store_true")
    suite_parser.add_argument("--timing", action="store_true")

    commands.add_parser("config", help="print the resolved configuration as TOML")
    return parser


def _resolve_config(args: argparse.Namespace) -> LabConfig:
    config = load_config(args.config)
    return config.replace(
        budget_steps=getattr(args, "budget_steps", None),
        budget_jumps=getattr(args, "budget_jumps", None),
        max_stages=getattr(args, "max_stages", None),
    )


def _run(args: argparse.Namespace, config: LabConfig) -> int:
    scenario = load_scenario(args.scenario)
    options = RunOptions(args.budget_steps, args.budget_jumps, args.timing)
    report = run(scenario, options, config)
    sys.stdout.write(report.to_json() if args.json else render_text(report))
    return report.exit_code


def _verify(args: argparse.Namespace, config: LabConfig) -> int:
    try:
        document = json.loads(args.document.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FixlabError(f"{args.document}: malformed JSON ({e.msg})")
    code = verify(document, config)
    sys.stdout.write(f"{args.document}: {'verified' if code == EXIT_OK else 'MISMATCH'}\n")
    return code


def _enumerate(args: argparse.Namespace, config: LabConfig) -> int:
    report = enumerate_scenario(load_scenario(args.scenario), config, exhaustive=args.exhaustive)
    if args.json:
        sys.stdout.write(json.dumps(report.to_dict(), indent=2) + "\n")
    else:
        lines = [f"{len(report.equilibria)} reflective equilibria"]
        for i, eq in enumerate(report.equilibria):
            lines.append(f"  #{i}: {' -> '.join(eq['outcomes'])}")
        lines.append(f"outcomes agree: {'yes' if report.agree else 'NO'}")
        if report.assumptions is not None:
            lines.append(
                "assumptions ({check}): continuity={continuityOfPayoffs} "
                "monotone={monotoneBestResponse} finitary={finitaryLocal}".format(
                    **report.assumptions
                )
            )
            lines.extend(f"  witness: {w}" for w in report.assumptions["witnesses"])
        sys.stdout.write("\n".join(lines) + "\n")
    return report.exit_code


def _suite(args: argparse.Namespace, config: LabConfig) -> int:
    report = run_suite(args.seed, args.only, config, timing=args.timing)
    sys.stdout.write(report.to_json() if args.json else report.render_text())
    return EXIT_OK if report.passed else EXIT_NOT_FIXED


def _config(args: argparse.Namespace, config: LabConfig) -> int:
    sys.stdout.write(config.to_toml())
    return EXIT_OK


_COMMANDS = {
    "run": _run,
    "verify": _verify,
    "enumerate": _enumerate,
    "suite": _suite,
    "config": _config,
}


def main(argv: Sequence[str] | None = None) -> int:
    """
    Entry point of the ``fixlab`` console script.

    Returns:
        0 on a fixed or verified result, 2 on divergence, failure or a
        verification mismatch, 1 on errors
    """
    args = build_parser().parse_args(argv)
    configure_cli_logging(args.verbose)
    try:
        config = _resolve_config(args)
        return _COMMANDS[args.command](args, config)
    except FixlabError as e:
        sys.stderr.write(f"error: {e.module}: {e}\n")
    except OSError as e:
        sys.stderr.write(f"error: {e}\n")
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
