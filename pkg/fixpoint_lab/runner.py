"""Run scenarios, build run reports and re-verify them."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
import json
import time
from typing import Any

from fixpoint_lab.config import DEFAULT_CONFIG, LabConfig
from fixpoint_lab.engine import (
    Budget,
    IterationDomain,
    LatticeDomain,
    TraceStage,
    TransfiniteTrace,
    run_finite,
    run_transfinite,
    trace_from_dict,
    trace_to_dict,
    verify_fixed,
)
from fixpoint_lab.errors import BoundsExceededError, FixlabError, ScenarioError
from fixpoint_lab.fincat import (
    build_initial_chain,
    check_transordinal_structure,
    initial_algebra,
    lambek_check,
    render,
)
from fixpoint_lab.game import (
    Failure,
    ReflectiveGameSpec,
    alignment_game,
    check_assumptions,
    correspondence_report,
    enumerate_reflective_equilibria,
    outcomes_agree,
    stabilization_stage,
    stitch_equilibrium,
    verify_equilibrium,
)
from fixpoint_lab.kripke import (
    KripkeJumpDomain,
    TruthValue,
    classify,
    fixed_points as kripke_fixed_points,
    format_valuation,
    info_leq,
)
from fixpoint_lab.lattice import (
    fixed_point_lattice,
    fixed_points,
    gfp,
    height,
    lfp,
    require_monotone,
)
from fixpoint_lab.logging import get_logger, log_warning
from fixpoint_lab.ordinal import format_ordinal, from_int, parse_ordinal
from fixpoint_lab.scenario import Scenario, scenario_from_dict, scenario_to_dict

LOGGER = get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_FIXED = 2


@dataclass(frozen=True)
class RunOptions:
    """Command line overrides; ``None`` defers to the scenario, then the config."""

    budget_steps: int | None = None
    budget_jumps: int | None = None
    timing: bool = False


@dataclass
class Verdict:
    status: str
    """``fixed``, ``diverged`` or ``failure``."""
    theta: str | None = None
    reason: str | None = None

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"status": self.status}
        if self.theta is not None:
            data["theta"] = self.theta
        if self.reason is not None:
            data["reason"] = self.reason
        return data


@dataclass
class RunReport:
    scenario: Scenario
    verdict: Verdict
    budget: dict[str, int]
    trace: dict[str, Any] = field(default_factory=dict)
    result: dict[str, Any] = field(default_factory=dict)
    verification: dict[str, bool] = field(default_factory=dict)
    timing: float | None = None

    @property
    def exit_code(self) -> int:
        if self.verdict.status == "fixed" and all(self.verification.values()):
            return EXIT_OK
        return EXIT_NOT_FIXED

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "id": self.scenario.id,
            "kind": self.scenario.kind,
            "verdict": self.verdict.to_dict(),
            "budget": dict(self.budget),
            "result": self.result,
            "verification": dict(self.verification),
            "trace": self.trace,
            "scenario": scenario_to_dict(self.scenario),
        }
        if self.timing is not None:
            data["timing"] = {"seconds": round(self.timing, 6)}
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def _verdict_of(trace: TransfiniteTrace) -> Verdict:
    if trace.diverged is not None:
        return Verdict("diverged", reason=trace.diverged.reason)
    return Verdict("fixed", theta=format_ordinal(trace.theta))


def _run_lattice(scenario: Scenario, budget: Budget, config: LabConfig) -> RunReport:
    problem = scenario.problem
    lattice, op = problem.lattice, problem.op
    require_monotone(lattice, op)
    points = sorted(fixed_points(lattice, op))
    domain = LatticeDomain(lattice, op, dual=problem.mode == "gfp")
    trace = run_finite(domain, budget.max_finite_steps, config)
    report = RunReport(scenario, _verdict_of(trace), _budget_dict(budget))
    report.trace = trace_to_dict(trace, domain.describe)
    if trace.theta is None:
        return report

    value = trace.fixed_value
    if problem.mode == "gfp":
        extremal = all(lattice.leq(p, value) for p in points)
    else:
        extremal = all(lattice.leq(value, p) for p in points)
    report.result = {"value": lattice.name(value)}
    report.verification = {
        "fixedPoint": verify_fixed(domain, trace),
        "extremal": extremal,
        "stageWithinHeight": trace.theta.to_int() <= height(lattice),
    }
    if problem.mode == "all-fixed-points":
        least, _ = lfp(lattice, op)
        greatest, _ = gfp(lattice, op)
        report.result = {
            "value": lattice.name(value),
            "fixedPoints": [lattice.name(p) for p in points],
            "lfp": lattice.name(least),
            "gfp": lattice.name(greatest),
        }
        try:
            fixed_point_lattice(lattice, op)
            report.verification["completeLattice"] = True
        except FixlabError:
            report.verification["completeLattice"] = False
    return report


def _run_ordinal(scenario: Scenario, budget: Budget, config: LabConfig) -> RunReport:
    op = scenario.problem
    trace = run_transfinite(op, budget, config)
    report = RunReport(scenario, _verdict_of(trace), _budget_dict(budget))
    report.trace = trace_to_dict(trace, op.describe)
    if trace.theta is not None:
        report.result = {
            "value": format_ordinal(trace.fixed_value),
            "limitStages": [format_ordinal(stage) for stage in trace.limit_stages()],
        }
        report.verification = {"fixedPoint": verify_fixed(op, trace)}
    return report


def _run_functor(scenario: Scenario, budget: Budget, config: LabConfig) -> RunReport:
    functor = scenario.problem.functor
    steps = budget.max_finite_steps
    chain = build_initial_chain(functor, steps, config)
    trace = TransfiniteTrace(
        tuple(TraceStage(from_int(n), size) for n, size in enumerate(chain.growth)),
        theta=None if chain.theta is None else from_int(chain.theta),
        fixed_value=None if chain.theta is None else len(chain.carriers[chain.theta]),
    )
    result = initial_algebra(functor, steps, config)
    if isinstance(result, tuple):
        algebra, theta = result
        verdict = Verdict("fixed", theta=str(theta))
    else:
        verdict = Verdict("diverged", reason=f"no bijective connecting map within {steps} steps")
    report = RunReport(scenario, verdict, _budget_dict(budget))
    report.trace = trace_to_dict(trace, lambda size: size)
    report.result = {"functor": functor.describe(), "growth": list(chain.growth)}
    if isinstance(result, tuple):
        report.result["carrier"] = [render(x) for x in algebra.carrier]
        report.verification = {
            "lambek": lambek_check(functor, algebra, config),
            "transordinal": check_transordinal_structure(chain),
        }
    return report


def _run_kripke(scenario: Scenario, budget: Budget, config: LabConfig) -> RunReport:
    system = scenario.problem
    domain = KripkeJumpDomain(system)
    trace = run_finite(domain, budget.max_finite_steps, config)
    report = RunReport(scenario, _verdict_of(trace), _budget_dict(budget))
    report.trace = trace_to_dict(trace, domain.describe)
    if trace.theta is None:
        return report
    valuation = trace.fixed_value
    report.result = {
        "valuation": format_valuation(valuation),
        "classification": {name: g.value for name, g in classify(system, config).items()},
    }
    report.verification = {
        "fixedPoint": verify_fixed(domain, trace),
        "stageWithinSentences": trace.theta.to_int() <= len(system),
    }
    if 3 ** len(system) <= config.lattice_cap:
        report.verification["minimal"] = all(
            info_leq(valuation, other) for other in kripke_fixed_points(system, config)
        )
    return report


def _equilibrium_dict(spec: ReflectiveGameSpec, equilibrium) -> dict[str, Any]:
    return {
        "profiles": [
            list(game.render(p)) for game, p in zip(spec.stages, equilibrium.profiles, strict=True)
        ],
        "outcomes": list(equilibrium.outcomes),
        "finalOutcome": equilibrium.final_outcome,
        "coherent": equilibrium.coherent,
    }


def _assumptions_dict(spec: ReflectiveGameSpec, config: LabConfig) -> dict[str, Any] | None:
    try:
        report = check_assumptions(spec, config)
    except BoundsExceededError:
        return None
    return {
        "check": "sufficient-condition check",
        "continuityOfPayoffs": report.continuity_of_payoffs,
        "monotoneBestResponse": report.monotone_best_response,
        "finitaryLocal": report.finitary_local,
        "witnesses": list(report.witnesses),
    }


def _run_game(scenario: Scenario, budget: Budget, config: LabConfig) -> RunReport:
    spec = scenario.problem
    result = stitch_equilibrium(spec)
    if isinstance(result, Failure):
        verdict = Verdict("failure", reason=f"stage {result.stage}: {result.reason}")
        report = RunReport(scenario, verdict, _budget_dict(budget))
        report.result = {"failure": {"stage": result.stage, "reason": result.reason}}
    else:
        verdict = Verdict("fixed", theta=str(stabilization_stage(result)))
        report = RunReport(scenario, verdict, _budget_dict(budget))
        report.result = _equilibrium_dict(spec, result)
        report.verification = {"equilibrium": verify_equilibrium(spec, result)}
        report.trace = {
            "stages": [
                {"stage": str(alpha), "value": label, "limit": False}
                for alpha, label in enumerate(result.outcomes)
            ],
            "theta": verdict.theta,
            "fixedValue": result.final_outcome,
        }
    assumptions = _assumptions_dict(spec, config)
    if assumptions is not None:
        report.result["assumptions"] = assumptions
    return report


def _run_correspondence(scenario: Scenario, budget: Budget, config: LabConfig) -> RunReport:
    problem = scenario.problem
    lattice, op = problem.lattice, problem.op
    require_monotone(lattice, op)
    outcome = correspondence_report(lattice, op)
    _, stage = lfp(lattice, op)
    if outcome.ok:
        verdict = Verdict("fixed", theta=str(stage))
    elif outcome.failure is not None:
        verdict = Verdict(
            "failure", reason=f"stage {outcome.failure.stage}: {outcome.failure.reason}"
        )
    else:
        verdict = Verdict("failure", reason="equilibrium path differs from the iteration")
    report = RunReport(scenario, verdict, _budget_dict(budget))
    report.result = {
        "gameStates": outcome.game_states,
        "latticeStates": outcome.lattice_states,
        "correspondence": outcome.ok,
    }
    report.verification = {"correspondence": outcome.ok}
    return report


_RUNNERS: dict[str, Callable[[Scenario, Budget, LabConfig], RunReport]] = {
    "lattice-lfp": _run_lattice,
    "ordinal-transfinite": _run_ordinal,
    "initial-algebra": _run_functor,
    "kripke": _run_kripke,
    "reflective-game": _run_game,
    "correspondence": _run_correspondence,
}


def _budget_dict(budget: Budget) -> dict[str, int]:
    return {"steps": budget.max_finite_steps, "jumps": budget.max_limit_jumps}


def resolve_budget(
    scenario: Scenario, options: RunOptions, config: LabConfig = DEFAULT_CONFIG
) -> Budget:
    """Command line first, then the scenario's own budget, then the configuration."""
    default_steps = (
        config.initial_algebra_budget if scenario.kind == "initial-algebra" else config.budget_steps
    )
    steps = options.budget_steps
    if steps is None:
        steps = scenario.budget.get("steps", default_steps)
    jumps = options.budget_jumps
    if jumps is None:
        jumps = scenario.budget.get("jumps", config.budget_jumps)
    return Budget(steps, jumps)


def run(
    scenario: Scenario,
    options: RunOptions | None = None,
    config: LabConfig = DEFAULT_CONFIG,
) -> RunReport:
    """
    Run a scenario through its module and collect the report.

    Args:
        scenario: a validated scenario
        options: command line overrides
        config: caps and defaults

    Returns:
        The run report; its verdict is ``fixed``, ``diverged`` or ``failure``
    """
    options = options or RunOptions()
    budget = resolve_budget(scenario, options, config)
    LOGGER.info(
        f"running {scenario.kind} scenario '{scenario.id}'", type="fixlab", subtype="run"
    )
    started = time.perf_counter()
    report = _RUNNERS[scenario.kind](scenario, budget, config)
    if options.timing:
        report.timing = time.perf_counter() - started
    failed = [name for name, ok in report.verification.items() if not ok]
    if failed:
        log_warning(
            LOGGER,
            f"Scenario '{scenario.id}' failed verification: {', '.join(failed)}",
            "verification_failed",
            location=None,
        )
    return report


def _value_parser(scenario: Scenario) -> tuple[IterationDomain | None, Callable[[Any], Any]]:
    kind = scenario.kind
    if kind == "ordinal-transfinite":
        return scenario.problem, parse_ordinal
    if kind == "lattice-lfp":
        problem = scenario.problem
        domain = LatticeDomain(problem.lattice, problem.op, dual=problem.mode == "gfp")
        return domain, problem.lattice.index_of_name
    if kind == "kripke":
        return KripkeJumpDomain(scenario.problem), lambda data: {
            name: TruthValue(value) for name, value in data.items()
        }
    return None, lambda data: data


def verify_report(report: dict[str, Any], config: LabConfig = DEFAULT_CONFIG) -> list[str]:
    """
    Recompute every checkable claim of a serialized run report.

    The embedded scenario is re-run with the recorded budget and the result
    compared section by section. For engine traces the recorded trace is also
    rebuilt and checked against the operator on its own.

    Returns:
        The names of the report sections that do not match
    """
    if not isinstance(report, dict) or "scenario" not in report:
        raise ScenarioError("$", "a run report with an embedded scenario")
    scenario = scenario_from_dict(report["scenario"])
    recorded_budget = report.get("budget", {})
    options = RunOptions(recorded_budget.get("steps"), recorded_budget.get("jumps"))
    fresh = run(scenario, options, config).to_dict()
    mismatches = [
        key
        for key in ("id", "kind", "verdict", "budget", "result", "verification", "trace")
        if fresh.get(key) != report.get(key)
    ]

    domain, parse_value = _value_parser(scenario)
    claimed = report.get("verdict", {})
    if domain is not None and claimed.get("status") == "fixed":
        try:
            trace = trace_from_dict(report["trace"], parse_value)
            sound = verify_fixed(domain, trace)
        except (FixlabError, KeyError, TypeError, ValueError):
            sound = False
        if not sound or trace.theta is None or format_ordinal(trace.theta) != claimed.get("theta"):
            mismatches.append("trace")
    if mismatches:
        log_warning(
            LOGGER,
            f"Report for '{scenario.id}' does not match a fresh run: {', '.join(sorted(set(mismatches)))}",
            "verification_failed",
            location=None,
        )
    return sorted(set(mismatches))


def verify(document: dict[str, Any], config: LabConfig = DEFAULT_CONFIG) -> int:
    """Exit code for a scenario (run and check) or a run report (re-verify)."""
    if "scenario" in document and "verdict" in document:
        return EXIT_NOT_FIXED if verify_report(document, config) else EXIT_OK
    report = run(scenario_from_dict(document), config=config)
    return report.exit_code


@dataclass
class EnumerationReport:
    scenario: Scenario
    equilibria: list[dict[str, Any]]
    agree: bool
    assumptions: dict[str, Any] | None

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.equilibria else EXIT_NOT_FIXED

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.scenario.id,
            "kind": self.scenario.kind,
            "count": len(self.equilibria),
            "outcomesAgree": self.agree,
            "equilibria": self.equilibria,
            "assumptions": self.assumptions,
        }


def enumerate_scenario(
    scenario: Scenario, config: LabConfig = DEFAULT_CONFIG, *, exhaustive: bool = False
) -> EnumerationReport:
    """
    Enumerate reflective equilibria of a game (or the alignment game of a correspondence).

    ``exhaustive`` also follows payoff-dominated stage equilibria.
    """
    if scenario.kind == "reflective-game":
        spec = scenario.problem
    elif scenario.kind == "correspondence":
        spec = alignment_game(scenario.problem.lattice, scenario.problem.op)
    else:
        raise ScenarioError("$.kind", "reflective-game or correspondence for enumeration")
    equilibria = enumerate_reflective_equilibria(spec, config, exhaustive=exhaustive)
    return EnumerationReport(
        scenario,
        [_equilibrium_dict(spec, eq) for eq in equilibria],
        outcomes_agree(equilibria),
        _assumptions_dict(spec, config),
    )


def _table(rows: list[tuple[str, ...]]) -> list[str]:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return ["  ".join(cell.ljust(w) for cell, w in zip(row, widths, strict=True)).rstrip() for row in rows]


def _show(value: Any) -> str:
    if isinstance(value, dict):
        return " ".join(f"{k}:{v}" for k, v in value.items())
    return str(value)


def render_text(report: RunReport) -> str:
    """Human-readable report: verdict, theta, the stage table and module results."""
    lines = [f"scenario: {report.scenario.id} ({report.scenario.kind})"]
    lines.append(f"verdict: {report.verdict.status}")
    if report.verdict.theta is not None:
        lines.append(f"theta = {report.verdict.theta}")
    if report.verdict.reason is not None:
        lines.append(f"reason: {report.verdict.reason}")

    stages = report.trace.get("stages", [])
    if stages:
        rows = [("stage", "value", "")]
        rows.extend(
            (entry["stage"], _show(entry["value"]), "limit" if entry["limit"] else "")
            for entry in stages
        )
        lines.append("")
        lines.extend(_table(rows))

    result = report.result
    kind = report.scenario.kind
    lines.append("")
    if kind == "kripke" and "classification" in result:
        lines.extend(f"{name}: {grounding}" for name, grounding in result["classification"].items())
    elif kind == "correspondence":
        lines.append(f"correspondence: {'OK' if result.get('correspondence') else 'MISMATCH'}")
        lines.append(f"game states: {' -> '.join(result.get('gameStates', []))}")
        lines.append(f"iteration:   {' -> '.join(result.get('latticeStates', []))}")
    elif kind == "reflective-game" and "outcomes" in result:
        for alpha, (profile, label) in enumerate(zip(result["profiles"], result["outcomes"], strict=True)):
            lines.append(f"stage {alpha}: ({profile[0]}, {profile[1]}) -> {label}")
        assumptions = result.get("assumptions")
        if assumptions:
            lines.append(
                "assumptions ({check}): continuity={continuityOfPayoffs} "
                "monotone={monotoneBestResponse} finitary={finitaryLocal}".format(**assumptions)
            )
    else:
        for key, value in result.items():
            lines.append(f"{key}: {value}")

    if report.verification:
        lines.append("verification:")
        lines.extend(
            f"  {name}: {'ok' if ok else 'FAILED'}" for name, ok in report.verification.items()
        )
    if report.timing is not None:
        lines.append(f"time: {report.timing:.6f}s")
    return "\n".join(lines) + "\n"
