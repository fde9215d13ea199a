"""
Built-in property batteries, driven by seeded generators.

Each battery draws from its own ``Random`` seeded with the suite seed and the
battery name, so selecting a subset of batteries does not change the cases of
the others.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
import json
from random import Random
import time
from typing import Any

from fixpoint_lab.config import DEFAULT_CONFIG, LabConfig
from fixpoint_lab.engine import Budget, LatticeDomain, run_finite, run_transfinite, verify_fixed
from fixpoint_lab.fincat import (
    DivergenceReport,
    PolyFunctor,
    build_initial_chain,
    check_transordinal_structure,
    initial_algebra,
    lambek_check,
    poset_as_category_lfp,
    unique_homomorphism,
)
from fixpoint_lab.game import (
    Failure,
    alignment_game,
    check_assumptions,
    correspondence_check,
    enumerate_reflective_equilibria,
    outcomes_agree,
    stabilization_stage,
    stitch_equilibrium,
)
from fixpoint_lab.generators import (
    Pair,
    dominated_stage_spec,
    hypothesis_counterexample,
    pair_add,
    pair_to_ordinal,
    random_algebra,
    random_functor,
    random_monotone_op,
    random_ordinal,
    random_region_operator,
    random_sublattice,
    random_system,
)
from fixpoint_lab.kripke import (
    Grounding,
    TruthValue,
    classify,
    fixed_points as kripke_fixed_points,
    grounded_chain,
    info_leq,
    jump_monotone_violation,
    liar,
    minimal_fixed_point,
    truth_teller,
)
from fixpoint_lab.lattice import fixed_points, gfp, height, lfp
from fixpoint_lab.logging import get_logger, log_warning
from fixpoint_lab.ordinal import (
    ZERO,
    Ordering,
    compare,
    format_ordinal,
    is_limit,
    parse_ordinal,
    pred,
    succ,
    sup,
)

LOGGER = get_logger(__name__)

ORACLE_STEPS = 10_000
"""Iterates enumerated by the pair-encoding oracle before it takes a supremum."""

DETAIL_LIMIT = 10


@dataclass
class BatteryResult:
    name: str
    cases: int = 0
    failures: list[str] = field(default_factory=list)
    seconds: float | None = None

    def check(self, ok: bool, detail: str) -> None:
        self.cases += 1
        if not ok:
            self.failures.append(detail)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "name": self.name,
            "cases": self.cases,
            "failures": len(self.failures),
            "details": self.failures[:DETAIL_LIMIT],
        }
        if self.seconds is not None:
            data["seconds"] = round(self.seconds, 6)
        return data


def ordinal_battery(rng: Random, config: LabConfig) -> BatteryResult:
    result = BatteryResult("ordinal")
    for _ in range(300):
        x: Pair = (rng.randint(0, 20), rng.randint(0, 20))
        y: Pair = (rng.randint(0, 20), rng.randint(0, 20))
        a, b = pair_to_ordinal(x), pair_to_ordinal(y)
        expected = Ordering.LT if x < y else Ordering.GT if x > y else Ordering.EQ
        result.check(compare(a, b) is expected, f"compare{x}{y}")
        result.check(a + b == pair_to_ordinal(pair_add(x, y)), f"add{x}{y}")

    for _ in range(200):
        a, b, c = (random_ordinal(rng) for _ in range(3))
        label = f"{a}, {b}, {c}"
        result.check((a + b) + c == a + (b + c), f"associativity: {label}")
        result.check(a + ZERO == a and ZERO + a == a, f"identity: {a}")
        result.check(pred(succ(a)) == a, f"pred(succ({a}))")
        result.check(parse_ordinal(format_ordinal(a)) == a, f"round trip: {a}")
        result.check(is_limit(a) == (a != ZERO and pred(a) is None), f"limit: {a}")
        result.check(sup([a, b, c]) == max(a, b, c), f"sup: {label}")
        result.check(not (a + b < a), f"monotone addition: {a} + {b}")
    return result


def tarski_battery(rng: Random, config: LabConfig) -> BatteryResult:
    result = BatteryResult("tarski")
    for case in range(200):
        lattice = random_sublattice(rng, max_atoms=6)
        op = random_monotone_op(rng, lattice)
        points = fixed_points(lattice, op)
        least, stage = lfp(lattice, op)
        greatest, down_stage = gfp(lattice, op)
        result.check(
            least in points and all(lattice.leq(least, p) for p in points),
            f"case {case}: lfp {lattice.name(least)} is not the least fixed point",
        )
        result.check(
            greatest in points and all(lattice.leq(p, greatest) for p in points),
            f"case {case}: gfp {lattice.name(greatest)} is not the greatest fixed point",
        )
        bound = height(lattice)
        result.check(
            stage <= bound and down_stage <= bound,
            f"case {case}: closure stage {stage}/{down_stage} exceeds height {bound}",
        )
        trace = run_finite(LatticeDomain(lattice, op), config.budget_steps, config)
        result.check(
            trace.theta is not None and trace.theta.to_int() == stage and trace.fixed_value == least,
            f"case {case}: engine run disagrees with Kleene iteration",
        )
    return result


def _oracle(regions: Sequence[tuple[Pair, Pair | None, int]]) -> tuple[Pair, Pair, list[Pair]]:
    """
    Run a pair-encoded step operator by enumerating iterates.

    After ``ORACLE_STEPS`` iterates inside one region the value is replaced by
    the supremum of the enumerated iterates, the next multiple of ``w``.
    """

    def region_of(v: Pair) -> tuple[Pair, Pair | None, int]:
        for region in regions:
            lo, hi, _ = region
            if lo <= v and (hi is None or v < hi):
                return region
        raise AssertionError(f"no region contains {v}")

    stage: Pair = (0, 0)
    value: Pair = (0, 0)
    limits: list[Pair] = []
    while True:
        region = region_of(value)
        increment = region[2]
        if increment == 0:
            return stage, value, limits
        iterate, n = value, 0
        while n < ORACLE_STEPS:
            following = (iterate[0], iterate[1] + increment)
            if region_of(following) != region:
                break
            iterate, n = following, n + 1
        if n == ORACLE_STEPS:
            value = (value[0] + 1, 0)
            stage = (stage[0] + 1, 0)
            limits.append(stage)
        else:
            value = (iterate[0], iterate[1] + increment)
            stage = (stage[0], stage[1] + n + 1)


def engine_battery(rng: Random, config: LabConfig) -> BatteryResult:
    result = BatteryResult("engine")
    for case in range(100):
        regions, op = random_region_operator(rng)
        trace = run_transfinite(op, Budget.from_config(config), config)
        stage, value, limits = _oracle(regions)
        detail = f"case {case}: regions {regions}"
        result.check(trace.theta == pair_to_ordinal(stage), f"{detail}: theta {trace.theta}")
        result.check(trace.fixed_value == pair_to_ordinal(value), f"{detail}: value")
        result.check(
            trace.limit_stages() == [pair_to_ordinal(s) for s in limits], f"{detail}: limit stages"
        )
        result.check(verify_fixed(op, trace), f"{detail}: verify_fixed")
    return result


def lambek_battery(rng: Random, config: LabConfig) -> BatteryResult:
    result = BatteryResult("lambek")
    for _ in range(24):
        functor = random_functor(rng, "constant")
        outcome = initial_algebra(functor, config.initial_algebra_budget, config)
        detail = f"functor {functor.describe()}"
        if isinstance(outcome, DivergenceReport):
            result.check(False, f"{detail}: did not converge")
            continue
        algebra, theta = outcome
        result.check(
            theta == 1 and len(algebra.carrier) == functor.application_size(0),
            f"{detail}: carrier of size {len(algebra.carrier)} at stage {theta}",
        )
        result.check(lambek_check(functor, algebra, config), f"{detail}: structure map not bijective")
        chain = build_initial_chain(functor, config.initial_algebra_budget, config)
        result.check(check_transordinal_structure(chain), f"{detail}: bonding maps")
        for _ in range(3):
            size = rng.randint(2, config.homomorphism_target_bound)
            target = random_algebra(rng, functor, size)
            homomorphism = unique_homomorphism(functor, algebra, target, config)
            result.check(
                isinstance(homomorphism, dict),
                f"{detail}: {getattr(homomorphism, 'found', '?')} homomorphisms into a {size}-element target",
            )

    # no constant summand: F(0) is empty, so the initial algebra is the empty set
    for _ in range(4):
        functor = random_functor(rng, "recursive")
        outcome = initial_algebra(functor, config.initial_algebra_budget, config)
        target = random_algebra(rng, functor, rng.randint(1, config.homomorphism_target_bound))
        result.check(
            not isinstance(outcome, DivergenceReport)
            and outcome[1] == 0
            and len(outcome[0].carrier) == 0
            and unique_homomorphism(functor, outcome[0], target, config) == {},
            f"{functor.describe()}: expected the empty initial algebra at stage 0",
        )

    for case in range(20):
        lattice = random_sublattice(rng, max_atoms=5)
        op = random_monotone_op(rng, lattice)
        least, _ = lfp(lattice, op)
        initial = poset_as_category_lfp(lattice, op)
        result.check(
            initial == least,
            f"poset case {case}: initial object {lattice.name(initial)} differs from lfp {lattice.name(least)}",
        )

    budget = config.initial_algebra_budget
    nat = PolyFunctor.of((["zero"], 0), (["succ"], 1))
    outcome = initial_algebra(nat, budget, config)
    result.check(
        isinstance(outcome, DivergenceReport) and outcome.growth == tuple(range(budget + 1)),
        f"1+X growth profile: {getattr(outcome, 'growth', outcome)}",
    )
    for _ in range(4):
        functor = random_functor(rng, "mixed")
        outcome = initial_algebra(functor, 4, config)
        result.check(isinstance(outcome, DivergenceReport), f"{functor.describe()}: converged")
    return result


def kripke_battery(rng: Random, config: LabConfig) -> BatteryResult:
    result = BatteryResult("kripke")
    for system in (liar(), truth_teller()):
        grounding = classify(system, config)
        result.check(
            all(g is Grounding.UNGROUNDED for g in grounding.values()),
            f"{system.names} should be ungrounded",
        )
    for depth in range(1, 9):
        valuation, stage = minimal_fixed_point(grounded_chain(depth), config)
        result.check(
            stage == depth and all(v is TruthValue.T for v in valuation.values()),
            f"grounded chain of depth {depth} reached stage {stage}",
        )
    for case in range(60):
        system = random_system(rng, max_sentences=3)
        result.check(jump_monotone_violation(system, config) is None, f"case {case}: jump not monotone")
        valuation, stage = minimal_fixed_point(system, config)
        result.check(stage <= len(system), f"case {case}: stage {stage} exceeds sentence count")
        result.check(
            all(info_leq(valuation, other) for other in kripke_fixed_points(system, config)),
            f"case {case}: minimal fixed point is not below every fixed point",
        )
    for case in range(20):
        system = random_system(rng, max_sentences=3, classical=True)
        valuation, stage = minimal_fixed_point(system, config)
        result.check(
            stage == 1 and TruthValue.U not in valuation.values(),
            f"classical case {case}: stage {stage}",
        )
    return result


def reflective_battery(rng: Random, config: LabConfig) -> BatteryResult:
    result = BatteryResult("reflective")
    specs = 0
    for _attempt in range(2000):
        if specs == 100:
            break
        lattice = random_sublattice(rng, max_atoms=4)
        op = random_monotone_op(rng, lattice)
        _, theta = lfp(lattice, op)
        if theta + 1 > config.max_stages:
            continue
        specs += 1
        spec = alignment_game(lattice, op)
        report = check_assumptions(spec, config)
        detail = f"alignment spec {specs}"
        result.check(report.all_hold, f"{detail}: assumptions {report.witnesses}")
        equilibria = enumerate_reflective_equilibria(spec, config)
        result.check(bool(equilibria), f"{detail}: no reflective equilibrium")
        result.check(outcomes_agree(equilibria), f"{detail}: outcome sequences differ")
        # two equilibria per stage: the scoring profile and the dominated opposite corner
        everything = enumerate_reflective_equilibria(spec, config, exhaustive=True)
        result.check(
            len(everything) == 2**spec.horizon
            and all(eq in everything for eq in equilibria)
            and len({eq.final_outcome for eq in everything}) == 1,
            f"{detail}: unrefined search found {len(everything)} equilibria",
        )
        stitched = stitch_equilibrium(spec)
        result.check(
            not isinstance(stitched, Failure) and stabilization_stage(stitched) <= theta,
            f"{detail}: stitching failed or did not stabilize by stage {theta}",
        )
    result.check(specs == 100, f"only {specs} alignment specs fit the stage bound")

    counterexample = hypothesis_counterexample()
    report = check_assumptions(counterexample, config)
    result.check(not report.continuity_of_payoffs, "counterexample passes the continuity check")
    equilibria = enumerate_reflective_equilibria(counterexample, config)
    result.check(
        len(equilibria) >= 2 and not outcomes_agree(equilibria),
        "counterexample equilibria agree on their outcomes",
    )
    failure = stitch_equilibrium(dominated_stage_spec())
    result.check(
        isinstance(failure, Failure) and failure.stage == 1, f"dominated stage: {failure}"
    )
    return result


def correspondence_battery(rng: Random, config: LabConfig) -> BatteryResult:
    result = BatteryResult("correspondence")
    for case in range(100):
        lattice = random_sublattice(rng, max_atoms=4)
        op = random_monotone_op(rng, lattice)
        result.check(correspondence_check(lattice, op), f"case {case}: |L| = {lattice.size}")
    return result


BATTERIES: dict[str, Callable[[Random, LabConfig], BatteryResult]] = {
    "ordinal": ordinal_battery,
    "tarski": tarski_battery,
    "engine": engine_battery,
    "lambek": lambek_battery,
    "kripke": kripke_battery,
    "reflective": reflective_battery,
    "correspondence": correspondence_battery,
}


@dataclass
class SuiteReport:
    seed: int
    batteries: list[BatteryResult]

    @property
    def passed(self) -> bool:
        return all(battery.passed for battery in self.batteries)

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "batteries": [battery.to_dict() for battery in self.batteries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def render_text(self) -> str:
        rows = [
            f"{b.name:<16}{b.cases:>8} cases  {len(b.failures):>4} failures"
            + (f"  {b.seconds:.3f}s" if b.seconds is not None else "")
            for b in self.batteries
        ]
        for battery in self.batteries:
            rows.extend(f"  {battery.name}: {detail}" for detail in battery.failures[:DETAIL_LIMIT])
        rows.append(f"seed {self.seed}: {'PASSED' if self.passed else 'FAILED'}")
        return "\n".join(rows) + "\n"


def run_suite(
    seed: int = 42,
    only: Sequence[str] | None = None,
    config: LabConfig = DEFAULT_CONFIG,
    timing: bool = False,
) -> SuiteReport:
    """Run the selected batteries (all by default) in their fixed order."""
    selected = [name for name in BATTERIES if only is None or name in only]
    unknown = sorted(set(only or ()) - set(BATTERIES))
    if unknown:
        raise ValueError(f"unknown batteries: {', '.join(unknown)}")
    results = []
    for name in selected:
        LOGGER.info(f"running battery '{name}' with seed {seed}", type="fixlab", subtype="suite")
        started = time.perf_counter()
        battery = BATTERIES[name](Random(f"{seed}/{name}"), config)
        if timing:
            battery.seconds = time.perf_counter() - started
        if battery.failures:
            log_warning(
                LOGGER,
                f"Battery '{name}' had {len(battery.failures)} failures",
                "verification_failed",
                location=None,
            )
        results.append(battery)
    return SuiteReport(seed, results)
