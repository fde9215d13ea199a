"""
Reflective semantic games: staged two-player games linked by promotion rules.

Player T (the interpreter) and player M (the meaning) play one finite game per
stage. The outcome label of stage ``a`` selects, through the promotion rule,
which profiles are admissible at stage ``a+1``. A reflective equilibrium is a
sequence of per-stage pure Nash equilibria that respects promotion and whose
final label satisfies the win condition.

Profiles are pairs of action indices ``(s, t)``; the canonical order of
profiles is lexicographic over those indices.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product

from fixpoint_lab.config import DEFAULT_CONFIG, LabConfig
from fixpoint_lab.errors import BoundsExceededError, GameSpecError
from fixpoint_lab.lattice import (
    FiniteLattice,
    MonotoneOp,
    fixed_points,
    kleene_chain,
)
from fixpoint_lab.logging import get_logger, log_warning

LOGGER = get_logger(__name__)

Profile = tuple[int, int]


@dataclass(frozen=True)
class StageGame:
    actions_t: tuple[str, ...]
    actions_m: tuple[str, ...]
    payoff_t: tuple[tuple[Fraction, ...], ...]
    payoff_m: tuple[tuple[Fraction, ...], ...]
    outcomes: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if not self.actions_t or not self.actions_m:
            raise GameSpecError("both players need at least one action")
        shape = (len(self.actions_t), len(self.actions_m))
        for name, table in (
            ("payoffT", self.payoff_t),
            ("payoffM", self.payoff_m),
            ("outcomes", self.outcomes),
        ):
            if len(table) != shape[0] or any(len(row) != shape[1] for row in table):
                raise GameSpecError(f"{name} must be a {shape[0]}x{shape[1]} table")

    @property
    def profiles(self) -> list[Profile]:
        return list(product(range(len(self.actions_t)), range(len(self.actions_m))))

    def payoff(self, profile: Profile) -> tuple[Fraction, Fraction]:
        s, t = profile
        return self.payoff_t[s][t], self.payoff_m[s][t]

    def label(self, profile: Profile) -> str:
        s, t = profile
        return self.outcomes[s][t]

    @property
    def labels(self) -> set[str]:
        return {label for row in self.outcomes for label in row}

    @property
    def common_payoff(self) -> bool:
        return self.payoff_t == self.payoff_m

    def render(self, profile: Profile) -> tuple[str, str]:
        s, t = profile
        return self.actions_t[s], self.actions_m[t]


@dataclass(frozen=True)
class ReflectiveGameSpec:
    """
    Stage games ``G_0..G_k`` with promotion rules and a win condition.

    ``promotion[a]`` maps every outcome label of ``G_a`` to the admissible
    profiles of ``G_{a+1}``. The win condition is the set of final labels
    that count as a win.
    """

    stages: tuple[StageGame, ...]
    promotion: tuple[Mapping[str, frozenset[Profile]], ...]
    win: frozenset[str]

    def __post_init__(self) -> None:
        if not self.stages:
            raise GameSpecError("a reflective game needs at least one stage")
        if len(self.promotion) != len(self.stages) - 1:
            raise GameSpecError(
                f"{len(self.stages)} stages need {len(self.stages) - 1} promotion rules, "
                f"got {len(self.promotion)}"
            )
        for alpha, rule in enumerate(self.promotion):
            following = set(self.stages[alpha + 1].profiles)
            for label in sorted(self.stages[alpha].labels):
                admissible = rule.get(label)
                if not admissible:
                    raise GameSpecError(
                        f"outcome {label!r} of stage {alpha} has no admissible profiles "
                        f"in stage {alpha + 1}"
                    )
                if not admissible <= following:
                    raise GameSpecError(
                        f"promotion of {label!r} at stage {alpha} names profiles outside "
                        f"stage {alpha + 1}"
                    )

    @property
    def horizon(self) -> int:
        return len(self.stages)

    def admissible(self, alpha: int, previous: str | None) -> list[Profile]:
        """Admissible profiles of stage ``alpha`` after the label ``previous``."""
        if alpha == 0:
            return self.stages[0].profiles
        return sorted(self.promotion[alpha - 1][previous])


@dataclass(frozen=True)
class ReflectiveEquilibrium:
    profiles: tuple[Profile, ...]
    outcomes: tuple[str, ...]
    coherent: bool = False

    @property
    def final_outcome(self) -> str:
        return self.outcomes[-1]


@dataclass(frozen=True)
class Failure:
    stage: int
    reason: str


def stage_equilibria(game: StageGame, admissible: Iterable[Profile]) -> list[Profile]:
    """
    Pure Nash equilibria of ``game`` among the admissible profiles.

    Deviations are checked against the full action sets, so a profile that
    is admissible but not an equilibrium of the whole stage game is excluded.
    """
    candidates = sorted(set(admissible))
    if not candidates:
        raise GameSpecError("the admissible profile set is empty")
    result = []
    for s, t in candidates:
        current_t, current_m = game.payoff((s, t))
        if any(game.payoff_t[other][t] > current_t for other in range(len(game.actions_t))):
            continue
        if any(game.payoff_m[s][other] > current_m for other in range(len(game.actions_m))):
            continue
        result.append((s, t))
    return result


def _dominates(a: tuple[Fraction, Fraction], b: tuple[Fraction, Fraction]) -> bool:
    return a[0] >= b[0] and a[1] >= b[1] and a != b


def preferred_equilibria(game: StageGame, admissible: Iterable[Profile]) -> list[Profile]:
    """Stage equilibria not payoff-dominated by another stage equilibrium."""
    equilibria = stage_equilibria(game, admissible)
    payoffs = {p: game.payoff(p) for p in equilibria}
    return [
        p
        for p in equilibria
        if not any(_dominates(payoffs[q], payoffs[p]) for q in equilibria if q != p)
    ]


def verify_equilibrium(spec: ReflectiveGameSpec, equilibrium: ReflectiveEquilibrium) -> bool:
    """
    Re-check a reflective equilibrium from scratch.

    Every stage profile must be a Nash equilibrium of its unrestricted stage
    game, carry the recorded label and be admissible after the previous
    label; the final label must win.
    """
    if len(equilibrium.profiles) != spec.horizon or len(equilibrium.outcomes) != spec.horizon:
        LOGGER.debug("equilibrium length does not match the number of stages")
        return False
    previous = None
    for alpha, (game, profile, label) in enumerate(
        zip(spec.stages, equilibrium.profiles, equilibrium.outcomes, strict=True)
    ):
        if profile not in game.profiles or game.label(profile) != label:
            LOGGER.debug(f"stage {alpha}: profile {profile} does not carry label {label!r}")
            return False
        if profile not in spec.admissible(alpha, previous):
            LOGGER.debug(f"stage {alpha}: profile {profile} is not admissible after {previous!r}")
            return False
        if not stage_equilibria(game, [profile]):
            LOGGER.debug(f"stage {alpha}: profile {profile} is not a Nash equilibrium")
            return False
        previous = label
    return equilibrium.final_outcome in spec.win


def stitch_equilibrium(spec: ReflectiveGameSpec) -> ReflectiveEquilibrium | Failure:
    """
    Build a reflective equilibrium stage by stage.

    Stage 0 takes the first preferred equilibrium in canonical order. Later
    stages choose among the preferred equilibria admissible after the
    previous outcome, keeping the previous label when an equilibrium allows
    it and taking the canonical first one otherwise.

    Returns:
        A coherent equilibrium, or the first stage without an admissible
        equilibrium or with a losing final label
    """
    profiles: list[Profile] = []
    outcomes: list[str] = []
    for alpha, game in enumerate(spec.stages):
        previous = outcomes[-1] if outcomes else None
        candidates = preferred_equilibria(game, spec.admissible(alpha, previous))
        if not candidates:
            LOGGER.debug(f"stage {alpha}: no admissible equilibrium after {previous!r}")
            return Failure(alpha, "no admissible equilibrium")
        unchanged = [p for p in candidates if game.label(p) == previous]
        choice = unchanged[0] if unchanged else candidates[0]
        LOGGER.debug(f"stage {alpha}: {game.render(choice)} -> {game.label(choice)}")
        profiles.append(choice)
        outcomes.append(game.label(choice))

    equilibrium = ReflectiveEquilibrium(tuple(profiles), tuple(outcomes))
    if equilibrium.final_outcome not in spec.win:
        return Failure(spec.horizon - 1, f"final outcome {equilibrium.final_outcome!r} does not win")
    if not verify_equilibrium(spec, equilibrium):
        return Failure(spec.horizon - 1, "re-verification failed")
    return replace(equilibrium, coherent=True)


def check_bounds(spec: ReflectiveGameSpec, config: LabConfig = DEFAULT_CONFIG) -> None:
    if spec.horizon > config.max_stages:
        raise BoundsExceededError(
            f"{spec.horizon} stages exceed the enumeration bound of {config.max_stages}"
        )
    for alpha, game in enumerate(spec.stages):
        largest = max(len(game.actions_t), len(game.actions_m))
        if largest > config.max_actions:
            raise BoundsExceededError(
                f"stage {alpha} has {largest} actions, the enumeration bound is "
                f"{config.max_actions}"
            )


def enumerate_reflective_equilibria(
    spec: ReflectiveGameSpec, config: LabConfig = DEFAULT_CONFIG, *, exhaustive: bool = False
) -> list[ReflectiveEquilibrium]:
    """
    All reflective equilibria reachable through preferred stage equilibria.

    The search branches over every preferred equilibrium admissible after the
    previous outcome and keeps the complete paths whose final label wins.
    With ``exhaustive`` it branches over every admissible stage equilibrium,
    payoff-dominated ones included. Results are in canonical order of their
    profile sequences.

    Raises:
        BoundsExceededError: if the game has more stages or actions than the
            configured enumeration bounds
    """
    check_bounds(spec, config)
    found: list[ReflectiveEquilibrium] = []
    choose = stage_equilibria if exhaustive else preferred_equilibria

    def extend(profiles: tuple[Profile, ...], outcomes: tuple[str, ...]) -> None:
        alpha = len(profiles)
        if alpha == spec.horizon:
            if outcomes[-1] in spec.win:
                equilibrium = ReflectiveEquilibrium(profiles, outcomes)
                if verify_equilibrium(spec, equilibrium):
                    found.append(replace(equilibrium, coherent=True))
            return
        game = spec.stages[alpha]
        previous = outcomes[-1] if outcomes else None
        for profile in choose(game, spec.admissible(alpha, previous)):
            extend((*profiles, profile), (*outcomes, game.label(profile)))

    extend((), ())
    LOGGER.debug(f"{len(found)} reflective equilibria found")
    return found


def outcomes_agree(equilibria: Sequence[ReflectiveEquilibrium]) -> bool:
    return len({eq.outcomes for eq in equilibria}) <= 1


def stabilization_stage(equilibrium: ReflectiveEquilibrium) -> int:
    """Least stage from which every outcome label equals the final one."""
    beta = len(equilibrium.outcomes) - 1
    while beta > 0 and equilibrium.outcomes[beta - 1] == equilibrium.final_outcome:
        beta -= 1
    return beta


@dataclass
class AssumptionReport:
    """Sufficient-condition check of the uniqueness hypotheses."""

    continuity_of_payoffs: bool = True
    monotone_best_response: bool = True
    finitary_local: bool = True
    witnesses: list[str] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return self.continuity_of_payoffs and self.monotone_best_response and self.finitary_local


def _best_value(game: StageGame, admissible: Iterable[Profile]) -> Fraction | None:
    equilibria = stage_equilibria(game, admissible)
    if not equilibria:
        return None
    return max(game.payoff(p)[0] for p in equilibria)


def check_assumptions(
    spec: ReflectiveGameSpec, config: LabConfig = DEFAULT_CONFIG
) -> AssumptionReport:
    """
    Sufficient-condition check of the hypotheses behind outcome uniqueness.

    continuity of payoffs
        along every promotion-consistent path of stage equilibria, once a
        winning label occurs every later label wins too
    monotone best responses
        every stage game is common-payoff, the payoff-maximal equilibria of
        every reachable admissible set share one label, and a higher-payoff
        equilibrium never leads to a strictly worse best continuation
    finitary local games
        action sets are finite, which holds for every spec
    """
    check_bounds(spec, config)
    report = AssumptionReport()

    def witness(message: str) -> None:
        if message not in report.witnesses:
            report.witnesses.append(message)

    for alpha, game in enumerate(spec.stages):
        if not game.common_payoff:
            report.monotone_best_response = False
            witness(f"stage {alpha}: payoffs are not common")

    reachable: list[set[tuple[Profile, ...]]] = [set() for _ in spec.stages]

    def walk(alpha: int, previous: str | None, seen_win: bool) -> None:
        if alpha == spec.horizon:
            return
        game = spec.stages[alpha]
        admissible = spec.admissible(alpha, previous)
        reachable[alpha].add(tuple(admissible))
        for profile in stage_equilibria(game, admissible):
            label = game.label(profile)
            if seen_win and label not in spec.win:
                report.continuity_of_payoffs = False
                witness(f"stage {alpha}: label {label!r} follows a winning label")
            walk(alpha + 1, label, seen_win or label in spec.win)

    walk(0, None, False)

    for alpha, game in enumerate(spec.stages):
        for admissible in sorted(reachable[alpha]):
            equilibria = stage_equilibria(game, admissible)
            if not equilibria:
                continue
            best = max(game.payoff(p)[0] for p in equilibria)
            top_labels = {game.label(p) for p in equilibria if game.payoff(p)[0] == best}
            if len(top_labels) > 1:
                report.monotone_best_response = False
                witness(
                    f"stage {alpha}: payoff-maximal equilibria disagree on "
                    f"{sorted(top_labels)}"
                )
            if alpha + 1 == spec.horizon:
                continue
            following = spec.stages[alpha + 1]
            continuation = {
                p: _best_value(following, spec.admissible(alpha + 1, game.label(p)))
                for p in equilibria
            }
            for p, q in product(equilibria, repeat=2):
                if game.payoff(p)[0] <= game.payoff(q)[0]:
                    continue
                better, worse = continuation[p], continuation[q]
                if worse is not None and (better is None or better < worse):
                    report.monotone_best_response = False
                    witness(
                        f"stage {alpha}: continuation of {game.render(p)} is dominated by "
                        f"that of {game.render(q)}"
                    )

    for message in report.witnesses:
        LOGGER.debug(message)
    return report


PROBE, ACCEPT = 0, 1
KEEP, APPLY = 0, 1


def _alignment_stage(lattice: FiniteLattice, op: MonotoneOp, state: int) -> StageGame:
    fixed = op(state) == state
    winning = (ACCEPT, KEEP) if fixed else (PROBE, APPLY)
    payoff = tuple(
        tuple(Fraction(int((s, t) == winning)) for t in (KEEP, APPLY)) for s in (PROBE, ACCEPT)
    )
    outcomes = tuple(
        (lattice.name(state), lattice.name(op(state))) for _ in (PROBE, ACCEPT)
    )
    return StageGame(("probe", "accept"), ("keep", "apply"), payoff, payoff, outcomes)


def alignment_game(
    lattice: FiniteLattice, op: MonotoneOp, horizon: int | None = None
) -> ReflectiveGameSpec:
    """
    The common-payoff game family replaying Kleene iteration of ``op``.

    Stage ``a`` embeds the interpretation state ``M_a`` of the iteration from
    bottom. Both players score 1 when M applies the operator to a state that
    is not yet fixed while T probes, or keeps a fixed state while T accepts.
    The outcome label is the name of the successor state, promotion admits
    every profile of the next stage, and a final label wins when it names a
    fixed point.

    Args:
        lattice: the interpretation lattice
        op: a monotone operator on it
        horizon: number of stages, by default one more than the closure stage

    Raises:
        GameSpecError: if the horizon is shorter than the closure stage
    """
    chain = kleene_chain(lattice, op)
    theta = len(chain) - 1
    if horizon is None:
        horizon = theta + 1
    if horizon < max(1, theta):
        raise GameSpecError(f"horizon {horizon} is shorter than the closure stage {theta}")
    stages = tuple(
        _alignment_stage(lattice, op, chain[min(alpha, theta)]) for alpha in range(horizon)
    )
    promotion = tuple(
        dict.fromkeys(sorted(stages[alpha].labels), frozenset(stages[alpha + 1].profiles))
        for alpha in range(horizon - 1)
    )
    win = frozenset(lattice.name(x) for x in fixed_points(lattice, op))
    return ReflectiveGameSpec(stages, promotion, win)


@dataclass
class CorrespondenceReport:
    ok: bool
    game_states: list[str]
    lattice_states: list[str]
    failure: Failure | None = None


def correspondence_report(lattice: FiniteLattice, op: MonotoneOp) -> CorrespondenceReport:
    """
    Compare the alignment-game equilibrium path with Kleene iteration.

    The game states are ``M_0`` followed by the stitched outcome labels, cut
    at the first repetition; they must equal the iteration sequence from
    bottom and end in a fixed point.
    """
    lattice_states = [lattice.name(x) for x in kleene_chain(lattice, op)]
    spec = alignment_game(lattice, op)
    result = stitch_equilibrium(spec)
    if isinstance(result, Failure):
        return CorrespondenceReport(False, [], lattice_states, result)
    states = [lattice.name(lattice.bottom)]
    for label in result.outcomes:
        if label == states[-1]:
            break
        states.append(label)
    final = lattice.index_of_name(states[-1])
    ok = states == lattice_states and op(final) == final
    return CorrespondenceReport(ok, states, lattice_states)


def correspondence_check(lattice: FiniteLattice, op: MonotoneOp) -> bool:
    report = correspondence_report(lattice, op)
    if not report.ok:
        detail = (
            f"stage {report.failure.stage}: {report.failure.reason}"
            if report.failure
            else f"game path {report.game_states} != iteration {report.lattice_states}"
        )
        log_warning(
            LOGGER,
            f"Equilibrium path does not replay the fixed-point iteration: {detail}",
            "verification_failed",
            location=None,
        )
    return report.ok
