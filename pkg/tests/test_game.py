"""Tests for reflective game equilibria and the lattice correspondence."""

from fractions import Fraction

from hypothesis import given, settings, strategies as st
import pytest

from fixpoint_lab.config import LabConfig
from fixpoint_lab.errors import BoundsExceededError, GameSpecError
from fixpoint_lab.game import (
    Failure,
    ReflectiveEquilibrium,
    ReflectiveGameSpec,
    StageGame,
    alignment_game,
    check_assumptions,
    correspondence_check,
    correspondence_report,
    enumerate_reflective_equilibria,
    outcomes_agree,
    preferred_equilibria,
    stabilization_stage,
    stage_equilibria,
    stitch_equilibrium,
    verify_equilibrium,
)
from fixpoint_lab.generators import (
    coordination_stage,
    dominated_stage_spec,
    hypothesis_counterexample,
    random_monotone_op,
    random_sublattice,
)
from fixpoint_lab.lattice import MonotoneOp, make_chain, make_powerset


def table(*rows: tuple[int, ...]) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(v) for v in row) for row in rows)


def matching_pennies() -> StageGame:
    return StageGame(
        ("heads", "tails"),
        ("heads", "tails"),
        table((1, -1), (-1, 1)),
        table((-1, 1), (1, -1)),
        (("match", "miss"), ("miss", "match")),
    )


def test_stage_equilibria() -> None:
    assert stage_equilibria(matching_pennies(), matching_pennies().profiles) == []
    game = StageGame(
        ("x", "y"),
        ("x", "y"),
        table((2, 0), (0, 1)),
        table((2, 0), (0, 1)),
        (("agree-x", "miss"), ("miss", "agree-y")),
    )
    assert stage_equilibria(game, game.profiles) == [(0, 0), (1, 1)]
    assert preferred_equilibria(game, game.profiles) == [(0, 0)]
    # deviations are checked against the whole action set
    assert stage_equilibria(game, [(0, 1)]) == []
    with pytest.raises(GameSpecError):
        stage_equilibria(game, [])


def test_tied_equilibria_are_both_preferred() -> None:
    game = coordination_stage(("p", "q"), "z")
    assert preferred_equilibria(game, game.profiles) == [(0, 0), (1, 1)]


def test_stage_game_validation() -> None:
    with pytest.raises(GameSpecError):
        StageGame((), ("x",), (), (), ())
    with pytest.raises(GameSpecError, match="payoffT"):
        StageGame(("x",), ("x", "y"), table((1,)), table((1, 1)), (("a", "b"),))


def test_spec_validation() -> None:
    stage = coordination_stage(("p", "q"), "z")
    with pytest.raises(GameSpecError):
        ReflectiveGameSpec((), (), frozenset())
    with pytest.raises(GameSpecError, match="promotion rules"):
        ReflectiveGameSpec((stage, stage), (), frozenset({"p"}))
    every = frozenset(stage.profiles)
    with pytest.raises(GameSpecError, match="'z'"):
        ReflectiveGameSpec((stage, stage), ({"p": every, "q": every},), frozenset({"p"}))
    with pytest.raises(GameSpecError, match="outside"):
        ReflectiveGameSpec(
            (stage, stage), ({"p": every, "q": every, "z": frozenset({(2, 0)})},), frozenset()
        )


def test_dominated_stage_fails() -> None:
    assert stitch_equilibrium(dominated_stage_spec()) == Failure(1, "no admissible equilibrium")
    assert enumerate_reflective_equilibria(dominated_stage_spec()) == []


def test_losing_final_outcome_fails() -> None:
    stage = coordination_stage(("p", "q"), "z")
    result = stitch_equilibrium(ReflectiveGameSpec((stage,), (), frozenset({"q"})))
    assert isinstance(result, Failure)
    assert result.stage == 0
    assert "does not win" in result.reason


def test_counterexample_stitching() -> None:
    spec = hypothesis_counterexample()
    result = stitch_equilibrium(spec)
    assert isinstance(result, ReflectiveEquilibrium)
    assert result.outcomes == ("p", "s", "r")
    assert result.profiles == ((0, 0), (0, 0), (0, 0))
    assert result.coherent
    assert stabilization_stage(result) == 2
    assert verify_equilibrium(spec, result)


def test_counterexample_enumeration() -> None:
    spec = hypothesis_counterexample()
    found = enumerate_reflective_equilibria(spec)
    assert [eq.outcomes for eq in found] == [("p", "s", "r"), ("q", "t", "r2")]
    assert not outcomes_agree(found)
    assert outcomes_agree(found[:1])
    report = check_assumptions(spec)
    assert not report.continuity_of_payoffs
    assert not report.monotone_best_response
    assert report.finitary_local
    assert not report.all_hold
    assert report.witnesses


def test_verify_rejects_tampering() -> None:
    spec = hypothesis_counterexample()
    good = ReflectiveEquilibrium(((0, 0), (0, 0), (0, 0)), ("p", "s", "r"))
    assert verify_equilibrium(spec, good)
    assert not verify_equilibrium(spec, ReflectiveEquilibrium(good.profiles, ("p", "s", "r2")))
    # (1, 1) in stage 1 is not admissible after p
    assert not verify_equilibrium(
        spec, ReflectiveEquilibrium(((0, 0), (1, 1), (1, 1)), ("p", "t", "r2"))
    )
    assert not verify_equilibrium(spec, ReflectiveEquilibrium(good.profiles[:2], ("p", "s")))


def test_enumeration_bounds() -> None:
    lattice = make_chain(2)
    spec = alignment_game(lattice, MonotoneOp.constant(lattice, 1), horizon=5)
    with pytest.raises(BoundsExceededError):
        enumerate_reflective_equilibria(spec)
    assert len(enumerate_reflective_equilibria(spec, LabConfig(max_stages=5))) == 1


def test_exhaustive_enumeration_keeps_dominated_equilibria() -> None:
    lattice = make_chain(2)
    spec = alignment_game(lattice, MonotoneOp.constant(lattice, 1))
    preferred = enumerate_reflective_equilibria(spec)
    everything = enumerate_reflective_equilibria(spec, exhaustive=True)
    assert [eq.outcomes for eq in everything] == [("1", "1"), ("1", "1"), ("0", "1"), ("0", "1")]
    assert [spec.stages[0].render(eq.profiles[0]) for eq in everything[2:]] == [("accept", "keep")] * 2
    assert all(verify_equilibrium(spec, eq) for eq in everything)
    assert preferred == everything[1:2]
    assert not outcomes_agree(everything)
    assert {eq.final_outcome for eq in everything} == {"1"}

    counterexample = hypothesis_counterexample()
    refined = enumerate_reflective_equilibria(counterexample)
    unrefined = enumerate_reflective_equilibria(counterexample, exhaustive=True)
    assert all(eq in unrefined for eq in refined)


def test_alignment_game_on_chain() -> None:
    lattice = make_chain(2)
    spec = alignment_game(lattice, MonotoneOp.constant(lattice, 1))
    assert spec.horizon == 2
    assert spec.win == frozenset({"1"})
    result = stitch_equilibrium(spec)
    assert isinstance(result, ReflectiveEquilibrium)
    assert spec.stages[0].render(result.profiles[0]) == ("probe", "apply")
    assert spec.stages[1].render(result.profiles[1]) == ("accept", "keep")
    assert result.outcomes == ("1", "1")
    assert check_assumptions(spec).all_hold


def test_alignment_game_horizon() -> None:
    lattice = make_chain(3)
    op = MonotoneOp.from_function(lattice, lambda x: min(x + 1, 2))
    assert alignment_game(lattice, op, horizon=2).horizon == 2
    with pytest.raises(GameSpecError):
        alignment_game(lattice, op, horizon=1)
    bottom_fixed = MonotoneOp.identity(lattice)
    assert alignment_game(lattice, bottom_fixed).horizon == 1
    with pytest.raises(GameSpecError):
        alignment_game(lattice, bottom_fixed, horizon=0)


def test_correspondence_on_powerset() -> None:
    lattice = make_powerset(["a", "b"])
    a = lattice.index(frozenset({"a"}))
    op = MonotoneOp.from_function(lattice, lambda x: lattice.join(x, a))
    report = correspondence_report(lattice, op)
    assert report.ok
    assert report.game_states == ["{}", "{a}"]
    assert report.lattice_states == ["{}", "{a}"]
    assert correspondence_check(lattice, op)


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_correspondence_holds(rng) -> None:
    lattice = random_sublattice(rng, max_atoms=4)
    op = random_monotone_op(rng, lattice)
    assert correspondence_check(lattice, op)
    spec = alignment_game(lattice, op)
    found = enumerate_reflective_equilibria(spec, LabConfig(max_stages=lattice.size + 1))
    assert outcomes_agree(found)
