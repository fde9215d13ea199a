"""Tests for running scenarios, rendering reports and re-verifying them."""

import copy
import json
from pathlib import Path

import pytest

from fixpoint_lab.config import LabConfig
from fixpoint_lab.errors import ScenarioError
from fixpoint_lab.runner import (
    EXIT_NOT_FIXED,
    EXIT_OK,
    RunOptions,
    enumerate_scenario,
    render_text,
    resolve_budget,
    run,
    verify,
    verify_report,
)
from fixpoint_lab.scenario import load_scenario, scenario_from_dict


@pytest.fixture
def run_corpus(corpus: Path):
    def _inner(name: str, options: RunOptions | None = None):
        return run(load_scenario(corpus / f"{name}.json"), options)

    return _inner


@pytest.mark.parametrize(
    ("name", "theta", "value"),
    [
        ("omega2", "w*2", "w*2"),
        ("powerset-lfp", "1", "{a}"),
        ("chain-gfp", "1", "3"),
        ("chain-fixed-points", "1", "1"),
    ],
)
def test_fixed_verdicts(run_corpus, name: str, theta: str, value: str) -> None:
    report = run_corpus(name)
    assert report.verdict.status == "fixed"
    assert report.verdict.theta == theta
    assert report.result["value"] == value
    assert all(report.verification.values())
    assert report.exit_code == EXIT_OK


def test_omega_two_report(run_corpus) -> None:
    report = run_corpus("omega2")
    assert report.result["limitStages"] == ["w", "w*2"]
    assert report.budget == {"steps": 1000, "jumps": 16}
    assert "theta = w*2" in render_text(report)


def test_all_fixed_points(run_corpus) -> None:
    result = run_corpus("chain-fixed-points").result
    assert result["fixedPoints"] == ["1", "3"]
    assert result["lfp"] == "1"
    assert result["gfp"] == "3"


def test_grounded_chain(run_corpus) -> None:
    report = run_corpus("grounded-chain")
    assert report.verdict.theta == "4"
    assert report.result["valuation"] == {
        "S1": "T",
        "S2": "T",
        "S3": "T",
        "N": "F",
        "L": "U",
        "D": "T",
    }
    assert report.result["classification"]["L"] == "ungrounded"
    assert report.result["classification"]["N"] == "groundedFalse"
    assert report.verification == {
        "fixedPoint": True,
        "stageWithinSentences": True,
        "minimal": True,
    }


def test_liar_text(run_corpus) -> None:
    report = run_corpus("liar")
    assert report.verdict.theta == "0"
    assert "L: ungrounded" in render_text(report)


def test_initial_algebras(run_corpus) -> None:
    colors = run_corpus("colors")
    assert colors.verdict.theta == "1"
    assert colors.verification == {"lambek": True, "transordinal": True}

    lists = run_corpus("lists")
    assert lists.verdict.status == "diverged"
    assert lists.result["growth"] == list(range(11))
    assert lists.exit_code == EXIT_NOT_FIXED


def test_correspondence(run_corpus) -> None:
    report = run_corpus("correspondence")
    assert report.verdict.theta == "1"
    assert report.result["gameStates"] == ["{}", "{a}"]
    assert "correspondence: OK" in render_text(report)


def test_games(run_corpus) -> None:
    coordination = run_corpus("coordination")
    assert coordination.verdict.theta == "0"
    assert coordination.result["finalOutcome"] == "agree-x"

    counterexample = run_corpus("counterexample")
    assert counterexample.result["outcomes"] == ["p", "s", "r"]
    assert counterexample.verdict.theta == "2"
    assumptions = counterexample.result["assumptions"]
    assert not assumptions["continuityOfPayoffs"]
    assert not assumptions["monotoneBestResponse"]


def test_game_failure_exit_code() -> None:
    stage = {
        "actionsT": ["low", "high"],
        "actionsM": ["a", "b"],
        "payoffT": [[0, 0], [1, 1]],
        "payoffM": [[0, 0], [1, 1]],
        "outcomes": [["lost", "lost"], ["won", "won"]],
    }
    start = {
        "actionsT": ["go"],
        "actionsM": ["go"],
        "payoffT": [[1]],
        "payoffM": [[1]],
        "outcomes": [["start"]],
    }
    scenario = scenario_from_dict(
        {
            "kind": "reflective-game",
            "stages": [start, stage],
            "promotion": [{"start": [["low", "a"], ["low", "b"]]}],
            "win": ["won"],
        }
    )
    report = run(scenario)
    assert report.verdict.status == "failure"
    assert report.verdict.reason == "stage 1: no admissible equilibrium"
    assert report.exit_code == EXIT_NOT_FIXED


def test_enumeration(corpus: Path) -> None:
    report = enumerate_scenario(load_scenario(corpus / "counterexample.json"))
    assert [eq["finalOutcome"] for eq in report.equilibria] == ["r", "r2"]
    assert not report.agree
    assert report.exit_code == EXIT_OK
    aligned = enumerate_scenario(load_scenario(corpus / "correspondence.json"))
    assert len(aligned.equilibria) == 1
    with pytest.raises(ScenarioError):
        enumerate_scenario(load_scenario(corpus / "liar.json"))


def test_budget_precedence(corpus: Path) -> None:
    lists = load_scenario(corpus / "lists.json")
    config = LabConfig(budget_steps=7, initial_algebra_budget=4)
    assert resolve_budget(lists, RunOptions(), config).max_finite_steps == 10
    assert resolve_budget(lists, RunOptions(budget_steps=3), config).max_finite_steps == 3
    liar = load_scenario(corpus / "liar.json")
    assert resolve_budget(liar, RunOptions(), config).max_finite_steps == 7
    colors = load_scenario(corpus / "colors.json")
    assert resolve_budget(colors, RunOptions(), config).max_finite_steps == 4


def test_budget_exhaustion(run_corpus) -> None:
    report = run_corpus("omega2", RunOptions(budget_jumps=1))
    assert report.verdict.status == "diverged"
    assert report.exit_code == EXIT_NOT_FIXED


@pytest.mark.parametrize("name", ["omega2", "grounded-chain", "counterexample", "lists"])
def test_reports_are_deterministic(run_corpus, name: str) -> None:
    assert run_corpus(name).to_json() == run_corpus(name).to_json()


@pytest.mark.parametrize("name", ["omega2", "chain-gfp", "grounded-chain", "colors", "counterexample"])
def test_verify_untouched_report(run_corpus, name: str) -> None:
    document = run_corpus(name).to_dict()
    assert verify_report(document) == []
    assert verify(document) == EXIT_OK


def test_verify_detects_edits(run_corpus) -> None:
    document = run_corpus("omega2").to_dict()

    edited = copy.deepcopy(document)
    edited["verdict"]["theta"] = "w*3"
    assert "verdict" in verify_report(edited)
    assert verify(edited) == EXIT_NOT_FIXED

    edited = copy.deepcopy(document)
    edited["result"]["value"] = "w"
    assert verify_report(edited) == ["result"]

    edited = copy.deepcopy(document)
    edited["trace"]["stages"][1]["value"] = "7"
    assert "trace" in verify_report(edited)


def test_verify_scenario_document(corpus: Path) -> None:
    liar = json.loads((corpus / "liar.json").read_text(encoding="utf-8"))
    assert verify(liar) == EXIT_OK
    naturals = {
        "kind": "initial-algebra",
        "summands": [{"labels": ["zero"], "arity": 0}, {"labels": ["succ"], "arity": 1}],
    }
    assert verify(naturals) == EXIT_NOT_FIXED
