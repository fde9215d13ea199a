"""Tests for the ``fixlab`` command line tool."""

import json
from pathlib import Path

import pytest

from fixpoint_lab import __version__
from fixpoint_lab.cli import main


def test_version(capsys) -> None:
    with pytest.raises(SystemExit) as exc_info:
        main(["--version"])
    assert exc_info.value.code == 0
    assert __version__ in capsys.readouterr().out


@pytest.mark.parametrize(
    ("name", "code", "expected"),
    [
        ("omega2", 0, "theta = w*2"),
        ("grounded-chain", 0, "L: ungrounded"),
        ("correspondence", 0, "correspondence: OK"),
        ("counterexample", 0, "stage 2: (x, x) -> r"),
        ("lists", 2, "verdict: diverged"),
    ],
)
def test_run_text(corpus: Path, capsys, name: str, code: int, expected: str) -> None:
    assert main(["run", str(corpus / f"{name}.json")]) == code
    assert expected in capsys.readouterr().out


def test_run_json_is_deterministic(corpus: Path, capsys) -> None:
    path = str(corpus / "grounded-chain.json")
    main(["run", path, "--json"])
    first = capsys.readouterr().out
    main(["run", path, "--json"])
    assert capsys.readouterr().out == first
    report = json.loads(first)
    assert report["verdict"] == {"status": "fixed", "theta": "4"}
    assert "timing" not in report


def test_run_budget_flags(corpus: Path, capsys) -> None:
    assert main(["run", str(corpus / "lists.json"), "--json", "--budget-steps", "3"]) == 2
    report = json.loads(capsys.readouterr().out)
    assert report["budget"]["steps"] == 3
    assert report["result"]["growth"] == [0, 1, 2, 3]


def test_run_timing(corpus: Path, capsys) -> None:
    main(["run", str(corpus / "liar.json"), "--json", "--timing"])
    assert json.loads(capsys.readouterr().out)["timing"]["seconds"] >= 0


def test_errors_exit_one(tmp_path: Path, write_scenario, capsys) -> None:
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    assert "error:" in capsys.readouterr().err
    path = write_scenario({"kind": "bogus"})
    assert main(["run", str(path)]) == 1
    assert "error: scenario: $.kind" in capsys.readouterr().err


def test_verify_round_trip(corpus: Path, tmp_path: Path, capsys) -> None:
    main(["run", str(corpus / "omega2.json"), "--json"])
    report = json.loads(capsys.readouterr().out)
    path = tmp_path / "report.json"

    path.write_text(json.dumps(report), encoding="utf-8")
    assert main(["verify", str(path)]) == 0
    assert "verified" in capsys.readouterr().out

    report["verdict"]["theta"] = "w*3"
    path.write_text(json.dumps(report), encoding="utf-8")
    assert main(["verify", str(path)]) == 2
    assert "MISMATCH" in capsys.readouterr().out

    path.write_text("{", encoding="utf-8")
    assert main(["verify", str(path)]) == 1


def test_verify_scenario(corpus: Path) -> None:
    assert main(["verify", str(corpus / "liar.json")]) == 0
    assert main(["verify", str(corpus / "lists.json")]) == 2


def test_enumerate(corpus: Path, capsys) -> None:
    assert main(["enumerate", str(corpus / "counterexample.json")]) == 0
    out = capsys.readouterr().out
    assert "2 reflective equilibria" in out
    assert "outcomes agree: NO" in out
    assert "witness:" in out

    assert main(["enumerate", str(corpus / "counterexample.json"), "--max-stages", "2"]) == 1
    assert main(["enumerate", str(corpus / "omega2.json")]) == 1


def test_enumerate_exhaustive(corpus: Path, capsys) -> None:
    assert main(["enumerate", str(corpus / "correspondence.json")]) == 0
    out = capsys.readouterr().out
    assert "1 reflective equilibria" in out
    assert "outcomes agree: yes" in out

    assert main(["enumerate", str(corpus / "correspondence.json"), "--exhaustive"]) == 0
    out = capsys.readouterr().out
    assert "4 reflective equilibria" in out
    assert "#2: {} -> {a}" in out
    assert "outcomes agree: NO" in out


def test_config(tmp_path: Path, monkeypatch, capsys) -> None:
    monkeypatch.chdir(tmp_path)
    assert main(["config"]) == 0
    out = capsys.readouterr().out
    assert "[fixlab]" in out
    assert "budget_steps = 1000" in out

    (tmp_path / "fixlab.toml").write_text("[fixlab]\nbudget_steps = 5\nbogus = 1\n", encoding="utf-8")
    assert main(["config"]) == 0
    captured = capsys.readouterr()
    assert "budget_steps = 5" in captured.out
    assert "Unknown configuration key 'bogus'" in captured.err

    pyproject = tmp_path / "pyproject.toml"
    pyproject.write_text("[tool.fixlab]\nmax_stages = 3\n", encoding="utf-8")
    assert main(["--config", str(pyproject), "config"]) == 0
    assert "max_stages = 3" in capsys.readouterr().out


def test_suite(capsys) -> None:
    assert main(["suite", "--seed", "3", "--only", "ordinal", "kripke", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert [b["name"] for b in report["batteries"]] == ["ordinal", "kripke"]
    assert report["passed"]
