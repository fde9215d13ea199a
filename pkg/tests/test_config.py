"""Tests for loading the lab configuration."""

from pathlib import Path

import pytest
import tomli

from fixpoint_lab.config import DEFAULT_CONFIG, LabConfig, config_from_mapping, load_config


def test_defaults() -> None:
    assert DEFAULT_CONFIG.powerset_cap == 10
    assert DEFAULT_CONFIG.lattice_cap == 4096
    assert DEFAULT_CONFIG.budget_steps == 1000
    assert DEFAULT_CONFIG.budget_jumps == 16
    assert DEFAULT_CONFIG.initial_algebra_budget == 10


def test_replace_skips_none() -> None:
    config = DEFAULT_CONFIG.replace(budget_steps=5, budget_jumps=None)
    assert config.budget_steps == 5
    assert config.budget_jumps == DEFAULT_CONFIG.budget_jumps


def test_toml_round_trip() -> None:
    config = LabConfig(max_stages=6)
    assert tomli.loads(config.to_toml())["fixlab"]["max_stages"] == 6
    assert config_from_mapping(tomli.loads(config.to_toml())["fixlab"]) == config


@pytest.mark.parametrize("value", [-1, "3", True, 1.5])
def test_invalid_values_are_ignored(value) -> None:
    assert config_from_mapping({"record_limit": value}) == DEFAULT_CONFIG


def test_missing_file_gives_defaults(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.chdir(tmp_path)
    assert load_config() == DEFAULT_CONFIG
    assert load_config(tmp_path / "absent.toml") == DEFAULT_CONFIG


def test_lookup_order(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.chdir(tmp_path)
    (tmp_path / "pyproject.toml").write_text("[tool.fixlab]\nbudget_steps = 9\n", encoding="utf-8")
    assert load_config().budget_steps == 9
    (tmp_path / "fixlab.toml").write_text("[fixlab]\nbudget_steps = 3\n", encoding="utf-8")
    assert load_config().budget_steps == 3


def test_malformed_files(tmp_path: Path) -> None:
    broken = tmp_path / "fixlab.toml"
    broken.write_text("[fixlab\n", encoding="utf-8")
    assert load_config(broken) == DEFAULT_CONFIG
    broken.write_text("fixlab = 3\n", encoding="utf-8")
    assert load_config(broken) == DEFAULT_CONFIG
