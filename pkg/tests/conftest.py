"""Pytest conftest module containing common test configuration and fixtures."""

import json
from pathlib import Path
from typing import Any

import pytest

pytest_plugins = "sphinx.testing.fixtures"

CORPUS = Path(__file__).parent.parent / "scenarios"


@pytest.fixture
def corpus() -> Path:
    return CORPUS


@pytest.fixture
def write_fixture_files():
    def _inner(tmp: Path, content: dict[str, Any]) -> None:
        section_file_mapping: dict[str, Path] = {
            "conf": tmp / "conf.py",
            "fixlab": tmp / "fixlab.toml",
            "rst": tmp / "index.rst",
        }
        for section, file_path in section_file_mapping.items():
            if section in content:
                if isinstance(content[section], str):
                    file_path.write_text(content[section], encoding="utf-8")
                else:
                    raise ValueError(
                        f"Unsupported content type for section '{section}': {type(content[section])}"
                    )
        for name, scenario in content.get("scenarios", {}).items():
            target = tmp / "scenarios" / f"{name}.json"
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(json.dumps(scenario), encoding="utf-8")

    return _inner


@pytest.fixture
def write_scenario(tmp_path: Path):
    def _inner(data: dict[str, Any], name: str = "scenario") -> Path:
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _inner
