"""Lab configuration: size caps and default budgets, loaded from TOML."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

import tomli
import tomli_w

from fixpoint_lab.logging import get_logger, log_warning

LOGGER = get_logger(__name__)

CONFIG_FILE_NAME = "fixlab.toml"
"""Dedicated configuration file, holding a ``[fixlab]`` table."""

PYPROJECT_TABLE = ("tool", "fixlab")
"""Location of the configuration table inside ``pyproject.toml``."""


@dataclass(frozen=True)
class LabConfig:
    """Caps and budgets shared by all modules."""

    powerset_cap: int = 10
    """Largest universe accepted by ``make_powerset``."""
    lattice_cap: int = 4096
    """Largest element count of any constructed lattice."""
    functor_arity_cap: int = 3
    functor_size_cap: int = 100_000
    """Largest ``|F(X)|`` that ``apply_functor`` materializes."""
    homomorphism_target_bound: int = 5
    homomorphism_source_bound: int = 8
    budget_steps: int = 1000
    """Finite successor steps allowed per iteration run."""
    budget_jumps: int = 16
    """Limit jumps allowed per transfinite run."""
    initial_algebra_budget: int = 10
    record_limit: int = 32
    """Stages recorded in a trace before only limit stages and theta are kept."""
    max_stages: int = 4
    max_actions: int = 4

    def replace(self, **overrides: Any) -> LabConfig:
        """Return a copy with the given non-``None`` overrides applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_toml(self) -> str:
        return tomli_w.dumps({"fixlab": asdict(self)})


DEFAULT_CONFIG = LabConfig()


def config_from_mapping(data: dict[str, Any], source: str = "<mapping>") -> LabConfig:
    """
    Build a LabConfig from a flat mapping, ignoring invalid entries.

    Args:
        data: key/value pairs named like the LabConfig fields
        source: description of the origin, used in warnings

    Returns:
        The default configuration with all valid entries applied
    """
    known = {f.name for f in fields(LabConfig)}
    overrides: dict[str, int] = {}
    for key, value in data.items():
        if key not in known:
            log_warning(
                LOGGER,
                f"Unknown configuration key '{key}' in {source} - ignoring",
                "config_error",
                location=None,
            )
            continue
        # bool is an int subclass, but never a meaningful cap
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            log_warning(
                LOGGER,
                f"Configuration key '{key}' in {source} must be a non-negative integer, got {value!r} - ignoring",
                "config_error",
                location=None,
            )
            continue
        overrides[key] = value
    return DEFAULT_CONFIG.replace(**overrides)


def load_config(path: Path | None = None) -> LabConfig:
    """
    Load the lab configuration from a TOML file.

    Without a path, ``fixlab.toml`` and then ``pyproject.toml`` are looked up in
    the current working directory. A missing file yields the defaults.

    Args:
        path: explicit ``fixlab.toml`` or ``pyproject.toml`` to read

    Returns:
        The resolved configuration
    """
    if path is None:
        for candidate in (Path(CONFIG_FILE_NAME), Path("pyproject.toml")):
            if candidate.exists():
                path = candidate
                break
        else:
            return DEFAULT_CONFIG

    try:
        with open(path, "rb") as f:
            data = tomli.load(f)
    except OSError as e:
        log_warning(
            LOGGER,
            f"Failed to read configuration file '{path}': {e}",
            "config_error",
            location=None,
        )
        return DEFAULT_CONFIG
    except tomli.TOMLDecodeError as e:
        log_warning(
            LOGGER,
            f"Failed to parse configuration file '{path}': {e}",
            "config_error",
            location=None,
        )
        return DEFAULT_CONFIG

    if Path(path).name == "pyproject.toml":
        table = data
        for key in PYPROJECT_TABLE:
            table = table.get(key, {})
    else:
        table = data.get("fixlab", {})

    if not isinstance(table, dict):
        log_warning(
            LOGGER,
            f"Configuration table in '{path}' is not a table - ignoring",
            "config_error",
            location=None,
        )
        return DEFAULT_CONFIG

    LOGGER.info(f"Loaded lab configuration from '{path}'", type="fixlab", subtype="config")
    return config_from_mapping(table, source=str(path))
