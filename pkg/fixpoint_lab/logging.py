from __future__ import annotations

import logging as std_logging
import sys
from typing import Literal

from docutils.nodes import Node
from sphinx import version_info
from sphinx.util import logging
from sphinx.util.logging import NAMESPACE, SphinxLoggerAdapter


def get_logger(name: str) -> SphinxLoggerAdapter:
    return logging.getLogger(name)


WarningSubTypes = Literal[
    "budget_exhausted",
    "config_error",
    "hypothesis_violation",
    "potential_divergence",
    "report_diff",
    "scenario_error",
    "verification_failed",
]


def log_warning(
    logger: SphinxLoggerAdapter,
    message: str,
    subtype: WarningSubTypes,
    /,
    location: str | tuple[str | None, int | None] | Node | None,
    *,
    color: str | None = None,
    once: bool = False,
    type: str = "fixpoint_lab",
) -> None:
    # Since sphinx in v7.3, sphinx will show warning types if `show_warning_types=True` is set,
    # and in v8.0 this was made the default.
    if version_info < (8,):
        if subtype:
            message += f" [{type}.{subtype}]"
        else:
            message += f" [{type}]"

    logger.warning(
        message,
        type=type,
        subtype=subtype,
        location=location,
        color=color,
        once=once,
    )


class _StderrHandler(std_logging.StreamHandler):
    """Stream handler bound to whatever ``sys.stderr`` is at emit time."""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value) -> None:
        pass


def configure_cli_logging(verbosity: int) -> None:
    """
    Route package log records to stderr when running outside of Sphinx.

    Sphinx installs its own handlers during a build; the command line tool has
    no application object, so a stream handler is attached to the package
    namespace instead.

    Args:
        verbosity: 0 for warnings only, 1 for info, 2 or more for debug
    """
    level = {0: std_logging.WARNING, 1: std_logging.INFO}.get(verbosity, std_logging.DEBUG)
    package_logger = std_logging.getLogger(f"{NAMESPACE}.fixpoint_lab")
    package_logger.setLevel(level)
    if not any(isinstance(handler, _StderrHandler) for handler in package_logger.handlers):
        handler = _StderrHandler()
        handler.setFormatter(std_logging.Formatter("%(levelname)s: %(message)s"))
        package_logger.addHandler(handler)
