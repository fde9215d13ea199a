"""Sphinx builder and hook writing scenario results to a TOML file."""

from difflib import unified_diff
from pathlib import Path
from typing import Any

from sphinx.application import Sphinx
from sphinx.builders import Builder
from sphinx.config import Config
import tomli_w

from fixpoint_lab.config import config_from_mapping
from fixpoint_lab.errors import FixlabError
from fixpoint_lab.logging import get_logger, log_warning
from fixpoint_lab.runner import RunOptions, RunReport, run
from fixpoint_lab.scenario import load_scenario
from fixpoint_lab.utils import (
    expand_scenario_patterns,
    relativize_path,
    resolve_lab_path,
)

LOGGER = get_logger(__name__)

HEADER = (
    "# This file is auto-generated by fixpoint-lab.\n"
    "# It records the verdict of every configured scenario.\n"
    "# Do not manually modify it - changes will be overwritten.\n"
    "\n"
)

MAX_DIFF_LINES = 50


def results_table(report: RunReport, source: str) -> dict[str, Any]:
    """TOML table of one run: verdict, theta, verification flags and source."""
    table: dict[str, Any] = {
        "kind": report.scenario.kind,
        "verdict": report.verdict.status,
        "source": source,
    }
    if report.verdict.theta is not None:
        table["theta"] = report.verdict.theta
    if report.verdict.reason is not None:
        table["reason"] = report.verdict.reason
    table["verification"] = dict(sorted(report.verification.items()))
    return dict(sorted(table.items()))


def write_results_file(
    app: Sphinx, config: Config, outdir: Path | None = None, srcdir: Path | None = None
) -> None:
    """
    Run the configured scenarios and write their results file.

    Args:
        app: Sphinx application instance
        config: Sphinx config object
        outdir: Optional output directory (defaults to app.outdir)
        srcdir: Optional source directory (defaults to app.srcdir)
    """
    outpath = resolve_lab_path(config.fixlab_outpath, app, outdir=outdir, srcdir=srcdir)
    lab_config = config_from_mapping(dict(config.fixlab_config), "fixlab_config")

    results: dict[str, dict[str, Any]] = {}
    for path in expand_scenario_patterns(list(config.fixlab_scenarios), app, srcdir):
        try:
            scenario = load_scenario(path)
            report = run(scenario, RunOptions(), lab_config)
        except (FixlabError, OSError) as e:
            log_warning(
                LOGGER,
                f"Skipping scenario: {e}",
                "scenario_error",
                location=str(path),
            )
            continue
        if scenario.id in results:
            log_warning(
                LOGGER,
                f"Duplicate scenario id '{scenario.id}' - keeping the first",
                "scenario_error",
                location=str(path),
            )
            continue
        results[scenario.id] = results_table(report, relativize_path(path, outpath))
        LOGGER.info(
            f"Scenario '{scenario.id}': {report.verdict.status}",
            type="fixlab",
            subtype="scenario",
        )

    new_content = tomli_w.dumps({"scenarios": dict(sorted(results.items()))})
    if config.fixlab_add_header:
        new_content = HEADER + new_content

    if not outpath.exists():
        outpath.parent.mkdir(parents=True, exist_ok=True)
        outpath.write_text(new_content, encoding="utf-8")
        LOGGER.info(f"Scenario results written to '{outpath}'")
        return

    existing_content = outpath.read_text("utf-8")
    if existing_content == new_content:
        LOGGER.info(
            f"Scenario results unchanged - not rewriting '{outpath}'", type="fixlab"
        )
        return

    if config.fixlab_warn_on_diff:
        diff_lines = list(
            unified_diff(
                existing_content.splitlines(keepends=True),
                new_content.splitlines(keepends=True),
                fromfile="existing",
                tofile="new",
            )
        )
        diff_preview = "".join(diff_lines[:MAX_DIFF_LINES])
        if len(diff_lines) > MAX_DIFF_LINES:
            diff_preview += f"\n... ({len(diff_lines) - MAX_DIFF_LINES} more lines)"
        log_warning(
            LOGGER,
            f"Content of existing file '{outpath}' differs from new results:\n{diff_preview}",
            "report_diff",
            location=None,
        )

    if config.fixlab_overwrite:
        outpath.write_text(new_content, encoding="utf-8")
        LOGGER.info(f"Updated scenario results written to '{outpath}'")
    else:
        LOGGER.info(
            f"Scenario results changed but not overwriting '{outpath}' (fixlab_overwrite=False)",
            type="fixlab",
        )


class FixlabBuilder(Builder):
    """
    No-op builder that only writes the scenario results file.

    The results are written by the ``env-before-read-docs`` hook; the builder
    exists so that ``sphinx-build -b fixlab`` does nothing else.
    """

    name = "fixlab"
    format = "toml"
    epilog = "The scenario results file was written"

    def init(self) -> None:
        pass

    def get_outdated_docs(self) -> str:
        return "writing only the scenario results"

    def get_target_uri(self, docname: str, typ: str | None = None) -> str:
        return ""

    def prepare_writing(self, docnames: set[str]) -> None:
        pass

    def write_doc(self, docname: str, doctree: Any) -> None:
        pass

    def finish(self) -> None:
        pass
