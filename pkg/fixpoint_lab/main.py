"""Sphinx extension running fixlab scenarios during a documentation build."""

from sphinx.application import Sphinx
from sphinx.environment import BuildEnvironment

from fixpoint_lab import __version__
from fixpoint_lab.builder import FixlabBuilder, write_results_file


def write(app: Sphinx, env: BuildEnvironment, docnames: list[str]) -> None:
    """
    Hook function called on env-before-read-docs event.

    The event fires on every build, also when no document changed.
    """
    write_results_file(app, app.config)


def setup(app: Sphinx):
    """Configure Sphinx extension."""
    app.add_builder(FixlabBuilder)

    app.add_config_value(
        "fixlab_scenarios",
        [],
        "html",
        types=[list],
        description="Glob patterns of scenario JSON files; ${srcdir}, ${outdir} and ${confdir} are expanded.",
    )
    app.add_config_value(
        "fixlab_outpath",
        "${outdir}/fixlab-results.toml",
        "html",
        types=[str],
        description="Where the scenario results file is written.",
    )
    app.add_config_value(
        "fixlab_warn_on_diff",
        True,
        "html",
        types=[bool],
        description="Whether to emit a warning when the existing results file differs.",
    )
    app.add_config_value(
        "fixlab_overwrite",
        False,
        "html",
        types=[bool],
        description="Whether to overwrite an existing results file that differs.",
    )
    app.add_config_value(
        "fixlab_add_header",
        True,
        "html",
        types=[bool],
        description="Whether to add an auto-generated warning header to the results file.",
    )
    app.add_config_value(
        "fixlab_config",
        {},
        "html",
        types=[dict],
        description="Overrides of the lab caps and budgets, keyed like fixlab.toml.",
    )

    # priority 999 = run after other extensions touched the config
    app.connect("env-before-read-docs", write, priority=999)

    return {
        "version": __version__,
        "parallel_read_safe": True,
        "parallel_write_safe": True,
    }
