from collections.abc import Callable
import os
from pathlib import Path
import textwrap
from typing import Any

import pytest
from sphinx.testing.util import SphinxTestApp
from sphinx.util.console import strip_colors
import tomli

from fixpoint_lab.builder import HEADER

LIAR = {"kind": "kripke", "sentences": {"L": {"not": {"tr": "L"}}}}
TRUTH_TELLER = {"kind": "kripke", "sentences": {"L": {"tr": "L"}}}
CHAIN = {
    "kind": "lattice-lfp",
    "lattice": {"chain": 3},
    "op": {"0": "1", "1": "2", "2": "2"},
}
GROUNDED = {
    "kind": "kripke",
    "sentences": {"S1": {"atom": True}, "S2": {"tr": "S1"}, "S3": {"tr": "S2"}},
}
INDEX_RST = textwrap.dedent(
    """
    Headline
    ========
    """
)


def conf(**values: Any) -> str:
    lines = ['extensions = ["fixpoint_lab"]', 'fixlab_scenarios = ["${srcdir}/scenarios/*.json"]']
    lines.extend(f"{key} = {value!r}" for key, value in values.items())
    return "\n".join(lines) + "\n"


def get_warnings(app: SphinxTestApp) -> list[str]:
    return (
        strip_colors(app._warning.getvalue())
        .replace(str(app.srcdir) + os.path.sep, "<srcdir>/")
        .replace("\\", "/")
        .splitlines()
    )


def read_results(app: SphinxTestApp) -> dict[str, Any]:
    return tomli.loads(Path(app.builder.outdir, "fixlab-results.toml").read_text("utf8"))


def test_basic(
    tmp_path: Path,
    make_app: Callable[..., SphinxTestApp],
    write_fixture_files: Callable[[Path, dict[str, Any]], None],
) -> None:
    write_fixture_files(
        tmp_path,
        {
            "conf": conf(fixlab_add_header=False),
            "rst": INDEX_RST,
            "scenarios": {"liar": LIAR, "chain": CHAIN},
        },
    )

    app: SphinxTestApp = make_app(srcdir=tmp_path, freshenv=True)
    app.build()

    assert app.statuscode == 0
    assert not get_warnings(app)
    results = read_results(app)["scenarios"]
    assert list(results) == ["chain", "liar"]
    liar = results["liar"]
    assert liar["kind"] == "kripke"
    assert liar["verdict"] == "fixed"
    assert liar["theta"] == "0"
    assert liar["source"].endswith("scenarios/liar.json")
    assert liar["verification"] == {"fixedPoint": True, "minimal": True, "stageWithinSentences": True}
    assert results["chain"]["theta"] == "2"
    app.cleanup()


def test_header(
    tmp_path: Path,
    make_app: Callable[..., SphinxTestApp],
    write_fixture_files: Callable[[Path, dict[str, Any]], None],
) -> None:
    write_fixture_files(
        tmp_path, {"conf": conf(), "rst": INDEX_RST, "scenarios": {"liar": LIAR}}
    )
    app: SphinxTestApp = make_app(srcdir=tmp_path, freshenv=True)
    app.build()
    content = Path(app.builder.outdir, "fixlab-results.toml").read_text("utf8")
    assert content.startswith(HEADER)
    app.cleanup()


def test_broken_scenario_is_skipped(
    tmp_path: Path,
    make_app: Callable[..., SphinxTestApp],
    write_fixture_files: Callable[[Path, dict[str, Any]], None],
) -> None:
    write_fixture_files(
        tmp_path,
        {
            "conf": conf(fixlab_add_header=False),
            "rst": INDEX_RST,
            "scenarios": {"liar": LIAR, "broken": {"kind": "bogus"}},
        },
    )
    app: SphinxTestApp = make_app(srcdir=tmp_path, freshenv=True)
    app.build()

    assert app.statuscode == 0
    warnings = get_warnings(app)
    assert len(warnings) == 1
    assert "<srcdir>/scenarios/broken.json" in warnings[0]
    assert "Skipping scenario: $.kind" in warnings[0]
    assert list(read_results(app)["scenarios"]) == ["liar"]
    app.cleanup()


def test_lab_config(
    tmp_path: Path,
    make_app: Callable[..., SphinxTestApp],
    write_fixture_files: Callable[[Path, dict[str, Any]], None],
) -> None:
    write_fixture_files(
        tmp_path,
        {
            "conf": conf(fixlab_add_header=False, fixlab_config={"budget_steps": 2, "bogus": 1}),
            "rst": INDEX_RST,
            "scenarios": {"grounded": GROUNDED},
        },
    )
    app: SphinxTestApp = make_app(srcdir=tmp_path, freshenv=True)
    app.build()

    warnings = get_warnings(app)
    assert any("Unknown configuration key 'bogus' in fixlab_config" in w for w in warnings)
    grounded = read_results(app)["scenarios"]["grounded"]
    assert grounded["verdict"] == "diverged"
    assert grounded["reason"] == "finite-step budget exhausted"
    assert "theta" not in grounded
    app.cleanup()


@pytest.mark.parametrize(
    ("overwrite", "updated"),
    [
        (False, False),
        (True, True),
    ],
)
def test_changed_results(
    tmp_path: Path,
    make_app: Callable[..., SphinxTestApp],
    write_fixture_files: Callable[[Path, dict[str, Any]], None],
    overwrite: bool,
    updated: bool,
) -> None:
    write_fixture_files(
        tmp_path,
        {
            "conf": conf(fixlab_add_header=False, fixlab_overwrite=overwrite),
            "rst": INDEX_RST,
            "scenarios": {"liar": LIAR},
        },
    )
    app: SphinxTestApp = make_app(srcdir=tmp_path, freshenv=True)
    app.build()
    assert not get_warnings(app)
    app.cleanup()

    # the same build again leaves the file alone
    app_same: SphinxTestApp = make_app(srcdir=tmp_path, freshenv=True)
    app_same.build()
    assert not get_warnings(app_same)
    app_same.cleanup()

    write_fixture_files(tmp_path, {"scenarios": {"liar": TRUTH_TELLER, "chain": CHAIN}})
    app2: SphinxTestApp = make_app(srcdir=tmp_path, freshenv=True)
    app2.build()
    assert app2.statuscode == 0
    warnings = get_warnings(app2)
    assert any("differs from new results" in w for w in warnings)
    assert any(w.startswith("+[scenarios.chain]") for w in warnings)
    assert ("chain" in read_results(app2)["scenarios"]) is updated
    app2.cleanup()


def test_no_warn_on_diff(
    tmp_path: Path,
    make_app: Callable[..., SphinxTestApp],
    write_fixture_files: Callable[[Path, dict[str, Any]], None],
) -> None:
    write_fixture_files(
        tmp_path,
        {
            "conf": conf(fixlab_add_header=False, fixlab_warn_on_diff=False, fixlab_overwrite=True),
            "rst": INDEX_RST,
            "scenarios": {"liar": LIAR},
        },
    )
    app: SphinxTestApp = make_app(srcdir=tmp_path, freshenv=True)
    app.build()
    app.cleanup()

    write_fixture_files(tmp_path, {"scenarios": {"chain": CHAIN}})
    app2: SphinxTestApp = make_app(srcdir=tmp_path, freshenv=True)
    app2.build()
    assert not get_warnings(app2)
    assert list(read_results(app2)["scenarios"]) == ["chain", "liar"]
    app2.cleanup()


def test_fixlab_builder(
    tmp_path: Path,
    make_app: Callable[..., SphinxTestApp],
    write_fixture_files: Callable[[Path, dict[str, Any]], None],
) -> None:
    write_fixture_files(
        tmp_path,
        {
            "conf": conf(fixlab_add_header=False),
            "rst": INDEX_RST,
            "scenarios": {"chain": CHAIN},
        },
    )
    app: SphinxTestApp = make_app("fixlab", srcdir=tmp_path, freshenv=True)
    app.build()
    assert app.statuscode == 0
    assert read_results(app)["scenarios"]["chain"]["verdict"] == "fixed"
    assert not Path(app.builder.outdir, "index.html").exists()
    app.cleanup()
