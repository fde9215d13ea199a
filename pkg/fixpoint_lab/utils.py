from __future__ import annotations

from glob import glob
import os
from pathlib import Path
from string import Template

from sphinx.application import Sphinx


def resolve_lab_path(
    template: str,
    app: Sphinx,
    *,
    outdir: Path | None = None,
    srcdir: Path | None = None,
) -> Path:
    """
    Expand the build directories named in a results path or scenario glob.

    ``${outdir}``, ``${srcdir}`` and ``${confdir}`` are substituted; other
    ``${...}`` names are left as written. A path that is still relative
    afterwards is taken relative to the directory holding ``conf.py``.
    """
    confdir = Path(app.confdir)
    directories = {
        "outdir": Path(app.outdir) if outdir is None else outdir,
        "srcdir": Path(app.srcdir) if srcdir is None else srcdir,
        "confdir": confdir,
    }
    expanded = Path(Template(template).safe_substitute({k: str(v) for k, v in directories.items()}))
    return expanded if expanded.is_absolute() else confdir / expanded


def expand_scenario_patterns(
    patterns: list[str], app: Sphinx, srcdir: Path | None = None
) -> list[Path]:
    """
    Expand glob templates into a sorted, duplicate-free list of files.

    Args:
        patterns: glob patterns, expanded by ``resolve_lab_path``
        app: Sphinx application instance
        srcdir: Optional source directory (defaults to app.srcdir)

    Returns:
        Matching files in path order
    """
    found: set[Path] = set()
    for pattern in patterns:
        resolved = resolve_lab_path(pattern, app, srcdir=srcdir)
        found.update(
            Path(match) for match in glob(str(resolved), recursive=True) if Path(match).is_file()
        )
    return sorted(found)


def relativize_path(absolute_path: Path, base_path: Path) -> str:
    """
    Express ``absolute_path`` relative to the directory of ``base_path``.

    Args:
        absolute_path: The path to convert
        base_path: The output file (or directory) to calculate from

    Returns:
        POSIX relative path, or the absolute POSIX path when the two live on
        different drives
    """
    target = absolute_path.resolve()
    base = base_path.resolve()
    if base.is_file() or (not base.is_dir() and base.suffix):
        base = base.parent
    try:
        return Path(os.path.relpath(target, base)).as_posix()
    except ValueError:
        return target.as_posix()
