"""Transordinal fixed-point laboratory, usable as CLI and Sphinx extension."""

__version__ = "0.1.0"


def setup(app):
    from fixpoint_lab.main import setup as ext_setup

    return ext_setup(app)
