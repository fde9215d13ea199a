"""Exception hierarchy for fixpoint-lab."""

from __future__ import annotations


class FixlabError(Exception):
    """Base class of all errors raised by fixpoint-lab."""

    module = "fixlab"


class OrdinalError(FixlabError, ValueError):
    module = "ordinal"


class OrdinalSyntaxError(OrdinalError):
    """Raised when a textual ordinal does not follow the CNF grammar."""


class OrdinalOverflowError(OrdinalError):
    """Raised when a CNF coefficient leaves the machine-natural range."""


class CapExceededError(FixlabError, ValueError):
    """Raised when a construction would exceed a configured size cap."""

    def __init__(self, what: str, size: int, cap: int) -> None:
        super().__init__(f"{what} has size {size}, exceeding the cap of {cap}")
        self.what = what
        self.size = size
        self.cap = cap


class LatticeError(FixlabError, ValueError):
    module = "lattice"


class NotMonotoneError(LatticeError):
    """Raised when an operation requires a monotone operator and gets another."""


class MalformedRegionsError(FixlabError, ValueError):
    module = "engine"


class FunctorError(FixlabError, ValueError):
    module = "fincat"


class BoundsExceededError(FixlabError, ValueError):
    """Raised when an exhaustive search is asked to run beyond its bounds."""


class GameSpecError(FixlabError, ValueError):
    module = "game"


class KripkeError(FixlabError, ValueError):
    module = "kripke"


class ScenarioError(FixlabError, ValueError):
    """A scenario document violates its schema.

    Args:
        path: JSON path of the first violation, e.g. ``$.regions[1].lo``
        expectation: what was expected at that path
    """

    module = "scenario"

    def __init__(self, path: str, expectation: str) -> None:
        super().__init__(f"{path}: {expectation}")
        self.path = path
        self.expectation = expectation
