"""Shared exception types.

Exit-code mapping used by the CLI lives in cli.py; library code raises
these and never calls sys.exit itself.
"""


class RamspectError(Exception):
    """Base class for all package errors."""


class ParameterError(RamspectError, ValueError):
    """A caller-supplied parameter is malformed or out of its legal range."""


class ContractViolation(RamspectError, ValueError):
    """A documented precondition between components was broken (e.g. overlapping
    vertex sets passed where disjoint ones are required)."""


class CapacityError(RamspectError):
    """The request is well-formed but exceeds a hard size cap of an exact
    routine.  The message states the cap and the estimated cost."""


class GraphParseError(RamspectError, ValueError):
    """Malformed graph text; the message names the offending line."""


class ConstructionFailure(RamspectError):
    """A pipeline stage could not produce its output after exhausting its
    retry budget.  Carries the stage name and a diagnostics dict."""

    def __init__(self, stage: str, message: str, diagnostics: dict | None = None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.diagnostics = diagnostics or {}
