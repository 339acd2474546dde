"""Exception hierarchy shared by all coarselab modules.

The CLI maps these onto exit codes: invalid input -> 1,
contract violation -> 2, usage errors -> 64.
"""

from __future__ import annotations


class CoarseLabError(Exception):
    """Base class for all coarselab errors."""


class InvalidInputError(CoarseLabError):
    """An argument fails a precondition that the caller is expected to meet."""


class ContractViolationError(CoarseLabError):
    """A declared precondition on structured data does not hold.

    Carries a machine-readable witness (e.g. the offending pair of sets)
    so failures can be diagnosed instead of silently repaired.
    """

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class ResourceLimitError(CoarseLabError):
    """A computation would exceed a documented size cap (e.g. pair materialization)."""


class InternalCheckError(CoarseLabError):
    """An internal consistency check failed; this indicates a bug, not bad input."""
