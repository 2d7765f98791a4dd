"""Exception hierarchy shared across the package."""


class PathcalcError(Exception):
    """Base class for all package errors."""


class ContractError(PathcalcError, ValueError):
    """An argument violates a documented precondition (domain, shape, range)."""


class InternalConsistencyError(PathcalcError):
    """An exact pathwise identity failed beyond tolerance.

    These identities are theorems of the discrete constructions, so a
    violation signals an implementation bug, never bad input data.
    """


class CheckFailedError(PathcalcError):
    """An empirical (statistical) bound check failed."""
