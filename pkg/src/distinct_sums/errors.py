"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes and the single-line ``E-...`` tags.
"""


class DistinctSumsError(Exception):
    tag = "E-INPUT"


class InputError(DistinctSumsError, ValueError):
    """Malformed or out-of-range input."""


class ContractError(InputError):
    """A caller broke a documented precondition (e.g. an uncertified base)."""


class ConstructionError(DistinctSumsError):
    """A generated object failed its own certification."""


class DomainError(DistinctSumsError, ValueError):
    """Parameters lie outside the hypotheses of a bound or construction."""

    tag = "E-DOMAIN"


class CapacityError(DistinctSumsError, RuntimeError):
    """The requested computation exceeds the configured resource budget."""

    tag = "E-CAPACITY"


class DomainWarning(UserWarning):
    pass
