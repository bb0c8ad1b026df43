"""Exception types shared across the package."""


class LabError(Exception):
    """Base class for all errors raised by chernoff_lab."""


class RangeError(LabError, ValueError):
    """A threshold or index lies outside the support of the event."""


class CapacityError(LabError, ValueError):
    """An exact computation was requested beyond its configured size cap."""


class DomainError(LabError, ValueError):
    """A parameter lies outside the domain where the operation is defined."""


class ProtocolViolation(LabError, RuntimeError):
    """A strategy broke the rules of the adaptive game.

    ``step`` is the zero-based step index at which the violation was
    detected, or ``None`` for end-of-game checks.
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class UnknownStrategyError(LabError, LookupError):
    """A strategy identifier could not be resolved."""


class UnknownSuiteError(LabError, LookupError):
    """A verification suite name is not registered."""


class ContractError(LabError, ValueError):
    """Inputs to a comparison do not fit together (e.g. direction mismatch)."""
