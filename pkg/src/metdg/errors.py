"""Exception types shared across the toolkit."""


class MetdgError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(MetdgError):
    """An ensemble description violates the data model."""


class CapacityError(MetdgError):
    """A component code exceeds the enforced enumeration limits."""


class AssumptionError(MetdgError):
    """An analysis was asked to run on an ensemble outside its assumptions."""


class InternalError(MetdgError):
    """An internal consistency check failed; indicates a bug, not bad input."""
