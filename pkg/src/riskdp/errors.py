"""Exception types shared across the package."""


class RiskModelError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(RiskModelError, ValueError):
    """An input violates a structural invariant; the message names it."""


class EvaluationOverflowError(RiskModelError, OverflowError):
    """A closed-form evaluation left the representable floating range."""


class EnumerationLimitError(RiskModelError, RuntimeError):
    """An enumeration (paths, nodes, policies) exceeded its configured cap."""
