"""Exception types shared across the package.

The CLI maps these onto exit codes: computation errors exit 2,
invariant violations exit 3.
"""


class ComputationError(ValueError):
    """A well-formed request that has no finite answer."""


class UnboundedEpsilonError(ComputationError):
    """No finite epsilon achieves the requested delta."""


class NoSolutionError(ComputationError):
    """A bound has no valid epsilon for the requested parameters."""


class LimitExceededError(ComputationError):
    """Depth or alphabet size is beyond the configured enumeration limits."""


class NotDPError(ComputationError):
    """Mechanism is not (eps, 0)-DP at the requested scale."""

    def __init__(self, message, transcript=None):
        super().__init__(message)
        self.transcript = transcript


class InvariantViolation(ValueError):
    """A value breaks a structural invariant (normalization, range, shape)."""


class SupportMismatchError(InvariantViolation):
    """Two distributions are not defined over the same outcomes."""


class MechanismFormatError(InvariantViolation):
    """A mechanism file could not be parsed."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field
