"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Inputs have inconsistent sizes or violate a documented precondition."""


class CertificationUnavailable(ParameterError):
    """The instance is sound asymptotically but too large for exact desk certification."""


class InvariantViolation(RuntimeError):
    """An internal invariant that construction should guarantee did not hold."""


class OracleRejection(RuntimeError):
    """A leakage query would exceed the oracle budget."""


class RateBoundViolation(AssertionError):
    """A parameter set claims a secret rate at or above the threshold gap."""
