"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A numerical procedure (bracketing, root scan, Gram assembly) failed."""


class CapabilityError(NotImplementedError):
    """The requested domain/operation combination is not supported."""


class BoundViolation(ValueError):
    """A density or perturbation size is outside the range where a bound applies."""
