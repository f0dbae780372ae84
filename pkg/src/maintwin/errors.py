"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class EvidenceConflict(RuntimeError):
    """Raised when an observation is impossible under the current belief.

    Every state consistent with the evidence carries zero predicted mass.
    Callers should retry with perturbed transition matrices, which keep
    all transitions strictly positive.
    """
