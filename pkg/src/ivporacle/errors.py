"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """An argument violates a documented precondition (bad order, bad k, ...)."""


class DomainError(ValueError):
    """A numeric input lies outside the admissible domain (non-finite point,
    evaluation time outside the solution interval, ...)."""


class UnknownProblemError(LookupError):
    """Requested catalog entry does not exist."""


class DivergenceError(RuntimeError):
    """The numerical trajectory left the trust region during stepping."""

    def __init__(self, step: int, norm: float):
        self.step = step
        self.norm = norm
        super().__init__(f"trajectory diverged at step {step} (|y| ~ {norm:.3e})")
