"""Exception types shared across the package."""


class UsageError(ValueError):
    """Invalid arguments or configuration supplied by the caller."""


class ComputationError(RuntimeError):
    """A numerical routine failed to meet its accuracy contract."""
