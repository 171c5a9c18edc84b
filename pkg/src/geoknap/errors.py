"""Exceptions shared across modules."""


class BudgetExceeded(RuntimeError):
    """A configured search budget ran out before a verdict was reached."""

    def __init__(self, message: str, stage: str | None = None, estimate=None):
        super().__init__(message if stage is None else f"{stage}: {message}")
        self.stage = stage
        self.estimate = estimate


class BudgetRefused(BudgetExceeded):
    """Raised before any search when the instance is outside the configured limits."""
