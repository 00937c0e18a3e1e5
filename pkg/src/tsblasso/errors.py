"""Exception types shared across the package."""

from __future__ import annotations


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class ConfigError(ValueError):
    """An experiment configuration is invalid.

    ``field`` holds the dotted path of the offending entry, e.g.
    ``"train[0].alpha"``.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class NumericalFailureError(RuntimeError):
    """A non-finite value appeared during iteration.

    Carries the iteration index and, when available, the last finite
    parameter snapshot so callers can inspect how far the run got.
    """

    def __init__(self, iteration: int, message: str, last_good=None):
        self.iteration = iteration
        self.last_good = last_good
        super().__init__(f"iteration {iteration}: {message}")


class RankDeficientError(RuntimeError):
    """A linear system used for certificate construction is rank deficient
    (or too ill-conditioned to trust).  ``estimated_rank`` is the numerical
    rank found, ``full_rank`` the rank required."""

    def __init__(self, estimated_rank: int, full_rank: int, cond: float):
        self.estimated_rank = estimated_rank
        self.full_rank = full_rank
        self.cond = cond
        super().__init__(
            f"estimated rank {estimated_rank} < {full_rank} required "
            f"(condition number {cond:.3e})"
        )


class SchemaError(ValueError):
    """A CSV file does not match the schema a reader expects."""
