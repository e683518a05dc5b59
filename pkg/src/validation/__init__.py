"""Sequential and conflict-free-batch parallel validation."""

from .batch import BatchState, Prefix, conflict_free_prefix, conflicts_with, tx_draw
from .validator import (
    BaseValidator,
    ParallelValidator,
    Rejection,
    RunReport,
    SequentialValidator,
    create_validator,
    validate_parallel,
    validate_sequential,
)

__all__ = [
    "BaseValidator",
    "BatchState",
    "ParallelValidator",
    "Prefix",
    "Rejection",
    "RunReport",
    "SequentialValidator",
    "conflict_free_prefix",
    "conflicts_with",
    "create_validator",
    "tx_draw",
    "validate_parallel",
    "validate_sequential",
]
