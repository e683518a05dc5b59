"""
Sequential and parallel validation of transaction sequences.

The sequential validator folds ``validate_tx``/``apply_tx`` over the sequence.
The parallel validator repeatedly cuts the longest conflict-free prefix,
validates its members on a thread pool against the pre-batch ledger, and
commits the accepted ones in sequence order. Both end in the same ledger.

Validation is CPU bound; under a GIL build the pool mostly overlaps the
signature checks done inside ``cryptography``, so speedups depend on the
interpreter.
"""

import logging
import time
from abc import ABC, abstractmethod
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from datetime import UTC, datetime
from functools import partial
from typing import Any, cast

import logfire
from pydantic import BaseModel, Field

from ledger.core import Ledger, advance_time, apply_tx, validate_tx
from ledger.model import Event, Tick, Tx, ValidationResult
from ledger.serialization import measure_ledger
from ledger.wallet import Wallet
from utils.crypto import SignatureVerifier, get_signature_verifier

from .batch import conflict_free_prefix

logger = logging.getLogger(__name__)


class Rejection(BaseModel):
    index: int
    condition: str
    detail: str = ""


class RunReport(BaseModel):
    """Outcome of one validation run."""

    validator: str
    n_workers: int = 0
    transactions: int = 0
    accepted: int = 0
    rejected: int = 0
    batches: int = 0
    soft_conflicts: int = 0
    wall_time_s: float = 0.0
    ledger_bytes: int = 0
    final_digest: str = ""
    signatures_verified: int = 0
    rejections: list[Rejection] = Field(default_factory=list)

    @property
    def soft_conflict_fraction(self) -> float:
        return self.soft_conflicts / self.transactions if self.transactions else 0.0

    @property
    def wall_ms(self) -> float:
        return self.wall_time_s * 1000.0


def _finish(report: RunReport, ledger: Ledger, measure: bool) -> None:
    # The digest is always set: runners compare it across validators.
    size, report.final_digest = measure_ledger(ledger)
    if measure:
        report.ledger_bytes = size


def _record(report: RunReport, index: int, result: ValidationResult) -> None:
    if result.accepted:
        report.accepted += 1
        return
    report.rejected += 1
    report.rejections.append(
        Rejection(index=index, condition=result.failed_condition or "", detail=result.detail or "")
    )
    logger.debug(f"❌ Transaction {index} rejected by condition {result.failed_condition}: {result.detail}")


def _validate_member(
    seq: Sequence[Event],
    ledger: Ledger,
    available: dict[int, Wallet],
    verifier: SignatureVerifier,
    position: int,
) -> ValidationResult:
    return validate_tx(
        cast(Tx, seq[position]), ledger, available=available.get(position), verifier=verifier
    )


def validate_sequential(
    ledger: Ledger,
    seq: Sequence[Event],
    *,
    verifier: SignatureVerifier | None = None,
    measure: bool = True,
) -> tuple[Ledger, RunReport]:
    """
    Validate ``seq`` one event at a time, skipping rejected transactions.

    Mutates ``ledger`` and returns it with the run report.
    """
    verifier = verifier or get_signature_verifier()
    report = RunReport(validator="sequential")
    signatures_before = verifier.verified

    with logfire.span("validator.sequential", events=len(seq)) as span:
        started = time.perf_counter()
        for index, event in enumerate(seq):
            if isinstance(event, Tick):
                advance_time(ledger, event.time)
                continue
            report.transactions += 1
            result = validate_tx(event, ledger, verifier=verifier)
            _record(report, index, result)
            if result.accepted:
                apply_tx(ledger, event)
        report.wall_time_s = time.perf_counter() - started
        report.batches = report.transactions

        report.signatures_verified = verifier.verified - signatures_before
        _finish(report, ledger, measure)
        span.set_attribute("accepted", report.accepted)
        span.set_attribute("rejected", report.rejected)
        span.set_attribute("wall_time_s", report.wall_time_s)

    logger.info(
        f"✅ Sequential validation finished: {report.accepted} accepted, "
        f"{report.rejected} rejected in {report.wall_ms:.1f} ms"
    )
    return ledger, report


def validate_parallel(
    ledger: Ledger,
    seq: Sequence[Event],
    n_workers: int,
    *,
    verifier: SignatureVerifier | None = None,
    measure: bool = True,
) -> tuple[Ledger, RunReport]:
    """
    Validate ``seq`` in conflict-free batches on ``n_workers`` threads.

    Args:
        ledger: Starting ledger, mutated by the commits.
        seq: Transactions and ticks in sequence order.
        n_workers: Worker threads (at least 1).
        verifier: Signature verifier shared by the workers.
        measure: Whether to report the final ledger's byte size. The digest is always computed.

    Returns:
        The committed ledger and the run report.
    """
    if n_workers < 1:
        raise ValueError(f"Parallel validation needs at least one worker, got {n_workers}")

    verifier = verifier or get_signature_verifier()
    report = RunReport(validator="parallel", n_workers=n_workers)
    signatures_before = verifier.verified

    with (
        logfire.span("validator.parallel", events=len(seq), n_workers=n_workers) as span,
        ThreadPoolExecutor(max_workers=n_workers, thread_name_prefix="validator") as pool,
    ):
        started = time.perf_counter()
        index = 0
        while index < len(seq):
            event = seq[index]
            if isinstance(event, Tick):
                advance_time(ledger, event.time)
                index += 1
                continue

            prefix = conflict_free_prefix(seq, ledger, index)

            check = partial(_validate_member, seq, ledger, prefix.batch.available, verifier)
            results = list(pool.map(check, prefix.positions))
            for position, result in zip(prefix.positions, results, strict=True):
                _record(report, position, result)
                if result.accepted:
                    apply_tx(ledger, cast(Tx, seq[position]))

            report.transactions += len(prefix.positions)
            report.batches += 1
            if prefix.conflict:
                report.soft_conflicts += 1
            logger.debug(
                f"Batch {report.batches}: {len(prefix.positions)} txs from index {index}"
                + (" (ended by conflict)" if prefix.conflict else "")
            )
            index = prefix.end
        report.wall_time_s = time.perf_counter() - started

        report.signatures_verified = verifier.verified - signatures_before
        _finish(report, ledger, measure)
        span.set_attribute("accepted", report.accepted)
        span.set_attribute("batches", report.batches)
        span.set_attribute("soft_conflicts", report.soft_conflicts)
        span.set_attribute("wall_time_s", report.wall_time_s)

    logger.info(
        f"✅ Parallel validation ({n_workers} workers) finished: {report.accepted} accepted, "
        f"{report.rejected} rejected, {report.batches} batches, "
        f"{report.soft_conflict_fraction:.2%} soft conflicts in {report.wall_ms:.1f} ms"
    )
    return ledger, report


class BaseValidator(ABC):
    """Common interface of the validators driven by the benchmark runner."""

    def __init__(self, verifier: SignatureVerifier | None = None, measure: bool = True):
        self.verifier = verifier
        self.measure = measure
        self.stats: dict[str, Any] = {
            "validator": self.name,
            "created_at": datetime.now(UTC),
            "runs": 0,
            "transactions_validated": 0,
            "transactions_rejected": 0,
            "last_run": None,
        }

    @property
    @abstractmethod
    def name(self) -> str:
        """Short validator name used in reports."""

    @property
    def n_workers(self) -> int:
        return 0

    @abstractmethod
    def _run(self, ledger: Ledger, seq: Sequence[Event]) -> tuple[Ledger, RunReport]:
        """
        Validate ``seq`` on top of ``ledger``.

        Args:
            ledger: Starting ledger, mutated in place.
            seq: Transactions and ticks in sequence order.

        Returns:
            The final ledger and the run report.
        """

    def validate(self, ledger: Ledger, seq: Sequence[Event]) -> tuple[Ledger, RunReport]:
        ledger, report = self._run(ledger, seq)
        self.stats["runs"] += 1
        self.stats["transactions_validated"] += report.transactions
        self.stats["transactions_rejected"] += report.rejected
        self.stats["last_run"] = datetime.now(UTC)
        return ledger, report

    def get_stats(self) -> dict[str, Any]:
        stats = self.stats.copy()
        runtime = datetime.now(UTC) - stats["created_at"]
        stats["runtime_seconds"] = runtime.total_seconds()
        return stats


class SequentialValidator(BaseValidator):
    @property
    def name(self) -> str:
        return "sequential"

    def _run(self, ledger: Ledger, seq: Sequence[Event]) -> tuple[Ledger, RunReport]:
        return validate_sequential(ledger, seq, verifier=self.verifier, measure=self.measure)


class ParallelValidator(BaseValidator):
    """Batch validator backed by a thread pool of ``n_workers`` threads."""

    def __init__(self, n_workers: int, verifier: SignatureVerifier | None = None, measure: bool = True):
        if n_workers < 1:
            raise ValueError(f"n_workers must be at least 1, got {n_workers}")
        self._n_workers = n_workers
        super().__init__(verifier, measure)
        self.stats["batches"] = 0
        self.stats["soft_conflicts"] = 0

    @property
    def name(self) -> str:
        return f"parallel-{self._n_workers}"

    @property
    def n_workers(self) -> int:
        return self._n_workers

    def _run(self, ledger: Ledger, seq: Sequence[Event]) -> tuple[Ledger, RunReport]:
        ledger, report = validate_parallel(
            ledger, seq, self._n_workers, verifier=self.verifier, measure=self.measure
        )
        self.stats["batches"] += report.batches
        self.stats["soft_conflicts"] += report.soft_conflicts
        return ledger, report

    def get_stats(self) -> dict[str, Any]:
        stats = super().get_stats()
        if stats["transactions_validated"]:
            stats["mean_batch_size"] = stats["transactions_validated"] / max(stats["batches"], 1)
        return stats

    def health_check(self) -> dict[str, Any]:
        health: dict[str, Any] = {
            "validator": self.name,
            "n_workers": self._n_workers,
            "runs": self.stats["runs"],
            "components": {"signature_verifier": "shared" if self.verifier is None else "dedicated"},
            "errors": [],
        }
        if self.stats["transactions_validated"] and not self.stats["batches"]:
            health["errors"].append("transactions validated without any batch")
        return health


def create_validator(
    n_workers: int, verifier: SignatureVerifier | None = None, measure: bool = True
) -> BaseValidator:
    """
    Create the validator for a worker count.

    Args:
        n_workers: 0 for the sequential validator, otherwise the number of
            worker threads of the parallel validator.
        verifier: Signature verifier to use; the process-wide one when omitted.
        measure: Whether runs report the final ledger's byte size.

    Returns:
        A ``SequentialValidator`` or ``ParallelValidator``.

    Raises:
        ValueError: If ``n_workers`` is negative.
    """
    if n_workers < 0:
        raise ValueError(f"n_workers cannot be negative, got {n_workers}")
    if n_workers == 0:
        logger.info("🔧 Creating sequential validator")
        return SequentialValidator(verifier, measure)
    logger.info(f"🔧 Creating parallel validator with {n_workers} workers")
    return ParallelValidator(n_workers, verifier, measure)
