"""
Benchmark runner.

``run_experiment`` generates a workload once per repetition, replays it on a
fresh ledger with every validator of the sweep and cross-checks the final
ledger digests against the first (baseline) validator.
"""

import csv
import logging
from pathlib import Path

import logfire
from pydantic import BaseModel

from utils.config import BenchConfig, ExperimentConfig
from validation import RunReport, create_validator

from .generators import Workload, gen_crowdfund, gen_map, gen_multisig, gen_registry

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "benchmark",
    "mode",
    "size",
    "threads",
    "seed",
    "rep",
    "wall_ms",
    "accepted",
    "rejected",
    "soft_conflict_pct",
    "ledger_bytes",
    "final_digest",
)


class DigestMismatchError(RuntimeError):
    """Two validators ended the same workload on different ledgers."""


class ExperimentRow(BaseModel):
    """One CSV row: a validator's run of one repetition."""

    benchmark: str
    mode: str
    size: int
    threads: int
    seed: int
    rep: int
    wall_ms: float
    accepted: int
    rejected: int
    soft_conflict_pct: float
    ledger_bytes: int
    final_digest: str
    signatures_verified: int = 0
    batches: int = 0

    def csv_values(self) -> list[str]:
        values = self.model_dump(include=set(CSV_COLUMNS))
        values["wall_ms"] = f"{self.wall_ms:.3f}"
        values["soft_conflict_pct"] = f"{self.soft_conflict_pct:.3f}"
        return [str(values[column]) for column in CSV_COLUMNS]


def generate_workload(config: ExperimentConfig, seed: int, bench: BenchConfig | None = None) -> Workload:
    """Build the workload ``config`` describes with the given seed."""
    match config.benchmark:
        case "crowdfund":
            return gen_crowdfund(config.mode, config.users, seed, bench)
        case "map":
            return gen_map(config.p, config.ops, seed, bench)
        case "multisig":
            return gen_multisig(config.n, config.ops, seed, bench)
        case "registry":
            return gen_registry(config.users, seed, bench)


def _row(config: ExperimentConfig, seed: int, rep: int, report: RunReport, conflict_pct: float) -> ExperimentRow:
    return ExperimentRow(
        benchmark=config.benchmark,
        mode=config.mode,
        size=config.size,
        threads=report.n_workers,
        seed=seed,
        rep=rep,
        wall_ms=report.wall_ms,
        accepted=report.accepted,
        rejected=report.rejected,
        soft_conflict_pct=conflict_pct,
        ledger_bytes=report.ledger_bytes,
        final_digest=report.final_digest,
        signatures_verified=report.signatures_verified,
        batches=report.batches,
    )


def run_repetition(
    config: ExperimentConfig, workload: Workload, seed: int, rep: int, measure: bool = True
) -> list[ExperimentRow]:
    """
    Replay one workload with every validator of the sweep.

    Raises:
        DigestMismatchError: A validator's final digest differs from the baseline's.
    """
    reports: list[RunReport] = []
    for n_workers in config.n_workers:
        validator = create_validator(n_workers, measure=measure)
        _, report = validator.validate(workload.sequence.fresh_ledger(), workload.sequence.events)
        if report.rejected:
            logger.warning(
                f"⚠️ {validator.name} rejected {report.rejected} of {report.transactions} "
                f"{config.benchmark} transactions"
            )
        reports.append(report)

    baseline = reports[0]
    for report in reports[1:]:
        if report.final_digest != baseline.final_digest:
            raise DigestMismatchError(
                f"{report.validator} ended {config.benchmark} repetition {rep} with digest "
                f"{report.final_digest[:16]}, baseline {baseline.validator} with {baseline.final_digest[:16]}"
            )

    parallel = [report for report in reports if report.n_workers > 0]
    measured_pct = 100.0 * parallel[0].soft_conflict_fraction if parallel else 0.0
    return [
        _row(config, seed, rep, report, 100.0 * report.soft_conflict_fraction if report.n_workers else measured_pct)
        for report in reports
    ]


def run_experiment(config: ExperimentConfig, bench: BenchConfig | None = None, measure: bool = True) -> list[ExperimentRow]:
    """
    Run every repetition of an experiment.

    Repetition ``r`` uses seed ``config.seed + r``.

    Returns:
        One row per (repetition, validator), in sweep order.
    """
    rows: list[ExperimentRow] = []
    with logfire.span(
        "bench.run_experiment",
        benchmark=config.benchmark,
        mode=config.mode,
        size=config.size,
        threads=config.n_workers,
        repetitions=config.repetitions,
    ):
        for rep in range(config.repetitions):
            seed = config.seed + rep
            workload = generate_workload(config, seed, bench)
            rows.extend(run_repetition(config, workload, seed, rep, measure=measure))
            logger.info(
                f"📊 {config.benchmark} repetition {rep + 1}/{config.repetitions}: "
                f"{workload.transactions} transactions, threads {config.n_workers}"
            )
    return rows


def mean_wall_ms(rows: list[ExperimentRow]) -> dict[int, float]:
    """Mean wall time per thread count."""
    totals: dict[int, list[float]] = {}
    for row in rows:
        totals.setdefault(row.threads, []).append(row.wall_ms)
    return {threads: sum(times) / len(times) for threads, times in totals.items()}


def write_csv(rows: list[ExperimentRow], path: Path) -> Path:
    """Write ``rows`` to ``path``, creating parent directories; returns the path."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        writer.writerows(row.csv_values() for row in rows)
    logger.info(f"💾 Wrote {len(rows)} rows to {path}")
    return path
