"""
Tests for the benchmark runner and CSV reports (src/bench/runner.py).
"""

import csv

import pytest

from bench.runner import (
    CSV_COLUMNS,
    DigestMismatchError,
    ExperimentRow,
    generate_workload,
    mean_wall_ms,
    run_experiment,
    run_repetition,
    write_csv,
)
from utils.config import ExperimentConfig
from validation.validator import RunReport, create_validator


def row(threads: int, wall_ms: float, rep: int = 0) -> ExperimentRow:
    return ExperimentRow(
        benchmark="map",
        mode="distributed",
        size=10,
        threads=threads,
        seed=1,
        rep=rep,
        wall_ms=wall_ms,
        accepted=10,
        rejected=0,
        soft_conflict_pct=12.5,
        ledger_bytes=100,
        final_digest="ab" * 64,
    )


class TestGenerateWorkload:
    """Tests for choosing the generator from an experiment."""

    @pytest.mark.parametrize(
        ("config", "benchmark"),
        [
            (ExperimentConfig(benchmark="crowdfund", users=3), "crowdfund"),
            (ExperimentConfig(benchmark="crowdfund", mode="centralized", users=3), "crowdfund"),
            (ExperimentConfig(benchmark="map", ops=4), "map"),
            (ExperimentConfig(benchmark="multisig", n=2, ops=4), "multisig"),
            (ExperimentConfig(benchmark="registry", users=2), "registry"),
        ],
    )
    def test_dispatch(self, config, benchmark):
        """Test that every benchmark builds its workload."""
        workload = generate_workload(config, seed=1)

        assert workload.benchmark == benchmark
        assert workload.transactions > 0


class TestRunExperiment:
    """Tests for running sweeps."""

    def test_rows_per_repetition_and_validator(self):
        """Test one row per (repetition, validator) with matching digests."""
        config = ExperimentConfig(benchmark="map", ops=15, n_workers=[0, 2], repetitions=2, seed=5)

        rows = run_experiment(config)

        assert [(r.rep, r.threads) for r in rows] == [(0, 0), (0, 2), (1, 0), (1, 2)]
        assert [r.seed for r in rows] == [5, 5, 6, 6]
        assert rows[0].final_digest == rows[1].final_digest
        assert all(r.accepted == 16 and r.rejected == 0 for r in rows)
        assert all(r.size == 15 for r in rows)

    def test_sequential_row_reports_parallel_conflicts(self):
        """Test that the sequential row carries the measured soft-conflict share."""
        config = ExperimentConfig(benchmark="map", ops=10, p=1.0, n_workers=[0, 4])

        sequential, parallel = run_experiment(config)

        assert parallel.soft_conflict_pct > 0
        assert sequential.soft_conflict_pct == parallel.soft_conflict_pct

    def test_without_measurement(self):
        """Test that skipping measurement drops sizes but still reports matching digests."""
        config = ExperimentConfig(benchmark="map", ops=3, n_workers=[0, 1])

        rows = run_experiment(config, measure=False)

        assert all(r.ledger_bytes == 0 for r in rows)
        assert rows[0].final_digest != ""
        assert rows[0].final_digest == rows[1].final_digest

    def test_digest_mismatch_raises(self, mocker):
        """Test that diverging validators abort the experiment."""
        config = ExperimentConfig(benchmark="map", ops=3, n_workers=[0, 2])
        workload = generate_workload(config, seed=1)
        reports = iter(
            [
                RunReport(validator="sequential", final_digest="aa"),
                RunReport(validator="parallel", n_workers=2, final_digest="bb"),
            ]
        )
        validator = mocker.Mock()
        validator.name = "mock"
        validator.validate.side_effect = lambda ledger, events: (ledger, next(reports))
        mocker.patch("bench.runner.create_validator", return_value=validator)

        with pytest.raises(DigestMismatchError):
            run_repetition(config, workload, seed=1, rep=0)

    def test_digest_mismatch_caught_without_measurement(self, mocker):
        """Test that a validator losing a transaction is caught when sizes are not measured."""
        config = ExperimentConfig(benchmark="map", ops=5, n_workers=[0, 2])
        workload = generate_workload(config, seed=1)

        def lossy_validator(n_workers, measure=True):
            validator = create_validator(n_workers, measure=measure)
            if n_workers:
                validate = validator.validate
                validator.validate = lambda ledger, events: validate(ledger, list(events)[:-1])
            return validator

        mocker.patch("bench.runner.create_validator", side_effect=lossy_validator)

        with pytest.raises(DigestMismatchError):
            run_repetition(config, workload, seed=1, rep=0, measure=False)


class TestReports:
    """Tests for summaries and CSV output."""

    def test_mean_wall_ms(self):
        """Test averaging wall times per thread count."""
        rows = [row(0, 10.0), row(0, 20.0, rep=1), row(4, 5.0)]

        assert mean_wall_ms(rows) == {0: 15.0, 4: 5.0}

    def test_csv_columns(self, tmp_path):
        """Test the header and the formatting of one row."""
        path = write_csv([row(2, 1.23456)], tmp_path / "out" / "map.csv")

        with path.open(newline="", encoding="utf-8") as f:
            header, values = list(csv.reader(f))

        assert tuple(header) == CSV_COLUMNS
        record = dict(zip(header, values, strict=True))
        assert record["threads"] == "2"
        assert record["wall_ms"] == "1.235"
        assert record["soft_conflict_pct"] == "12.500"
        assert record["final_digest"] == "ab" * 64
