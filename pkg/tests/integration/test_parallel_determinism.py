"""
Integration tests for validator determinism.

Whatever the worker count, the parallel validator must commit exactly the
ledger the sequential validator commits, rejected transactions included.
"""

import pytest

from bench.generators import gen_crowdfund, gen_map, gen_multisig, gen_registry
from ledger.model import Tick, Tx
from ledger.serialization import TxSequence
from utils.crypto import SignatureVerifier
from validation.validator import create_validator, validate_sequential

pytestmark = pytest.mark.integration

THREADS = [0, 1, 2, 4, 8]


def digests(sequence: TxSequence, threads=THREADS) -> dict[int, tuple[str, int, int]]:
    """Final digest, accepted and rejected count per worker count."""
    results = {}
    for n in threads:
        _, report = create_validator(n, verifier=SignatureVerifier()).validate(
            sequence.fresh_ledger(), sequence.events
        )
        results[n] = (report.final_digest, report.accepted, report.rejected)
    return results


def with_replays(sequence: TxSequence, every: int) -> TxSequence:
    """Insert a copy of every ``every``-th transaction right after it; the copies double-spend."""
    events = []
    for i, event in enumerate(sequence.events):
        events.append(event)
        if isinstance(event, Tx) and i % every == every - 1:
            events.append(event)
    return TxSequence(genesis=sequence.genesis, events=tuple(events))


WORKLOADS = {
    "crowdfund": lambda: gen_crowdfund("distributed", 30, seed=3),
    "centralized": lambda: gen_crowdfund("centralized", 20, seed=3),
    "map-cold": lambda: gen_map(0.0, 80, seed=4),
    "map-mixed": lambda: gen_map(0.5, 80, seed=4),
    "map-hot": lambda: gen_map(1.0, 40, seed=4),
    "multisig": lambda: gen_multisig(4, 40, seed=5),
    "registry": lambda: gen_registry(15, seed=6),
}


class TestDeterminism:
    """Tests that every worker count commits the same ledger."""

    @pytest.mark.parametrize("name", list(WORKLOADS))
    def test_valid_sequences(self, name):
        """Test identical digests and full acceptance for generated sequences."""
        sequence = WORKLOADS[name]().sequence

        results = digests(sequence)

        assert len(set(results.values())) == 1
        _, accepted, rejected = results[0]
        assert rejected == 0
        assert accepted == len(sequence.transactions)

    @pytest.mark.parametrize("name", ["crowdfund", "map-mixed", "multisig"])
    def test_sequences_with_rejections(self, name):
        """Test identical digests when replayed transactions must be rejected."""
        sequence = with_replays(WORKLOADS[name]().sequence, every=5)

        results = digests(sequence)

        assert len(set(results.values())) == 1
        assert results[0][2] > 0

    def test_repeated_runs_agree(self):
        """Test that repeating a parallel run does not change its result."""
        sequence = gen_map(0.3, 60, seed=8).sequence

        first = digests(sequence, threads=[4])
        second = digests(sequence, threads=[4])

        assert first == second

    def test_ticks_split_batches(self):
        """Test that refunds after the refund tick validate in parallel as they do sequentially."""
        workload = gen_crowdfund("distributed", 10, seed=2)
        tick_at = next(i for i, e in enumerate(workload.sequence.events) if isinstance(e, Tick))

        sequential_ledger, _ = validate_sequential(
            workload.sequence.fresh_ledger(), workload.sequence.events, verifier=SignatureVerifier()
        )
        _, report = create_validator(4, verifier=SignatureVerifier()).validate(
            workload.sequence.fresh_ledger(), workload.sequence.events
        )

        assert tick_at == 11
        assert report.batches >= 2
        assert sequential_ledger.account(workload.ctr_id).is_zero()


@pytest.mark.slow
class TestDeterminismAtScale:
    """Determinism on the benchmark workloads at their reported sizes."""

    @staticmethod
    def assert_deterministic(sequence: TxSequence) -> None:
        results = digests(sequence)

        assert len(set(results.values())) == 1
        _, accepted, rejected = results[0]
        assert rejected == 0
        assert accepted == len(sequence.transactions)

    @pytest.mark.parametrize("p", [0.0, 0.1, 0.5, 0.9])
    def test_map(self, p):
        """Test the map benchmark with 20K increments across worker counts."""
        self.assert_deterministic(gen_map(p, 20_000, seed=11).sequence)

    def test_multisig(self):
        """Test the 4-signer multisig with 20K operations across worker counts."""
        self.assert_deterministic(gen_multisig(4, 20_000, seed=12).sequence)

    def test_registry(self):
        """Test the registry with 1000 users across worker counts."""
        self.assert_deterministic(gen_registry(1000, seed=13).sequence)

    @pytest.mark.parametrize("mode", ["distributed", "centralized"])
    def test_crowdfund(self, mode):
        """Test the crowdfund with 1000 donors across worker counts."""
        self.assert_deterministic(gen_crowdfund(mode, 1000, seed=14).sequence)
