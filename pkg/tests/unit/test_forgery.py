"""
Tests that logic outputs reject every transaction other than the mandated one.

Each hand-written case takes the honest example(27) invocation, changes one
thing and checks that the ledger refuses it. A seeded run then mutates one
field of each of more than a thousand honest crowdfund invocations.
"""

import random

import pytest

from bench.chain import FEE_WALLET
from bench.contracts import load_benchmark_contract
from compiler.state_codec import Interval, Point, item_from_output, item_to_output
from compiler.tx_compiler import compile_invoke
from hurf.semantics import ContractState
from ledger.core import validate_tx
from ledger.model import Input, LogicScript, Output, OutputRef, PkLock, TimeInterval, Tx
from ledger.wallet import Wallet
from tests.conftest import example_hash


@pytest.fixture
def honest(chain, deployed_example) -> Tx:
    """The example(27) invocation, built but not appended."""
    receive_ref = chain.mint("alice", Wallet.of(0, 15))
    fee_ref = chain.fee_deposit()
    return compile_invoke(
        chain.ledger,
        deployed_example,
        "example",
        [27],
        ["alice", FEE_WALLET],
        [receive_ref],
        fee_ref,
    )


def with_input(tx: Tx, index: int, **changes) -> Tx:
    inputs = list(tx.inputs)
    inputs[index] = inputs[index].model_copy(update=changes)
    return tx.model_copy(update={"inputs": tuple(inputs)})


def with_output(tx: Tx, index: int, output: Output) -> Tx:
    outputs = list(tx.outputs)
    outputs[index] = output
    return tx.model_copy(update={"outputs": tuple(outputs)})


def without_input(tx: Tx, index: int) -> Tx:
    return tx.model_copy(update={"inputs": tx.inputs[:index] + tx.inputs[index + 1 :]})


def without_output(tx: Tx, index: int) -> Tx:
    return tx.model_copy(update={"outputs": tx.outputs[:index] + tx.outputs[index + 1 :]})


class TestHonestInvocation:
    """The unmodified invocation is the baseline every forgery departs from."""

    def test_honest_transaction_accepted(self, chain, honest):
        """Test that the built invocation is valid."""
        assert validate_tx(honest, chain.ledger).accepted


class TestForgeries:
    """Single changes to the honest invocation."""

    def test_other_parameters(self, chain, honest):
        """Test that the redeemer cannot be swapped for other parameters."""
        forged = with_input(honest, 0, redeemer=(14,))

        result = validate_tx(forged, chain.ledger)

        assert result.failed_condition == "5"
        assert result.detail.startswith("script:logic")

    def test_spending_the_logic_output(self, chain, honest):
        """Test that the logic output must stay unspent."""
        assert not validate_tx(with_input(honest, 0, spent=True), chain.ledger).accepted

    def test_smaller_fee(self, chain, honest):
        """Test that the fee field must match the fee deposit."""
        forged = honest.model_copy(update={"fee": 0})

        assert not validate_tx(forged, chain.ledger).accepted

    def test_missing_witness(self, chain, honest):
        """Test that every read key needs a witness."""
        assert not validate_tx(without_input(honest, 5), chain.ledger).accepted

    def test_witnesses_out_of_order(self, chain, honest):
        """Test that witnesses follow ascending hash order."""
        inputs = list(honest.inputs)
        inputs[2], inputs[3] = inputs[3], inputs[2]
        forged = honest.model_copy(update={"inputs": tuple(inputs)})

        assert not validate_tx(forged, chain.ledger).accepted

    def test_witness_spent_instead_of_read(self, chain, honest):
        """Test that a witness cannot be consumed."""
        assert not validate_tx(with_input(honest, 2, spent=True), chain.ledger).accepted

    def test_missing_receive(self, chain, honest):
        """Test that the receive deposit cannot be dropped."""
        assert not validate_tx(without_input(honest, 7), chain.ledger).accepted

    def test_receive_of_wrong_amount(self, chain, honest):
        """Test that the receive deposit must hold exactly z units of T0."""
        cheaper = chain.mint("alice", Wallet.of(0, 14))

        assert not validate_tx(with_input(honest, 7, out_ref=cheaper), chain.ledger).accepted

    def test_missing_consumed_item(self, chain, honest):
        """Test that the update must consume all its items."""
        assert not validate_tx(without_input(honest, 11), chain.ledger).accepted

    def test_send_to_someone_else(self, chain, honest):
        """Test that the send recipient is fixed by the rule."""
        forged = with_output(honest, 0, Output(value=Wallet.of(1, 1), validator=PkLock(pubkey="mallory")))

        assert not validate_tx(forged, chain.ledger).accepted

    def test_larger_send(self, chain, honest):
        """Test that the send amount is fixed by the rule."""
        forged = with_output(honest, 0, Output(value=Wallet.of(1, 50), validator=PkLock(pubkey="pubkey_a")))

        assert not validate_tx(forged, chain.ledger).accepted

    def test_missing_send(self, chain, honest):
        """Test that sends cannot be skipped."""
        assert not validate_tx(without_output(honest, 0), chain.ledger).accepted

    def test_wrong_written_value(self, chain, honest):
        """Test that produced items carry exactly the written values."""
        forged = with_output(honest, 3, item_to_output(Point(example_hash("map_m[15]"), 8)))

        assert not validate_tx(forged, chain.ledger).accepted

    def test_bool_instead_of_int(self, chain, honest):
        """Test that a written value of True does not pass for 1."""
        point = Point(example_hash("map_m[15]"), 7)
        assert honest.outputs[3] == item_to_output(point)
        forged = with_output(honest, 3, item_to_output(Point(point.h, True)))

        assert not validate_tx(forged, chain.ledger).accepted

    def test_missing_produced_item(self, chain, honest):
        """Test that the state cannot shrink."""
        assert not validate_tx(without_output(honest, 4), chain.ledger).accepted

    def test_extra_state_item(self, chain, honest):
        """Test that no extra state items can be produced."""
        extra = item_to_output(Interval(1, 2))
        forged = honest.model_copy(update={"outputs": honest.outputs + (extra,)})

        assert not validate_tx(forged, chain.ledger).accepted

    def test_extra_payout(self, chain, honest):
        """Test that the contract cannot be drained through an extra output."""
        theft = Output(value=Wallet.of(1, 99), validator=PkLock(pubkey="mallory"))
        forged = honest.model_copy(update={"outputs": honest.outputs + (theft,)})

        assert not validate_tx(forged, chain.ledger).accepted

    def test_extra_logic_output(self, chain, honest):
        """Test that a transaction cannot mint a new logic output."""
        script = LogicScript(source="contract X { }", rule="r")
        logic = Output(validator=script, datum=("logic",), in_contract=True)
        forged = honest.model_copy(update={"outputs": honest.outputs + (logic,)})

        assert not validate_tx(forged, chain.ledger).accepted

    def test_missing_receive_signature(self, chain, honest):
        """Test that the receive deposit's owner must sign."""
        forged = honest.model_copy(update={"signers": (FEE_WALLET,)})

        assert not validate_tx(forged, chain.ledger).accepted

    def test_other_contract_id(self, chain, honest):
        """Test that the contract id must match the spent items."""
        forged = honest.model_copy(update={"ctr_id": honest.ctr_id + 1})

        assert validate_tx(forged, chain.ledger).failed_condition == "6"

    def test_replay_after_append(self, chain, honest):
        """Test that an appended invocation cannot be replayed."""
        chain.submit(honest)

        assert validate_tx(honest, chain.ledger).failed_condition == "1"

    def test_state_item_without_logic(self, chain, honest):
        """Test that state items cannot be spent without the logic output first."""
        forged = without_input(honest, 0)

        assert not validate_tx(forged, chain.ledger).accepted

    @pytest.mark.parametrize("index", range(12))
    def test_any_dropped_input_rejected(self, chain, honest, index):
        """Test that dropping any single input breaks the transaction."""
        assert not validate_tx(without_input(honest, index), chain.ledger).accepted

    @pytest.mark.parametrize("index", range(5))
    def test_any_dropped_output_rejected(self, chain, honest, index):
        """Test that dropping any single output breaks the transaction."""
        assert not validate_tx(without_output(honest, index), chain.ledger).accepted

    def test_read_input_turned_into_receive(self, chain, honest):
        """Test that an extra spent input does not pass as a witness."""
        extra = chain.mint("alice", Wallet.of(0, 1))
        inputs = honest.inputs[:7] + (Input(out_ref=extra),) + honest.inputs[7:]
        forged = honest.model_copy(update={"inputs": inputs})

        assert not validate_tx(forged, chain.ledger).accepted


# ============================================================================
# Tests: Randomized single-field mutations
# ============================================================================

T_RF = 50
DONORS = 400
EXTRA_DONATIONS = 300


def build(chain, deployed, rule, params, signers=(), receives=(), validity=None) -> Tx:
    receive_refs = [chain.mint(owner, wallet) for owner, wallet in receives]
    return compile_invoke(
        chain.ledger,
        deployed,
        rule,
        params,
        [*signers, FEE_WALLET],
        receive_refs,
        chain.fee_deposit(),
        validity,
    )


def mutate_state_item(rng, chain, tx: Tx) -> Tx | None:
    positions = [i for i, output in enumerate(tx.outputs) if item_from_output(output) is not None]
    if not positions:
        return None
    i = rng.choice(positions)
    match item_from_output(tx.outputs[i]):
        case Point(h=h, value=int() as value):
            item: Point | Interval = Point(h, value + rng.randint(1, 3))
        case Interval(lo=lo, hi=hi):
            item = Interval(lo, hi - 1)
        case other:
            raise AssertionError(f"unexpected state item {other}")
    return with_output(tx, i, item_to_output(item))


def mutate_out_ref(rng, chain, tx: Tx) -> Tx:
    i = rng.randrange(len(tx.inputs))
    if rng.random() < 0.5:
        ref = OutputRef(tx_id=chain.ledger.next_tx_id + 1000, index=0)
    else:
        original = chain.ledger.resolve(tx.inputs[i].out_ref)
        ref = chain.mint("mallory", original.value)
    return with_input(tx, i, out_ref=ref)


def mutate_send(rng, chain, tx: Tx) -> Tx | None:
    sends = [i for i, output in enumerate(tx.outputs) if not output.in_contract]
    if not sends:
        return None
    i = rng.choice(sends)
    output = tx.outputs[i]
    return with_output(tx, i, output.model_copy(update={"value": output.value + Wallet.of(1, rng.randint(1, 3))}))


def mutate_validity(rng, chain, tx: Tx) -> Tx:
    start = chain.ledger.time + rng.randint(1, 40)
    return tx.model_copy(update={"validity": TimeInterval(valid_from=start, valid_to=start + rng.randint(0, 10))})


def mutate_redeemer(rng, chain, tx: Tx) -> Tx:
    params = list(tx.inputs[0].redeemer)
    i = rng.randrange(len(params))
    match params[i]:
        case bool() as flag:
            params[i] = not flag
        case int() as n:
            params[i] = n + rng.randint(1, 3)
        case str() as name:
            params[i] = name + "x"
    return with_input(tx, 0, redeemer=tuple(params))


def mutate_signer(rng, chain, tx: Tx) -> Tx:
    signers = list(tx.signers)
    i = rng.randrange(len(signers))
    if rng.random() < 0.5:
        del signers[i]
    else:
        signers[i] = "mallory"
    return tx.model_copy(update={"signers": tuple(signers)})


MUTATIONS = {
    "state_item": mutate_state_item,
    "out_ref": mutate_out_ref,
    "send": mutate_send,
    "validity": mutate_validity,
    "redeemer": mutate_redeemer,
    "signer": mutate_signer,
}


class TestRandomMutations:
    """Seeded single-field mutations of honest crowdfund invocations."""

    def test_every_mutation_rejected(self, chain):
        """Test that no single-field mutation of an honest invocation is accepted."""
        rng = random.Random(7)
        state = ContractState.from_values({"owner": "owner", "goal": 1, "t_wd": 0, "t_rf": T_RF})
        deployed = chain.deploy(load_benchmark_contract("crowdfund"), state)

        donors = [f"u{i}" for i in range(DONORS)]
        plan = [("donate", donor) for donor in donors]
        plan += [("donate", rng.choice(donors)) for _ in range(EXTRA_DONATIONS)]
        plan += [("refund", donor) for donor in donors]

        counts = dict.fromkeys(MUTATIONS, 0)
        for step, (rule, user) in enumerate(plan):
            if rule == "refund" and chain.ledger.time < T_RF:
                chain.tick(T_RF)
            if rule == "donate":
                x = rng.randint(1, 5)
                honest = build(chain, deployed, "donate", [x, user], [user], [(user, Wallet.of(1, x))])
            else:
                honest = build(chain, deployed, "refund", [user], validity=TimeInterval(valid_from=T_RF))

            kinds = list(MUTATIONS)
            rng.shuffle(kinds)
            for kind in kinds:
                forged = MUTATIONS[kind](rng, chain, honest)
                if forged is not None:
                    break
            counts[kind] += 1

            assert forged != honest
            result = validate_tx(forged, chain.ledger, verifier=chain.verifier)
            assert not result.accepted, f"step {step}: {kind} mutation of {rule}({user}) accepted"
            chain.submit(honest)

        assert sum(counts.values()) == len(plan) >= 1000
        assert all(n >= 30 for n in counts.values()), counts
        assert chain.ledger.account(deployed.ctr_id).is_zero()
