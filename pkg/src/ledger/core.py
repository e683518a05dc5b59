"""
Ledger state, transaction validity and ledger update.

The ledger is owned by a single coordinator: ``apply_tx``, ``advance_time``
and ``Ledger.mint`` mutate it, while ``validate_tx`` only reads and may run
concurrently against a ledger that nobody is mutating.
"""

import logging
from collections.abc import Iterable
from typing import NamedTuple

from utils.crypto import SignatureVerifier, encode_canonical, get_signature_verifier, hash_bytes

from .model import Output, OutputRef, Tx, ValidationResult
from .scripts import ScriptContext, eval_script
from .wallet import InsufficientFundsError, Wallet

logger = logging.getLogger(__name__)

GENESIS_TX_ID = 0


class LedgerError(RuntimeError):
    """Raised when a ledger mutation's precondition does not hold."""


class UnresolvableInputError(LedgerError):
    """An input refers to an output that does not exist."""


class TimeRegressionError(LedgerError):
    """The ledger clock was asked to move backwards."""


class NoSpentInputError(LedgerError):
    """A contract id was requested for a transaction that spends nothing."""


class Ledger:
    """
    Transactions, contract accounts and logical time.

    Genesis outputs (transaction id 0) are minted without validation so that
    workloads can pre-fund deposits. Appended transactions get ids 1, 2, ...
    in append order.
    """

    def __init__(self, genesis: Iterable[Output] = (), *, time: int = 0):
        self.genesis: list[Output] = []
        self.txs: list[Tx] = []
        self.accounts: dict[int, Wallet] = {}
        self.time = time
        self.spent_index: set[OutputRef] = set()
        self._outputs: dict[OutputRef, Output] = {}
        self._tx_ctr_ids: list[int] = [0]
        for output in genesis:
            self.mint(output)

    @property
    def next_tx_id(self) -> int:
        return len(self.txs) + 1

    def mint(self, output: Output) -> OutputRef:
        """Append an output to the genesis transaction."""
        ref = OutputRef(tx_id=GENESIS_TX_ID, index=len(self.genesis))
        self.genesis.append(output)
        self._outputs[ref] = output
        return ref

    def resolve(self, ref: OutputRef) -> Output | None:
        return self._outputs.get(ref)

    def is_unspent(self, ref: OutputRef) -> bool:
        return ref in self._outputs and ref not in self.spent_index

    def tx(self, tx_id: int) -> Tx:
        if not 1 <= tx_id <= len(self.txs):
            raise LedgerError(f"No transaction with id {tx_id}")
        return self.txs[tx_id - 1]

    def tx_ctr_id(self, tx_id: int) -> int:
        return self._tx_ctr_ids[tx_id]

    def account(self, ctr_id: int) -> Wallet:
        return self.accounts.get(ctr_id, Wallet.zero())

    def copy(self) -> "Ledger":
        clone = Ledger(self.genesis, time=self.time)
        clone.txs = list(self.txs)
        clone.accounts = dict(self.accounts)
        clone.spent_index = set(self.spent_index)
        clone._outputs = dict(self._outputs)
        clone._tx_ctr_ids = list(self._tx_ctr_ids)
        return clone

    def __repr__(self) -> str:
        return (
            f"Ledger(txs={len(self.txs)}, genesis={len(self.genesis)}, "
            f"contracts={len(self.accounts)}, time={self.time})"
        )


class ValueFlow(NamedTuple):
    v_in: Wallet
    v_out: Wallet
    v_fee: Wallet


def unspent_outputs(ledger: Ledger) -> dict[OutputRef, Output]:
    """All outputs not consumed by a spent input, keyed by reference."""
    return {
        ref: output for ref, output in ledger._outputs.items() if ref not in ledger.spent_index
    }


def tx_value_flow(tx: Tx, ledger: Ledger) -> ValueFlow:
    v_in = Wallet.zero()
    for inp in tx.inputs:
        output = ledger.resolve(inp.out_ref)
        if output is None:
            raise UnresolvableInputError(f"Input refers to unknown output {inp.out_ref}")
        if inp.spent:
            v_in = v_in + output.value
    v_out = Wallet.zero()
    for output in tx.outputs:
        v_out = v_out + output.value
    return ValueFlow(v_in, v_out, tx.fee_wallet)


def derive_ctr_id(tx: Tx) -> int:
    """Contract id of a deployment: the hash of its first spent input's reference."""
    for inp in tx.inputs:
        if inp.spent:
            return ctr_id_for(inp.out_ref)
    raise NoSpentInputError("Cannot derive a contract id without a spent input")


def ctr_id_for(ref: OutputRef) -> int:
    return hash_bytes(encode_canonical((ref.tx_id, ref.index)))


def validate_tx(
    tx: Tx,
    ledger: Ledger,
    *,
    available: Wallet | None = None,
    verifier: SignatureVerifier | None = None,
) -> ValidationResult:
    """
    Check the nine validity conditions in order, reporting the first failure.

    Args:
        tx: Transaction to check.
        ledger: Ledger the transaction would be appended to. Never mutated.
        available: Contract balance to use for the account condition instead of
            ``ledger.accounts[tx.ctr_id]`` (the parallel validator passes the
            balance left after freezing earlier batch members' draws).
        verifier: Signature verifier; defaults to the process-wide one.

    Returns:
        ValidationResult naming the failed condition (``"1"`` to ``"9"``,
        ``"7a"``/``"7b"``) when rejected.
    """
    siblings = []
    for i, inp in enumerate(tx.inputs):
        output = ledger.resolve(inp.out_ref)
        if output is None:
            return ValidationResult.reject("1", f"input {i} refers to unknown output {inp.out_ref}")
        if inp.out_ref in ledger.spent_index:
            return ValidationResult.reject("1", f"input {i} refers to spent output {inp.out_ref}")
        siblings.append((inp, output))

    spent_refs = [inp.out_ref for inp in tx.inputs if inp.spent]
    if len(set(spent_refs)) != len(spent_refs):
        return ValidationResult.reject("2", "an output is spent twice")
    if not spent_refs:
        return ValidationResult.reject("3", "no spent input")

    if not tx.validity.contains(ledger.time):
        return ValidationResult.reject(
            "4",
            f"time {ledger.time} outside [{tx.validity.valid_from}, {tx.validity.valid_to}]",
        )

    verifier = verifier or get_signature_verifier()
    for signer in tx.signers:
        if not verifier.verify(signer):
            return ValidationResult.reject("5", f"signature:{signer}")

    ctx = ScriptContext(tx=tx, siblings=tuple(siblings))
    for i, (_, output) in enumerate(siblings):
        if not eval_script(output.validator, ctx.at(i)):
            return ValidationResult.reject("5", f"script:{output.validator.kind}@{i}")

    touches_contract = False
    for i, (inp, output) in enumerate(siblings):
        if output.in_contract:
            touches_contract = True
            if ledger.tx_ctr_id(inp.out_ref.tx_id) != tx.ctr_id:
                return ValidationResult.reject("6", f"input {i} belongs to another contract")

    if not touches_contract:
        if not any(output.in_contract for output in tx.outputs):
            if tx.ctr_id != 0:
                return ValidationResult.reject("7a", "contract id set without contract outputs")
        elif tx.ctr_id != derive_ctr_id(tx):
            return ValidationResult.reject("7b", "contract id is not fresh")

    v_in = Wallet.zero()
    for inp, output in siblings:
        if inp.spent:
            v_in = v_in + output.value
    v_out = Wallet.zero()
    for output in tx.outputs:
        v_out = v_out + output.value
    needed = v_out + tx.fee_wallet

    if tx.ctr_id == 0:
        if not v_in.covers(needed):
            return ValidationResult.reject("8", f"inputs {v_in} do not cover {needed}")
    else:
        balance = available if available is not None else ledger.account(tx.ctr_id)
        if not (v_in + balance).covers(needed):
            return ValidationResult.reject(
                "9", f"inputs {v_in} plus contract balance {balance} do not cover {needed}"
            )

    return ValidationResult.ok()


def apply_tx(ledger: Ledger, tx: Tx) -> Ledger:
    """
    Append a validated transaction, updating spent outputs and the contract account.

    Mutates ``ledger`` in place and returns it.
    """
    spent_refs = [inp.out_ref for inp in tx.inputs if inp.spent]
    for ref in spent_refs:
        if not ledger.is_unspent(ref):
            raise LedgerError(f"Cannot apply transaction: {ref} is not an unspent output")

    flow = tx_value_flow(tx, ledger)
    if tx.ctr_id != 0:
        try:
            ledger.accounts[tx.ctr_id] = (ledger.account(tx.ctr_id) + flow.v_in) - (
                flow.v_out + flow.v_fee
            )
        except InsufficientFundsError as e:
            raise LedgerError(f"Contract account would go negative: {e}") from e

    tx_id = ledger.next_tx_id
    ledger.spent_index.update(spent_refs)
    ledger.txs.append(tx)
    ledger._tx_ctr_ids.append(tx.ctr_id)
    for index, output in enumerate(tx.outputs):
        ledger._outputs[OutputRef(tx_id=tx_id, index=index)] = output
    return ledger


def advance_time(ledger: Ledger, t: int) -> Ledger:
    if t < ledger.time:
        raise TimeRegressionError(f"Cannot move time back from {ledger.time} to {t}")
    ledger.time = t
    return ledger
