"""
Centralized crowdfund baseline.

The whole donor map lives in the datum of one plain (non-contract) output
that also holds the donated tokens. Every action spends that output and
recreates it with the updated map, so transaction size grows with the number
of donors. The covenant ``check_centralized_crowdfund`` enforces the same
rules as the distributed crowdfund contract.

Datum layout: ``((donor, amount), ...)`` sorted by donor, amounts positive.
Redeemers: ``("donate", donor, amount)``, ``("withdraw", amount)`` and
``("refund", donor)``.
"""

import logging
from typing import Any

from ledger.model import CentralizedCrowdfundScript, Input, Output, OutputRef, PkLock, TimeInterval, Tx
from ledger.scripts import ScriptContext
from ledger.wallet import Wallet

from .chain import FEE_WALLET, ChainDriver

logger = logging.getLogger(__name__)

DonorMap = dict[str, int]


def encode_donors(donors: DonorMap) -> tuple[tuple[str, int], ...]:
    return tuple(sorted((donor, amount) for donor, amount in donors.items() if amount))


def decode_donors(datum: tuple[Any, ...]) -> DonorMap:
    donors: DonorMap = {}
    previous: str | None = None
    for entry in datum:
        donor, amount = entry
        if type(donor) is not str or type(amount) is not int or amount <= 0:
            raise ValueError(f"malformed donor entry {entry!r}")
        if previous is not None and donor <= previous:
            raise ValueError("donor entries are not strictly sorted")
        donors[donor] = amount
        previous = donor
    return donors


def _pays(output: Output, recipient: str, wallet: Wallet) -> bool:
    return (
        not output.in_contract
        and isinstance(output.validator, PkLock)
        and output.validator.pubkey == recipient
        and output.value == wallet
        and output.datum == ()
    )


def check_centralized_crowdfund(script: CentralizedCrowdfundScript, ctx: ScriptContext) -> bool:
    """
    Covenant of the crowdfund output.

    The spending transaction must recreate the output (same script) as its
    first output, with the datum and value the redeemer's action produces;
    withdrawals and refunds pay out through the second output.
    """
    inp, current = ctx.self_input, ctx.self_output
    tx = ctx.tx
    if not inp.spent or not inp.redeemer or not tx.outputs:
        return False
    successor = tx.outputs[0]
    if successor.validator != script or successor.in_contract:
        return False

    donors = decode_donors(current.datum)
    balance = current.value.amount(script.token)
    validity = tx.validity

    match inp.redeemer:
        case ("donate", str(donor), int(amount)) if type(amount) is int and amount > 0:
            if donor not in tx.signers:
                return False
            donors[donor] = donors.get(donor, 0) + amount
            expected_value, payouts = balance + amount, []
        case ("withdraw", int(amount)) if type(amount) is int:
            if script.owner not in tx.signers or amount < script.goal or amount > balance:
                return False
            if validity.valid_from < script.t_wd or validity.valid_to >= script.t_rf:
                return False
            expected_value, payouts = balance - amount, [(script.owner, amount)]
        case ("refund", str(donor)):
            if validity.valid_from < script.t_rf:
                return False
            amount = donors.pop(donor, 0)
            expected_value, payouts = balance - amount, [(donor, amount)]
        case _:
            return False

    if successor.datum != encode_donors(donors):
        return False
    if successor.value != Wallet.of(script.token, expected_value):
        return False
    if len(tx.outputs) != 1 + len(payouts):
        return False
    return all(
        _pays(output, recipient, Wallet.of(script.token, amount))
        for output, (recipient, amount) in zip(tx.outputs[1:], payouts)
    )


class CentralizedCrowdfund:
    """Builds the centralized crowdfund's transactions on a ``ChainDriver``."""

    def __init__(
        self,
        driver: ChainDriver,
        owner: str,
        goal: int,
        t_wd: int,
        t_rf: int,
        token: int = 1,
    ):
        self.driver = driver
        self.script = CentralizedCrowdfundScript(owner=owner, goal=goal, t_wd=t_wd, t_rf=t_rf, token=token)
        self.donors: DonorMap = {}
        self.balance = 0
        self.ref: OutputRef | None = None

    def _output(self) -> Output:
        return Output(
            value=Wallet.of(self.script.token, self.balance),
            validator=self.script,
            datum=encode_donors(self.donors),
        )

    def _submit(
        self,
        inputs: list[Input],
        payouts: list[tuple[str, int]],
        signers: list[str],
        validity: TimeInterval,
    ) -> Tx:
        fee_ref = self.driver.fee_deposit()
        outputs = [self._output()] + [
            Output(value=Wallet.of(self.script.token, amount), validator=PkLock(pubkey=recipient))
            for recipient, amount in payouts
        ]
        tx = Tx(
            inputs=(Input(out_ref=fee_ref), *inputs),
            outputs=tuple(outputs),
            signers=tuple(dict.fromkeys([*signers, FEE_WALLET])),
            validity=validity,
            fee=self.driver.fee,
        )
        tx_id = self.driver.submit(tx)
        self.ref = OutputRef(tx_id=tx_id, index=0)
        return tx

    def _spend(self, redeemer: tuple[Any, ...]) -> Input:
        if self.ref is None:
            raise RuntimeError("Crowdfund output has not been created yet")
        return Input(out_ref=self.ref, redeemer=redeemer)

    def deploy(self) -> Tx:
        return self._submit([], [], [], TimeInterval.unbounded())

    def donate(self, donor: str, amount: int) -> Tx:
        spend = self._spend(("donate", donor, amount))
        deposit = self.driver.mint(donor, Wallet.of(self.script.token, amount))
        self.donors[donor] = self.donors.get(donor, 0) + amount
        self.balance += amount
        return self._submit([spend, Input(out_ref=deposit)], [], [donor], TimeInterval.unbounded())

    def withdraw(self, amount: int, validity: TimeInterval) -> Tx:
        spend = self._spend(("withdraw", amount))
        self.balance -= amount
        return self._submit([spend], [(self.script.owner, amount)], [self.script.owner], validity)

    def refund(self, donor: str) -> Tx:
        spend = self._spend(("refund", donor))
        amount = self.donors.pop(donor, 0)
        self.balance -= amount
        return self._submit([spend], [(donor, amount)], [], TimeInterval(valid_from=self.script.t_rf))
