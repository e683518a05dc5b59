"""
Conflict-free prefixes of a transaction sequence.

Within a batch no transaction may spend an output another member spends or
reads, read an output another member spends, or touch an output created in
the batch. Contract balances are frozen conservatively: each member's draw
(the positive part of what it takes out of the contract account) is
reserved up front, and surpluses only become available after commit.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

from ledger.core import Ledger
from ledger.model import Event, OutputRef, Tick, Tx
from ledger.wallet import Wallet

logger = logging.getLogger(__name__)


def tx_draw(tx: Tx, ledger: Ledger) -> Wallet:
    """Per-token amount a contract transaction takes from its account."""
    if tx.ctr_id == 0:
        return Wallet.zero()
    v_in = Wallet.zero()
    v_out = Wallet.zero()
    for inp in tx.inputs:
        output = ledger.resolve(inp.out_ref)
        if inp.spent and output is not None:
            v_in = v_in + output.value
    for output in tx.outputs:
        v_out = v_out + output.value
    return (v_out + tx.fee_wallet).excess_over(v_in)


@dataclass
class BatchState:
    snapshot: Ledger
    spent: set[OutputRef] = field(default_factory=set)
    read: set[OutputRef] = field(default_factory=set)
    created: set[OutputRef] = field(default_factory=set)
    frozen: dict[int, Wallet] = field(default_factory=dict)
    available: dict[int, Wallet] = field(default_factory=dict)
    next_tx_id: int = 0

    def __post_init__(self) -> None:
        if not self.next_tx_id:
            self.next_tx_id = self.snapshot.next_tx_id

    def free_balance(self, ctr_id: int) -> Wallet:
        frozen = self.frozen.get(ctr_id)
        balance = self.snapshot.account(ctr_id)
        return balance - frozen if frozen is not None else balance

    def admit(self, position: int, tx: Tx) -> None:
        """Record ``tx`` (at sequence position ``position``) as a batch member."""
        for inp in tx.inputs:
            (self.spent if inp.spent else self.read).add(inp.out_ref)
        self.created.update(OutputRef(tx_id=self.next_tx_id, index=i) for i in range(len(tx.outputs)))
        self.next_tx_id += 1
        if tx.ctr_id != 0:
            self.available[position] = self.free_balance(tx.ctr_id)
            draw = tx_draw(tx, self.snapshot)
            # an uncovered draw is rejected by the account condition, nothing to reserve
            if not draw.is_zero() and self.available[position].covers(draw):
                self.frozen[tx.ctr_id] = self.frozen.get(tx.ctr_id, Wallet.zero()) + draw


def conflicts_with(tx: Tx, batch: BatchState) -> bool:
    snapshot_height = batch.snapshot.next_tx_id
    for inp in tx.inputs:
        ref = inp.out_ref
        if ref.tx_id >= snapshot_height or ref in batch.created:
            return True
        if ref in batch.spent:
            return True
        if inp.spent and ref in batch.read:
            return True
    if tx.ctr_id != 0:
        return not batch.free_balance(tx.ctr_id).covers(tx_draw(tx, batch.snapshot))
    return False


class Prefix(NamedTuple):
    positions: list[int]
    batch: BatchState
    end: int
    conflict: bool


def conflict_free_prefix(seq: Sequence[Event], ledger: Ledger, from_index: int) -> Prefix:
    """
    Longest run of transactions from ``from_index`` that can be validated together.

    The first transaction is always admitted. Stops before the first one that
    conflicts with the accumulated batch, at a tick, or at the end of the
    sequence. ``end`` is the index where the next prefix starts and
    ``conflict`` tells whether a conflict stopped it.
    """
    batch = BatchState(snapshot=ledger)
    positions: list[int] = []
    index = from_index
    while index < len(seq):
        event = seq[index]
        if isinstance(event, Tick):
            return Prefix(positions, batch, index, False)
        if positions and conflicts_with(event, batch):
            return Prefix(positions, batch, index, True)
        batch.admit(index, event)
        positions.append(index)
        index += 1
    return Prefix(positions, batch, index, False)
