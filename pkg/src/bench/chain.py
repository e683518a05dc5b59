"""
Shadow chain used to build workloads.

``ChainDriver`` owns a ledger and the off-chain views of the contracts it
deployed. Every transaction it builds is validated and applied before the
next one is built, so generated sequences are valid by construction and each
transaction sees the state left by its predecessors.
"""

import logging
from collections.abc import Sequence
from datetime import UTC, datetime
from typing import Any

from compiler.tx_compiler import DeployedContract, StaleStateError, compile_deploy, compile_invoke
from hurf.ast import BVal
from hurf.checker import CheckedContract
from hurf.semantics import ContractState
from ledger.core import Ledger, advance_time, apply_tx, validate_tx
from ledger.model import Event, Output, OutputRef, PkLock, Tick, TimeInterval, Tx
from ledger.serialization import TxSequence
from ledger.wallet import NATIVE_TOKEN, Wallet
from utils.crypto import SignatureVerifier
from utils.retry import create_stale_state_retry

logger = logging.getLogger(__name__)

FEE_WALLET = "fees"


class GenerationError(RuntimeError):
    """A transaction built for a workload was rejected by the shadow ledger."""


class ChainDriver:
    """
    Builds, checks and records the events of one workload.

    Fees are paid from deposits owned by ``FEE_WALLET``, minted in genesis on
    demand together with the users' deposits.
    """

    def __init__(self, fee: int = 1, verifier: SignatureVerifier | None = None):
        self.ledger = Ledger()
        self.events: list[Event] = []
        self.fee = fee
        self.verifier = verifier or SignatureVerifier()
        self.contracts: dict[int, DeployedContract] = {}
        self.stats: dict[str, Any] = {
            "started_at": datetime.now(UTC),
            "minted": 0,
            "deployments": 0,
            "invocations": 0,
            "ticks": 0,
            "stale_rebuilds": 0,
        }

    def mint(self, owner: str, value: Wallet) -> OutputRef:
        """Mint a deposit for ``owner`` into the genesis transaction."""
        self.stats["minted"] += 1
        return self.ledger.mint(Output(value=value, validator=PkLock(pubkey=owner)))

    def fee_deposit(self) -> OutputRef:
        return self.mint(FEE_WALLET, Wallet.of(NATIVE_TOKEN, self.fee))

    def submit(self, tx: Tx) -> int:
        """
        Validate and append ``tx``; returns its transaction id.

        Raises:
            GenerationError: The shadow ledger rejects the transaction.
        """
        result = validate_tx(tx, self.ledger, verifier=self.verifier)
        if not result.accepted:
            raise GenerationError(
                f"Generated transaction {len(self.events)} rejected by condition "
                f"{result.failed_condition}: {result.detail}"
            )
        tx_id = self.ledger.next_tx_id
        apply_tx(self.ledger, tx)
        self.events.append(tx)
        for deployed in self.contracts.values():
            deployed.observe(tx, tx_id)
        return tx_id

    def tick(self, time: int) -> None:
        advance_time(self.ledger, time)
        self.events.append(Tick(time=time))
        self.stats["ticks"] += 1

    def deploy(
        self,
        contract: CheckedContract,
        initial_state: ContractState | None = None,
        balance: Wallet | None = None,
        owner: str = FEE_WALLET,
    ) -> DeployedContract:
        """Deploy ``contract``; a non-zero ``balance`` is funded from a deposit of ``owner``."""
        balance = balance or Wallet.zero()
        fee_ref = self.fee_deposit()
        funding = [] if balance.is_zero() else [self.mint(owner, balance)]
        tx = compile_deploy(self.ledger, contract, initial_state, balance, fee_ref, funding)
        tx_id = self.submit(tx)
        deployed = DeployedContract.from_deployment(contract, tx, tx_id)
        self.contracts[deployed.ctr_id] = deployed
        self.stats["deployments"] += 1
        logger.debug(f"Deployed {contract.name} as {deployed.ctr_id:#x} in transaction {tx_id}")
        return deployed

    def invoke(
        self,
        deployed: DeployedContract,
        rule: str,
        params: Sequence[BVal],
        signers: Sequence[str] = (),
        receives: Sequence[tuple[str, Wallet]] = (),
        validity: TimeInterval | None = None,
    ) -> Tx:
        """
        Invoke ``rule`` on ``deployed``, minting the deposits it needs.

        Args:
            deployed: Target contract.
            rule: Rule name.
            params: Actual parameters.
            signers: Users signing the invocation; the fee wallet is added.
            receives: ``(owner, wallet)`` per receive precondition, in order.
            validity: Validity interval; unbounded when omitted.

        Returns:
            The appended transaction.
        """
        receive_refs = [self.mint(owner, wallet) for owner, wallet in receives]
        fee_ref = self.fee_deposit()
        all_signers = tuple(dict.fromkeys([*signers, FEE_WALLET]))

        def resync(_: Any) -> None:
            self.stats["stale_rebuilds"] += 1
            deployed.sync(self.ledger)

        for attempt in create_stale_state_retry(StaleStateError, on_retry=resync):
            with attempt:
                tx = compile_invoke(
                    self.ledger, deployed, rule, params, all_signers, receive_refs, fee_ref, validity
                )
        self.submit(tx)
        self.stats["invocations"] += 1
        return tx

    def sequence(self) -> TxSequence:
        """The genesis outputs and events recorded so far."""
        return TxSequence(genesis=tuple(self.ledger.genesis), events=tuple(self.events))

    def get_stats(self) -> dict[str, Any]:
        stats = self.stats.copy()
        runtime = datetime.now(UTC) - stats["started_at"]
        stats["runtime_seconds"] = runtime.total_seconds()
        stats["events"] = len(self.events)
        stats["signatures_verified"] = self.verifier.verified
        return stats
