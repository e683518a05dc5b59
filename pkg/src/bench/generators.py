"""
Benchmark workload generators.

Each generator drives a ``ChainDriver`` with a seeded ``random.Random`` and
returns the recorded sequence. Transactions are built one after the other
against the state their predecessors left, so operations that would
double-spend a state item instead form a chain of dependent transactions.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Any

import logfire

from compiler.tx_compiler import DeployedContract
from hurf.ast import BVal
from hurf.semantics import ContractState
from ledger.model import TimeInterval
from ledger.serialization import TxSequence
from ledger.wallet import Wallet
from utils.config import BenchConfig, Mode
from utils.crypto import hash_hex

from .centralized import CentralizedCrowdfund
from .chain import ChainDriver
from .contracts import load_benchmark_contract, load_multisig

logger = logging.getLogger(__name__)

TOKEN = 1
OWNER = "owner"


@dataclass(frozen=True)
class Workload:
    """A generated sequence plus what the generator knows about it."""

    benchmark: str
    sequence: TxSequence
    ctr_id: int = 0
    actions: tuple[str, ...] = ()
    params: dict[str, Any] = field(default_factory=dict)
    signatures: int = 0
    driver_stats: dict[str, Any] = field(default_factory=dict)

    @property
    def transactions(self) -> int:
        return len(self.sequence.transactions)


def user_name(i: int) -> str:
    return f"user{i:06d}"


def _finish(benchmark: str, driver: ChainDriver, ctr_id: int, actions: list[str], **params: Any) -> Workload:
    sequence = driver.sequence()
    workload = Workload(
        benchmark=benchmark,
        sequence=sequence,
        ctr_id=ctr_id,
        actions=tuple(actions),
        params=params,
        signatures=sum(len(tx.signers) for tx in sequence.transactions),
        driver_stats=driver.get_stats(),
    )
    logger.info(f"✅ Generated {benchmark} workload: {workload.transactions} transactions")
    return workload


def _invoke(
    driver: ChainDriver,
    deployed: DeployedContract,
    actions: list[str],
    rule: str,
    params: list[BVal],
    **kwargs: Any,
) -> None:
    driver.invoke(deployed, rule, params, **kwargs)
    actions.append(rule)


def gen_crowdfund(
    mode: Mode, users: int, seed: int, config: BenchConfig | None = None
) -> Workload:
    """
    Every donor donates, time passes the refund deadline, every donor is refunded.

    Donor ``i`` gives ``i + 1`` tokens and the goal is ``users``; donation and
    refund orders are shuffled.
    """
    if users < 1:
        raise ValueError(f"users must be at least 1, got {users}")
    config = config or BenchConfig()
    rng = random.Random(seed)
    driver = ChainDriver(fee=config.fee)
    donors = [user_name(i) for i in range(users)]
    amounts = {donor: i + 1 for i, donor in enumerate(donors)}
    donate_order = rng.sample(donors, len(donors))
    refund_order = rng.sample(donors, len(donors))
    actions: list[str] = []

    with logfire.span("bench.generate", benchmark="crowdfund", mode=mode, users=users, seed=seed):
        if mode == "centralized":
            crowdfund = CentralizedCrowdfund(
                driver, OWNER, goal=users, t_wd=config.withdraw_time, t_rf=config.refund_time, token=TOKEN
            )
            crowdfund.deploy()
            for donor in donate_order:
                crowdfund.donate(donor, amounts[donor])
                actions.append("donate")
            driver.tick(config.refund_time)
            for donor in refund_order:
                crowdfund.refund(donor)
                actions.append("refund")
            return _finish("crowdfund", driver, 0, actions, mode=mode, users=users, seed=seed)

        contract = load_benchmark_contract("crowdfund")
        state = ContractState.from_values(
            {"owner": OWNER, "goal": users, "t_wd": config.withdraw_time, "t_rf": config.refund_time}
        )
        deployed = driver.deploy(contract, state)
        for donor in donate_order:
            amount = amounts[donor]
            _invoke(
                driver,
                deployed,
                actions,
                "donate",
                [amount, donor],
                signers=[donor],
                receives=[(donor, Wallet.of(TOKEN, amount))],
            )
        driver.tick(config.refund_time)
        after_refund = TimeInterval(valid_from=config.refund_time)
        for donor in refund_order:
            _invoke(driver, deployed, actions, "refund", [donor], validity=after_refund)
        return _finish("crowdfund", driver, deployed.ctr_id, actions, mode=mode, users=users, seed=seed)


def gen_map(p: float, ops: int, seed: int, config: BenchConfig | None = None) -> Workload:
    """
    ``ops`` increments: with probability ``p`` of point 0, otherwise of a fresh point.

    Fresh points are 1, 2, ... in order.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be within [0, 1], got {p}")
    config = config or BenchConfig()
    rng = random.Random(seed)
    driver = ChainDriver(fee=config.fee)
    actions: list[str] = []

    with logfire.span("bench.generate", benchmark="map", p=p, ops=ops, seed=seed):
        deployed = driver.deploy(load_benchmark_contract("map"))
        fresh = 0
        hot_updates = 0
        for _ in range(ops):
            if rng.random() < p:
                index = 0
                hot_updates += 1
            else:
                fresh += 1
                index = fresh
            _invoke(driver, deployed, actions, "inc", [index, 1])
        return _finish(
            "map", driver, deployed.ctr_id, actions, p=p, ops=ops, seed=seed, hot_updates=hot_updates
        )


def gen_multisig(n: int, ops: int, seed: int, config: BenchConfig | None = None) -> Workload:
    """
    The owner authorizes ``n`` users, then ``ops`` random one-token deposits or withdrawals.

    A deposit is forced while the contract balance is empty. Withdrawals are
    signed by ``n // 2`` distinct authorized users.
    """
    if n < 2 or n % 2:
        raise ValueError(f"n must be even and at least 2, got {n}")
    config = config or BenchConfig()
    rng = random.Random(seed)
    driver = ChainDriver(fee=config.fee)
    users = [user_name(i) for i in range(n)]
    actions: list[str] = []

    with logfire.span("bench.generate", benchmark="multisig", n=n, ops=ops, seed=seed):
        deployed = driver.deploy(load_multisig(n), ContractState.from_values({"owner": OWNER}))
        for user in users:
            _invoke(driver, deployed, actions, "authorize", [user], signers=[OWNER])

        balance = 0
        for _ in range(ops):
            if balance == 0 or rng.random() < 0.5:
                depositor = rng.choice(users)
                _invoke(
                    driver,
                    deployed,
                    actions,
                    "deposit",
                    [1],
                    signers=[depositor],
                    receives=[(depositor, Wallet.of(TOKEN, 1))],
                )
                balance += 1
            else:
                quorum = rng.sample(users, n // 2)
                recipient = rng.choice(users)
                _invoke(driver, deployed, actions, "withdraw", [1, recipient, *quorum], signers=quorum)
                balance -= 1
        return _finish("multisig", driver, deployed.ctr_id, actions, n=n, ops=ops, seed=seed)


def gen_registry(users: int, seed: int, config: BenchConfig | None = None) -> Workload:
    """
    Every user registers a commitment, then claims the name, then owns it after the deadline.

    User ``i`` registers the name ``name-i``; each phase runs in shuffled order.
    """
    if users < 1:
        raise ValueError(f"users must be at least 1, got {users}")
    config = config or BenchConfig()
    rng = random.Random(seed)
    driver = ChainDriver(fee=config.fee)
    deadline = config.refund_time
    names = {user_name(i): f"name-{i}" for i in range(users)}
    actions: list[str] = []
    window = TimeInterval(valid_from=0, valid_to=config.validity_window)
    after_deadline = TimeInterval(valid_from=deadline)

    with logfire.span("bench.generate", benchmark="registry", users=users, seed=seed):
        deployed = driver.deploy(
            load_benchmark_contract("registry"), ContractState.from_values({"deadline": deadline})
        )
        revealed = {user: hash_hex((name,)) for user, name in names.items()}

        for user in rng.sample(list(names), users):
            commitment = hash_hex((revealed[user],))
            _invoke(driver, deployed, actions, "register", [user, commitment], signers=[user], validity=window)
        for user in rng.sample(list(names), users):
            _invoke(driver, deployed, actions, "claim", [user, revealed[user]], signers=[user], validity=window)
        driver.tick(deadline)
        for user in rng.sample(list(names), users):
            _invoke(driver, deployed, actions, "own", [user, revealed[user]], signers=[user], validity=after_deadline)
        return _finish("registry", driver, deployed.ctr_id, actions, users=users, seed=seed)
