"""
Reference interpreter for contract configurations.

A configuration holds contract instances (checked contract, state, balance),
user deposits and the current time. ``hurf_step`` performs one action
atomically: every amount, condition and right-hand side is evaluated in the
old state, then all writes, transfers and deposit changes happen at once. A
failed action raises and leaves the configuration untouched.

This interpreter is the oracle the compiled on-chain contracts are tested
against.
"""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace

from ledger.model import TimeInterval
from ledger.wallet import NATIVE_TOKEN, InsufficientFundsError, Wallet

from .ast import AssignMap, AssignVar, BVal, Send, is_default, same_value
from .checker import CheckedContract
from .evaluator import Environment, HurfRuntimeError, eval_amount, eval_expr, render, render_point


class StepError(RuntimeError):
    """An action could not be performed."""


class PreconditionFailedError(StepError):
    pass


class InsufficientBalanceError(StepError):
    pass


class DepositMismatchError(StepError):
    pass


class InsufficientFundingError(StepError):
    pass


@dataclass(frozen=True)
class ContractState:
    """
    Contract state with default-0 semantics.

    Map points are keyed by their rendered form (``toStr`` of the indices), so
    two points render the same exactly when they share a state key on chain.
    Only non-default values are stored.
    """

    vars: Mapping[str, BVal] = field(default_factory=dict)
    maps: Mapping[str, Mapping[str, BVal]] = field(default_factory=dict)

    def var(self, name: str) -> BVal:
        return self.vars.get(name, 0)

    def map_value(self, map_name: str, point: tuple[BVal, ...]) -> BVal:
        return self.maps.get(map_name, {}).get(render_point(point), 0)

    def with_writes(
        self, var_writes: Mapping[str, BVal], map_writes: Mapping[tuple[str, str], BVal]
    ) -> "ContractState":
        new_vars = dict(self.vars)
        for name, value in var_writes.items():
            if is_default(value):
                new_vars.pop(name, None)
            else:
                new_vars[name] = value
        new_maps = {name: dict(points) for name, points in self.maps.items()}
        for (map_name, key), value in map_writes.items():
            points = new_maps.setdefault(map_name, {})
            if is_default(value):
                points.pop(key, None)
            else:
                points[key] = value
        return ContractState(new_vars, {name: pts for name, pts in new_maps.items() if pts})

    @classmethod
    def from_values(
        cls,
        vars: Mapping[str, BVal] | None = None,
        maps: Mapping[str, Mapping[tuple[BVal, ...] | BVal, BVal]] | None = None,
    ) -> "ContractState":
        """Build a state from plain values; map points may be tuples or single indices."""
        var_writes = dict(vars or {})
        map_writes: dict[tuple[str, str], BVal] = {}
        for map_name, points in (maps or {}).items():
            for point, value in points.items():
                key = render_point(point if isinstance(point, tuple) else (point,))
                map_writes[(map_name, key)] = value
        return cls().with_writes(var_writes, map_writes)

    @classmethod
    def initial(cls, contract: CheckedContract) -> "ContractState":
        """Declared initial values of a contract's variables."""
        return cls.from_values({d.name: d.init for d in contract.contract.var_decls if d.init is not None})


@dataclass
class StateEnvironment(Environment):
    state: ContractState = field(default_factory=ContractState)

    def read_var(self, name: str) -> BVal:
        return self.state.var(name)

    def read_map(self, map_name: str, point: tuple[BVal, ...]) -> BVal:
        return self.state.map_value(map_name, point)


@dataclass(frozen=True)
class Deposit:
    owner: str
    wallet: Wallet


@dataclass(frozen=True)
class Instance:
    contract: CheckedContract
    state: ContractState
    balance: Wallet


@dataclass(frozen=True)
class Action:
    ctr_id: int
    rule: str
    params: tuple[BVal, ...] = ()
    signers: tuple[str, ...] = ()
    receive_deposits: tuple[str, ...] = ()
    fee_deposit: str = ""
    validity: TimeInterval = field(default_factory=TimeInterval.unbounded)


@dataclass(frozen=True)
class Configuration:
    instances: Mapping[int, Instance] = field(default_factory=dict)
    deposits: Mapping[str, Deposit] = field(default_factory=dict)
    time: int = 0
    next_deposit: int = 0

    def with_deposit(self, name: str, owner: str, wallet: Wallet) -> "Configuration":
        if name in self.deposits:
            raise DepositMismatchError(f"deposit {name!r} already exists")
        return replace(self, deposits={**self.deposits, name: Deposit(owner, wallet)})

    def at_time(self, t: int) -> "Configuration":
        if t < self.time:
            raise StepError(f"cannot move time back from {self.time} to {t}")
        return replace(self, time=t)

    def total_value(self) -> Wallet:
        total = Wallet.zero()
        for deposit in self.deposits.values():
            total = total + deposit.wallet
        for instance in self.instances.values():
            total = total + instance.balance
        return total


def _take_deposits(
    conf: Configuration, names: Sequence[str], signers: Sequence[str]
) -> list[Deposit]:
    if len(set(names)) != len(names):
        raise DepositMismatchError("a deposit is named twice")
    taken = []
    for name in names:
        deposit = conf.deposits.get(name)
        if deposit is None:
            raise DepositMismatchError(f"unknown deposit {name!r}")
        if deposit.owner not in signers:
            raise DepositMismatchError(f"owner of deposit {name!r} did not sign")
        taken.append(deposit)
    return taken


def _fee_amount(deposit: Deposit, name: str) -> int:
    if deposit.wallet.tokens() - {NATIVE_TOKEN}:
        raise DepositMismatchError(f"fee deposit {name!r} holds non-native tokens")
    return deposit.wallet.amount(NATIVE_TOKEN)


def hurf_step(conf: Configuration, action: Action) -> Configuration:
    """
    Perform one contract action.

    Raises:
        StepError: Unknown instance or rule, or wrong number of parameters.
        PreconditionFailedError: Time outside the validity interval or require false.
        DepositMismatchError: Deposits missing, unsigned or not matching receive amounts.
        InsufficientBalanceError: Sends exceed balance plus received funds.
        HurfRuntimeError: Evaluation errors.
    """
    instance = conf.instances.get(action.ctr_id)
    if instance is None:
        raise StepError(f"no contract instance {action.ctr_id}")
    info = instance.contract.rule_info(action.rule)
    if info is None:
        raise StepError(f"contract {instance.contract.name} has no rule {action.rule!r}")
    rule = info.rule
    if len(action.params) != len(rule.params):
        raise StepError(f"rule {rule.name} expects {len(rule.params)} parameters")
    if not action.validity.contains(conf.time):
        raise PreconditionFailedError(f"time {conf.time} outside the action's validity")

    env = StateEnvironment(
        params=dict(zip(rule.params, action.params)),
        signers=frozenset(action.signers),
        valid_from=action.validity.valid_from,
        valid_to=action.validity.valid_to,
        state=instance.state,
    )

    received_amounts = [(eval_amount(r.amount, env), r.token) for r in rule.receives]
    if len(action.receive_deposits) != len(received_amounts):
        raise DepositMismatchError(
            f"rule {rule.name} needs {len(received_amounts)} receive deposits, "
            f"got {len(action.receive_deposits)}"
        )
    names = [*action.receive_deposits, action.fee_deposit]
    deposits = _take_deposits(conf, names, action.signers)
    received = Wallet.zero()
    for name, deposit, (amount, token) in zip(action.receive_deposits, deposits, received_amounts):
        expected = Wallet.of(token, amount)
        if deposit.wallet != expected:
            raise DepositMismatchError(f"deposit {name!r} holds {deposit.wallet}, expected {expected}")
        received = received + expected
    _fee_amount(deposits[-1], action.fee_deposit)

    if rule.require is not None:
        condition = eval_expr(rule.require, env)
        if type(condition) is not bool:
            raise HurfRuntimeError(f"require evaluated to non-boolean {render(condition)!r}")
        if not condition:
            raise PreconditionFailedError(f"require of {rule.name} is false")

    var_writes: dict[str, BVal] = {}
    map_writes: dict[tuple[str, str], BVal] = {}
    sends: list[tuple[str, Wallet]] = []
    for statement in rule.effects:
        match statement:
            case AssignVar(name=name, value=value):
                var_writes[name] = eval_expr(value, env)
            case AssignMap(map_name=map_name, args=args, value=value):
                key = (map_name, render_point(tuple(eval_expr(arg, env) for arg in args)))
                new_value = eval_expr(value, env)
                if key in map_writes and not same_value(map_writes[key], new_value):
                    raise HurfRuntimeError(f"conflicting writes to {map_name}[{key[1]}]")
                map_writes[key] = new_value
            case Send(recipient=recipient, amount=amount, token=token):
                target = eval_expr(recipient, env)
                if type(target) is not str:
                    raise HurfRuntimeError(f"send recipient must be a string, got {render(target)!r}")
                sends.append((target, Wallet.of(token, eval_amount(amount, env))))

    sent = Wallet.zero()
    for _, wallet in sends:
        sent = sent + wallet
    try:
        balance = (instance.balance + received) - sent
    except InsufficientFundsError as e:
        raise InsufficientBalanceError(f"contract cannot pay {sent}: {e}") from e

    new_deposits = {name: d for name, d in conf.deposits.items() if name not in names}
    counter = conf.next_deposit
    for recipient, wallet in sends:
        new_deposits[f"d{counter}"] = Deposit(recipient, wallet)
        counter += 1

    new_instance = Instance(instance.contract, instance.state.with_writes(var_writes, map_writes), balance)
    return replace(
        conf,
        instances={**conf.instances, action.ctr_id: new_instance},
        deposits=new_deposits,
        next_deposit=counter,
    )


def hurf_deploy(
    conf: Configuration,
    contract: CheckedContract,
    initial_state: ContractState | None,
    balance: Wallet,
    funding_deposits: Sequence[str],
    fee: int,
    *,
    signers: Sequence[str] | None = None,
    ctr_id: int | None = None,
) -> tuple[Configuration, int]:
    """
    Add a new contract instance funded by user deposits.

    The funding deposits must add up to exactly ``balance`` plus ``fee`` native
    units; the fee is burned. Returns the new configuration and the instance id.

    Raises:
        InsufficientFundingError: Deposits do not cover ``balance + fee``.
        DepositMismatchError: Unknown or unsigned deposits, or surplus funding.
    """
    if ctr_id is None:
        ctr_id = max(conf.instances, default=0) + 1
    elif ctr_id in conf.instances:
        raise StepError(f"contract instance {ctr_id} already exists")
    owners = signers if signers is not None else [conf.deposits[n].owner for n in funding_deposits if n in conf.deposits]
    deposits = _take_deposits(conf, list(funding_deposits), owners)
    funded = Wallet.zero()
    for deposit in deposits:
        funded = funded + deposit.wallet
    needed = balance + Wallet.of(NATIVE_TOKEN, fee)
    if not funded.covers(needed):
        raise InsufficientFundingError(f"deposits hold {funded}, deployment needs {needed}")
    if funded != needed:
        raise DepositMismatchError(f"deposits hold {funded}, more than the {needed} needed")

    state = initial_state if initial_state is not None else ContractState.initial(contract)
    return (
        replace(
            conf,
            instances={**conf.instances, ctr_id: Instance(contract, state, balance)},
            deposits={name: d for name, d in conf.deposits.items() if name not in funding_deposits},
        ),
        ctr_id,
    )
