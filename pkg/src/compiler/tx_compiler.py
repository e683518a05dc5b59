"""
Building deployment and rule-invocation transactions.

An invocation transaction is laid out as::

    inputs:  logic output of the rule (read, redeemer = params)
             fee deposit (spent)
             read witnesses, one per distinct read key in ascending hash order (read)
             one deposit per receive, holding exactly the received amount (spent)
             state items consumed by the update (spent)
    outputs: one PkLock output per send
             state items produced by the update

The same evaluation (``resolve_invocation``) is used when building a
transaction from the full state and when checking one from its witnesses,
so builder and checker cannot drift apart.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import logfire

from hurf.ast import BVal, Send, same_value
from hurf.checker import CheckedContract, MapKey, RuleInfo, StateKeyExpr, VarKey, load_contract
from hurf.evaluator import Environment, HurfRuntimeError, eval_amount, eval_expr, render
from hurf.semantics import ContractState
from ledger.core import Ledger, ctr_id_for
from ledger.model import (
    LOGIC_TAG,
    Input,
    LogicScript,
    Output,
    OutputRef,
    PkLock,
    TimeInterval,
    Tx,
)
from ledger.wallet import NATIVE_TOKEN, Wallet

from .state_codec import (
    StateIndex,
    StateItem,
    encode_state_outputs,
    flatten_state,
    gen_inputs,
    gen_outputs,
    item_from_output,
    item_to_output,
    map_key_hash,
    var_key_hash,
)

logger = logging.getLogger(__name__)

LOGIC_DATUM = (LOGIC_TAG,)


class CompileError(RuntimeError):
    """A transaction could not be built."""


class RulePreconditionError(CompileError):
    """The rule's require clause is false in the current state."""


class DeploymentError(CompileError):
    pass


class StaleStateError(CompileError):
    """Some contract outputs the transaction needs were already spent."""

    def __init__(self, stale_refs: Sequence[OutputRef]):
        self.stale_refs = tuple(stale_refs)
        super().__init__(f"{len(self.stale_refs)} stale contract refs: {', '.join(map(str, self.stale_refs))}")


@dataclass
class FlatEnvironment(Environment):
    """Environment reading contract state by state-key hash."""

    reader: Callable[[int], BVal] = lambda h: 0

    def read_var(self, name: str) -> BVal:
        return self.reader(var_key_hash(name))

    def read_map(self, map_name: str, point: tuple[BVal, ...]) -> BVal:
        return self.reader(map_key_hash(map_name, point))


@dataclass(frozen=True)
class Invocation:
    """Everything a rule invocation evaluates to under one environment."""

    read_hashes: tuple[int, ...]
    receives: tuple[tuple[int, int], ...]
    require: bool
    sends: tuple[tuple[str, int, int], ...]
    updates: tuple[tuple[int, BVal], ...]

    def receive_wallets(self) -> list[Wallet]:
        return [Wallet.of(token, amount) for amount, token in self.receives]

    def send_outputs(self) -> list[Output]:
        return [send_output(recipient, Wallet.of(token, amount)) for recipient, amount, token in self.sends]


def send_output(recipient: str, value: Wallet) -> Output:
    return Output(value=value, validator=PkLock(pubkey=recipient))


def key_hash(key: StateKeyExpr, env: Environment) -> int:
    match key:
        case VarKey(name=name):
            return var_key_hash(name)
        case MapKey(map_name=map_name, args=args):
            return map_key_hash(map_name, tuple(eval_expr(arg, env) for arg in args))
    raise TypeError(f"Not a state key: {key!r}")


def resolve_invocation(info: RuleInfo, env: Environment) -> Invocation:
    """
    Evaluate a rule's read keys, amounts, condition, sends and writes.

    Raises:
        HurfRuntimeError: On evaluation errors or conflicting writes to one key.
    """
    rule = info.rule
    read_hashes = tuple(sorted({key_hash(key, env) for key in info.reads}))
    receives = tuple((eval_amount(r.amount, env), r.token) for r in rule.receives)

    require = True
    if rule.require is not None:
        value = eval_expr(rule.require, env)
        if type(value) is not bool:
            raise HurfRuntimeError(f"require evaluated to non-boolean {render(value)!r}")
        require = value

    sends = []
    for statement in rule.effects:
        if isinstance(statement, Send):
            recipient = eval_expr(statement.recipient, env)
            if type(recipient) is not str:
                raise HurfRuntimeError(f"send recipient must be a string, got {render(recipient)!r}")
            sends.append((recipient, eval_amount(statement.amount, env), statement.token))

    updates: dict[int, BVal] = {}
    for key, expr in info.writes:
        h = key_hash(key, env)
        value = eval_expr(expr, env)
        if h in updates and not same_value(updates[h], value):
            raise HurfRuntimeError("conflicting writes to one state key")
        updates[h] = value

    return Invocation(read_hashes, receives, require, tuple(sends), tuple(sorted(updates.items())))


@dataclass(frozen=True)
class CompiledRule:
    contract: CheckedContract
    info: RuleInfo
    script: LogicScript

    @property
    def name(self) -> str:
        return self.info.rule.name

    @property
    def params(self) -> tuple[str, ...]:
        return self.info.rule.params

    def environment(
        self,
        params: Sequence[BVal],
        signers: Sequence[str],
        validity: TimeInterval,
        reader: Callable[[int], BVal],
    ) -> FlatEnvironment:
        if len(params) != len(self.params):
            raise CompileError(f"rule {self.name} expects {len(self.params)} parameters, got {len(params)}")
        return FlatEnvironment(
            params=dict(zip(self.params, params)),
            signers=frozenset(signers),
            valid_from=validity.valid_from,
            valid_to=validity.valid_to,
            reader=reader,
        )


def compile_rule(contract: CheckedContract, rule_name: str) -> CompiledRule:
    info = contract.rule_info(rule_name)
    if info is None:
        raise CompileError(f"contract {contract.name} has no rule {rule_name!r}")
    return CompiledRule(contract, info, LogicScript(source=contract.source, rule=rule_name))


@dataclass
class DeployedContract:
    """
    Off-chain view of a deployed contract: its logic outputs and current state items.

    The state index is kept in step with the ledger by ``observe``/``sync``;
    ``synced_height`` is the first transaction id not yet observed.
    """

    ctr_id: int
    contract: CheckedContract
    logic_refs: dict[str, OutputRef]
    state: StateIndex
    synced_height: int
    _rules: dict[str, CompiledRule] = field(default_factory=dict, repr=False)

    @classmethod
    def from_deployment(cls, contract: CheckedContract, tx: Tx, tx_id: int) -> "DeployedContract":
        deployed = cls(tx.ctr_id, contract, {}, StateIndex(), tx_id)
        deployed.observe(tx, tx_id)
        return deployed

    @classmethod
    def from_ledger(cls, ledger: Ledger, ctr_id: int) -> "DeployedContract":
        """Rebuild the view of contract ``ctr_id`` by scanning the ledger."""
        deployed: DeployedContract | None = None
        for tx_id in range(1, ledger.next_tx_id):
            tx = ledger.tx(tx_id)
            if tx.ctr_id != ctr_id:
                continue
            if deployed is None:
                script = next(
                    (o.validator for o in tx.outputs if isinstance(o.validator, LogicScript)), None
                )
                if script is None:
                    raise CompileError(f"first transaction of contract {ctr_id:#x} has no logic output")
                deployed = cls(ctr_id, load_contract(script.source), {}, StateIndex(), tx_id)
            deployed.observe(tx, tx_id)
        if deployed is None:
            raise CompileError(f"no contract with id {ctr_id:#x} on the ledger")
        deployed.synced_height = ledger.next_tx_id
        return deployed

    def observe(self, tx: Tx, tx_id: int) -> None:
        if tx_id >= self.synced_height:
            self.synced_height = tx_id + 1
        if tx.ctr_id != self.ctr_id:
            return
        for inp in tx.inputs:
            if inp.spent:
                self.state.remove_ref(inp.out_ref)
        for index, output in enumerate(tx.outputs):
            ref = OutputRef(tx_id=tx_id, index=index)
            if isinstance(output.validator, LogicScript) and output.datum == LOGIC_DATUM:
                self.logic_refs[output.validator.rule] = ref
                continue
            item = item_from_output(output)
            if item is not None:
                self.state.add(item, ref)

    def sync(self, ledger: Ledger) -> None:
        for tx_id in range(self.synced_height, ledger.next_tx_id):
            self.observe(ledger.tx(tx_id), tx_id)

    def compiled_rule(self, name: str) -> CompiledRule:
        if name not in self._rules:
            self._rules[name] = compile_rule(self.contract, name)
        return self._rules[name]

    def items(self) -> list[StateItem]:
        return self.state.items

    def read(self, h: int) -> BVal:
        return self.state.lookup(h)[0]


def _deposit(ledger: Ledger, ref: OutputRef, role: str) -> Output:
    output = ledger.resolve(ref)
    if output is None or not ledger.is_unspent(ref):
        raise CompileError(f"{role} {ref} is not an unspent output")
    if output.in_contract:
        raise CompileError(f"{role} {ref} is a contract output")
    return output


def _native_fee(output: Output, ref: OutputRef) -> int:
    if output.value.tokens() - {NATIVE_TOKEN}:
        raise CompileError(f"fee deposit {ref} holds non-native tokens: {output.value}")
    return output.value.amount(NATIVE_TOKEN)


def _default_signers(outputs: Sequence[Output]) -> tuple[str, ...]:
    owners = [o.validator.pubkey for o in outputs if isinstance(o.validator, PkLock)]
    return tuple(dict.fromkeys(owners))


def compile_deploy(
    ledger: Ledger,
    contract: CheckedContract,
    initial_state: ContractState | None,
    balance: Wallet,
    fee_deposit: OutputRef,
    funding_deposits: Sequence[OutputRef] = (),
    *,
    signers: Sequence[str] | None = None,
    validity: TimeInterval | None = None,
) -> Tx:
    """
    Build the transaction deploying ``contract``.

    The fee deposit is the first spent input, so the new contract id is the
    hash of its reference. Funding deposits must add up to exactly ``balance``.

    Raises:
        DeploymentError: Fee deposit is a contract output, or funding does not
            match ``balance``.
    """
    with logfire.span("compiler.compile_deploy", contract=contract.name, rules=len(contract.infos)):
        try:
            fee_output = _deposit(ledger, fee_deposit, "fee deposit")
            fee = _native_fee(fee_output, fee_deposit)
            funding_outputs = [_deposit(ledger, ref, "funding deposit") for ref in funding_deposits]
        except CompileError as e:
            raise DeploymentError(str(e)) from e

        funded = Wallet.zero()
        for output in funding_outputs:
            funded = funded + output.value
        if not funded.covers(balance):
            raise DeploymentError(f"funding {funded} does not cover the initial balance {balance}")
        if funded != balance:
            raise DeploymentError(f"funding {funded} exceeds the initial balance {balance}")

        state = initial_state if initial_state is not None else ContractState.initial(contract)
        items = encode_state_outputs(flatten_state(state))
        outputs = [
            Output(
                validator=LogicScript(source=contract.source, rule=name),
                datum=LOGIC_DATUM,
                in_contract=True,
            )
            for name in contract.rule_names
        ]
        outputs.extend(item_to_output(item) for item in items)

        inputs = [Input(out_ref=fee_deposit)] + [Input(out_ref=ref) for ref in funding_deposits]
        tx = Tx(
            inputs=tuple(inputs),
            outputs=tuple(outputs),
            signers=tuple(signers) if signers is not None else _default_signers([fee_output, *funding_outputs]),
            validity=validity or TimeInterval.unbounded(),
            fee=fee,
            ctr_id=ctr_id_for(fee_deposit),
        )
        logger.debug(f"Compiled deployment of {contract.name}: {len(outputs)} outputs, {len(items)} state items")
        return tx


def compile_invoke(
    ledger: Ledger,
    deployed: DeployedContract,
    rule_name: str,
    params: Sequence[BVal],
    signers: Sequence[str],
    receive_deposits: Sequence[OutputRef],
    fee_deposit: OutputRef,
    validity: TimeInterval | None = None,
) -> Tx:
    """
    Build the transaction invoking ``rule_name`` on a deployed contract.

    Raises:
        RulePreconditionError: The require clause is false.
        OutputGenerationError: The update cannot be expressed over the current items.
        StaleStateError: Contract outputs the transaction needs are already spent;
            ``stale_refs`` lists them so the caller can resync and rebuild.
        CompileError: Bad parameters or deposits.
    """
    validity = validity or TimeInterval.unbounded()
    compiled = deployed.compiled_rule(rule_name)
    env = compiled.environment(params, signers, validity, deployed.read)
    invocation = resolve_invocation(compiled.info, env)
    if not invocation.require:
        raise RulePreconditionError(f"require of {rule_name} is false for params {list(params)}")

    witnesses = [deployed.state.lookup(h)[1] for h in invocation.read_hashes]
    consumed = gen_inputs(deployed.state, invocation.updates)
    produced = gen_outputs(consumed, invocation.updates)

    logic_ref = deployed.logic_refs.get(rule_name)
    if logic_ref is None:
        raise CompileError(f"no logic output recorded for rule {rule_name}")
    witness_refs = [deployed.state.ref_of(item) for item in witnesses]
    consumed_refs = [deployed.state.ref_of(item) for item in consumed]
    stale = [ref for ref in dict.fromkeys([logic_ref, *witness_refs, *consumed_refs]) if not ledger.is_unspent(ref)]
    if stale:
        raise StaleStateError(stale)

    fee_output = _deposit(ledger, fee_deposit, "fee deposit")
    fee = _native_fee(fee_output, fee_deposit)
    expected = invocation.receive_wallets()
    if len(receive_deposits) != len(expected):
        raise CompileError(f"rule {rule_name} needs {len(expected)} receive deposits, got {len(receive_deposits)}")
    for ref, wallet in zip(receive_deposits, expected):
        output = _deposit(ledger, ref, "receive deposit")
        if output.value != wallet:
            raise CompileError(f"receive deposit {ref} holds {output.value}, expected {wallet}")

    inputs = [
        Input(out_ref=logic_ref, redeemer=tuple(params), spent=False),
        Input(out_ref=fee_deposit),
        *(Input(out_ref=ref, spent=False) for ref in witness_refs),
        *(Input(out_ref=ref) for ref in receive_deposits),
        *(Input(out_ref=ref) for ref in consumed_refs),
    ]
    outputs = invocation.send_outputs() + [item_to_output(item) for item in produced]
    return Tx(
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        signers=tuple(signers),
        validity=validity,
        fee=fee,
        ctr_id=deployed.ctr_id,
    )
