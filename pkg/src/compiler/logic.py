"""Rule check run by logic outputs: the transaction must be exactly what the rule mandates."""

import logging
from functools import lru_cache

from hurf.ast import BVal
from hurf.checker import load_contract
from ledger.model import LOGIC_TAG, LogicScript, Output
from ledger.scripts import ScriptContext
from ledger.wallet import NATIVE_TOKEN, Wallet

from .state_codec import Point, StateIndex, StateItem, gen_inputs, gen_outputs, item_from_output, item_to_output
from .tx_compiler import CompiledRule, compile_rule, resolve_invocation

logger = logging.getLogger(__name__)


class MissingWitnessError(LookupError):
    pass


class _WitnessReader:
    def __init__(self, witnesses: list[StateItem]):
        self.witnesses = witnesses

    def __call__(self, h: int) -> BVal:
        for witness in self.witnesses:
            if witness.covers(h):
                return witness.value if isinstance(witness, Point) else 0
        raise MissingWitnessError(f"no read witness covers {h:#x}")


def _same_outputs(actual: tuple[Output, ...] | list[Output], expected: list[Output]) -> bool:
    return len(actual) == len(expected) and all(
        a.fingerprint() == e.fingerprint() for a, e in zip(actual, expected)
    )


def check_rule_tx(compiled: CompiledRule, ctx: ScriptContext) -> bool:
    """
    Accept ``ctx.tx`` only if it is the invocation of ``compiled`` it claims to be.

    Checks in order: the logic output is the first, read-only input; the
    second input pays exactly the fee in native tokens; the read inputs are
    state items witnessing the rule's read keys in ascending hash order; the
    receive inputs hold exactly the received amounts; the require clause
    holds; the first outputs are the mandated sends; the remaining inputs are
    the state items the update consumes and the remaining outputs exactly the
    items it produces, with nothing else.
    """
    tx = ctx.tx
    inputs = tx.inputs
    if ctx.self_index != 0 or inputs[0].spent or len(inputs) < 2:
        return False

    fee_input, fee_output = ctx.siblings[1]
    if not fee_input.spent or fee_output.in_contract:
        return False
    if fee_output.value != Wallet.of(NATIVE_TOKEN, tx.fee):
        return False

    pos = 2
    witnesses: list[StateItem] = []
    while pos < len(inputs) and not inputs[pos].spent:
        item = item_from_output(ctx.siblings[pos][1])
        if item is None:
            return False
        witnesses.append(item)
        pos += 1

    env = compiled.environment(inputs[0].redeemer, tx.signers, tx.validity, _WitnessReader(witnesses))
    try:
        invocation = resolve_invocation(compiled.info, env)
    except MissingWitnessError as e:
        logger.debug(f"Rule {compiled.name}: {e}")
        return False

    if len(witnesses) != len(invocation.read_hashes):
        return False
    if not all(w.covers(h) for w, h in zip(witnesses, invocation.read_hashes)):
        return False

    expected_receives = invocation.receive_wallets()
    for wallet in expected_receives:
        if pos >= len(inputs):
            return False
        receive_input, receive_output = ctx.siblings[pos]
        if not receive_input.spent or receive_output.in_contract or receive_output.value != wallet:
            return False
        pos += 1

    if not invocation.require:
        return False

    sends = invocation.send_outputs()
    if not _same_outputs(tx.outputs[: len(sends)], sends):
        return False

    consumed: list[StateItem] = []
    for inp, output in ctx.siblings[pos:]:
        item = item_from_output(output)
        if not inp.spent or item is None:
            return False
        consumed.append(item)
    if gen_inputs(StateIndex(consumed), invocation.updates) != consumed:
        return False
    produced = [item_to_output(item) for item in gen_outputs(consumed, invocation.updates)]
    if not _same_outputs(tx.outputs[len(sends) :], produced):
        return False

    return not any(output.datum_tag() == LOGIC_TAG for output in tx.outputs)


@lru_cache(maxsize=512)
def compiled_rule_for(source: str, rule: str) -> CompiledRule:
    return compile_rule(load_contract(source), rule)


def check_logic_script(script: LogicScript, ctx: ScriptContext) -> bool:
    """Entry point used by script evaluation for ``LogicScript`` outputs."""
    self_output = ctx.self_output
    if not self_output.in_contract or self_output.datum_tag() != LOGIC_TAG:
        return False
    return check_rule_tx(compiled_rule_for(script.source, script.rule), ctx)
