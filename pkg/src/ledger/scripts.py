"""
Script evaluation.

A script sees the redeeming transaction and the outputs referenced by all of
its inputs, nothing else. Every kind fails closed: a malformed datum or any
error raised while checking yields ``False``.
"""

import logging
from dataclasses import dataclass, replace

from .model import (
    LOGIC_TAG,
    CentralizedCrowdfundScript,
    Input,
    LogicScript,
    Output,
    PkLock,
    Script,
    StateScript,
    Tx,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class ScriptContext:
    tx: Tx
    siblings: tuple[tuple[Input, Output], ...]
    self_index: int = 0

    @property
    def self_input(self) -> Input:
        return self.siblings[self.self_index][0]

    @property
    def self_output(self) -> Output:
        return self.siblings[self.self_index][1]

    def at(self, index: int) -> "ScriptContext":
        return replace(self, self_index=index)


def check_state_script(ctx: ScriptContext) -> bool:
    """A state item may be read or spent only next to a logic output of its contract."""
    if not ctx.siblings:
        return False
    first = ctx.siblings[0][1]
    return first.in_contract and first.datum_tag() == LOGIC_TAG


def eval_script(script: Script, ctx: ScriptContext) -> bool:
    try:
        match script:
            case PkLock(pubkey=pubkey):
                return pubkey in ctx.tx.signers
            case StateScript():
                return check_state_script(ctx)
            case LogicScript():
                from compiler.logic import check_logic_script

                return check_logic_script(script, ctx)
            case CentralizedCrowdfundScript():
                from bench.centralized import check_centralized_crowdfund

                return check_centralized_crowdfund(script, ctx)
    except Exception as e:
        logger.debug(f"Script {script.kind} at input {ctx.self_index} failed closed: {e}")
        return False
    return False
