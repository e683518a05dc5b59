"""Compilation of contracts to distributed state outputs and rule-checked transactions."""

from .logic import check_logic_script, check_rule_tx, compiled_rule_for
from .state_codec import (
    FlatState,
    Interval,
    OutputGenerationError,
    Point,
    StateCodecError,
    StateIndex,
    StateItem,
    StateKey,
    apply_updates,
    decode_state,
    encode_state_outputs,
    flatten_state,
    gen_inputs,
    gen_outputs,
    item_from_output,
    item_to_output,
    lookup,
    state_key,
)
from .tx_compiler import (
    CompiledRule,
    CompileError,
    DeployedContract,
    DeploymentError,
    Invocation,
    RulePreconditionError,
    StaleStateError,
    compile_deploy,
    compile_invoke,
    compile_rule,
    resolve_invocation,
    send_output,
)

__all__ = [
    "CompileError",
    "CompiledRule",
    "DeployedContract",
    "DeploymentError",
    "FlatState",
    "Interval",
    "Invocation",
    "OutputGenerationError",
    "Point",
    "RulePreconditionError",
    "StaleStateError",
    "StateCodecError",
    "StateIndex",
    "StateItem",
    "StateKey",
    "apply_updates",
    "check_logic_script",
    "check_rule_tx",
    "compile_deploy",
    "compile_invoke",
    "compile_rule",
    "compiled_rule_for",
    "decode_state",
    "encode_state_outputs",
    "flatten_state",
    "gen_inputs",
    "gen_outputs",
    "item_from_output",
    "item_to_output",
    "lookup",
    "resolve_invocation",
    "send_output",
    "state_key",
]
