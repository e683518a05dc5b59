"""hUTXO ledger model: records, scripts, validity and update."""

from .core import (
    GENESIS_TX_ID,
    Ledger,
    LedgerError,
    NoSpentInputError,
    TimeRegressionError,
    UnresolvableInputError,
    ValueFlow,
    advance_time,
    apply_tx,
    ctr_id_for,
    derive_ctr_id,
    tx_value_flow,
    unspent_outputs,
    validate_tx,
)
from .model import (
    CentralizedCrowdfundScript,
    Event,
    Input,
    LogicScript,
    Output,
    OutputRef,
    PkLock,
    StateScript,
    Tick,
    TimeInterval,
    Tx,
    ValidationResult,
)
from .scripts import ScriptContext, eval_script
from .wallet import NATIVE_TOKEN, InsufficientFundsError, TokenId, Wallet

__all__ = [
    "GENESIS_TX_ID",
    "NATIVE_TOKEN",
    "CentralizedCrowdfundScript",
    "Event",
    "Input",
    "InsufficientFundsError",
    "Ledger",
    "LedgerError",
    "LogicScript",
    "NoSpentInputError",
    "Output",
    "OutputRef",
    "PkLock",
    "ScriptContext",
    "StateScript",
    "Tick",
    "TimeInterval",
    "TimeRegressionError",
    "TokenId",
    "Tx",
    "UnresolvableInputError",
    "ValidationResult",
    "ValueFlow",
    "Wallet",
    "advance_time",
    "apply_tx",
    "ctr_id_for",
    "derive_ctr_id",
    "eval_script",
    "tx_value_flow",
    "unspent_outputs",
    "validate_tx",
]
