"""Contract language: parsing, checking, evaluation and the reference interpreter."""

from .ast import BVal, Contract, Expr, Rule, is_default, same_value
from .checker import (
    CheckedContract,
    HurfCheckError,
    MapKey,
    RuleInfo,
    StateKeyExpr,
    VarKey,
    check_contract,
    load_contract,
    read_write_sets,
)
from .evaluator import Environment, HurfRuntimeError, LookupEnvironment, eval_expr, render, render_point
from .parser import DuplicateDeclarationError, HurfSyntaxError, parse_contract, parse_expr
from .printer import print_contract, print_expr
from .semantics import (
    Action,
    Configuration,
    ContractState,
    Deposit,
    DepositMismatchError,
    Instance,
    InsufficientBalanceError,
    InsufficientFundingError,
    PreconditionFailedError,
    StepError,
    hurf_deploy,
    hurf_step,
)

__all__ = [
    "Action",
    "BVal",
    "CheckedContract",
    "Configuration",
    "Contract",
    "ContractState",
    "Deposit",
    "DepositMismatchError",
    "DuplicateDeclarationError",
    "Environment",
    "Expr",
    "HurfCheckError",
    "HurfRuntimeError",
    "HurfSyntaxError",
    "Instance",
    "InsufficientBalanceError",
    "InsufficientFundingError",
    "LookupEnvironment",
    "MapKey",
    "PreconditionFailedError",
    "Rule",
    "RuleInfo",
    "StateKeyExpr",
    "StepError",
    "VarKey",
    "check_contract",
    "eval_expr",
    "hurf_deploy",
    "hurf_step",
    "is_default",
    "load_contract",
    "parse_contract",
    "parse_expr",
    "print_contract",
    "print_expr",
    "read_write_sets",
    "render",
    "render_point",
    "same_value",
]
