"""
Static checks for parsed contracts.

Resolves identifiers to parameters or state variables, checks map arities,
enforces the single-assignment discipline on effects, and derives per-rule
read and write sets over symbolic state keys.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

from .ast import (
    AssignMap,
    AssignVar,
    BinOp,
    Call,
    Const,
    Contract,
    Expr,
    IfThenElse,
    MapAccess,
    Name,
    Param,
    Receive,
    Rule,
    Send,
    Statement,
    UnaryOp,
    ValidFrom,
    ValidTo,
    Var,
)
from .parser import parse_contract
from .printer import print_contract

logger = logging.getLogger(__name__)

_BUILTIN_ARITY = {"len": (1, 1), "substr": (3, 3), "signedBy": (1, 1), "hash": (1, None), "toStr": (1, None)}


class HurfCheckError(ValueError):
    """Raised when a contract is syntactically valid but ill-formed."""


@dataclass(frozen=True, slots=True)
class VarKey:
    name: str


@dataclass(frozen=True, slots=True)
class MapKey:
    map_name: str
    args: tuple[Expr, ...]


StateKeyExpr = VarKey | MapKey


@dataclass(frozen=True, slots=True)
class RuleInfo:
    rule: Rule
    reads: tuple[StateKeyExpr, ...]
    writes: tuple[tuple[StateKeyExpr, Expr], ...]


@dataclass(frozen=True, slots=True)
class CheckedContract:
    """A resolved contract plus its canonical source and per-rule analysis."""

    parsed: Contract
    contract: Contract
    source: str
    infos: tuple[RuleInfo, ...]

    @property
    def name(self) -> str:
        return self.contract.name

    def rule_info(self, name: str) -> RuleInfo | None:
        return next((info for info in self.infos if info.rule.name == name), None)

    @property
    def rule_names(self) -> list[str]:
        return [info.rule.name for info in self.infos]


class _Resolver:
    def __init__(self, contract: Contract, rule: Rule):
        self.rule = rule
        self.params = set(rule.params)
        self.vars = contract.var_names
        self.maps = contract.map_arities

    def fail(self, message: str) -> HurfCheckError:
        return HurfCheckError(f"rule {self.rule.name!r}: {message}")

    def expr(self, e: Expr) -> Expr:
        match e:
            case Name(ident=ident):
                if ident in self.params:
                    return Param(ident)
                if ident in self.vars:
                    return Var(ident)
                if ident in self.maps:
                    raise self.fail(f"map {ident!r} used without an index")
                raise self.fail(f"unknown identifier {ident!r}")
            case Const() | Param() | Var() | ValidFrom() | ValidTo():
                return e
            case MapAccess(map_name=map_name, args=args):
                return MapAccess(map_name, self.map_args(map_name, args))
            case BinOp(op=op, left=left, right=right):
                return BinOp(op, self.expr(left), self.expr(right))
            case UnaryOp(op=op, operand=operand):
                return UnaryOp(op, self.expr(operand))
            case IfThenElse(cond=cond, then=then, otherwise=otherwise):
                return IfThenElse(self.expr(cond), self.expr(then), self.expr(otherwise))
            case Call(fn=fn, args=args):
                low, high = _BUILTIN_ARITY[fn]
                if len(args) < low or (high is not None and len(args) > high):
                    raise self.fail(f"wrong number of arguments to {fn}")
                return Call(fn, tuple(self.expr(arg) for arg in args))
        raise self.fail(f"unsupported expression {e!r}")

    def map_args(self, map_name: str, args: tuple[Expr, ...]) -> tuple[Expr, ...]:
        if map_name not in self.maps:
            raise self.fail(f"unknown map {map_name!r}")
        if len(args) != self.maps[map_name]:
            raise self.fail(
                f"map {map_name!r} has arity {self.maps[map_name]}, accessed with {len(args)} indices"
            )
        return tuple(self.expr(arg) for arg in args)

    def statement(self, s: Statement) -> Statement:
        match s:
            case AssignVar(name=name, value=value):
                if name not in self.vars:
                    raise self.fail(f"assignment to undeclared variable {name!r}")
                return AssignVar(name, self.expr(value))
            case AssignMap(map_name=map_name, args=args, value=value):
                return AssignMap(map_name, self.map_args(map_name, args), self.expr(value))
            case Send(recipient=recipient, amount=amount, token=token):
                return Send(self.expr(recipient), self.expr(amount), token)
        raise self.fail(f"unsupported statement {s!r}")


def _conjoin(parts: list[Expr]) -> Expr | None:
    if not parts:
        return None
    result = parts[0]
    for part in parts[1:]:
        result = BinOp("&&", result, part)
    return result


def _check_rule(contract: Contract, rule: Rule) -> Rule:
    resolver = _Resolver(contract, rule)
    if len(set(rule.params)) != len(rule.params):
        raise resolver.fail("duplicate parameter names")
    clashes = set(rule.params) & (contract.var_names | set(contract.map_arities))
    if clashes:
        raise resolver.fail(f"parameters shadow state names: {sorted(clashes)}")

    receives = tuple(Receive(resolver.expr(r.amount), r.token) for r in rule.receives)
    require = resolver.expr(rule.require) if rule.require is not None else None

    effects: list[Statement] = []
    var_values: dict[str, Expr] = {}
    map_writes: list[AssignMap] = []
    for statement in (resolver.statement(s) for s in rule.effects):
        match statement:
            case AssignVar(name=name, value=value):
                if name in var_values:
                    if var_values[name] != value:
                        raise resolver.fail(f"conflicting assignments to {name!r}")
                    continue
                var_values[name] = value
            case AssignMap():
                if statement in map_writes:
                    continue
                map_writes.append(statement)
        effects.append(statement)

    # m[e] = v | m[f] = w with v != w is only well defined when e and f differ
    distinctness: list[Expr] = []
    for i, first in enumerate(map_writes):
        for second in map_writes[i + 1 :]:
            if first.map_name != second.map_name or first.value == second.value:
                continue
            equalities = [BinOp("==", a, b) for a, b in zip(first.args, second.args)]
            distinctness.append(UnaryOp("not", _conjoin(equalities)))

    conjuncts = ([require] if require is not None else []) + distinctness
    return Rule(rule.name, rule.params, receives, _conjoin(conjuncts), tuple(effects))


def _collect_reads(e: Expr, into: dict[StateKeyExpr, None]) -> None:
    match e:
        case Var(name=name):
            into[VarKey(name)] = None
        case MapAccess(map_name=map_name, args=args):
            for arg in args:
                _collect_reads(arg, into)
            into[MapKey(map_name, args)] = None
        case BinOp(left=left, right=right):
            _collect_reads(left, into)
            _collect_reads(right, into)
        case UnaryOp(operand=operand):
            _collect_reads(operand, into)
        case IfThenElse(cond=cond, then=then, otherwise=otherwise):
            for part in (cond, then, otherwise):
                _collect_reads(part, into)
        case Call(args=args):
            for arg in args:
                _collect_reads(arg, into)


def read_write_sets(
    rule: Rule,
) -> tuple[tuple[StateKeyExpr, ...], tuple[tuple[StateKeyExpr, Expr], ...]]:
    """
    Symbolic state keys a checked rule reads and writes.

    Reads cover the require clause, receive amounts, effect right-hand sides,
    send recipients and amounts, and map-write index expressions. Duplicates
    are collapsed, first occurrence wins.
    """
    reads: dict[StateKeyExpr, None] = {}
    writes: list[tuple[StateKeyExpr, Expr]] = []
    if rule.require is not None:
        _collect_reads(rule.require, reads)
    for receive in rule.receives:
        _collect_reads(receive.amount, reads)
    for statement in rule.effects:
        match statement:
            case AssignVar(name=name, value=value):
                _collect_reads(value, reads)
                writes.append((VarKey(name), value))
            case AssignMap(map_name=map_name, args=args, value=value):
                for arg in args:
                    _collect_reads(arg, reads)
                _collect_reads(value, reads)
                writes.append((MapKey(map_name, args), value))
            case Send(recipient=recipient, amount=amount):
                _collect_reads(recipient, reads)
                _collect_reads(amount, reads)
    return tuple(reads), tuple(dict.fromkeys(writes))


def check_contract(contract: Contract) -> CheckedContract:
    """
    Validate a parsed contract and compute per-rule analyses.

    Raises:
        HurfCheckError: On unknown identifiers, arity mismatches, conflicting
            variable assignments or rules shadowing state names.
    """
    rule_names = [rule.name for rule in contract.rules]
    if len(set(rule_names)) != len(rule_names):
        raise HurfCheckError(f"contract {contract.name!r}: duplicate rule names")
    state_names = [d.name for d in contract.var_decls] + [d.name for d in contract.map_decls]
    if len(set(state_names)) != len(state_names):
        raise HurfCheckError(f"contract {contract.name!r}: duplicate state declarations")

    rules = tuple(_check_rule(contract, rule) for rule in contract.rules)
    resolved = Contract(contract.name, contract.var_decls, contract.map_decls, rules)
    infos = tuple(RuleInfo(rule, *read_write_sets(rule)) for rule in rules)
    logger.debug(f"Checked contract {contract.name} with {len(rules)} rules")
    return CheckedContract(parsed=contract, contract=resolved, source=print_contract(contract), infos=infos)


@lru_cache(maxsize=256)
def load_contract(source: str) -> CheckedContract:
    """Parse and check contract source, memoized by text."""
    return check_contract(parse_contract(source))
