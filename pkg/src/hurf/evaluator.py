"""
Expression evaluation.

Evaluation is strict and dynamically typed: operands are checked at run time
and a mismatch raises ``HurfRuntimeError``. Booleans are not integers here,
so ``true + 1`` is an error and ``true == 1`` is false.
"""

from abc import ABC, abstractmethod
from collections.abc import Callable, Collection, Mapping
from dataclasses import dataclass, field

from utils.crypto import hash_hex

from .ast import (
    BinOp,
    BVal,
    Call,
    Const,
    Expr,
    IfThenElse,
    MapAccess,
    Param,
    UnaryOp,
    ValidFrom,
    ValidTo,
    Var,
    same_value,
)


class HurfRuntimeError(ValueError):
    """Type error, division by zero or bad amount while evaluating a rule."""


def render(value: BVal) -> str:
    """String form used by ``toStr`` and by state-key preimages."""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def render_point(point: tuple[BVal, ...]) -> str:
    return ",".join(render(v) for v in point)


@dataclass
class Environment(ABC):
    """Parameters, signers and validity bounds, plus access to contract state."""

    params: Mapping[str, BVal] = field(default_factory=dict)
    signers: Collection[str] = ()
    valid_from: int = 0
    valid_to: int = 0

    @abstractmethod
    def read_var(self, name: str) -> BVal: ...

    @abstractmethod
    def read_map(self, map_name: str, point: tuple[BVal, ...]) -> BVal: ...


@dataclass
class LookupEnvironment(Environment):
    """Environment whose state reads go through two callables."""

    var_reader: Callable[[str], BVal] = lambda name: 0
    map_reader: Callable[[str, tuple[BVal, ...]], BVal] = lambda name, point: 0

    def read_var(self, name: str) -> BVal:
        return self.var_reader(name)

    def read_map(self, map_name: str, point: tuple[BVal, ...]) -> BVal:
        return self.map_reader(map_name, point)


def _int(value: BVal, op: str) -> int:
    if type(value) is not int:
        raise HurfRuntimeError(f"operator {op} expects integers, got {render(value)!r}")
    return value


def _bool(value: BVal, op: str) -> bool:
    if type(value) is not bool:
        raise HurfRuntimeError(f"operator {op} expects booleans, got {render(value)!r}")
    return value


def _str(value: BVal, op: str) -> str:
    if type(value) is not str:
        raise HurfRuntimeError(f"{op} expects a string, got {render(value)!r}")
    return value


def _divide(a: int, b: int, op: str) -> int:
    if b == 0:
        raise HurfRuntimeError("division by zero")
    quotient = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        quotient = -quotient
    return quotient if op == "/" else a - b * quotient


def _compare(op: str, a: BVal, b: BVal) -> bool:
    if type(a) is not type(b) or type(a) is bool:
        raise HurfRuntimeError(f"cannot order {render(a)!r} and {render(b)!r}")
    match op:
        case "<":
            return a < b
        case "<=":
            return a <= b
        case ">":
            return a > b
        case _:
            return a >= b


def _binary(op: str, a: BVal, b: BVal) -> BVal:
    match op:
        case "&&":
            left, right = _bool(a, op), _bool(b, op)
            return left and right
        case "||":
            left, right = _bool(a, op), _bool(b, op)
            return left or right
        case "==":
            return same_value(a, b)
        case "!=":
            return not same_value(a, b)
        case "<" | "<=" | ">" | ">=":
            return _compare(op, a, b)
        case "+":
            return _int(a, op) + _int(b, op)
        case "-":
            return _int(a, op) - _int(b, op)
        case "*":
            return _int(a, op) * _int(b, op)
        case "/" | "%":
            return _divide(_int(a, op), _int(b, op), op)
        case "@":
            return _str(a, op) + _str(b, op)
    raise HurfRuntimeError(f"unknown operator {op}")


def _call(fn: str, args: list[BVal], env: Environment) -> BVal:
    match fn:
        case "hash":
            return hash_hex(tuple(args))
        case "len":
            return len(_str(args[0], "len"))
        case "substr":
            text = _str(args[0], "substr")
            start = min(max(_int(args[1], "substr"), 0), len(text))
            end = min(max(_int(args[2], "substr"), start), len(text))
            return text[start:end]
        case "toStr":
            return render_point(tuple(args))
        case "signedBy":
            return _str(args[0], "signedBy") in env.signers
    raise HurfRuntimeError(f"unknown builtin {fn}")


def eval_expr(e: Expr, env: Environment) -> BVal:
    """
    Evaluate a resolved expression.

    ``&&`` and ``||`` evaluate both operands; ``if`` evaluates only the chosen
    branch. Map reads of unset points return 0.
    """
    match e:
        case Const(value=value):
            return value
        case Param(name=name):
            if name not in env.params:
                raise HurfRuntimeError(f"missing actual parameter {name!r}")
            return env.params[name]
        case Var(name=name):
            return env.read_var(name)
        case MapAccess(map_name=map_name, args=args):
            return env.read_map(map_name, tuple(eval_expr(arg, env) for arg in args))
        case BinOp(op=op, left=left, right=right):
            return _binary(op, eval_expr(left, env), eval_expr(right, env))
        case UnaryOp(op="not", operand=operand):
            return not _bool(eval_expr(operand, env), "not")
        case UnaryOp(op="-", operand=operand):
            return -_int(eval_expr(operand, env), "-")
        case IfThenElse(cond=cond, then=then, otherwise=otherwise):
            chosen = then if _bool(eval_expr(cond, env), "if") else otherwise
            return eval_expr(chosen, env)
        case Call(fn=fn, args=args):
            return _call(fn, [eval_expr(arg, env) for arg in args], env)
        case ValidFrom():
            return env.valid_from
        case ValidTo():
            return env.valid_to
    raise HurfRuntimeError(f"cannot evaluate unresolved expression {e!r}")


def eval_amount(e: Expr, env: Environment) -> int:
    """Evaluate a receive/send amount, which must be a non-negative integer."""
    value = eval_expr(e, env)
    if type(value) is not int or value < 0:
        raise HurfRuntimeError(f"amount must be a non-negative integer, got {render(value)!r}")
    return value
