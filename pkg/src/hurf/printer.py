"""Canonical pretty-printer; ``parse_contract(print_contract(c)) == c`` for parsed contracts."""

from .ast import (
    AssignMap,
    AssignVar,
    BinOp,
    BVal,
    Call,
    Const,
    Contract,
    Expr,
    IfThenElse,
    MapAccess,
    Name,
    Param,
    Rule,
    Send,
    Statement,
    UnaryOp,
    ValidFrom,
    ValidTo,
    Var,
)

_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 3,
    "<=": 3,
    ">": 3,
    ">=": 3,
    "+": 4,
    "-": 4,
    "@": 4,
    "*": 5,
    "/": 5,
    "%": 5,
}
_UNARY = 6
_ATOM = 7


def print_literal(value: BVal) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    escaped = value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'


def _wrap(text: str, needs_parens: bool) -> str:
    return f"({text})" if needs_parens else text


def _render(e: Expr) -> tuple[str, int]:
    match e:
        case Const(value=value):
            if type(value) is int and value < 0:
                return print_literal(value), _UNARY
            return print_literal(value), _ATOM
        case Name(ident=name) | Param(name=name) | Var(name=name):
            return name, _ATOM
        case ValidFrom():
            return "validFrom", _ATOM
        case ValidTo():
            return "validTo", _ATOM
        case MapAccess(map_name=map_name, args=args):
            return f"{map_name}[{_args(args)}]", _ATOM
        case Call(fn=fn, args=args):
            return f"{fn}({_args(args)})", _ATOM
        case UnaryOp(op=op, operand=operand):
            text, prec = _render(operand)
            sep = " " if op == "not" else ""
            return f"{op}{sep}{_wrap(text, prec < _UNARY)}", _UNARY
        case BinOp(op=op, left=left, right=right):
            p = _PRECEDENCE[op]
            left_text, left_prec = _render(left)
            right_text, right_prec = _render(right)
            left_parens = left_prec < p or (p == 3 and left_prec == p)
            return f"{_wrap(left_text, left_parens)} {op} {_wrap(right_text, right_prec <= p)}", p
        case IfThenElse(cond=cond, then=then, otherwise=otherwise):
            cond_text, cond_prec = _render(cond)
            then_text, then_prec = _render(then)
            else_text, _ = _render(otherwise)
            return (
                f"if {_wrap(cond_text, cond_prec == 0)} then {_wrap(then_text, then_prec == 0)} "
                f"else {else_text}",
                0,
            )
    raise TypeError(f"Not an expression: {e!r}")


def _args(args: tuple[Expr, ...]) -> str:
    return ", ".join(print_expr(arg) for arg in args)


def print_expr(e: Expr) -> str:
    return _render(e)[0]


def print_statement(s: Statement) -> str:
    match s:
        case AssignVar(name=name, value=value):
            return f"{name} = {print_expr(value)}"
        case AssignMap(map_name=map_name, args=args, value=value):
            return f"{map_name}[{_args(args)}] = {print_expr(value)}"
        case Send(recipient=recipient, amount=amount, token=token):
            text, prec = _render(recipient)
            return f"{_wrap(text, prec < _ATOM)}.send({print_expr(amount)}:T{token})"
    raise TypeError(f"Not a statement: {s!r}")


def print_rule(rule: Rule, indent: str = "  ") -> str:
    lines = [f"{indent}{rule.name}({', '.join(rule.params)}) {{"]
    inner = indent * 2
    for receive in rule.receives:
        lines.append(f"{inner}receive({print_expr(receive.amount)}:T{receive.token});")
    if rule.require is not None:
        lines.append(f"{inner}require({print_expr(rule.require)});")
    if rule.effects:
        lines.append(f"{inner}{' | '.join(print_statement(s) for s in rule.effects)};")
    lines.append(f"{indent}}}")
    return "\n".join(lines)


def print_contract(contract: Contract) -> str:
    lines = [f"contract {contract.name} {{"]
    for decl in contract.map_decls:
        lines.append(f"  map {decl.name}(arity={decl.arity});")
    for decl in contract.var_decls:
        init = "" if decl.init is None else f" = {print_literal(decl.init)}"
        lines.append(f"  var {decl.name}{init};")
    for rule in contract.rules:
        lines.append("")
        lines.append(print_rule(rule))
    lines.append("}")
    return "\n".join(lines) + "\n"
