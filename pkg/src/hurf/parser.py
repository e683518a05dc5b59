"""
Parser for ``.hurf`` contract sources, built on an arpeggio PEG grammar.

Grammar::

    contract  := "contract" IDENT "{" decl* rule* "}"
    decl      := "map" IDENT "(" "arity" "=" INT ")" ";"
               | "var" IDENT ["=" literal] ";"
    rule      := IDENT "(" [IDENT ("," IDENT)*] ")" "{" pre* [effects] "}"
    pre       := "receive" "(" expr ":" TOKEN ")" ";" | "require" "(" expr ")" ";"
    effects   := stmt ("|" stmt)* ";"
    stmt      := IDENT "[" args "]" "=" expr | IDENT "=" expr | primary "." "send" "(" expr ":" TOKEN ")"

Expression precedence, loosest first: ``||``, ``&&``, comparisons (non-associative),
``+ - @``, ``* / %``, unary ``not``/``!``/``-``. Token literals are ``T`` (token 1)
or ``T<k>`` (token k). Line comments start with ``//``.

The grammar only decides shape. ``ContractBuilder`` walks the parse tree into
``hurf.ast`` nodes and rejects what a PEG cannot express: chained comparisons,
zero-arity maps, a second ``require`` and duplicate names.
"""

import re
import threading
from dataclasses import dataclass
from functools import cache

from arpeggio import (
    EOF,
    EndOfFile,
    NoMatch,
    Optional,
    ParserPython,
    PTNodeVisitor,
    StrMatch,
    ZeroOrMore,
    visit_parse_tree,
)
from arpeggio import RegExMatch as _

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
    MapDecl,
    Name,
    Receive,
    Rule,
    Send,
    UnaryOp,
    ValidFrom,
    ValidTo,
    VarDecl,
)


class HurfSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class DuplicateDeclarationError(HurfSyntaxError):
    pass


KEYWORDS = (
    "contract",
    "map",
    "var",
    "receive",
    "require",
    "true",
    "false",
    "if",
    "then",
    "else",
    "not",
    "validFrom",
    "validTo",
)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}

_RULE_NAMES = {
    "ident": "identifier",
    "integer": "integer",
    "token_literal": "token literal like T or T0",
    "comparison_op": "comparison",
    "additive_op": "'+', '-' or '@'",
    "multiplicative_op": "'*', '/' or '%'",
    "unary_op": "'not', '!' or '-'",
    "builtin": "builtin call",
}


# ============================================================================
# Grammar
# ============================================================================


def comment():
    return _(r"//.*")


def ident():
    return _(r"(?!(?:{})\b)[A-Za-z_][A-Za-z0-9_]*".format("|".join(KEYWORDS)))


def integer():
    return _(r"\d+")


def string():
    return _(r'"(?:[^"\\\n]|\\.)*"')


def boolean():
    return _(r"(?:true|false)\b")


def token_literal():
    return _(r"T\d*\b")


def valid_from():
    return _(r"validFrom\b")


def valid_to():
    return _(r"validTo\b")


def builtin():
    return _(r"(?:hash|len|substr|toStr|signedBy)\b")


def comparison_op():
    return _(r"==|!=|<=|>=|<|>")


def additive_op():
    return _(r"[-+@]")


def multiplicative_op():
    return _(r"[*/%]")


def unary_op():
    return _(r"not\b|!|-")


def arguments():
    return expression, ZeroOrMore(",", expression)


def call():
    return builtin, "(", Optional(arguments), ")"


def map_access():
    return ident, "[", Optional(arguments), "]"


def conditional():
    return "if", expression, "then", expression, "else", expression


def group():
    return "(", expression, ")"


def primary():
    return [integer, string, boolean, valid_from, valid_to, conditional, call, map_access, group, ident]


def unary():
    return [(unary_op, unary), primary]


def multiplicative():
    return unary, ZeroOrMore(multiplicative_op, unary)


def additive():
    return multiplicative, ZeroOrMore(additive_op, multiplicative)


def comparison():
    return additive, ZeroOrMore(comparison_op, additive)


def conjunction():
    return comparison, ZeroOrMore("&&", comparison)


def expression():
    return conjunction, ZeroOrMore("||", conjunction)


def assign_map():
    return ident, "[", Optional(arguments), "]", "=", expression


def assign_var():
    return ident, "=", expression


def send():
    return primary, ".", "send", "(", expression, ":", token_literal, ")"


def statement():
    return [assign_map, assign_var, send]


def effects():
    return statement, ZeroOrMore("|", statement), ";"


def receive():
    return "receive", "(", expression, ":", token_literal, ")", ";"


def require():
    return "require", "(", expression, ")", ";"


def precondition():
    return [receive, require]


def params():
    return ident, ZeroOrMore(",", ident)


def rule():
    return ident, "(", Optional(params), ")", "{", ZeroOrMore(precondition), Optional(effects), "}"


def negative():
    return "-", integer


def literal():
    return [negative, integer, string, boolean]


def map_decl():
    return "map", ident, "(", "arity", "=", integer, ")", ";"


def var_decl():
    return "var", ident, Optional("=", literal), ";"


def declaration():
    return [map_decl, var_decl]


def contract():
    return "contract", ident, "{", ZeroOrMore(declaration), ZeroOrMore(rule), "}", EOF


def standalone_expression():
    return expression, EOF


# ============================================================================
# Parse tree to AST
# ============================================================================


@dataclass(frozen=True, slots=True)
class _Require:
    expr: Expr


def _unescape(literal: str) -> str:
    body = literal[1:-1]
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), body)


def _fold(operands: list[Expr], ops: list[str]) -> Expr:
    result = operands[0]
    for op, right in zip(ops, operands[1:], strict=True):
        result = BinOp(op, result, right)
    return result


def _nodes(node, rule_name: str) -> list:
    return [child for child in node if child.rule_name == rule_name]


class ContractBuilder(PTNodeVisitor):
    """Turns an arpeggio parse tree into ``hurf.ast`` nodes."""

    def __init__(self, parser: ParserPython):
        super().__init__()
        self.parser = parser

    def error(self, message: str, node, cls: type[HurfSyntaxError] = HurfSyntaxError) -> HurfSyntaxError:
        line, column = self.parser.pos_to_linecol(node.position)
        return cls(message, line, column)

    # -- terminals

    def visit_ident(self, node, children):
        return node.value

    def visit_integer(self, node, children):
        return int(node.value)

    def visit_string(self, node, children):
        return _unescape(node.value)

    def visit_boolean(self, node, children):
        return node.value == "true"

    def visit_token_literal(self, node, children):
        digits = node.value[1:]
        return int(digits) if digits else 1

    def visit_valid_from(self, node, children):
        return ValidFrom()

    def visit_valid_to(self, node, children):
        return ValidTo()

    def visit_builtin(self, node, children):
        return node.value

    def visit_comparison_op(self, node, children):
        return node.value

    def visit_additive_op(self, node, children):
        return node.value

    def visit_multiplicative_op(self, node, children):
        return node.value

    def visit_unary_op(self, node, children):
        return "-" if node.value == "-" else "not"

    # -- expressions

    def visit_arguments(self, node, children):
        return tuple(children.results["expression"])

    def visit_call(self, node, children):
        args = children.results.get("arguments", [()])[0]
        return Call(children.results["builtin"][0], args)

    def visit_map_access(self, node, children):
        args = children.results.get("arguments", [()])[0]
        return MapAccess(children.results["ident"][0], args)

    def visit_conditional(self, node, children):
        cond, then, otherwise = children.results["expression"]
        return IfThenElse(cond, then, otherwise)

    def visit_group(self, node, children):
        return children.results["expression"][0]

    def visit_primary(self, node, children):
        value = children[0]
        match node[0].rule_name:
            case "ident":
                return Name(value)
            case "integer" | "string" | "boolean":
                return Const(value)
        return value

    def visit_unary(self, node, children):
        if "unary_op" in children.results:
            return UnaryOp(children.results["unary_op"][0], children.results["unary"][0])
        return children.results["primary"][0]

    def visit_multiplicative(self, node, children):
        return _fold(children.results["unary"], children.results.get("multiplicative_op", []))

    def visit_additive(self, node, children):
        return _fold(children.results["multiplicative"], children.results.get("additive_op", []))

    def visit_comparison(self, node, children):
        ops = children.results.get("comparison_op", [])
        if len(ops) > 1:
            raise self.error("comparisons do not chain; add parentheses", _nodes(node, "comparison_op")[1])
        return _fold(children.results["additive"], ops)

    def visit_conjunction(self, node, children):
        operands = children.results["comparison"]
        return _fold(operands, ["&&"] * (len(operands) - 1))

    def visit_expression(self, node, children):
        operands = children.results["conjunction"]
        return _fold(operands, ["||"] * (len(operands) - 1))

    def visit_standalone_expression(self, node, children):
        return children.results["expression"][0]

    # -- statements and rules

    def visit_assign_map(self, node, children):
        args = children.results.get("arguments", [()])[0]
        return AssignMap(children.results["ident"][0], args, children.results["expression"][0])

    def visit_assign_var(self, node, children):
        return AssignVar(children.results["ident"][0], children.results["expression"][0])

    def visit_send(self, node, children):
        return Send(
            children.results["primary"][0],
            children.results["expression"][0],
            children.results["token_literal"][0],
        )

    def visit_statement(self, node, children):
        return children[0]

    def visit_effects(self, node, children):
        return tuple(children.results["statement"])

    def visit_receive(self, node, children):
        return Receive(children.results["expression"][0], children.results["token_literal"][0])

    def visit_require(self, node, children):
        return _Require(children.results["expression"][0])

    def visit_precondition(self, node, children):
        return children[0]

    def visit_params(self, node, children):
        return tuple(children.results["ident"])

    def visit_rule(self, node, children):
        receives: list[Receive] = []
        require: Expr | None = None
        pres = children.results.get("precondition", [])
        for pre, pre_node in zip(pres, _nodes(node, "precondition"), strict=True):
            if isinstance(pre, Receive):
                receives.append(pre)
            elif require is not None:
                raise self.error("at most one require per rule", pre_node)
            else:
                require = pre.expr
        return Rule(
            children.results["ident"][0],
            children.results.get("params", [()])[0],
            tuple(receives),
            require,
            children.results.get("effects", [()])[0],
        )

    # -- declarations

    def visit_negative(self, node, children):
        return -children.results["integer"][0]

    def visit_literal(self, node, children):
        return children[0]

    def visit_map_decl(self, node, children):
        arity = children.results["integer"][0]
        if arity < 1:
            raise self.error("map arity must be at least 1", _nodes(node, "integer")[0])
        return MapDecl(children.results["ident"][0], arity)

    def visit_var_decl(self, node, children):
        init = children.results["literal"][0] if "literal" in children.results else None
        return VarDecl(children.results["ident"][0], init)

    def visit_declaration(self, node, children):
        return children[0]

    def visit_contract(self, node, children):
        var_decls: list[VarDecl] = []
        map_decls: list[MapDecl] = []
        declared: set[str] = set()
        decls = children.results.get("declaration", [])
        for decl, decl_node in zip(decls, _nodes(node, "declaration"), strict=True):
            if decl.name in declared:
                raise self.error(f"duplicate declaration of {decl.name!r}", decl_node, DuplicateDeclarationError)
            declared.add(decl.name)
            (map_decls if isinstance(decl, MapDecl) else var_decls).append(decl)

        rules: list[Rule] = []
        for r, rule_node in zip(children.results.get("rule", []), _nodes(node, "rule"), strict=True):
            if any(other.name == r.name for other in rules):
                raise self.error(f"duplicate rule {r.name!r}", rule_node, DuplicateDeclarationError)
            rules.append(r)

        return Contract(children.results["ident"][0], tuple(var_decls), tuple(map_decls), tuple(rules))


# ============================================================================
# Entry points
# ============================================================================

# Arpeggio parsers keep per-parse state, so each shared instance is used under the lock.
_PARSER_LOCK = threading.Lock()


@cache
def _parser(root) -> ParserPython:
    return ParserPython(root, comment_def=comment, autokwd=True)


def _describe(rule_expr) -> str:
    if isinstance(rule_expr, EndOfFile):
        return "end of input"
    if isinstance(rule_expr, StrMatch):
        return f"'{rule_expr.to_match}'"
    name = getattr(rule_expr, "rule_name", "")
    return _RULE_NAMES.get(name, name or type(rule_expr).__name__)


def _syntax_error(err: NoMatch, parser: ParserPython, text: str) -> HurfSyntaxError:
    line, column = parser.pos_to_linecol(err.position)
    expected = " or ".join(sorted({_describe(r) for r in err.rules}))
    rest = text[err.position :].split(maxsplit=1)
    found = rest[0] if rest else "end of input"
    return HurfSyntaxError(f"expected {expected}, found {found!r}", line, column)


def _parse(root, text: str):
    with _PARSER_LOCK:
        parser = _parser(root)
        try:
            tree = parser.parse(text)
        except NoMatch as err:
            raise _syntax_error(err, parser, text) from None
        return visit_parse_tree(tree, ContractBuilder(parser))


def parse_contract(text: str) -> Contract:
    """
    Parse contract source text.

    Raises:
        HurfSyntaxError: On malformed input, with the offending line and column.
        DuplicateDeclarationError: When a state name or rule name is declared twice.
    """
    return _parse(contract, text)


def parse_expr(text: str) -> Expr:
    """Parse a standalone expression (used by tests and the CLI)."""
    return _parse(standalone_expression, text)
