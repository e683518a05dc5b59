"""Contract syntax tree. All nodes are immutable and compare structurally."""

from dataclasses import dataclass, field

BVal = bool | int | str


def is_default(value: BVal) -> bool:
    """Only the integer 0 is the default value; ``False`` is not."""
    return type(value) is int and value == 0


def same_value(a: BVal, b: BVal) -> bool:
    return type(a) is type(b) and a == b


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True, slots=True)
class Const:
    value: BVal


@dataclass(frozen=True, slots=True)
class Name:
    """Identifier not yet resolved to a parameter or a state variable."""

    ident: str


@dataclass(frozen=True, slots=True)
class Param:
    name: str


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class MapAccess:
    map_name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True, slots=True)
class UnaryOp:
    op: str  # "not" or "-"
    operand: "Expr"


@dataclass(frozen=True, slots=True)
class IfThenElse:
    cond: "Expr"
    then: "Expr"
    otherwise: "Expr"


@dataclass(frozen=True, slots=True)
class Call:
    fn: str
    args: tuple["Expr", ...]


@dataclass(frozen=True, slots=True)
class ValidFrom:
    pass


@dataclass(frozen=True, slots=True)
class ValidTo:
    pass


Expr = (
    Const | Name | Param | Var | MapAccess | BinOp | UnaryOp | IfThenElse | Call | ValidFrom | ValidTo
)

BUILTINS = frozenset({"hash", "len", "substr", "toStr", "signedBy"})

# ----------------------------------------------------------------- statements


@dataclass(frozen=True, slots=True)
class AssignVar:
    name: str
    value: Expr


@dataclass(frozen=True, slots=True)
class AssignMap:
    map_name: str
    args: tuple[Expr, ...]
    value: Expr


@dataclass(frozen=True, slots=True)
class Send:
    recipient: Expr
    amount: Expr
    token: int


Statement = AssignVar | AssignMap | Send

# ------------------------------------------------------------------ contracts


@dataclass(frozen=True, slots=True)
class Receive:
    amount: Expr
    token: int


@dataclass(frozen=True, slots=True)
class Rule:
    name: str
    params: tuple[str, ...]
    receives: tuple[Receive, ...] = ()
    require: Expr | None = None
    effects: tuple[Statement, ...] = ()


@dataclass(frozen=True, slots=True)
class VarDecl:
    name: str
    init: BVal | None = None


@dataclass(frozen=True, slots=True)
class MapDecl:
    name: str
    arity: int


@dataclass(frozen=True, slots=True)
class Contract:
    name: str
    var_decls: tuple[VarDecl, ...] = ()
    map_decls: tuple[MapDecl, ...] = ()
    rules: tuple[Rule, ...] = field(default=())

    def rule(self, name: str) -> Rule | None:
        return next((r for r in self.rules if r.name == name), None)

    @property
    def var_names(self) -> set[str]:
        return {d.name for d in self.var_decls}

    @property
    def map_arities(self) -> dict[str, int]:
        return {d.name: d.arity for d in self.map_decls}
