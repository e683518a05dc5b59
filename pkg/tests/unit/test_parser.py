"""
Tests for the contract parser, printer and static checker (src/hurf/).
"""

import pytest

from bench.contracts import BENCHMARK_CONTRACTS, contract_source, multisig_source
from hurf.ast import (
    AssignMap,
    AssignVar,
    BinOp,
    Call,
    Const,
    IfThenElse,
    MapAccess,
    Name,
    Param,
    Send,
    UnaryOp,
    ValidFrom,
    Var,
)
from hurf.checker import HurfCheckError, MapKey, VarKey, check_contract, load_contract
from hurf.parser import DuplicateDeclarationError, HurfSyntaxError, parse_contract, parse_expr
from hurf.printer import print_contract, print_expr


def contract_with(body: str, decls: str = "var x; map m(arity=1);") -> str:
    return f"contract C {{ {decls} {body} }}"


# ============================================================================
# Tests: Parser
# ============================================================================


class TestParseExpr:
    """Tests for expression parsing and precedence."""

    def test_multiplication_binds_tighter(self):
        """Test that * binds tighter than +."""
        assert parse_expr("1 + 2 * 3") == BinOp("+", Const(1), BinOp("*", Const(2), Const(3)))

    def test_and_binds_tighter_than_or(self):
        """Test the boolean operator precedence."""
        expr = parse_expr("a || b && c")

        assert expr == BinOp("||", Name("a"), BinOp("&&", Name("b"), Name("c")))

    def test_additive_is_left_associative(self):
        """Test that a - b - c groups as (a - b) - c."""
        assert parse_expr("a - b - c") == BinOp("-", BinOp("-", Name("a"), Name("b")), Name("c"))

    def test_comparisons_do_not_chain(self):
        """Test that a < b < c is a syntax error."""
        with pytest.raises(HurfSyntaxError):
            parse_expr("a < b < c")

    def test_bang_is_not(self):
        """Test that ! and not parse to the same node."""
        assert parse_expr("!a") == parse_expr("not a") == UnaryOp("not", Name("a"))

    def test_builtins_and_map_access(self):
        """Test calls, map indexing and validity bounds."""
        expr = parse_expr('hash(m[i, 2], "s") == validFrom')

        assert expr == BinOp(
            "==",
            Call("hash", (MapAccess("m", (Name("i"), Const(2))), Const("s"))),
            ValidFrom(),
        )

    def test_string_escapes(self):
        """Test that escapes inside string literals are decoded."""
        assert parse_expr(r'"a\"b\n"') == Const('a"b\n')

    def test_trailing_text_rejected(self):
        """Test that extra tokens after an expression fail."""
        with pytest.raises(HurfSyntaxError):
            parse_expr("1 2")

    def test_chained_comparison_reports_second_operator(self):
        """Test that the chaining error points at the second comparison."""
        with pytest.raises(HurfSyntaxError, match="do not chain") as exc_info:
            parse_expr("a < b < c")

        assert (exc_info.value.line, exc_info.value.column) == (1, 7)

    def test_builtin_name_without_call_is_a_name(self):
        """Test that a builtin name not followed by ( parses as an identifier."""
        assert parse_expr("len + 1") == BinOp("+", Name("len"), Const(1))

    def test_keyword_prefix_is_an_identifier(self):
        """Test that identifiers may start with a keyword."""
        assert parse_expr("true_x && notify") == BinOp("&&", Name("true_x"), Name("notify"))

    def test_conditional_expression(self):
        """Test if-then-else inside arithmetic."""
        expr = parse_expr("(if a then 1 else 2) + 3")

        assert expr == BinOp("+", IfThenElse(Name("a"), Const(1), Const(2)), Const(3))


class TestParseContract:
    """Tests for contract-level parsing."""

    def test_crowdfund_structure(self):
        """Test the shipped crowdfund contract parses to three rules."""
        contract = parse_contract(contract_source("crowdfund"))

        assert contract.name == "Crowdfund"
        assert [r.name for r in contract.rules] == ["donate", "withdraw", "refund"]
        assert contract.map_arities == {"m": 1}
        assert contract.var_names == {"owner", "goal", "t_wd", "t_rf"}

    def test_token_literals(self):
        """Test that T is token 1 and Tk is token k."""
        contract = parse_contract(contract_with("r(v) { receive(v:T); receive(v:T0); a.send(1:T7); }"))
        rule = contract.rules[0]

        assert [r.token for r in rule.receives] == [1, 0]
        assert rule.effects == (Send(Name("a"), Const(1), 7),)

    def test_parallel_effects(self):
        """Test that effects are separated by |."""
        contract = parse_contract(contract_with("r(i) { x = 1 | m[i] = x; }"))

        assert contract.rules[0].effects == (
            AssignVar("x", Const(1)),
            AssignMap("m", (Name("i"),), Name("x")),
        )

    def test_var_initializers(self):
        """Test literal initializers, including negatives and booleans."""
        contract = parse_contract('contract C { var a = -3; var b = true; var c = "s"; var d; }')

        assert [d.init for d in contract.var_decls] == [-3, True, "s", None]

    def test_comments_are_skipped(self):
        """Test that line comments are ignored."""
        contract = parse_contract("// header\ncontract C { // inline\n var x; }")

        assert contract.var_names == {"x"}

    def test_duplicate_declaration_raises(self):
        """Test that declaring a state name twice fails with its position."""
        with pytest.raises(DuplicateDeclarationError) as exc_info:
            parse_contract("contract C {\n  var x;\n  map x(arity=1);\n}")

        assert exc_info.value.line == 3

    def test_duplicate_rule_raises(self):
        """Test that rule names are unique."""
        with pytest.raises(DuplicateDeclarationError):
            parse_contract(contract_with("r() { x = 1; } r() { x = 2; }"))

    def test_two_requires_rejected(self):
        """Test that a rule has at most one require."""
        with pytest.raises(HurfSyntaxError):
            parse_contract(contract_with("r() { require(true); require(true); }"))

    def test_zero_arity_map_rejected(self):
        """Test that map arity is at least one."""
        with pytest.raises(HurfSyntaxError):
            parse_contract("contract C { map m(arity=0); }")

    def test_error_reports_position(self):
        """Test that syntax errors carry line and column."""
        with pytest.raises(HurfSyntaxError) as exc_info:
            parse_contract("contract C {\n  var x\n}")

        assert (exc_info.value.line, exc_info.value.column) == (3, 1)
        assert "';'" in exc_info.value.message
        assert "'}'" in exc_info.value.message

    def test_unexpected_character(self):
        """Test that stray characters are rejected."""
        with pytest.raises(HurfSyntaxError):
            parse_contract("contract C { var x; # }")

    def test_keyword_cannot_name_a_variable(self):
        """Test that reserved words are not identifiers."""
        with pytest.raises(HurfSyntaxError):
            parse_contract("contract C { var if; }")

    def test_declarations_precede_rules(self):
        """Test that a declaration after a rule is rejected."""
        with pytest.raises(HurfSyntaxError):
            parse_contract("contract C { var x; r() { x = 1; } var y; }")

    def test_comments_between_tokens(self):
        """Test that comments may sit inside rules and expressions."""
        contract = parse_contract(contract_with("r(i) { // bump\n m[i] = m[i] // old\n + 1; }"))

        assert contract.rules[0].effects == (
            AssignMap("m", (Name("i"),), BinOp("+", MapAccess("m", (Name("i"),)), Const(1))),
        )


# ============================================================================
# Tests: Printer
# ============================================================================


class TestPrinter:
    """Tests for the canonical printer."""

    @pytest.mark.parametrize("name", BENCHMARK_CONTRACTS)
    def test_shipped_contracts_round_trip(self, name):
        """Test parse(print(c)) == c for every shipped contract."""
        contract = parse_contract(contract_source(name))

        assert parse_contract(print_contract(contract)) == contract

    def test_multisig_round_trip(self):
        """Test the rendered multisig contract round trips."""
        contract = parse_contract(multisig_source(6))

        assert parse_contract(print_contract(contract)) == contract

    @pytest.mark.parametrize(
        "text",
        [
            "(a || b) && c",
            "a - (b - c)",
            "(a < b) == true",
            "not (a && b)",
            "- -a",
            "(if a then 1 else 2) + 3",
            '"q\\"uote" @ toStr(1, true)',
        ],
    )
    def test_expressions_round_trip(self, text):
        """Test that printed expressions keep their structure."""
        expr = parse_expr(text)

        assert parse_expr(print_expr(expr)) == expr

    def test_print_is_stable(self):
        """Test that printing a printed contract changes nothing."""
        once = print_contract(parse_contract(contract_source("registry")))

        assert print_contract(parse_contract(once)) == once


# ============================================================================
# Tests: Checker
# ============================================================================


class TestChecker:
    """Tests for name resolution and well-formedness checks."""

    def test_names_resolve_to_params_and_vars(self):
        """Test that identifiers become Param or Var nodes."""
        checked = load_contract(contract_with("r(v) { x = v + x; }"))

        assert checked.contract.rules[0].effects == (AssignVar("x", BinOp("+", Param("v"), Var("x"))),)

    def test_unknown_identifier_raises(self):
        """Test that undeclared names are rejected."""
        with pytest.raises(HurfCheckError, match="unknown identifier"):
            load_contract(contract_with("r() { x = y; }"))

    def test_map_without_index_raises(self):
        """Test that a map name alone is not an expression."""
        with pytest.raises(HurfCheckError):
            load_contract(contract_with("r() { x = m; }"))

    def test_map_arity_mismatch_raises(self):
        """Test that map accesses use the declared arity."""
        with pytest.raises(HurfCheckError, match="arity"):
            load_contract(contract_with("r(i) { x = m[i, i]; }"))

    def test_builtin_arity_checked(self):
        """Test that builtins get the right number of arguments."""
        with pytest.raises(HurfCheckError):
            load_contract(contract_with('r() { x = substr("a", 1); }'))

    def test_conflicting_var_assignments_raise(self):
        """Test that x = 1 | x = 2 is rejected."""
        with pytest.raises(HurfCheckError, match="conflicting"):
            load_contract(contract_with("r() { x = 1 | x = 2; }"))

    def test_identical_assignments_collapse(self):
        """Test that x = 1 | x = 1 keeps one assignment."""
        checked = load_contract(contract_with("r() { x = 1 | x = 1; }"))

        assert checked.contract.rules[0].effects == (AssignVar("x", Const(1)),)

    def test_distinct_map_writes_strengthen_require(self):
        """Test that m[i] = 1 | m[j] = 2 requires i and j to differ."""
        checked = load_contract(contract_with("r(i, j) { m[i] = 1 | m[j] = 2; }"))

        assert checked.contract.rules[0].require == UnaryOp(
            "not", BinOp("==", Param("i"), Param("j"))
        )

    def test_parameter_shadowing_state_raises(self):
        """Test that parameters cannot reuse state names."""
        with pytest.raises(HurfCheckError, match="shadow"):
            load_contract(contract_with("r(x) { m[x] = 1; }"))

    def test_assignment_to_undeclared_variable_raises(self):
        """Test that only declared variables can be assigned."""
        with pytest.raises(HurfCheckError):
            load_contract(contract_with("r() { q = 1; }"))

    def test_source_is_canonical(self):
        """Test that the checked contract stores the printed source."""
        parsed = parse_contract(contract_source("map"))

        assert check_contract(parsed).source == print_contract(parsed)


class TestReadWriteSets:
    """Tests for the symbolic read and write sets."""

    def test_example_rule(self):
        """Test the reads and writes of the example rule, in first-use order."""
        info = load_contract(contract_source("example")).rule_info("example")

        assert info.reads == (
            VarKey("z"),
            MapKey("m", (Param("x"),)),
            VarKey("y"),
            MapKey("m", (Const(1),)),
            VarKey("a"),
        )
        assert [key for key, _ in info.writes] == [VarKey("w"), MapKey("m", (Var("z"),))]

    def test_map_index_expressions_are_read(self):
        """Test that state used inside a written index is a read."""
        info = load_contract(contract_with("r() { m[x] = 1; }")).rule_info("r")

        assert info.reads == (VarKey("x"),)
        assert info.writes == ((MapKey("m", (Var("x"),)), Const(1)),)

    def test_rule_without_state_access(self):
        """Test a rule that touches no state."""
        info = load_contract(contract_with("r(v) { receive(v:T); }")).rule_info("r")

        assert info.reads == ()
        assert info.writes == ()
