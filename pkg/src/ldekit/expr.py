"""Guard and action mini-language for statechart transitions.

Grammar (EBNF), all our own design since only the two sub-languages are
named by the modeling vocabulary:

    actions    = [ assignment { ";" assignment } [ ";" ] ] ;
    assignment = IDENT ":=" expression ;
    expression = or_expr ;
    or_expr    = and_expr { "or" and_expr } ;
    and_expr   = cmp_expr { "and" cmp_expr } ;
    cmp_expr   = add_expr { ("=" | "!=" | "<" | "<=" | ">" | ">=") add_expr } ;
    add_expr   = mul_expr { ("+" | "-") mul_expr } ;
    mul_expr   = unary { ("*" | "/") unary } ;
    unary      = "not" unary | "-" unary | primary ;
    primary    = "true" | "false" | INT | IDENT | "(" expression ")" ;

Operators are left-associative within a level. Variables are boolean or
integer; integers are exact signed 64-bit values, overflow is an error,
division truncates toward zero, and ``and``/``or`` short-circuit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Union

from .errors import DivisionByZeroError, IntegerOverflowError, ParseError
from .graph_core import SEVERITY_ERROR, ValidationIssue

INT64_MIN = -(2 ** 63)
INT64_MAX = 2 ** 63 - 1

BOOLEAN = "boolean"
INTEGER = "integer"

Value = Union[bool, int]


def value_type(value: Value) -> str:
    return BOOLEAN if isinstance(value, bool) else INTEGER


# -- abstract syntax ----------------------------------------------------------

@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "not" | "neg"
    operand: "Expression"


@dataclass(frozen=True)
class Binary:
    op: str  # and or = != < <= > >= + - * /
    left: "Expression"
    right: "Expression"


Expression = Union[BoolLit, IntLit, Var, Unary, Binary]


@dataclass(frozen=True)
class Assignment:
    target: str
    value: Expression


@dataclass(frozen=True)
class ActionList:
    assignments: tuple[Assignment, ...] = ()


@dataclass(frozen=True)
class Environment:
    """Variable store with a fixed schema: a variable never changes type."""

    schema: Mapping[str, str]  # name -> BOOLEAN | INTEGER
    values: Mapping[str, Value] = field(default_factory=dict)

    def value(self, name: str) -> Value:
        return self.values[name]

    def with_value(self, name: str, value: Value) -> "Environment":
        updated = dict(self.values)
        updated[name] = value
        return Environment(schema=self.schema, values=updated)


# -- tokenizer ----------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|!=|<=|>=|[=<>+\-*/();])
""", re.VERBOSE)

_KEYWORDS = {"true", "false", "and", "or", "not"}


@dataclass(frozen=True)
class _Token:
    kind: str  # int ident keyword op eof
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r} at offset {pos}",
                             pos, expected="token")
        if m.lastgroup != "ws":
            kind = m.lastgroup
            value = m.group()
            if kind == "ident" and value in _KEYWORDS:
                kind = "keyword"
            tokens.append(_Token(kind, value, pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        tok = self.current
        self.index += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.current.text == text and self.current.kind in ("op", "keyword"):
            self.index += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            raise ParseError(
                f"expected {text!r} at offset {self.current.pos}, "
                f"found {self.current.text or 'end of input'!r}",
                self.current.pos, expected=text)

    def expression(self) -> Expression:
        return self.or_expr()

    def or_expr(self) -> Expression:
        left = self.and_expr()
        while self.accept("or"):
            left = Binary("or", left, self.and_expr())
        return left

    def and_expr(self) -> Expression:
        left = self.cmp_expr()
        while self.accept("and"):
            left = Binary("and", left, self.cmp_expr())
        return left

    def cmp_expr(self) -> Expression:
        left = self.add_expr()
        while self.current.text in ("=", "!=", "<", "<=", ">", ">=") \
                and self.current.kind == "op":
            op = self.advance().text
            left = Binary(op, left, self.add_expr())
        return left

    def add_expr(self) -> Expression:
        left = self.mul_expr()
        while self.current.kind == "op" and self.current.text in ("+", "-"):
            op = self.advance().text
            left = Binary(op, left, self.mul_expr())
        return left

    def mul_expr(self) -> Expression:
        left = self.unary()
        while self.current.kind == "op" and self.current.text in ("*", "/"):
            op = self.advance().text
            left = Binary(op, left, self.unary())
        return left

    def unary(self) -> Expression:
        if self.accept("not"):
            return Unary("not", self.unary())
        if self.current.kind == "op" and self.current.text == "-":
            self.advance()
            return Unary("neg", self.unary())
        return self.primary()

    def primary(self) -> Expression:
        tok = self.current
        if tok.kind == "int":
            self.advance()
            return IntLit(int(tok.text))
        if tok.kind == "keyword" and tok.text in ("true", "false"):
            self.advance()
            return BoolLit(tok.text == "true")
        if tok.kind == "ident":
            self.advance()
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.expression()
            self.expect(")")
            return inner
        raise ParseError(
            f"expected a value at offset {tok.pos}, "
            f"found {tok.text or 'end of input'!r}",
            tok.pos, expected="value")

    def assignment(self) -> Assignment:
        tok = self.current
        if tok.kind != "ident":
            raise ParseError(
                f"expected a variable name at offset {tok.pos}", tok.pos,
                expected="identifier")
        self.advance()
        self.expect(":=")
        return Assignment(tok.text, self.expression())

    def end(self) -> None:
        if self.current.kind != "eof":
            raise ParseError(
                f"unexpected trailing input at offset {self.current.pos}: "
                f"{self.current.text!r}",
                self.current.pos, expected="end of input")


def parse_expression(text: str) -> Expression:
    parser = _Parser(text)
    expr = parser.expression()
    parser.end()
    return expr


def parse_action(text: str) -> ActionList:
    """Semicolon-separated assignments, in source order. A trailing
    semicolon is tolerated; the empty string is the empty action list."""
    parser = _Parser(text)
    assignments: list[Assignment] = []
    if parser.current.kind != "eof":
        assignments.append(parser.assignment())
        while parser.accept(";"):
            if parser.current.kind == "eof":
                break
            assignments.append(parser.assignment())
    parser.end()
    return ActionList(tuple(assignments))


# -- printer ------------------------------------------------------------------

_PRECEDENCE = {"or": 1, "and": 2, "=": 3, "!=": 3, "<": 3, "<=": 3, ">": 3,
               ">=": 3, "+": 4, "-": 4, "*": 5, "/": 5}
_UNARY_PRECEDENCE = 6


def print_expression(expr: Expression) -> str:
    """Concrete syntax such that parse_expression(print_expression(e)) == e."""
    def render(e: Expression, parent_prec: int, right_side: bool) -> str:
        if isinstance(e, BoolLit):
            return "true" if e.value else "false"
        if isinstance(e, IntLit):
            return str(e.value)
        if isinstance(e, Var):
            return e.name
        if isinstance(e, Unary):
            op = "not " if e.op == "not" else "-"
            inner = render(e.operand, _UNARY_PRECEDENCE, False)
            return f"{op}{inner}"
        prec = _PRECEDENCE[e.op]
        left = render(e.left, prec, False)
        right = render(e.right, prec, True)
        text = f"{left} {e.op} {right}"
        # parenthesize when binding looser than the parent, or equally on
        # the right of a left-associative operator
        if prec < parent_prec or (prec == parent_prec and right_side):
            return f"({text})"
        return text

    return render(expr, 0, False)


def print_action(actions: ActionList) -> str:
    return "; ".join(f"{a.target} := {print_expression(a.value)}"
                     for a in actions.assignments)


# -- type checking ------------------------------------------------------------

_ARITH_OPS = {"+", "-", "*", "/"}
_ORDER_OPS = {"<", "<=", ">", ">="}
_EQ_OPS = {"=", "!="}


def typecheck_expression(expr: Expression, schema: Mapping[str, str]
                         ) -> tuple[str | None, list[ValidationIssue]]:
    """Infer the expression's type against declared variables.

    Returns (type tag, issues); the tag is None whenever issues were found.
    Problems are reported as issues, never raised.
    """
    issues: list[ValidationIssue] = []

    def problem(rule_id: str, message: str) -> None:
        issues.append(ValidationIssue(SEVERITY_ERROR, rule_id, message))

    def infer(e: Expression) -> str | None:
        if isinstance(e, BoolLit):
            return BOOLEAN
        if isinstance(e, IntLit):
            if not INT64_MIN <= e.value <= INT64_MAX:
                problem("int.range", f"integer literal {e.value} exceeds 64-bit range")
                return None
            return INTEGER
        if isinstance(e, Var):
            tag = schema.get(e.name)
            if tag is None:
                problem("var.undeclared", f"variable {e.name!r} is not declared")
            return tag
        if isinstance(e, Unary):
            inner = infer(e.operand)
            wanted = BOOLEAN if e.op == "not" else INTEGER
            if inner is not None and inner != wanted:
                problem("type.mismatch",
                        f"operator {'not' if e.op == 'not' else '-'} needs a "
                        f"{wanted} operand, got {inner}")
                return None
            return wanted if inner is not None else None
        left = infer(e.left)
        right = infer(e.right)
        if left is None or right is None:
            return None
        if e.op in ("and", "or"):
            if left != BOOLEAN or right != BOOLEAN:
                problem("type.mismatch",
                        f"operator {e.op} needs boolean operands, "
                        f"got {left} and {right}")
                return None
            return BOOLEAN
        if e.op in _EQ_OPS:
            if left != right:
                problem("type.mismatch",
                        f"operator {e.op} needs operands of one type, "
                        f"got {left} and {right}")
                return None
            return BOOLEAN
        if e.op in _ORDER_OPS:
            if left != INTEGER or right != INTEGER:
                problem("type.mismatch",
                        f"operator {e.op} needs integer operands, "
                        f"got {left} and {right}")
                return None
            return BOOLEAN
        if left != INTEGER or right != INTEGER:
            problem("type.mismatch",
                    f"operator {e.op} needs integer operands, "
                    f"got {left} and {right}")
            return None
        return INTEGER

    tag = infer(expr)
    return (tag if not issues else None, issues)


def typecheck_action(actions: ActionList, schema: Mapping[str, str]
                     ) -> list[ValidationIssue]:
    """Assignments must be type-preserving and all variables declared."""
    issues: list[ValidationIssue] = []
    for a in actions.assignments:
        declared = schema.get(a.target)
        if declared is None:
            issues.append(ValidationIssue(
                SEVERITY_ERROR, "var.undeclared",
                f"assignment target {a.target!r} is not declared"))
        tag, sub = typecheck_expression(a.value, schema)
        issues.extend(sub)
        if declared is not None and tag is not None and tag != declared:
            issues.append(ValidationIssue(
                SEVERITY_ERROR, "type.mismatch",
                f"cannot assign {tag} to {declared} variable {a.target!r}"))
    return issues


# -- evaluation ---------------------------------------------------------------

def _checked(result: int) -> int:
    if not INT64_MIN <= result <= INT64_MAX:
        raise IntegerOverflowError(f"arithmetic result {result} leaves the "
                                   "signed 64-bit range")
    return result


def eval_expression(expr: Expression, env: Environment) -> Value:
    """Evaluate a typechecked expression. Pure; raises only
    DivisionByZeroError and IntegerOverflowError."""
    if isinstance(expr, BoolLit):
        return expr.value
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, Var):
        return env.value(expr.name)
    if isinstance(expr, Unary):
        if expr.op == "not":
            return not eval_expression(expr.operand, env)
        return _checked(-eval_expression(expr.operand, env))

    op = expr.op
    if op == "and":
        return bool(eval_expression(expr.left, env)) and \
            bool(eval_expression(expr.right, env))
    if op == "or":
        return bool(eval_expression(expr.left, env)) or \
            bool(eval_expression(expr.right, env))

    left = eval_expression(expr.left, env)
    right = eval_expression(expr.right, env)
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    if op == "+":
        return _checked(left + right)
    if op == "-":
        return _checked(left - right)
    if op == "*":
        return _checked(left * right)
    if op == "/":
        if right == 0:
            raise DivisionByZeroError("division by zero")
        # truncate toward zero, like most C-family languages
        return _checked(abs(left) // abs(right) * (1 if (left < 0) == (right < 0) else -1))
    raise AssertionError(f"unknown operator {op!r}")


def apply_action(actions: ActionList, env: Environment) -> Environment:
    """Apply assignments left to right; later assignments see earlier
    results. The input environment is never modified. Evaluation errors
    carry the index of the failing assignment."""
    current = env
    for index, a in enumerate(actions.assignments):
        try:
            value = eval_expression(a.value, current)
        except (DivisionByZeroError, IntegerOverflowError) as exc:
            exc.assignment_index = index
            raise
        current = current.with_value(a.target, value)
    return current
