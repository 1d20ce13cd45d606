"""Concrete syntax for STL / PSTL spec files.

    # comment
    param p in [0, 20];
    danger := xf - xr <= 10;
    formula: G (xf - xr >= 0) && F[0, 9] G[0, 1] danger

Prefix operators (`!`, `G`, `F`) bind tightest, then `U` / `R`, then `&&`, `||` and `->`.
`->` is right associative and expands to `!a || b`. Strict comparisons are closed.
"""

import logging
import math
from dataclasses import dataclass, field

from pyparsing import (
    Group,
    Keyword,
    Literal,
    OpAssoc,
    Opt,
    ParseException,
    ParserElement,
    ParseResults,
    Regex,
    StringEnd,
    Suppress,
    ZeroOrMore,
    col,
    infix_notation,
    lineno,
    python_style_comment,
)

from formula.ast import (
    And,
    Always,
    Atom,
    Eventually,
    FalseFormula,
    Formula,
    Interval,
    LinearPredicate,
    Not,
    Or,
    Param,
    Release,
    TrueFormula,
    Until,
    map_children,
)
from utilities.exceptions import FormulaSyntaxError, FormulaValidationError

ParserElement.enable_packrat()

logger = logging.getLogger(__name__)

KEYWORDS = ("G", "F", "U", "R", "true", "false", "inf", "formula", "param", "in")


@dataclass
class Specification:
    """A parsed spec file: the main formula, its let-definitions and PSTL parameter domains."""

    formula: Formula
    definitions: dict[str, Formula] = field(default_factory=dict)
    params: dict[str, tuple[float, float]] = field(default_factory=dict)


@dataclass
class _Term:
    name: str | None
    coeff: float


@dataclass
class _LinearTerms:
    coeffs: dict[str, float] = field(default_factory=dict)
    const: float = 0.0

    def add(self, term: _Term, sign: float):
        if term.name is None:
            self.const += sign * term.coeff
        else:
            self.coeffs[term.name] = self.coeffs.get(term.name, 0.0) + sign * term.coeff

    def minus(self, other: "_LinearTerms") -> "_LinearTerms":
        coeffs = dict(self.coeffs)
        for name, coeff in other.coeffs.items():
            coeffs[name] = coeffs.get(name, 0.0) - coeff
        return _LinearTerms(coeffs, self.const - other.const)


@dataclass(frozen=True)
class _Operator:
    name: str
    interval: Interval = Interval()


@dataclass
class _Declaration:
    kind: str
    name: str
    value: object


@dataclass(frozen=True)
class _RawComparison(Formula):
    lhs: _LinearTerms = field(compare=False)
    op: str
    rhs: _LinearTerms = field(compare=False)
    line: int
    column: int


@dataclass(frozen=True)
class _Reference(Formula):
    name: str
    line: int
    column: int


def _number_action(tokens: ParseResults) -> float:
    return float(tokens[0])


def _term_action(tokens: ParseResults) -> _Term:
    if len(tokens) == 2:
        return _Term(tokens[1], tokens[0])
    token = tokens[0]
    if isinstance(token, float):
        return _Term(None, token)
    return _Term(token, 1.0)


def _linexpr_action(tokens: ParseResults) -> _LinearTerms:
    expr = _LinearTerms()
    sign = 1.0
    for token in tokens:
        if isinstance(token, str):
            sign = -sign if token == "-" else sign
            continue
        expr.add(token, sign)
        sign = 1.0
    return expr


def _window_action(tokens: ParseResults) -> Interval:
    lo, hi = tokens[0], tokens[1]
    return Interval(lo, math.inf if hi == "inf" else hi)


def _bound_action(tokens: ParseResults) -> float | Param:
    token = tokens[0]
    return Param(token) if isinstance(token, str) else token


def _operator_action(tokens: ParseResults) -> _Operator:
    return _Operator(tokens[0], tokens[1]) if len(tokens) > 1 else _Operator(tokens[0])


def _prefix_action(tokens: ParseResults) -> Formula:
    # [operator, operand]; the operator is a single token whatever pyparsing does with groups
    op, operand = tokens[0][0], tokens[0][-1]
    if op.name == "!":
        return Not(operand)
    return Always(op.interval, operand) if op.name == "G" else Eventually(op.interval, operand)


def _binary_temporal_action(tokens: ParseResults) -> Formula:
    items = list(tokens[0])
    result = items[0]
    for op, right in zip(items[1::2], items[2::2], strict=True):
        result = Until(op.interval, result, right) if op.name == "U" else Release(op.interval, result, right)
    return result


def _and_action(tokens: ParseResults) -> Formula:
    return And(tuple(tokens[0][0::2]))


def _or_action(tokens: ParseResults) -> Formula:
    return Or(tuple(tokens[0][0::2]))


def _implies_action(tokens: ParseResults) -> Formula:
    operands = list(tokens[0][0::2])
    result = operands[-1]
    for premise in reversed(operands[:-1]):
        result = Or((Not(premise), result))
    return result


def _build_grammar() -> tuple[ParserElement, ParserElement]:
    keyword = Regex("|".join(rf"{k}\b" for k in KEYWORDS))
    identifier = ~keyword + Regex(r"[A-Za-z_][A-Za-z0-9_]*")
    number = Regex(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?").set_parse_action(_number_action)
    signed_number = Regex(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?").set_parse_action(_number_action)
    sign = Regex(r"[+-](?!>)")

    term = (number + Suppress("*") + identifier | number | identifier).set_parse_action(_term_action)
    linexpr = (Opt(sign) + term + ZeroOrMore(sign + term)).set_parse_action(_linexpr_action)
    comparison_op = Regex(r"<=|>=|<|>")
    comparison = (linexpr + comparison_op + linexpr).set_parse_action(
        lambda s, loc, t: _RawComparison(t[0], t[1], t[2], lineno(loc, s), col(loc, s))
    )

    bound = (number | identifier).set_parse_action(_bound_action)
    window = (Suppress("[") + bound + Suppress(",") + (Keyword("inf") | bound) + Suppress("]")).set_parse_action(
        _window_action
    )

    reference = identifier.copy().set_parse_action(lambda s, loc, t: _Reference(t[0], lineno(loc, s), col(loc, s)))
    operand = (
        comparison
        | Keyword("true").set_parse_action(lambda: TrueFormula())
        | Keyword("false").set_parse_action(lambda: FalseFormula())
        | reference
    )

    prefix_op = (Literal("!") | (Keyword("G") | Keyword("F")) + Opt(window)).set_parse_action(_operator_action)
    binary_temporal_op = ((Keyword("U") | Keyword("R")) + Opt(window)).set_parse_action(_operator_action)

    formula = infix_notation(
        operand,
        [
            (prefix_op, 1, OpAssoc.RIGHT, _prefix_action),
            (binary_temporal_op, 2, OpAssoc.LEFT, _binary_temporal_action),
            (Literal("&&"), 2, OpAssoc.LEFT, _and_action),
            (Literal("||"), 2, OpAssoc.LEFT, _or_action),
            (Literal("->"), 2, OpAssoc.RIGHT, _implies_action),
        ],
    )

    letdef = Group(identifier + Suppress(":=") + formula + Suppress(";"))
    letdef.set_parse_action(lambda t: _Declaration("let", t[0][0], t[0][1]))
    paramdecl = Group(
        Suppress(Keyword("param"))
        + identifier
        + Suppress(Keyword("in"))
        + Suppress("[")
        + signed_number
        + Suppress(",")
        + signed_number
        + Suppress("]")
        + Suppress(";")
    )
    paramdecl.set_parse_action(lambda t: _Declaration("param", t[0][0], (t[0][1], t[0][2])))

    body = Opt(Suppress(Keyword("formula") + Literal(":"))) + formula + Opt(Suppress(";"))
    spec = ZeroOrMore(letdef | paramdecl) + body + StringEnd()
    spec.ignore(python_style_comment)
    bare = formula + StringEnd()
    bare.ignore(python_style_comment)
    return spec, bare


_SPEC_GRAMMAR, _FORMULA_GRAMMAR = _build_grammar()


class _Resolver:
    """Turns parsed nodes into AST nodes: expands let-references and splits parameters out of atoms."""

    def __init__(self, params: dict[str, tuple[float, float]], definitions: dict[str, Formula]):
        self.params = params
        self.definitions = definitions

    def resolve(self, node: Formula) -> Formula:
        match node:
            case _Reference(name, line, column):
                if name not in self.definitions:
                    raise FormulaSyntaxError(f"unknown definition '{name}'", line, column)
                return self.definitions[name]
            case _RawComparison():
                return self._comparison(node)
            case Eventually(interval, child):
                return Eventually(self._interval(interval), self.resolve(child))
            case Always(interval, child):
                return Always(self._interval(interval), self.resolve(child))
            case Until(interval, left, right):
                return Until(self._interval(interval), self.resolve(left), self.resolve(right))
            case Release(interval, left, right):
                return Release(self._interval(interval), self.resolve(left), self.resolve(right))
            case _:
                return map_children(node, self.resolve)

    def _interval(self, interval: Interval) -> Interval:
        for bound in (interval.lo, interval.hi):
            if isinstance(bound, Param) and bound.name not in self.params:
                raise FormulaValidationError(f"timing parameter '{bound.name}' is not declared")
        return interval

    def _comparison(self, node: _RawComparison) -> Formula:
        if node.op in (">=", ">"):
            diff = node.lhs.minus(node.rhs)
        else:
            diff = node.rhs.minus(node.lhs)
        strict = node.op in ("<", ">")
        if strict:
            logger.warning(f"strict comparison '{node.op}' at line {node.line} is treated as closed")

        coeffs = {name: c for name, c in diff.coeffs.items() if name not in self.params and c != 0}
        params = {name: c for name, c in diff.coeffs.items() if name in self.params and c != 0}
        if not coeffs:
            if params:
                raise FormulaSyntaxError("comparison mentions parameters but no variables", node.line, node.column)
            holds = diff.const > 0 if strict else diff.const >= 0
            return TrueFormula() if holds else FalseFormula()
        return Atom(LinearPredicate.from_terms(coeffs, diff.const, params))


def _raise_syntax_error(error: ParseException):
    raise FormulaSyntaxError(f"syntax error: {error.msg}", error.lineno, error.col) from error


def parse(text: str) -> Specification:
    """Parse a spec file into a `Specification`."""
    try:
        items = _SPEC_GRAMMAR.parse_string(text, parse_all=True)
    except ParseException as error:
        _raise_syntax_error(error)

    params: dict[str, tuple[float, float]] = {}
    definitions: dict[str, Formula] = {}
    *declarations, main = list(items)
    for declaration in declarations:
        name = declaration.name
        if name in params or name in definitions:
            raise FormulaValidationError(f"'{name}' is declared twice")
        if declaration.kind == "param":
            lo, hi = declaration.value
            if lo > hi:
                raise FormulaValidationError(f"parameter '{name}' has an empty domain [{lo}, {hi}]")
            params[name] = (lo, hi)
        else:
            definitions[name] = _Resolver(params, definitions).resolve(declaration.value)

    formula = _Resolver(params, definitions).resolve(main)
    return Specification(formula, definitions, params)


def parse_formula(text: str, params: dict[str, tuple[float, float]] | None = None) -> Formula:
    """Parse a bare formula. Names listed in `params` are treated as PSTL parameters."""
    try:
        items = _FORMULA_GRAMMAR.parse_string(text, parse_all=True)
    except ParseException as error:
        _raise_syntax_error(error)
    return _Resolver(dict(params or {}), {}).resolve(items[0])


def parse_file(path) -> Specification:
    with open(path, encoding="utf-8") as handle:
        return parse(handle.read())
