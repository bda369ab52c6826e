"""Parsing, evaluation and symbolic differentiation of scalar expressions.

Grammar (whitespace insignificant)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | power
    power := atom ("^" unary)?
    atom  := number | ident | ident "(" expr ")" | "(" expr ")"

so precedence is, lowest first: ``+ -``, then ``* /``, then unary minus,
then ``^`` (right-associative).  An identifier followed by ``(`` must name
one of the supported single-argument functions; any other identifier is a
variable, bound only at evaluation time.

Trees are immutable after parsing; :func:`evaluate` and
:func:`differentiate` are pure, so expressions can be shared freely across
threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

from .errors import DomainError, EvalError, ParseError

__all__ = [
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Expression",
    "FUNCTIONS",
    "parse",
    "evaluate",
    "differentiate",
    "depends_on",
    "variables",
    "to_string",
    "compile_function",
]


@dataclass(frozen=True, slots=True)
class Num:
    value: float


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True, slots=True)
class Call:
    func: str
    arg: "Expression"


Expression = Union[Num, Var, Neg, BinOp, Call]

FUNCTIONS = ("sin", "cos", "tan", "asin", "acos", "atan", "exp", "ln", "sqrt", "abs")

_NUMBER = re.compile(r"(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def accept(self, ch: str) -> bool:
        self.skip_ws()
        if self.pos < len(self.src) and self.src[self.pos] == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.accept(ch):
            raise ParseError(f"expected {ch!r}", self.pos)

    def parse_expr(self) -> Expression:
        e = self.parse_term()
        while True:
            if self.accept("+"):
                e = BinOp("+", e, self.parse_term())
            elif self.accept("-"):
                e = BinOp("-", e, self.parse_term())
            else:
                return e

    def parse_term(self) -> Expression:
        e = self.parse_unary()
        while True:
            if self.accept("*"):
                e = BinOp("*", e, self.parse_unary())
            elif self.accept("/"):
                e = BinOp("/", e, self.parse_unary())
            else:
                return e

    def parse_unary(self) -> Expression:
        if self.accept("-"):
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Expression:
        e = self.parse_atom()
        if self.accept("^"):
            return BinOp("^", e, self.parse_unary())
        return e

    def parse_atom(self) -> Expression:
        self.skip_ws()
        if self.pos >= len(self.src):
            raise ParseError("unexpected end of input", self.pos)
        ch = self.src[self.pos]
        if ch == "(":
            self.pos += 1
            e = self.parse_expr()
            self.expect(")")
            return e
        m = _NUMBER.match(self.src, self.pos)
        if m:
            self.pos = m.end()
            return Num(float(m.group(0)))
        m = _IDENT.match(self.src, self.pos)
        if m:
            name = m.group(0)
            start = self.pos
            self.pos = m.end()
            if self.accept("("):
                if name not in FUNCTIONS:
                    raise ParseError(f"unknown function {name!r}", start)
                arg = self.parse_expr()
                self.expect(")")
                return Call(name, arg)
            return Var(name)
        raise ParseError(f"unexpected character {ch!r}", self.pos)


def parse(source: str) -> Expression:
    """Parse ``source`` into an expression tree.

    Raises :class:`ParseError` carrying the 0-based offset of the problem.
    """
    if not source or source.isspace():
        raise ParseError("empty expression", 0)
    p = _Parser(source)
    e = p.parse_expr()
    p.skip_ws()
    if p.pos != len(p.src):
        raise ParseError(f"unexpected character {p.src[p.pos]!r}", p.pos)
    return e


def _power_value(base: float, expo: float) -> float:
    if base < 0.0 and expo != math.floor(expo):
        raise DomainError(f"negative base {base!r} with non-integer exponent {expo!r}")
    if base == 0.0 and expo < 0.0:
        raise DomainError("zero base with negative exponent")
    try:
        return math.pow(base, expo)
    except OverflowError:
        raise DomainError("overflow in power") from None


def _call_value(func: str, a: float) -> float:
    if func == "sin":
        return math.sin(a)
    if func == "cos":
        return math.cos(a)
    if func == "tan":
        return math.tan(a)
    if func == "asin":
        if not -1.0 <= a <= 1.0:
            raise DomainError(f"asin argument {a!r} outside [-1, 1]")
        return math.asin(a)
    if func == "acos":
        if not -1.0 <= a <= 1.0:
            raise DomainError(f"acos argument {a!r} outside [-1, 1]")
        return math.acos(a)
    if func == "atan":
        return math.atan(a)
    if func == "exp":
        try:
            return math.exp(a)
        except OverflowError:
            raise DomainError("overflow in exp") from None
    if func == "ln":
        if a <= 0.0:
            raise DomainError(f"ln argument {a!r} must be positive")
        return math.log(a)
    if func == "sqrt":
        if a < 0.0:
            raise DomainError(f"sqrt argument {a!r} is negative")
        return math.sqrt(a)
    if func == "abs":
        return abs(a)
    raise EvalError(f"unknown function {func!r}")


def evaluate(e: Expression, bindings: Mapping[str, float]) -> float:
    """Evaluate ``e`` with every variable bound in ``bindings``.

    Out-of-domain arguments (negative sqrt/ln, |asin| > 1, division by
    zero, negative base with fractional exponent) raise
    :class:`DomainError` rather than producing a silent NaN.
    """
    match e:
        case Num(value=v):
            return v
        case Var(name=name):
            try:
                return bindings[name]
            except KeyError:
                raise EvalError(f"unbound variable {name!r}") from None
        case Neg(arg=a):
            return -evaluate(a, bindings)
        case BinOp(op=op, left=left, right=right):
            lv = evaluate(left, bindings)
            rv = evaluate(right, bindings)
            if op == "+":
                return lv + rv
            if op == "-":
                return lv - rv
            if op == "*":
                return lv * rv
            if op == "/":
                if rv == 0.0:
                    raise DomainError("division by zero")
                return lv / rv
            return _power_value(lv, rv)
        case Call(func=func, arg=arg):
            return _call_value(func, evaluate(arg, bindings))
    raise TypeError(f"not an expression node: {e!r}")


def depends_on(e: Expression, var: str) -> bool:
    match e:
        case Var(name=name):
            return name == var
        case Neg(arg=a):
            return depends_on(a, var)
        case BinOp(left=left, right=right):
            return depends_on(left, var) or depends_on(right, var)
        case Call(arg=arg):
            return depends_on(arg, var)
    return False


def variables(e: Expression) -> frozenset[str]:
    out: set[str] = set()

    def walk(node):
        match node:
            case Var(name=name):
                out.add(name)
            case Neg(arg=a):
                walk(a)
            case BinOp(left=left, right=right):
                walk(left)
                walk(right)
            case Call(arg=arg):
                walk(arg)

    walk(e)
    return frozenset(out)


# Folding constructors.  Only literal subtrees and exact identities are
# folded; folds that could produce a non-finite literal fall back to the
# unfolded node.


def _lit(v: float, fallback: Expression) -> Expression:
    return Num(v) if math.isfinite(v) else fallback


def _is(e: Expression, v: float) -> bool:
    return isinstance(e, Num) and e.value == v


def _add(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Num) and isinstance(b, Num):
        return _lit(a.value + b.value, BinOp("+", a, b))
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return BinOp("+", a, b)


def _sub(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Num) and isinstance(b, Num):
        return _lit(a.value - b.value, BinOp("-", a, b))
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return _neg(b)
    return BinOp("-", a, b)


def _mul(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Num) and isinstance(b, Num):
        return _lit(a.value * b.value, BinOp("*", a, b))
    if _is(a, 0.0) or _is(b, 0.0):
        return Num(0.0)
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    return BinOp("*", a, b)


def _div(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return _lit(a.value / b.value, BinOp("/", a, b))
    if _is(a, 0.0):
        return Num(0.0)
    if _is(b, 1.0):
        return a
    return BinOp("/", a, b)


def _powc(a: Expression, b: Expression) -> Expression:
    if _is(b, 1.0):
        return a
    if _is(b, 0.0):
        return Num(1.0)
    if isinstance(a, Num) and isinstance(b, Num):
        try:
            return _lit(_power_value(a.value, b.value), BinOp("^", a, b))
        except DomainError:
            pass
    return BinOp("^", a, b)


def _neg(a: Expression) -> Expression:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def differentiate(e: Expression, var: str) -> Expression:
    """Symbolic partial derivative of ``e`` with respect to ``var``.

    The result evaluates to the analytic derivative wherever ``e`` is
    differentiable.  Literal subtrees are folded, so derivatives of
    constants collapse to a plain ``0``.
    """
    match e:
        case Num():
            return Num(0.0)
        case Var(name=name):
            return Num(1.0 if name == var else 0.0)
        case Neg(arg=a):
            return _neg(differentiate(a, var))
        case BinOp(op="+", left=left, right=right):
            return _add(differentiate(left, var), differentiate(right, var))
        case BinOp(op="-", left=left, right=right):
            return _sub(differentiate(left, var), differentiate(right, var))
        case BinOp(op="*", left=left, right=right):
            dl = differentiate(left, var)
            dr = differentiate(right, var)
            return _add(_mul(dl, right), _mul(left, dr))
        case BinOp(op="/", left=left, right=right):
            dl = differentiate(left, var)
            dr = differentiate(right, var)
            return _div(_sub(_mul(dl, right), _mul(left, dr)), _mul(right, right))
        case BinOp(op="^", left=base, right=expo):
            db = differentiate(base, var)
            if not depends_on(expo, var):
                # plain power rule; also valid for negative bases with
                # integer exponents, unlike the logarithmic form
                return _mul(_mul(expo, _powc(base, _sub(expo, Num(1.0)))), db)
            de = differentiate(expo, var)
            return _mul(
                _powc(base, expo),
                _add(_mul(de, Call("ln", base)), _div(_mul(expo, db), base)),
            )
        case Call(func=func, arg=arg):
            da = differentiate(arg, var)
            if func == "sin":
                return _mul(Call("cos", arg), da)
            if func == "cos":
                return _neg(_mul(Call("sin", arg), da))
            if func == "tan":
                return _div(da, _mul(Call("cos", arg), Call("cos", arg)))
            if func == "asin":
                return _div(da, Call("sqrt", _sub(Num(1.0), _mul(arg, arg))))
            if func == "acos":
                return _neg(_div(da, Call("sqrt", _sub(Num(1.0), _mul(arg, arg)))))
            if func == "atan":
                return _div(da, _add(Num(1.0), _mul(arg, arg)))
            if func == "exp":
                return _mul(Call("exp", arg), da)
            if func == "ln":
                return _div(da, arg)
            if func == "sqrt":
                return _div(da, _mul(Num(2.0), Call("sqrt", arg)))
            if func == "abs":
                # undefined at arg = 0, where evaluation raises
                return _mul(da, _div(arg, Call("abs", arg)))
    raise TypeError(f"not an expression node: {e!r}")


_COMPILED_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "asin": math.asin,
    "acos": math.acos,
    "atan": math.atan,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
}


def _emit(e: Expression) -> str:
    match e:
        case Num(value=v):
            return repr(v)
        case Var(name=name):
            return f"v_{name}"
        case Neg(arg=a):
            return f"(-{_emit(a)})"
        case BinOp(op=op, left=left, right=right):
            if op == "^":
                # math.pow keeps the principal real branch and raises
                # ValueError outside it, matching evaluate()
                return f"_pow({_emit(left)}, {_emit(right)})"
            return f"({_emit(left)} {op} {_emit(right)})"
        case Call(func=func, arg=arg):
            return f"_{func}({_emit(arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def compile_function(e: Expression, params: tuple[str, ...]):
    """Compile ``e`` into a plain Python function of ``params``.

    The result evaluates like :func:`evaluate` with those bindings,
    converting out-of-domain math errors to :class:`DomainError`; it exists
    for hot loops where tree walking is too slow.  Every variable of ``e``
    must appear in ``params``.
    """
    missing = variables(e) - set(params)
    if missing:
        raise EvalError(f"unbound variable {sorted(missing)[0]!r}")
    args = ", ".join(f"v_{p}" for p in params)
    ns = {"_pow": math.pow}
    ns.update({f"_{name}": fn for name, fn in _COMPILED_FUNCS.items()})
    exec(f"def _compiled({args}):\n    return {_emit(e)}", ns)
    raw = ns["_compiled"]

    def call(*values: float) -> float:
        try:
            return raw(*values)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainError(str(exc)) from None

    return call


_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


def _prec(e: Expression) -> int:
    match e:
        case BinOp(op=op):
            if op in "+-":
                return _PREC_ADD
            if op in "*/":
                return _PREC_MUL
            return _PREC_POW
        case Neg():
            return _PREC_NEG
        case Num(value=v) if math.copysign(1.0, v) < 0:
            # prints with a leading minus, which reparses as unary negation
            return _PREC_NEG
    return _PREC_ATOM


def to_string(e: Expression) -> str:
    """Deterministic serialization; reparsing yields a value-identical tree."""
    match e:
        case Num(value=v):
            return repr(v)
        case Var(name=name):
            return name
        case Neg(arg=a):
            inner = to_string(a)
            if _prec(a) < _PREC_NEG:
                inner = f"({inner})"
            return f"-{inner}"
        case BinOp(op=op, left=left, right=right):
            p = _prec(e)
            ls = to_string(left)
            rs = to_string(right)
            if op == "^":
                # right-associative: parenthesize an equal-precedence left child
                if _prec(left) <= p:
                    ls = f"({ls})"
                if _prec(right) < p:
                    rs = f"({rs})"
                return f"{ls}^{rs}"
            if _prec(left) < p:
                ls = f"({ls})"
            # equal-precedence right children keep their parentheses so the
            # reparse rebuilds the same tree; float + and * do not reassociate
            if _prec(right) <= p:
                rs = f"({rs})"
            if op in "+-":
                return f"{ls} {op} {rs}"
            return f"{ls}{op}{rs}"
        case Call(func=func, arg=arg):
            return f"{func}({to_string(arg)})"
    raise TypeError(f"not an expression node: {e!r}")
