"""Safety / liveness fragments of PCTL.

Concrete syntax::

    formula := orExpr
    orExpr  := andExpr { "|" andExpr }
    andExpr := unary { "&" unary }
    unary   := "!" unary | atom
    atom    := "true" | "false" | IDENT | probOp | "(" formula ")"
    probOp  := "P" ("<" | "<=") RATIONAL "[" path "]"
    path    := "X" formula | formula "U" formula | "F" formula

The parser accepts this whole language; :func:`classify` then decides which
fragment a formula belongs to.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class Fragment(enum.Flag):
    OUTSIDE = 0
    SAFETY = enum.auto()
    WEAK_SAFETY = enum.auto()
    LIVENESS = enum.auto()
    STRICT_LIVENESS = enum.auto()


ALL_FRAGMENTS = Fragment.SAFETY | Fragment.WEAK_SAFETY | Fragment.LIVENESS | Fragment.STRICT_LIVENESS


class FormulaError(ValueError):
    pass


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass(frozen=True)
class TrueF:
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class FalseF:
    def __str__(self) -> str:
        return "false"


@dataclass(frozen=True)
class Prop:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def __str__(self) -> str:
        return "!" + _wrap(self.arg, 3)


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left, 2)} & {_wrap(self.right, 3)}"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left, 1)} | {_wrap(self.right, 2)}"


@dataclass(frozen=True)
class Next:
    arg: "Formula"

    def __str__(self) -> str:
        return f"X {_wrap(self.arg, 3)}"


@dataclass(frozen=True)
class Until:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left, 3)} U {_wrap(self.right, 3)}"


@dataclass(frozen=True)
class Prob:
    op: str  # "<" or "<="
    bound: Fraction
    path: "PathFormula"

    def __post_init__(self) -> None:
        if self.op not in ("<", "<="):
            raise FormulaError(f"unsupported comparison {self.op!r}")
        if not isinstance(self.path, (Next, Until)):
            raise FormulaError("probability operator needs a path formula")
        object.__setattr__(self, "bound", Fraction(self.bound))
        if not 0 <= self.bound <= 1:
            raise FormulaError(f"threshold {self.bound} outside [0,1]")

    def __str__(self) -> str:
        return f"P{self.op}{self.bound}[{self.path}]"

    def holds(self, value: Fraction) -> bool:
        return value < self.bound if self.op == "<" else value <= self.bound


PathFormula = Union[Next, Until]
Formula = Union[TrueF, FalseF, Prop, Not, And, Or, Prob]

TRUE = TrueF()
FALSE = FalseF()

_PREC = {Or: 1, And: 2}


def _wrap(f: "Formula | PathFormula", need: int) -> str:
    prec = _PREC.get(type(f), 3)
    s = str(f)
    return s if prec >= need else f"({s})"


def size(f: "Formula | PathFormula") -> int:
    """Number of AST nodes."""
    if isinstance(f, (TrueF, FalseF, Prop)):
        return 1
    if isinstance(f, (Not, Next)):
        return 1 + size(f.arg)
    if isinstance(f, (And, Or, Until)):
        return 1 + size(f.left) + size(f.right)
    if isinstance(f, Prob):
        return 1 + size(f.path)
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+/\d+|\d*\.\d+|\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<op><=|[()\[\]!&|<]|◊))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise FormulaSyntaxError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0) -> tuple[str, str, int]:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def take(self) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, val, pos = self.take()
        if val != value or kind == "end":
            raise FormulaSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def formula(self) -> Formula:
        f = self.conj()
        while self.peek()[1] == "|" and self.peek()[0] == "op":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek()[1] == "&" and self.peek()[0] == "op":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.peek()[:2] == ("op", "!"):
            self.take()
            return Not(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        kind, val, pos = self.take()
        if kind == "op" and val == "(":
            f = self.formula()
            self.expect(")")
            return f
        if kind == "ident":
            if val == "true":
                return TRUE
            if val == "false":
                return FALSE
            if val == "P" and self.peek()[1] in ("<", "<="):
                return self.prob()
            return Prop(val)
        raise FormulaSyntaxError(f"unexpected {val or 'end of input'!r}", pos)

    def prob(self) -> Prob:
        _, op, _ = self.take()
        kind, num, pos = self.take()
        if kind != "num":
            raise FormulaSyntaxError(f"expected a probability, found {num!r}", pos)
        bound = Fraction(num)
        if not 0 <= bound <= 1:
            raise FormulaSyntaxError(f"threshold {num} outside [0,1]", pos)
        self.expect("[")
        path = self.path()
        self.expect("]")
        return Prob(op, bound, path)

    def path(self) -> PathFormula:
        kind, val, _ = self.peek()
        if kind == "ident" and val == "X":
            self.take()
            return Next(self.formula())
        if (kind == "ident" and val == "F") or (kind == "op" and val == "◊"):
            self.take()
            return Until(TRUE, self.formula())
        left = self.formula()
        kind, val, pos = self.take()
        if not (kind == "ident" and val == "U"):
            raise FormulaSyntaxError(f"expected 'U', found {val or 'end of input'!r}", pos)
        return Until(left, self.formula())


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    kind, val, pos = p.peek()
    if kind != "end":
        raise FormulaSyntaxError(f"unexpected trailing {val!r}", pos)
    return f


# --------------------------------------------------------------------------
# fragments


def classify(f: Formula) -> Fragment:
    """Fragments ``f`` belongs to; propositional formulas belong to all four."""
    if isinstance(f, (TrueF, FalseF, Prop)):
        return ALL_FRAGMENTS
    if isinstance(f, Not):
        if isinstance(f.arg, Prop):
            return ALL_FRAGMENTS
        if isinstance(f.arg, Prob):
            inner = _path_operands_class(f.arg)
            out = Fragment.OUTSIDE
            if Fragment.LIVENESS in inner:
                out |= Fragment.LIVENESS
            if f.arg.op == "<=" and Fragment.STRICT_LIVENESS in inner:
                out |= Fragment.STRICT_LIVENESS
            return out
        return Fragment.OUTSIDE
    if isinstance(f, (And, Or)):
        return classify(f.left) & classify(f.right)
    if isinstance(f, Prob):
        inner = _path_operands_class(f)
        out = Fragment.OUTSIDE
        if Fragment.LIVENESS in inner:
            out |= Fragment.SAFETY
        if f.op == "<=" and Fragment.STRICT_LIVENESS in inner:
            out |= Fragment.WEAK_SAFETY
        return out
    return Fragment.OUTSIDE


def _path_operands_class(p: Prob) -> Fragment:
    path = p.path
    if isinstance(path, Next):
        return classify(path.arg)
    return classify(path.left) & classify(path.right)


def explain_outside(f: Formula) -> str | None:
    """Why ``f`` is in neither the safety nor the liveness fragment."""
    if classify(f) & (Fragment.SAFETY | Fragment.LIVENESS):
        return None
    for sub in _walk(f):
        if isinstance(sub, Not) and not isinstance(sub.arg, (Prop, Prob)):
            return f"negation applied to {sub.arg} (only propositions and P-operators may be negated)"
    if isinstance(f, (And, Or)):
        return "mixes safety-only and liveness-only subformulas"
    return "probability operator with operands outside the liveness fragment"


def _walk(f):
    yield f
    if isinstance(f, (Not, Next)):
        yield from _walk(f.arg)
    elif isinstance(f, (And, Or, Until)):
        yield from _walk(f.left)
        yield from _walk(f.right)
    elif isinstance(f, Prob):
        yield from _walk(f.path)


def negate(f: Formula) -> Formula:
    """Dual formula: safety becomes liveness and vice versa.

    Operands of path formulas are left alone; they are liveness formulas in
    both fragments.
    """
    if classify(f) == Fragment.OUTSIDE:
        raise FormulaError(f"{f} is outside the safety and liveness fragments")
    return _neg(f)


def _neg(f: Formula) -> Formula:
    if isinstance(f, TrueF):
        return FALSE
    if isinstance(f, FalseF):
        return TRUE
    if isinstance(f, Prop):
        return Not(f)
    if isinstance(f, Not):
        return f.arg
    if isinstance(f, And):
        return Or(_neg(f.left), _neg(f.right))
    if isinstance(f, Or):
        return And(_neg(f.left), _neg(f.right))
    if isinstance(f, Prob):
        return Not(f)
    raise TypeError(f"not a state formula: {f!r}")


def sub_and_path_formulas(f: Formula) -> tuple[tuple[Formula, ...], tuple[PathFormula, ...]]:
    """State and path subformulas of a strict-liveness formula.

    Both tuples are deduplicated and sorted by size (ties by text).
    """
    if Fragment.STRICT_LIVENESS not in classify(f):
        raise FormulaError(f"{f} is not a strict-liveness formula")
    states: set = set()
    paths: set = set()
    for sub in _walk(f):
        if isinstance(sub, (Next, Until)):
            paths.add(sub)
        elif Fragment.STRICT_LIVENESS in classify(sub):
            states.add(sub)
    key = lambda g: (size(g), str(g))
    return tuple(sorted(states, key=key)), tuple(sorted(paths, key=key))
