"""A small ASCII expression language for algebra and form elements.

::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | atom ('^' power)?
    power  := int | '-' int | '(' rational ')'
    atom   := rational | 'i' | 'q' | 'h' | 'k' | gen
            | '[' expr ',' expr ']' | '(' expr ')'
    gen    := 'x(' int ')' | 'r(' int ')' | 'w(' int ')' | 'L' | 'K'
            | 'xi(' int ')' | 'xibar(' int ')'

Division is only allowed by nonzero scalars; fractional powers only on
``q``.  Canonical printed forms of algebra elements and one-forms parse
back to the same element.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from .algebra import AlgebraElement, ExtendedAlgebra, UnsupportedInput
from .forms import OneForm

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "ExprIndexError",
    "Num",
    "Const",
    "Gen",
    "Pow",
    "Neg",
    "BinOp",
    "Comm",
    "parse_expr",
    "evaluate_expr",
    "normalize",
]


class ExprError(ValueError):
    """Expression could not be parsed or evaluated; ``pos`` is a 0-based offset."""

    def __init__(self, message: str, pos: Optional[int] = None):
        self.pos = pos
        self.message = message
        super().__init__(message if pos is None else f"at position {pos}: {message}")


class ExprSyntaxError(ExprError):
    pass


class ExprIndexError(ExprError):
    pass


# AST -------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: Fraction
    pos: int = 0


@dataclass(frozen=True)
class Const:
    name: str  # "i", "q", "h" or "k"
    pos: int = 0


@dataclass(frozen=True)
class Gen:
    name: str  # "x", "r", "w", "L", "K", "xi", "xibar"
    index: Optional[int]
    pos: int = 0


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exp: Fraction
    pos: int = 0


@dataclass(frozen=True)
class Neg:
    arg: "Node"
    pos: int = 0


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    left: "Node"
    right: "Node"
    pos: int = 0


@dataclass(frozen=True)
class Comm:
    left: "Node"
    right: "Node"
    pos: int = 0


Node = Union[Num, Const, Gen, Pow, Neg, BinOp, Comm]

# tokenizer ----------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>xibar|xi|[A-Za-z]+)|(?P<op>[-+*/^()\[\],]))")
_INDEXED = {"x", "r", "w", "xi", "xibar"}
_BARE = {"L", "K"}
_CONSTS = {"i", "q", "h", "k"}


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", n))
    return out


class _Parser:
    def __init__(self, text: str, N: Optional[int]):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.N = N

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.next()
        if v != value:
            found = "end of input" if kind == "end" else repr(v)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self) -> Node:
        if self.peek()[0] == "end":
            raise ExprSyntaxError("empty expression", 0)
        node = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {v!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            _, op, pos = self.next()
            node = BinOp(op, node, self.term(), pos)
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/"):
            _, op, pos = self.next()
            node = BinOp(op, node, self.factor(), pos)
        return node

    def factor(self) -> Node:
        kind, v, pos = self.peek()
        if v == "-":
            self.next()
            return Neg(self.factor(), pos)
        node = self.atom()
        if self.peek()[1] == "^":
            _, _, ppos = self.next()
            exp = self.power()
            if exp.denominator != 1 and not (isinstance(node, Const) and node.name == "q"):
                raise ExprSyntaxError("fractional powers are only allowed on q", ppos)
            if exp.denominator not in (1, 2):
                raise ExprSyntaxError("powers of q must be multiples of 1/2", ppos)
            node = Pow(node, exp, ppos)
            self._check_power(node)
        return node

    def power(self) -> Fraction:
        kind, v, pos = self.next()
        if kind == "num":
            return Fraction(int(v))
        if v == "-":
            kind, v, pos = self.next()
            if kind != "num":
                raise ExprSyntaxError("expected an integer exponent", pos)
            return -Fraction(int(v))
        if v == "(":
            sign = 1
            if self.peek()[1] == "-":
                self.next()
                sign = -1
            kind, v, pos = self.next()
            if kind != "num":
                raise ExprSyntaxError("expected a rational exponent", pos)
            value = Fraction(int(v))
            if self.peek()[1] == "/":
                self.next()
                kind, v, dpos = self.next()
                if kind != "num" or int(v) == 0:
                    raise ExprSyntaxError("expected a nonzero denominator", dpos)
                value = value / int(v)
            self.expect(")")
            return sign * value
        raise ExprSyntaxError("expected an exponent", pos)

    def _index(self) -> int:
        self.expect("(")
        sign = 1
        if self.peek()[1] == "-":
            self.next()
            sign = -1
        kind, v, pos = self.next()
        if kind != "num":
            raise ExprSyntaxError("expected an integer index", pos)
        self.expect(")")
        return sign * int(v)

    def atom(self) -> Node:
        kind, v, pos = self.next()
        if kind == "num":
            return Num(Fraction(int(v)), pos)
        if kind == "name":
            if v in _CONSTS:
                return Const(v, pos)
            if v in _BARE:
                return Gen(v, None, pos)
            if v in _INDEXED:
                node = Gen(v, self._index(), pos)
                self._check_index(node)
                return node
            raise ExprSyntaxError(f"unknown symbol {v!r}", pos)
        if v == "(":
            node = self.expr()
            self.expect(")")
            return node
        if v == "[":
            left = self.expr()
            self.expect(",")
            right = self.expr()
            self.expect("]")
            return Comm(left, right, pos)
        found = "end of input" if kind == "end" else repr(v)
        raise ExprSyntaxError(f"unexpected {found}", pos)

    # validation against N ---------------------------------------------------
    def _check_index(self, node: Gen):
        N = self.N
        if N is None:
            return
        n = N // 2
        i = node.index
        if node.name in ("x", "xi", "xibar"):
            ok = -n <= i <= n and (i != 0 or N % 2 == 1)
            if not ok:
                why = " (there is no x(0) for even N)" if i == 0 else ""
                raise ExprIndexError(f"index {i} out of range for N={N}{why}", node.pos)
        elif node.name == "r":
            lo = 0 if N % 2 == 1 else 1
            if not lo <= i <= n:
                raise ExprIndexError(f"r({i}) out of range for N={N}", node.pos)
        elif node.name == "w":
            if not 2 <= i <= n:
                raise ExprIndexError(f"w({i}) out of range for N={N}", node.pos)

    def _check_power(self, node: Pow):
        base = node.base
        if node.exp >= 0 or not isinstance(base, Gen) or self.N is None:
            return
        if base.name == "x":
            invertible = {0} if self.N % 2 == 1 else {-1, 1}
            if base.index not in invertible:
                raise ExprIndexError(f"x({base.index}) is not invertible", node.pos)
        if base.name in ("xi", "xibar", "w"):
            raise ExprIndexError(f"{base.name}({base.index}) cannot be inverted", node.pos)


def parse_expr(text: str, N: Optional[int] = None) -> Node:
    """Parse ``text``; with ``N`` given, indices and inverses are validated."""
    return _Parser(text, N).parse()


# evaluation -----------------------------------------------------------------------

Value = Union[AlgebraElement, OneForm]


def _scalar_of(u: AlgebraElement):
    """The scalar of a constant element, or None."""
    if not u.terms:
        return u.alg.ctx.zero
    if len(u.terms) != 1:
        return None
    (key, c), = u.terms.items()
    return c if key == u.alg.mono_key() else None


def _ensure_radicals(alg: ExtendedAlgebra):
    ctx = alg.ctx
    for a in range(2, ctx.n + 1):
        if (1 << (a - 1)) not in alg.radical_squares:
            alg.register_radical(a, ctx.omega[a] * ctx.omega[a - 1])


def evaluate_expr(node: Node, alg: ExtendedAlgebra) -> Value:
    """Evaluate to an :class:`AlgebraElement` or a :class:`OneForm`."""
    ctx = alg.ctx
    fld = ctx.field

    def ev(nd) -> Value:
        if isinstance(nd, Num):
            return alg.scalar(fld.const(nd.value))
        if isinstance(nd, Const):
            if nd.name == "i":
                return alg.scalar(fld.imag_unit())
            if nd.name == "q":
                return alg.scalar(ctx.q)
            if nd.name == "h":
                return alg.scalar(ctx.h)
            return alg.scalar(ctx.k)
        if isinstance(nd, Gen):
            try:
                if nd.name == "L":
                    return alg.L()
                if nd.name == "K":
                    if ctx.odd:
                        raise ExprIndexError("K exists only for even N", nd.pos)
                    return alg.K()
                if nd.name == "x":
                    return alg.x(nd.index)
                if nd.name == "r":
                    return alg.r(nd.index)
                if nd.name == "w":
                    _ensure_radicals(alg)
                    return alg.radical(nd.index)
                tag = "plain" if nd.name == "xi" else "barred"
                if nd.index not in ctx.indices:
                    raise ExprIndexError(f"index {nd.index} out of range for N={ctx.N}", nd.pos)
                return OneForm.basis(alg, tag, nd.index)
            except (ValueError, KeyError) as exc:
                if isinstance(exc, ExprError):
                    raise
                raise ExprIndexError(str(exc), nd.pos) from None
        if isinstance(nd, Pow):
            base = ev(nd.base)
            if isinstance(base, OneForm):
                raise ExprError("differentials cannot be raised to a power", nd.pos)
            if nd.exp.denominator == 2:
                return alg.scalar(alg.s_pow(int(nd.exp * 2)))
            try:
                return base ** int(nd.exp)
            except UnsupportedInput as exc:
                raise ExprError(str(exc), nd.pos) from None
        if isinstance(nd, Neg):
            return -ev(nd.arg)
        if isinstance(nd, Comm):
            a, b = ev(nd.left), ev(nd.right)
            return _sub(_mul(a, b, nd.pos), _mul(b, a, nd.pos), nd.pos)
        if isinstance(nd, BinOp):
            a, b = ev(nd.left), ev(nd.right)
            if nd.op == "+":
                return _add(a, b, nd.pos)
            if nd.op == "-":
                return _sub(a, b, nd.pos)
            if nd.op == "*":
                return _mul(a, b, nd.pos)
            if isinstance(b, OneForm):
                raise ExprError("cannot divide by a differential", nd.pos)
            c = _scalar_of(b)
            if c is None:
                raise ExprError("division is only allowed by scalars", nd.pos)
            if not c:
                raise ExprError("division by zero", nd.pos)
            return a.scale(c.inverse())
        raise TypeError(f"unknown node {nd!r}")

    return ev(node)


def _zero_form_mismatch(pos):
    return ExprError("cannot add a function and a differential", pos)


def _add(a, b, pos):
    if isinstance(a, OneForm) != isinstance(b, OneForm):
        # a zero function can be added to anything
        if isinstance(a, AlgebraElement) and not a.terms:
            return b
        if isinstance(b, AlgebraElement) and not b.terms:
            return a
        raise _zero_form_mismatch(pos)
    try:
        return a + b
    except ValueError as exc:
        raise ExprError(str(exc), pos) from None


def _sub(a, b, pos):
    return _add(a, -b, pos)


def _mul(a, b, pos):
    fa, fb = isinstance(a, OneForm), isinstance(b, OneForm)
    if fa and fb:
        raise ExprError("a monomial may contain at most one differential", pos)
    try:
        if fb:
            return b.left_mul(a)
        if fa:
            return a.right_mul(b)
    except UnsupportedInput as exc:
        raise ExprError(str(exc), pos) from None
    return a * b


def normalize(text: str, alg: ExtendedAlgebra) -> Value:
    """Parse, validate against ``alg``'s N and evaluate to normal form."""
    return evaluate_expr(parse_expr(text, alg.ctx.N), alg)
