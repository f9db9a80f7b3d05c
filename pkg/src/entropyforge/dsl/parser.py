"""Parser for the line-oriented recurrence format.

::

    # Quispel-Roberts-Thompson type example
    x[n+1]*x[n-1] = 1 - a[n]/x[n]
    a: const 1

The first statement is the equation; later statements bind coefficients:
``const v``, ``periodic(v1,...,vk)`` (optionally ``periodic[m]``,
``periodic[m+n]``, ``periodic[m-n]`` on a lattice), ``table "file.csv"`` or
``symbolic(lo..hi)``. Statements are separated by newlines or ``;``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .coeffs import CoeffField2D, CoeffSpec, read_table
from .defs import LatticeDef, MappingDef
from .expr import BinOp, Coef, Expr, Neg, Num, Pow, Var, walk

GRAMMAR = """\
Recurrence file format (UTF-8, one statement per line or ';'-separated):
  equation     x[n+j] ... = <expr>            (1D; any rational equation that is
                                               linear in its highest shift)
               x[m,n] = <expr>                (2D quad lattice, SW neighbours only)
  coefficient  name: const v
               name: periodic(v1,...,vk)      (1D: index n; 2D: periodic[m|n|m+n|m-n])
               name: table "file.csv"         (columns n,value or m,n,value)
               name: symbolic(lo..hi)
  expr         + - * / ^ with integer exponents, parentheses, rationals p/q,
               x[...] and coefficient references such as a[n+1] or a[m,n-1]
  comments     start with '#'
"""


class DSLError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.line, self.col = line, col
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + message)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()\[\],=]))"
)


def _tokenize(text: str, line: int, col0: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            bad = len(text[pos:]) - len(text[pos:].lstrip())
            raise DSLError(f"unexpected character {text[pos + bad]!r}", line, col0 + pos + bad + 1)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), line, col0 + start + 1))
        pos = m.end()
    toks.append(_Tok("end", "", line, col0 + len(text) + 1))
    return toks


class _ExprParser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self, text: Optional[str] = None, kind: Optional[str] = None) -> _Tok:
        t = self.peek()
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            got = "end of statement" if t.kind == "end" else repr(t.text)
            raise DSLError(f"expected {want}, found {got}", t.line, t.col)
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind == "op"

    def expr(self) -> Expr:
        e = self.term()
        while self.at("+") or self.at("-"):
            op = self.take().text
            e = _fold(BinOp(op, e, self.term()))
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.at("*") or self.at("/"):
            op = self.take().text
            e = _fold(BinOp(op, e, self.factor()))
        return e

    def factor(self) -> Expr:
        if self.at("-"):
            self.take()
            return _fold(Neg(self.factor()))
        if self.at("+"):
            self.take()
            return self.factor()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.at("^"):
            self.take()
            return _fold(Pow(base, self.exponent()))
        return base

    def exponent(self) -> int:
        t = self.peek()
        paren = self.at("(")
        if paren:
            self.take()
        sign = 1
        if self.at("-"):
            self.take()
            sign = -1
        num = self.peek()
        if num.kind != "num" or "." in num.text:
            raise DSLError("exponents must be integer literals", num.line, num.col)
        self.take()
        if paren:
            if self.at("/"):
                raise DSLError("non-integer exponent", t.line, t.col)
            self.take(")")
        return sign * int(num.text)

    def atom(self) -> Expr:
        t = self.peek()
        if t.kind == "num":
            self.take()
            return Num(Fraction(t.text))
        if self.at("("):
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if t.kind == "ident":
            self.take()
            self.take("[")
            shift = self.index()
            close = self.peek()
            if close.text != "]":
                raise DSLError(f"unclosed bracket after {t.text}[", close.line, close.col)
            self.take("]")
            if t.text == "x":
                return Var(shift)
            return Coef(t.text, shift)
        got = "end of statement" if t.kind == "end" else repr(t.text)
        raise DSLError(f"expected a number, variable or '(', found {got}", t.line, t.col)

    def index(self) -> tuple:
        parts = [self.index_part()]
        while self.at(","):
            self.take()
            parts.append(self.index_part())
        names = tuple(p[0] for p in parts)
        if names not in (("n",), ("m", "n")):
            t = self.peek()
            raise DSLError("indices must be [n+j] or [m+i,n+j]", t.line, t.col)
        return tuple(p[1] for p in parts)

    def index_part(self):
        t = self.take(kind="ident")
        if t.text not in ("m", "n"):
            raise DSLError(f"unknown index variable {t.text!r}", t.line, t.col)
        off = 0
        if self.at("+") or self.at("-"):
            sign = 1 if self.take().text == "+" else -1
            num = self.take(kind="num")
            off = sign * int(num.text)
        return t.text, off


def _fold(e: Expr) -> Expr:
    """Constant-fold operations on literals so ``1/2`` and ``-3`` are single numbers."""
    if isinstance(e, Neg) and isinstance(e.arg, Num):
        return Num(-e.arg.value)
    if isinstance(e, BinOp) and isinstance(e.left, Num) and isinstance(e.right, Num):
        a, b = e.left.value, e.right.value
        if e.op == "/" and b == 0:
            return e
        return Num({"+": a + b, "-": a - b, "*": a * b, "/": a / b if b else a}[e.op])
    if isinstance(e, Pow) and isinstance(e.base, Num) and not (e.base.value == 0 and e.exponent < 0):
        return Num(e.base.value**e.exponent)
    return e


# -- solving the equation for its defining variable -------------------------


class _NotLinear(Exception):
    pass


def _has(e: Expr, target) -> bool:
    return any(isinstance(n, Var) and n.shift == target for n in walk(e))


def _add(a, b, op="+"):
    if a is None:
        return b if (b is None or op == "+") else _fold(Neg(b))
    if b is None:
        return a
    return BinOp(op, a, b)


def _mul(a, b):
    if a is None or b is None:
        return None
    if a == Num(Fraction(1)):
        return b
    if b == Num(Fraction(1)):
        return a
    return BinOp("*", a, b)


def _linear(e: Expr, target):
    """Split ``e`` as alpha*X + beta; ``None`` stands for zero."""
    if not _has(e, target):
        return None, e
    if isinstance(e, Var):
        return Num(Fraction(1)), None
    if isinstance(e, Neg):
        a, b = _linear(e.arg, target)
        return (None if a is None else _fold(Neg(a))), (None if b is None else _fold(Neg(b)))
    if isinstance(e, Pow):
        if e.exponent == 1:
            return _linear(e.base, target)
        raise _NotLinear
    a1, b1 = _linear(e.left, target)
    if e.op in "+-":
        a2, b2 = _linear(e.right, target)
        return _add(a1, a2, e.op), _add(b1, b2, e.op)
    if e.op == "*":
        a2, b2 = _linear(e.right, target)
        if a1 is not None and a2 is not None:
            raise _NotLinear
        if a1 is None:
            return _mul(b1, a2), _mul(b1, b2)
        return _mul(a1, b2), _mul(b1, b2)
    if _has(e.right, target):
        raise _NotLinear
    div = lambda x: None if x is None else BinOp("/", x, e.right)  # noqa: E731
    return div(a1), div(b1)


def _solve(lhs: Expr, rhs: Expr, target, tok: _Tok) -> Expr:
    try:
        alpha, beta = _linear(lhs, target)
    except _NotLinear:
        raise DSLError("cannot solve the equation rationally for its highest shift", tok.line, tok.col) from None
    if alpha is None:
        raise DSLError("the defining variable cancels from the left-hand side", tok.line, tok.col)
    if _has(rhs, target):
        raise DSLError("the defining variable occurs on the right-hand side", tok.line, tok.col)
    e = rhs if beta is None else BinOp("-", rhs, beta)
    if alpha == Num(Fraction(1)):
        return e
    if alpha == Num(Fraction(-1)):
        return _fold(Neg(e))
    return BinOp("/", e, alpha)


# -- statements ----------------------------------------------------------------

_RAT = r"-?\d+(?:\.\d+)?(?:/\d+)?"
_CONST_RE = re.compile(rf"^const\s+({_RAT})$")
_PERIODIC_RE = re.compile(rf"^periodic(?:\[\s*(m|n|m\+n|m-n)\s*\])?\(\s*({_RAT}(?:\s*,\s*{_RAT})*)\s*\)$")
_TABLE_RE = re.compile(r'^table\s+"([^"]+)"$')
_SYMBOLIC_RE = re.compile(r"^symbolic\(\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*\)$")
_BIND_RE = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)\s*:\s*(.*)$")


def _rat(s: str) -> Fraction:
    return Fraction(s.replace(" ", ""))


def _parse_spec(text: str, dim: int, base: Optional[Path], line: int, col: int) -> CoeffSpec:
    text = text.strip()
    if m := _CONST_RE.match(text):
        return CoeffSpec.const(_rat(m.group(1)))
    if m := _PERIODIC_RE.match(text):
        axis = m.group(1) or ("n" if dim == 1 else "m+n")
        if dim == 1 and axis != "n":
            raise DSLError("1D periodic coefficients cycle along n only", line, col)
        return CoeffSpec.periodic([_rat(v) for v in m.group(2).split(",")], axis=axis)
    if m := _TABLE_RE.match(text):
        path = Path(m.group(1))
        full = path if path.is_absolute() or base is None else base / path
        try:
            table = read_table(full, dim)
        except OSError as exc:
            raise DSLError(f"cannot read table {full}: {exc.strerror}", line, col) from None
        return CoeffSpec.tabulated(table, source=m.group(1))
    if m := _SYMBOLIC_RE.match(text):
        return CoeffSpec.symbolic(int(m.group(1)), int(m.group(2)))
    raise DSLError(f"unrecognised coefficient specification {text!r}", line, col)


def _statements(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        col = 0
        for piece in body.split(";"):
            if piece.strip():
                yield lineno, col, piece
            col += len(piece) + 1


def parse_mapping(text: str, base_dir: str | Path | None = None) -> MappingDef | LatticeDef:
    """Parse a 1D recurrence or a 2D lattice rule; see :data:`GRAMMAR`."""
    stmts = list(_statements(text))
    if not stmts:
        raise DSLError("empty definition")
    lineno, col0, eq = stmts[0]
    toks = _tokenize(eq, lineno, col0)
    p = _ExprParser(toks)
    lhs = p.expr()
    eq_tok = p.take("=")
    rhs = p.expr()
    p.take(kind="end")

    shifts = {n.shift for n in walk(lhs) if isinstance(n, Var)} | {n.shift for n in walk(rhs) if isinstance(n, Var)}
    if not any(isinstance(n, Var) for n in walk(lhs)):
        raise DSLError("the left-hand side must contain x", eq_tok.line, eq_tok.col)
    dims = {len(s) for s in shifts} | {len(n.shift) for e in (lhs, rhs) for n in walk(e) if isinstance(n, Coef)}
    if len(dims) != 1:
        raise DSLError("mixed 1D and 2D indices", eq_tok.line, eq_tok.col)
    dim = dims.pop()

    base = Path(base_dir) if base_dir is not None else None
    specs = {}
    for lineno, col, stmt in stmts[1:]:
        m = _BIND_RE.match(stmt.strip())
        if not m:
            raise DSLError(f"expected 'name: spec', found {stmt.strip()!r}", lineno, col + 1)
        name = m.group(1)
        if name == "x":
            raise DSLError("'x' is the dependent variable, not a coefficient", lineno, col + 1)
        if name in specs:
            raise DSLError(f"coefficient {name!r} bound twice", lineno, col + 1)
        specs[name] = _parse_spec(m.group(2), dim, base, lineno, col + 1)

    if dim == 1:
        target = max(s[0] for s in shifts)
        if not any(isinstance(n, Var) and n.shift == (target,) for n in walk(lhs)):
            raise DSLError("the highest shift of x must appear on the left-hand side", eq_tok.line, eq_tok.col)
        solved = _solve(lhs, rhs, (target,), eq_tok)
        lowest = min(s[0] for s in var_shifts_of(solved) | {(target,)})
        if lowest == target:
            raise DSLError("the recurrence does not involve earlier values of x", eq_tok.line, eq_tok.col)
    else:
        solved = _solve(lhs, rhs, (0, 0), eq_tok)
        bad = var_shifts_of(solved) - {(-1, -1), (0, -1), (-1, 0)}
        if bad:
            raise DSLError(
                f"lattice rules may only use x[m-1,n-1], x[m,n-1], x[m-1,n]; found shift {sorted(bad)[0]}",
                eq_tok.line, eq_tok.col,
            )

    for e in walk(solved):
        if isinstance(e, Coef) and e.name not in specs:
            raise DSLError(f"unbound coefficient symbol {e.name!r}", eq_tok.line, eq_tok.col)

    if dim == 1:
        return MappingDef(target, lowest, solved, tuple(sorted(specs.items())))
    k = max([abs(n.exponent) for n in walk(solved) if isinstance(n, Pow) and isinstance(n.base, Var)] + [1])
    return LatticeDef(solved, CoeffField2D(tuple(sorted(specs.items()))), k)


def var_shifts_of(e: Expr) -> set:
    return {n.shift for n in walk(e) if isinstance(n, Var)}


def parse_file(path: str | Path) -> MappingDef | LatticeDef:
    path = Path(path)
    return parse_mapping(path.read_text(encoding="utf-8"), base_dir=path.parent)
