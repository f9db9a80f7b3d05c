"""Expression trees for recurrence right-hand sides.

Nodes are frozen dataclasses so parsed definitions compare structurally.
Index offsets are stored as tuples: ``(j,)`` for ``x[n+j]`` and ``(i, j)``
for ``x[m+i,n+j]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    shift: tuple


@dataclass(frozen=True)
class Coef:
    name: str
    shift: tuple


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


Expr = Union[Num, Var, Coef, Neg, BinOp, Pow]


def walk(e: Expr):
    yield e
    if isinstance(e, Neg):
        yield from walk(e.arg)
    elif isinstance(e, BinOp):
        yield from walk(e.left)
        yield from walk(e.right)
    elif isinstance(e, Pow):
        yield from walk(e.base)


def var_shifts(e: Expr) -> set:
    return {n.shift for n in walk(e) if isinstance(n, Var)}


def coef_uses(e: Expr) -> set:
    return {(n.name, n.shift) for n in walk(e) if isinstance(n, Coef)}


def evaluate(e: Expr, x: Callable, coef: Callable, const: Callable = lambda v: v):
    """Evaluate with ``x(shift)``, ``coef(name, shift)`` and ``const(Fraction)``.

    Values only need the arithmetic operators, so the same tree runs on
    rationals, rational functions, Laurent series or symbolic elements.
    """
    if isinstance(e, Num):
        return const(e.value)
    if isinstance(e, Var):
        return x(e.shift)
    if isinstance(e, Coef):
        return coef(e.name, e.shift)
    if isinstance(e, Neg):
        return -evaluate(e.arg, x, coef, const)
    if isinstance(e, Pow):
        return evaluate(e.base, x, coef, const) ** e.exponent
    a = evaluate(e.left, x, coef, const)
    b = evaluate(e.right, x, coef, const)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    return a / b


def _fmt_index(var: str, shift: tuple) -> str:
    names = ("n",) if len(shift) == 1 else ("m", "n")
    parts = []
    for name, s in zip(names, shift):
        if s == 0:
            parts.append(name)
        elif s > 0:
            parts.append(f"{name}+{s}")
        else:
            parts.append(f"{name}{s}")
    return f"{var}[{','.join(parts)}]"


def _fmt_num(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator) if v >= 0 else f"({v.numerator})"
    return f"({v.numerator}/{v.denominator})"


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def pretty(e: Expr, parent: int = 0) -> str:
    """Render in the DSL's own syntax; the result reparses to the same tree."""
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return _fmt_index("x", e.shift)
    if isinstance(e, Coef):
        return _fmt_index(e.name, e.shift)
    if isinstance(e, Neg):
        s = "-" + pretty(e.arg, 3)
        return f"({s})" if parent > 1 else s
    if isinstance(e, Pow):
        return f"{pretty(e.base, 4)}^{e.exponent}" if e.exponent >= 0 else f"{pretty(e.base, 4)}^({e.exponent})"
    p = _PREC[e.op]
    left = pretty(e.left, p)
    # right operand of - and / needs tighter binding
    right = pretty(e.right, p + 1)
    s = f"{left} {e.op} {right}" if p == 1 else f"{left}{e.op}{right}"
    return f"({s})" if p < parent else s
