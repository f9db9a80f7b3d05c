"""Exact coefficient fields.

Three kinds are supported: the rationals (elements are ``fractions.Fraction``),
prime fields GF(p) with p > 2**20 (elements are ``flint.nmod``) and
rational-function fields in named symbols over Q (elements are sympy
``FracElement`` objects, i.e. reduced ratios of expanded polynomials).

All element types support the ordinary Python arithmetic operators, which is
what the polynomial and series code relies on.
"""
from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from typing import Any, Sequence

import flint
from sympy import QQ, isprime
from sympy.polys.fields import field as _sympy_field

MIN_PRIME = 2**20


class ExactField:
    """Common interface; subclasses implement :meth:`convert`."""

    kind = "abstract"

    def convert(self, value: Any):
        raise NotImplementedError

    @property
    def zero(self):
        return self.convert(0)

    @property
    def one(self):
        return self.convert(1)

    def is_zero(self, value) -> bool:
        return value == 0

    def __repr__(self):
        return f"{type(self).__name__}()"


class Rationals(ExactField):
    kind = "rationals"

    def convert(self, value):
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, str)):
            return Fraction(value)
        if hasattr(value, "numerator") and hasattr(value, "denominator"):
            return Fraction(int(value.numerator), int(value.denominator))
        raise TypeError(f"cannot convert {value!r} to a rational")

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("QQ")


class PrimeField(ExactField):
    kind = "prime"

    def __init__(self, p: int):
        if p <= MIN_PRIME or not isprime(p):
            raise ValueError(f"prime-field modulus must be a prime > 2**20, got {p}")
        self.p = int(p)

    def convert(self, value):
        if isinstance(value, flint.nmod):
            return value
        if isinstance(value, int):
            return flint.nmod(value, self.p)
        q = Fraction(value)
        if q.denominator % self.p == 0:
            raise ZeroDivisionError(f"{q} has no image modulo {self.p}")
        return flint.nmod(q.numerator, self.p) / q.denominator

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __repr__(self):
        return f"PrimeField({self.p})"


class SymbolField(ExactField):
    """Q(s_1, ..., s_r); elements are kept as reduced, expanded fractions."""

    kind = "symbols"

    def __init__(self, symbols: Sequence[str]):
        if not symbols:
            raise ValueError("a symbol field needs at least one symbol")
        if len(set(symbols)) != len(symbols):
            raise ValueError("duplicate symbol names")
        self.symbols = tuple(symbols)
        self._field, *gens = _sympy_field(",".join(self.symbols), QQ)
        self._gens = dict(zip(self.symbols, gens))

    def gen(self, name: str):
        try:
            return self._gens[name]
        except KeyError:
            raise KeyError(f"unknown symbol {name!r}") from None

    @cached_property
    def ring(self):
        return self._field.ring

    def convert(self, value):
        if isinstance(value, Fraction):
            return self._field(QQ(value.numerator, value.denominator))
        if isinstance(value, int):
            return self._field(value)
        if getattr(value, "field", None) is self._field:
            return value
        raise TypeError(f"cannot convert {value!r} into {self!r}")

    def numerator(self, value):
        return value.numer

    def __eq__(self, other):
        return isinstance(other, SymbolField) and other.symbols == self.symbols

    def __hash__(self):
        return hash(("symbols", self.symbols))

    def __repr__(self):
        return f"SymbolField({', '.join(self.symbols)})"


QQ_FIELD = Rationals()
