"""Dense univariate polynomials over an :class:`ExactField`.

This is the reference implementation: plain Python, generic in the field and
fine for the moderate degrees met in singularity analysis and spectral work.
The degree engine has its own FLINT-backed fast path and uses this class as
an independent check.
"""
from __future__ import annotations

from typing import Iterable

from .fields import QQ_FIELD, ExactField


class InvalidInput(ValueError):
    pass


class UniPoly:
    """Polynomial c_0 + c_1 w + ... + c_d w^d, coefficients lowest degree first.

    The coefficient tuple never carries trailing zeros, so ``degree`` is the
    index of the last coefficient; the zero polynomial has degree -1.
    """

    __slots__ = ("field", "coeffs")

    def __init__(self, coeffs: Iterable = (), field: ExactField = QQ_FIELD):
        cs = [field.convert(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.field = field
        self.coeffs = tuple(cs)

    @classmethod
    def _raw(cls, coeffs, field):
        obj = cls.__new__(cls)
        cs = list(coeffs)
        while cs and cs[-1] == 0:
            cs.pop()
        obj.field = field
        obj.coeffs = tuple(cs)
        return obj

    @classmethod
    def variable(cls, field: ExactField = QQ_FIELD) -> "UniPoly":
        return cls._raw((field.zero, field.one), field)

    @classmethod
    def constant(cls, c, field: ExactField = QQ_FIELD) -> "UniPoly":
        return cls._raw((field.convert(c),), field)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self):
        if not self.coeffs:
            raise InvalidInput("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def _coerce(self, other):
        if isinstance(other, UniPoly):
            if other.field != self.field:
                raise TypeError("polynomials over different fields")
            return other
        return UniPoly._raw((self.field.convert(other),), self.field)

    def __eq__(self, other):
        if not isinstance(other, UniPoly):
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return UniPoly._raw(out, self.field)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly._raw([-c for c in self.coeffs], self.field)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return UniPoly._raw((), self.field)
        out = [self.field.zero] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
        return UniPoly._raw(out, self.field)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise InvalidInput("negative power of a polynomial")
        result = UniPoly._raw((self.field.one,), self.field)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c) -> "UniPoly":
        c = self.field.convert(c)
        return UniPoly._raw([x * c for x in self.coeffs], self.field)

    def __divmod__(self, other):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dv = other.coeffs
        inv = self.field.one / dv[-1]
        q = [self.field.zero] * max(len(rem) - len(dv) + 1, 0)
        for i in range(len(rem) - len(dv), -1, -1):
            c = rem[i + len(dv) - 1] * inv
            q[i] = c
            if c == 0:
                continue
            for j, d in enumerate(dv):
                rem[i + j] = rem[i + j] - c * d
        return UniPoly._raw(q, self.field), UniPoly._raw(rem[: len(dv) - 1], self.field)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        return self.scale(self.field.one / self.lc)

    def derivative(self) -> "UniPoly":
        return UniPoly._raw([c * i for i, c in enumerate(self.coeffs)][1:], self.field)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __repr__(self):
        if not self.coeffs:
            return "UniPoly(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            terms.append(f"({c})" + ("" if i == 0 else "*w" if i == 1 else f"*w^{i}"))
        return "UniPoly(" + " + ".join(terms) + ")"


def poly_gcd(p: UniPoly, q: UniPoly) -> UniPoly:
    """Monic gcd via the Euclidean algorithm; gcd(0, 0) is 0."""
    a, b = p, q
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def squarefree_decomposition(p: UniPoly) -> list[tuple[UniPoly, int]]:
    """Yun's algorithm: monic squarefree factors with their multiplicities."""
    if p.degree < 1:
        return []
    out = []
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p // a
    c = dp // a
    d = c - b.derivative()
    i = 1
    while b.degree > 0:
        a = poly_gcd(b, d)
        b, c = b // a, d // a
        if a.degree > 0:
            out.append((a.monic(), i))
        d = c - b.derivative()
        i += 1
    return out
