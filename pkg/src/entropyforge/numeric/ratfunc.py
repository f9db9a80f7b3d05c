"""Reduced rational functions num/den in one indeterminate."""
from __future__ import annotations

from .poly import InvalidInput, UniPoly, poly_gcd


class RationalFunction:
    """Coprime pair (numerator, denominator) with a monic denominator.

    Instances support ``+ - * /`` and integer powers, with other rational
    functions and with field scalars, and are always kept reduced.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: UniPoly, den: UniPoly):
        # callers go through reduce_rational_function; this trusts its input
        self.num = num
        self.den = den

    @property
    def field(self):
        return self.num.field

    @property
    def degree(self) -> int:
        """max(deg num, deg den); the zero function has degree 0."""
        return max(self.num.degree, self.den.degree, 0)

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, UniPoly):
            return RationalFunction(other, UniPoly.constant(1, other.field))
        f = self.field
        return RationalFunction(UniPoly.constant(other, f), UniPoly.constant(1, f))

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other):
        other = self._coerce(other)
        return reduce_rational_function(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return reduce_rational_function(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return reduce_rational_function(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k: int):
        if k >= 0:
            # powers of coprime polynomials stay coprime
            return RationalFunction(self.num**k, self.den**k)
        if self.num.is_zero():
            raise ZeroDivisionError("negative power of zero")
        return reduce_rational_function(self.den ** (-k), self.num ** (-k))

    def __repr__(self):
        return f"RationalFunction({self.num!r} / {self.den!r})"


def reduce_rational_function(num: UniPoly, den: UniPoly) -> RationalFunction:
    if den.is_zero():
        raise InvalidInput("zero denominator")
    if num.is_zero():
        return RationalFunction(num, UniPoly.constant(1, den.field))
    g = poly_gcd(num, den)
    if g.degree > 0:
        num, den = num // g, den // g
    lead = den.lc
    if lead != 1:
        inv = den.field.one / lead
        num, den = num.scale(inv), den.scale(inv)
    return RationalFunction(num, den)
