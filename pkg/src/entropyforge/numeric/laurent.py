"""Truncated Laurent series in a small parameter eps.

A series is ``sum_{i >= lead} c_i eps^i`` known exactly for orders below
``prec``; terms at ``prec`` and beyond are unknown. ``prec`` may be
``math.inf`` for exact Laurent polynomials (e.g. the perturbed datum
``v + eps``); precision is only lost when a non-monomial series is inverted,
which keeps :data:`precision` terms beyond the lead.

When every stored coefficient cancels the result is *zero to truncation*:
``coeffs == ()`` and the valuation is only known to be >= ``prec``.
"""
from __future__ import annotations

import contextlib
import contextvars
import math
from typing import Iterable

from .fields import QQ_FIELD, ExactField

DEFAULT_TERMS = 16

_terms = contextvars.ContextVar("laurent_terms", default=DEFAULT_TERMS)

ZERO_TO_TRUNCATION = "zero-to-truncation"


class SingularSeries(ArithmeticError):
    """Inverting a series whose known terms all vanish."""


class PrecisionExhausted(ArithmeticError):
    """An operation has no valid output term left."""


@contextlib.contextmanager
def precision(terms: int):
    """Set how many terms beyond the lead an inversion keeps."""
    if terms < 1:
        raise ValueError("need at least one term")
    token = _terms.set(terms)
    try:
        yield
    finally:
        _terms.reset(token)


def current_precision() -> int:
    return _terms.get()


class LaurentSeries:
    __slots__ = ("field", "lead", "coeffs", "prec")

    def __init__(self, lead: int, coeffs: Iterable, prec=math.inf, field: ExactField = QQ_FIELD):
        cs = [field.convert(c) for c in coeffs]
        self._set(field, lead, cs, prec)

    def _set(self, field, lead, cs, prec):
        if prec != math.inf:
            cs = cs[: max(prec - lead, 0)]
        k = 0
        while k < len(cs) and cs[k] == 0:
            k += 1
        cs = cs[k:]
        lead += k
        while cs and cs[-1] == 0:
            cs.pop()
        if not cs:
            if prec == math.inf:
                lead = 0
            else:
                lead = prec
        self.field = field
        self.lead = lead
        self.coeffs = tuple(cs)
        self.prec = prec

    @classmethod
    def _make(cls, field, lead, cs, prec):
        obj = cls.__new__(cls)
        obj._set(field, lead, list(cs), prec)
        return obj

    @classmethod
    def constant(cls, c, field: ExactField = QQ_FIELD) -> "LaurentSeries":
        return cls._make(field, 0, [field.convert(c)], math.inf)

    @classmethod
    def eps(cls, scale=1, field: ExactField = QQ_FIELD) -> "LaurentSeries":
        return cls._make(field, 1, [field.convert(scale)], math.inf)

    @classmethod
    def perturbed(cls, value, scale=1, field: ExactField = QQ_FIELD) -> "LaurentSeries":
        """``value + scale*eps``, exact."""
        return cls._make(field, 0, [field.convert(value), field.convert(scale)], math.inf)

    # -- inspection -----------------------------------------------------

    def is_zero_to_truncation(self) -> bool:
        return not self.coeffs

    def is_exact_zero(self) -> bool:
        return not self.coeffs and self.prec == math.inf

    @property
    def valuation(self):
        """Lower bound on the true order (exact unless zero to truncation)."""
        if self.coeffs:
            return self.lead
        return self.prec

    @property
    def lead_coefficient(self):
        if not self.coeffs:
            raise SingularSeries("series vanishes to truncation")
        return self.coeffs[0]

    def coefficient(self, order: int):
        if order >= self.prec:
            raise PrecisionExhausted(f"coefficient of eps^{order} is beyond the truncation {self.prec}")
        i = order - self.lead
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.field.zero

    def limit(self):
        """Value at eps = 0 for a series of non-negative order."""
        if self.coeffs and self.lead < 0:
            raise ValueError("series has a pole; no finite limit")
        return self.coefficient(0)

    # -- arithmetic -----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, LaurentSeries):
            return other
        return LaurentSeries._make(self.field, 0, [self.field.convert(other)], math.inf)

    def __add__(self, other):
        other = self._coerce(other)
        prec = min(self.prec, other.prec)
        a, b = self, other
        if not a.coeffs:
            lo = b.lead if b.coeffs else prec
        elif not b.coeffs:
            lo = a.lead
        else:
            lo = min(a.lead, b.lead)
        lo = min(lo, prec) if prec != math.inf else lo
        hi = max(a.lead + len(a.coeffs), b.lead + len(b.coeffs))
        if prec != math.inf:
            hi = min(hi, prec)
        out = [self.field.zero] * max(hi - lo, 0)
        for s in (a, b):
            for i, c in enumerate(s.coeffs):
                j = s.lead + i - lo
                if 0 <= j < len(out):
                    out[j] = out[j] + c
        return LaurentSeries._make(self.field, lo, out, prec)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries._make(self.field, self.lead, [-c for c in self.coeffs], self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        a, b = self, other
        prec = min(a.prec + b.valuation, b.prec + a.valuation)
        if not a.coeffs or not b.coeffs:
            return LaurentSeries._make(self.field, 0, [], prec)
        lead = a.lead + b.lead
        n = len(a.coeffs) + len(b.coeffs) - 1
        if prec != math.inf:
            n = min(n, prec - lead)
        if n <= 0:
            raise PrecisionExhausted("product has no valid term")
        out = [self.field.zero] * n
        for i, x in enumerate(a.coeffs):
            if i >= n:
                break
            for j, y in enumerate(b.coeffs[: n - i]):
                out[i + j] = out[i + j] + x * y
        return LaurentSeries._make(self.field, lead, out, prec)

    __rmul__ = __mul__

    def invert(self, terms: int | None = None) -> "LaurentSeries":
        if not self.coeffs:
            raise SingularSeries("cannot invert a series that vanishes to truncation")
        if terms is None:
            terms = _terms.get()
        cs = self.coeffs
        if len(cs) == 1 and self.prec == math.inf:
            return LaurentSeries._make(self.field, -self.lead, [self.field.one / cs[0]], math.inf)
        rel = terms if self.prec == math.inf else min(terms, self.prec - self.lead)
        if rel < 1:
            raise PrecisionExhausted("no relative precision left to invert")
        inv0 = self.field.one / cs[0]
        out = [inv0]
        for k in range(1, rel):
            acc = self.field.zero
            for j in range(1, min(k, len(cs) - 1) + 1):
                acc = acc + cs[j] * out[k - j]
            out.append(-acc * inv0)
        return LaurentSeries._make(self.field, -self.lead, out, -self.lead + rel)

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.invert()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.invert()

    def __pow__(self, k: int):
        if k < 0:
            return self.invert() ** (-k)
        result = LaurentSeries._make(self.field, 0, [self.field.one], math.inf)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        return (self.lead, self.coeffs, self.prec) == (other.lead, other.coeffs, other.prec)

    def __hash__(self):
        return hash((self.lead, self.coeffs, self.prec))

    def agrees_with(self, other: "LaurentSeries") -> bool:
        """Equality of all coefficients on the common valid window."""
        p = min(self.prec, other.prec)
        lo = min(self.valuation, other.valuation)
        if p == math.inf:
            p = max(self.lead + len(self.coeffs), other.lead + len(other.coeffs))
        return all(self.coefficient(i) == other.coefficient(i) for i in range(lo, p))

    def __repr__(self):
        if not self.coeffs:
            return f"O(eps^{self.prec})" if self.prec != math.inf else "0"
        parts = [f"({c})*eps^{self.lead + i}" for i, c in enumerate(self.coeffs) if c != 0]
        tail = f" + O(eps^{self.prec})" if self.prec != math.inf else ""
        return " + ".join(parts) + tail


def laurent_arith(op: str, a: LaurentSeries, b=None, k: int | None = None) -> LaurentSeries:
    """Dispatch ``add``, ``mul``, ``invert`` or ``pow`` (with exponent ``k``)."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "invert":
        return a.invert()
    if op == "pow":
        if k is None:
            raise ValueError("pow needs an integer exponent k")
        return a**k
    raise ValueError(f"unknown series operation {op!r}")


def laurent_order(a: LaurentSeries):
    """Order of the first nonzero term, or :data:`ZERO_TO_TRUNCATION`."""
    if not a.coeffs:
        return ZERO_TO_TRUNCATION
    return a.lead
