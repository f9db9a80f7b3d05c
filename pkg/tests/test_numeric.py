import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from entropyforge.numeric import (
    QQ_FIELD, InvalidInput, LaurentSeries, PrimeField, SingularSeries, UniPoly,
    laurent_order, poly_gcd, precision, reduce_rational_function, squarefree_decomposition,
)

P = PrimeField(2**31 - 1)

small = st.fractions(min_value=-20, max_value=20, max_denominator=9)
polys = st.lists(small, min_size=1, max_size=5).map(UniPoly)
nonzero_polys = polys.filter(lambda p: not p.is_zero())
residues = st.integers(min_value=0, max_value=P.p - 1).map(P.convert)


@settings(max_examples=200)
@given(residues, residues, residues)
def test_prime_field_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    if a != 0:
        assert a * (P.one / a) == 1


@settings(max_examples=100)
@given(st.lists(residues, min_size=1, max_size=4), st.lists(residues, min_size=1, max_size=4),
       st.lists(residues, min_size=1, max_size=4))
def test_prime_field_polynomial_ring_axioms(x, y, z):
    a, b, c = UniPoly(x, P), UniPoly(y, P), UniPoly(z, P)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


def _random_series(rng, field):
    lead = rng.randint(-5, 5)
    cs = [rng.randint(-9, 9) for _ in range(rng.randint(1, 6))]
    if cs[0] == 0:
        cs[0] = rng.choice([-3, -1, 1, 2])
    return LaurentSeries(lead, cs, field=field)


@pytest.mark.parametrize("field", [QQ_FIELD, P], ids=["QQ", "GF"])
def test_laurent_order_additivity(field):
    rng = random.Random(12)
    for _ in range(1000):
        a, b = _random_series(rng, field), _random_series(rng, field)
        assert laurent_order(a * b) == laurent_order(a) + laurent_order(b)


def test_double_inversion_agrees_on_window():
    rng = random.Random(5)
    with precision(10):
        for _ in range(200):
            a = _random_series(rng, QQ_FIELD)
            back = a.invert().invert()
            assert back.agrees_with(a)
            assert back.prec - back.lead >= 10


def test_inverting_vanishing_series_raises():
    z = LaurentSeries.perturbed(1) - LaurentSeries.perturbed(1)
    assert z.is_exact_zero()
    with pytest.raises((SingularSeries, ZeroDivisionError)):
        z.invert()


def test_pole_from_perturbed_zero():
    x = LaurentSeries.eps()
    y = 1 / x ** 2 + 3
    assert y.valuation == -2
    assert y.coefficient(0) == 3
    with pytest.raises(ValueError):
        y.limit()


@settings(max_examples=150, deadline=None)
@given(nonzero_polys, nonzero_polys)
def test_gcd_contract(p, q):
    g = poly_gcd(p, q)
    assert (p % g).is_zero() and (q % g).is_zero()
    assert poly_gcd(p // g, q // g).degree == 0


@settings(max_examples=150, deadline=None)
@given(polys, nonzero_polys, nonzero_polys)
def test_reduction_is_canonical(num, den, g):
    f = reduce_rational_function(num, den)
    assert reduce_rational_function(f.num * g, f.den * g) == f
    if not f.num.is_zero():
        assert poly_gcd(f.num, f.den).degree == 0


@settings(max_examples=100, deadline=None)
@given(st.lists(nonzero_polys, min_size=1, max_size=3))
def test_squarefree_reconstructs(factors):
    p = UniPoly([1])
    for i, f in enumerate(factors, start=1):
        p = p * f ** i
    if p.degree < 1:
        return
    prod = UniPoly([p.lc])
    for f, m in squarefree_decomposition(p):
        prod = prod * f ** m
    assert prod == p


def test_squarefree_multiplicities():
    w = UniPoly.variable()
    p = (w - 1) ** 3 * (w + 2) * (w * w + 1) ** 2
    assert {(f.degree, m) for f, m in squarefree_decomposition(p)} == {(1, 1), (2, 2), (1, 3)}


def test_zero_denominator_rejected():
    with pytest.raises(InvalidInput):
        reduce_rational_function(UniPoly([1]), UniPoly([]))


def test_small_modulus_rejected():
    with pytest.raises(ValueError):
        PrimeField(101)


def test_prime_field_maps_fractions():
    assert P.convert(Fraction(1, 2)) * 2 == 1
    with pytest.raises(ZeroDivisionError):
        P.convert(Fraction(1, P.p))


def test_exact_series_has_infinite_precision():
    assert LaurentSeries.perturbed(Fraction(1, 3)).prec == math.inf
