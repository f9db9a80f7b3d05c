import warnings

import mpmath
import pytest

from entropyforge.singularity import (
    ExtrapolatedWarning, late_confinement_closed_form, late_confinement_polynomials,
)
from entropyforge.spectral import (
    IntPoly, SpectralError, classify, count_real_roots, find_roots, kdv_reduction_charpoly,
    limit_poly, reduction_charpoly, reduction_poly,
)

KL = [(k, ell) for k in range(2, 13) for ell in range(2, 13)]


@pytest.mark.parametrize("k, ell", KL)
def test_reduction_polynomial_structure(k, ell):
    full, p = reduction_charpoly(k, ell)
    lam_plus = IntPoly([1] + [0] * ell + [1])
    assert full == lam_plus * p
    assert p.is_palindromic()
    if ell == 2:
        assert p == IntPoly([1, 1]) * IntPoly([1, -(k + 1), 1])


@pytest.mark.parametrize("k, ell", KL)
def test_reduction_polynomial_roots(k, ell):
    p = reduction_poly(k, ell)
    roots = [r.value for r in find_roots(p)]
    for r in roots:
        assert min(abs(s - 1 / r) for s in roots) < 1e-8
        if abs(r.imag) > 1e-9:
            assert abs(abs(r) - 1) < 1e-9
    if ell >= 3:
        assert count_real_roots(p) == (3 if ell % 2 == 0 else 2)
        if ell % 2 == 0:
            assert p(-1) == 0
        assert max(abs(r) for r in roots) > k
        assert classify(p).salem


@pytest.mark.parametrize("q", range(2, 11))
def test_kdv_constraint_roots_of_unity(q):
    p = kdv_reduction_charpoly(q)
    assert p == IntPoly([-1, 1]) * IntPoly([-1] + [0] * (q - 1) + [1])
    c = classify(p)
    assert c.all_roots_of_unity
    assert dict(c.cyclotomic_factors)[1] == 2


def test_quadratic_reciprocal_and_pisot():
    assert classify(reduction_poly(3, 2)).quadratic_reciprocal
    assert classify(limit_poly(3, 3)).pisot
    assert not classify(limit_poly(3, 4)).pisot


def test_late_confinement_roots_increase_to_limit():
    limit = classify(limit_poly(3, 3)).largest_modulus
    prev = 0.0
    for m in range(1, 7):
        r = classify(late_confinement_polynomials(3, 3, m)).largest_modulus
        assert prev < r < limit
        prev = r
    assert limit - prev < 1e-2


@pytest.mark.parametrize("m", range(1, 7))
def test_late_confinement_closed_form(m):
    num, den = late_confinement_closed_form(m)
    assert num == den * late_confinement_polynomials(3, 3, m)


def test_extrapolated_family_warns():
    with pytest.warns(ExtrapolatedWarning):
        late_confinement_polynomials(2, 3, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        late_confinement_polynomials(3, 3, 2)


def test_root_precision_against_surd():
    got = classify(reduction_poly(2, 2)).largest_modulus
    assert abs(got - float((3 + mpmath.sqrt(5)) / 2)) < 1e-12


def test_multiplicities_are_exact():
    p = IntPoly([-1, 1]) * IntPoly([-1, 1]) * IntPoly([-1, 1]) * IntPoly([2, 0, 1])
    mult = sorted(r.multiplicity for r in find_roots(p))
    assert mult == [1, 1, 3]


def test_argument_errors():
    with pytest.raises(SpectralError):
        reduction_poly(1, 3)
    with pytest.raises(SpectralError):
        limit_poly(2, 1)
    with pytest.raises(SpectralError):
        find_roots(IntPoly([5]))
