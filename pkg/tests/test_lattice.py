import json
from fractions import Fraction

import pytest

from entropyforge.dsl import CoeffField2D, CoeffSpec, builtin_family
from entropyforge.numeric import QQ_FIELD
from entropyforge.singularity import TRACE_FIELD
from entropyforge.lattice import (
    LatticeError, ReductionError, StaircaseError, StaircaseInit, check_confinement_conditions,
    conserved_quantity, cross_validate_reduction, evolve, fig1_seeds, fig2_seeds, gauge_normalize,
    iterate_mapping, kmt_kdv_equivalence, lattice_equation, reduce_to_mapping, reduction_index,
    reduction_staircase, residual_check, trace_lattice_singularity,
)

REGION = (0, 5, 0, 5)


def _corner(seed=3, fld=QQ_FIELD):
    return StaircaseInit.generic(StaircaseInit.corner_sites(0, 0, 5, 5), seed, fld)


@pytest.mark.parametrize("name, params", [("kdv_lattice", {}), ("kmt_lattice", {"k": 2}), ("kmt_lattice", {"k": 3})])
def test_generic_evolution_is_regular(name, params):
    # exact heights explode for k = 3, so the check runs modulo a large prime
    d = builtin_family(name, params)
    st = evolve(d, _corner(fld=TRACE_FIELD), REGION, TRACE_FIELD)
    assert len(st.values) == 36 and not st.singular
    assert residual_check(st, TRACE_FIELD) == []


def test_evolution_is_local():
    d = builtin_family("kmt_lattice", {"k": 2})
    init = _corner()
    moved = StaircaseInit(init.sites, {**init.values, (0, 2): init.values[(0, 2)] + 1})
    a, b = evolve(d, init, REGION).values, evolve(d, moved, REGION).values
    changed = {s for s in a if a[s] != b[s]}
    assert (0, 2) in changed
    assert all(n >= 2 for _, n in changed)


def test_staircase_validation():
    with pytest.raises(StaircaseError):
        StaircaseInit(((0, 0), (1, 1)), {(0, 0): 1, (1, 1): 2})
    with pytest.raises(StaircaseError):
        StaircaseInit(((0, 0), (1, 0)), {(0, 0): 1})


def test_k1_is_kdv_up_to_sign_gauge():
    assert kmt_kdv_equivalence()
    assert kmt_kdv_equivalence(CoeffSpec.const(3), CoeffSpec.const(Fraction(1, 2)))


def test_fig1_orders():
    for k in (2, 3):
        p = trace_lattice_singularity(builtin_family("kmt_lattice", {"k": k}), fig1_seeds())
        assert p.confined
        assert p.relative_orders() == {(0, 0): 1, (1, 0): -k, (0, 1): -k, (1, 1): 1}


def test_fig2_and_its_extension():
    d = builtin_family("kmt_lattice", {"k": 2})
    assert trace_lattice_singularity(d, fig2_seeds()).confined
    assert trace_lattice_singularity(d, fig2_seeds(length=3)).confined


def test_pattern_is_translation_invariant():
    d = builtin_family("kmt_lattice", {"k": 2})
    a = trace_lattice_singularity(d, fig1_seeds())
    b = trace_lattice_singularity(d, fig1_seeds((2, 2)))
    assert a.relative_orders() == b.relative_orders((2, 2))


def test_nonconfining_coefficient():
    d = lattice_equation("kdv", a=CoeffSpec.function(lambda m, n: Fraction(m * n)))
    assert not trace_lattice_singularity(d, fig1_seeds((3, 2))).confined


def test_conditions():
    region = (-4, 4, -4, 4)
    g = CoeffSpec.function(lambda m, n: Fraction(m * m + 3 * n))
    r = check_confinement_conditions(CoeffField2D.of(a=g, b=g), region, equation="kdv")
    assert r["kdv_additive"].holds
    bad = CoeffSpec.function(lambda m, n: Fraction(m * n))
    r = check_confinement_conditions(CoeffField2D.of(a=bad, b=bad), region, equation="kdv")
    assert not r["kdv_additive"].holds and r["kdv_additive"].first_failure is not None


@pytest.mark.parametrize("eq, k", [("kdv", 1), ("kmt", 2)])
def test_gauge_covariance(eq, k):
    b = CoeffSpec.function(lambda m, n: Fraction(m + 2 * n + 40))
    a = CoeffSpec.function(lambda m, n: Fraction((m - n) ** 2 + 1, 3) * b.at((m, n)))
    res = gauge_normalize(CoeffField2D.of(a=a, b=b), REGION, k=k, equation=eq)
    assert res.verified
    for m in range(REGION[0], REGION[1] + 1):
        for n in range(REGION[2], REGION[3] + 1):
            assert res.coeffs.value("a", m, n) == res.coeffs.value("b", m, n)


def test_gauge_rejects_non_diagonal_ratio():
    with pytest.raises(LatticeError):
        gauge_normalize(CoeffField2D.of(a=CoeffSpec.function(lambda m, n: Fraction(m + n + 2)),
                                        b=CoeffSpec.const(1)), REGION)


def test_reduction_staircase_indices():
    for ell in (2, 3, 4):
        idx = {reduction_index(m, n, ell) for m, n in reduction_staircase(ell, 3)}
        assert idx == set(range(-1, ell))


@pytest.mark.parametrize("k, ell", [(2, 2), (2, 3), (3, 3), (3, 4)])
def test_reduction_consistency(k, ell):
    cv = cross_validate_reduction(builtin_family("kmt_lattice", {"k": k}), ell, steps=8)
    assert cv.agreed and cv.compared > 0


def test_full_reduction_consistency():
    assert cross_validate_reduction(builtin_family("kmt_full", {"k": 2}), 3, steps=6, full=True).agreed


def test_strict_reduction_rejects_incompatible_coefficients():
    with pytest.raises(ReductionError):
        reduce_to_mapping(builtin_family("kmt_lattice", {"k": 3}), 3, strict=True)


@pytest.mark.parametrize("k, ell", [(2, 2), (3, 2), (2, 4)])
def test_conserved_quantity(k, ell):
    m = builtin_family("kmt_reduction", {"k": k, "l": ell})
    init = [Fraction(3 + i, 7 - i) for i in range(ell + 1)]
    q = conserved_quantity(m, iterate_mapping(m, init, 7))
    assert len(set(q)) == 1


def test_first_integral_does_not_need_the_sign_constraint():
    # for l = 2 the integral telescopes for any coefficient sequence
    m = builtin_family("kmt_reduction", {"k": 3, "l": 2, "violate_constraint": 1})
    init = [Fraction(3 + i, 7 - i) for i in range(3)]
    assert len(set(conserved_quantity(m, iterate_mapping(m, init, 7)))) == 1


def test_conserved_quantity_rejects_odd_l():
    m = builtin_family("kmt_reduction", {"k": 2, "l": 3})
    with pytest.raises(LatticeError):
        conserved_quantity(m, iterate_mapping(m, [Fraction(2), Fraction(3), Fraction(5), Fraction(7)], 4))


def test_exports():
    d = builtin_family("kmt_lattice", {"k": 2})
    st = evolve(d, _corner(), REGION)
    assert st.to_csv().splitlines()[0] == "m,n,value"
    assert len(json.loads(st.to_json())["sites"]) == 36
    p = trace_lattice_singularity(d, fig1_seeds())
    assert p.to_csv().splitlines()[0] == "m,n,order,token"
    assert json.loads(p.to_json())["verdict"] == "confined"
