from fractions import Fraction

import pytest

from entropyforge.dsl import CoeffSpec, builtin_family, parse_mapping
from entropyforge.numeric import QQ_FIELD
from entropyforge.singularity import (
    InvalidConstraint, PerturbationSpec, confinement_verdict, derive_coefficient_constraints,
    trace_pattern, verify_constraint,
)


def test_qrt_pattern_and_memory():
    p = trace_pattern(builtin_family("qrt_example"))
    assert p.render() == "{0, ∞, ∞, 0}" and p.confined
    assert [o for o in p.orders if o != 0][:4] == [1, -1, -1, 1]


def test_exact_field_agrees_with_prime_field():
    d = builtin_family("qrt_example")
    assert trace_pattern(d, depth=10, field=QQ_FIELD).tokens == trace_pattern(d, depth=10).tokens


@pytest.mark.parametrize("k", [2, 3])
@pytest.mark.parametrize("ell", [2, 3, 4])
def test_kmt_reduction_pole_orders(k, ell):
    p = trace_pattern(builtin_family("kmt_reduction", {"k": k, "l": ell}))
    assert p.confined
    poles = [o for o in p.orders if o < 0]
    assert poles == [-k, -k]


@pytest.mark.parametrize("ell", [2, 3])
def test_shift_covariance(ell):
    d = builtin_family("kmt_reduction", {"k": 3, "l": ell})
    period = 2 * (ell + 1)
    base = trace_pattern(d, PerturbationSpec(0))
    assert trace_pattern(d, PerturbationSpec(period)).tokens == base.tokens


def test_nonconfinement_detected():
    assert not trace_pattern(builtin_family("kmt_reduction", {"k": 3, "l": 3, "violate_constraint": 1})).confined
    assert not confinement_verdict(builtin_family("mult_example", {"a": 2})).confined


@pytest.mark.parametrize("name", ["qrt_example", "mult_example", "hv_full"])
def test_published_constraint_is_necessary_and_sufficient(name):
    d = builtin_family(name)
    (rec,) = d.info.constraints
    r = verify_constraint(d, rec)
    assert r.holds, r


def test_reduction_sign_constraint():
    d = builtin_family("kmt_reduction", {"k": 3, "l": 2})
    assert verify_constraint(d, d.info.constraints[0]).holds


def test_bad_solution_rejected():
    d = builtin_family("qrt_example")
    (rec,) = d.info.constraints
    with pytest.raises(InvalidConstraint):
        verify_constraint(d, rec, solution=CoeffSpec.tabulated({i: Fraction(i + 100) for i in range(-40, 60)}))


def _is_shift_of(rec, want):
    return set(rec.normalized().terms) == want


def test_derived_relations_are_shifts_of_one_generator():
    qrt = derive_coefficient_constraints(builtin_family("qrt_example").with_coeffs(a=CoeffSpec.symbolic(-4, 14)))
    assert qrt.recurrences and all(_is_shift_of(r, {(0, 1), (1, -1), (4, -1), (5, 1)}) for r in qrt.recurrences)
    hv = derive_coefficient_constraints(builtin_family("hv_full").with_coeffs(a=CoeffSpec.symbolic(-4, 14)))
    assert hv.recurrences and all(_is_shift_of(r, {(0, 1), (1, -2), (2, -2), (3, 1)}) for r in hv.recurrences)


def test_lattice_rejected():
    with pytest.raises(TypeError):
        trace_pattern(builtin_family("kdv_lattice"))


def test_zero_scale_rejected():
    with pytest.raises(ValueError):
        PerturbationSpec(scale=0)


def test_regular_map_never_singular():
    p = trace_pattern(parse_mapping("x[n+1] = x[n] + x[n-1]"), PerturbationSpec(value=Fraction(0)), depth=8)
    assert all(o >= 0 for o in p.orders)
