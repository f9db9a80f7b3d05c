import pytest

from entropyforge.degrees import (
    DegenerateOrbit, InsufficientData, degree_sequence, entropy_estimate, growth_ratios,
)
from entropyforge.dsl import builtin_family, parse_mapping
from entropyforge.golden import CONFINING_DEGREES
from entropyforge.lattice import kdv_reduction

SMALL = [
    ("qrt_example", {}, 12),
    ("mult_example", {}, 9),
    ("hv", {}, 8),
    ("kmt_reduction", {"k": 2, "l": 3}, 10),
    ("kmt_reduction", {"k": 3, "l": 2}, 8),
]


@pytest.mark.parametrize("name, params, steps", SMALL)
def test_exact_and_modular_agree(name, params, steps):
    d = builtin_family(name, params)
    assert degree_sequence(d, steps, "exact").degrees == degree_sequence(d, steps, "modular").degrees


@pytest.mark.parametrize("name, params, steps", SMALL)
def test_seed_independence(name, params, steps):
    d = builtin_family(name, params)
    runs = {tuple(degree_sequence(d, steps, seed=s).degrees) for s in (1, 2, 3, 99, 12345)}
    assert len(runs) == 1


def test_confining_reduction_prefix():
    d = builtin_family("kmt_reduction", {"k": 2, "l": 3})
    want = CONFINING_DEGREES[(2, 3)]
    assert degree_sequence(d, len(want)).degrees == want


def test_linear_map():
    d = parse_mapping("x[n+1] = 2*x[n] - x[n-1] + 1")
    assert degree_sequence(d, 8).degrees == [0] + [1] * 7


def _second_differences(ds):
    return [ds[i + 2] - 2 * ds[i + 1] + ds[i] for i in range(len(ds) - 2)]


def test_qrt_growth_is_quadratic():
    ds = degree_sequence(builtin_family("qrt_example"), 40).degrees
    assert max(abs(x) for x in _second_differences(ds)) <= 2
    assert abs(ds[-1] / ds[-2] - 1) < 0.1


@pytest.mark.parametrize("p, q", [(1, 2), (2, 1), (1, 3)])
def test_kdv_reductions_grow_quadratically(p, q):
    ds = degree_sequence(kdv_reduction(p, q, 1, 1), 25).degrees
    assert max(abs(x) for x in _second_differences(ds)) <= 2


def test_entropy_of_nonintegrable_map():
    e = entropy_estimate(degree_sequence(builtin_family("hv"), 12))
    assert abs(e.final_ratio - 2.618) < 0.01


def test_ratio_helpers():
    assert [float(r) for r in growth_ratios([0, 1, 2, 4])] == [2.0, 2.0]
    with pytest.raises(InsufficientData):
        growth_ratios([0, 0, 1])
    with pytest.raises(InsufficientData):
        entropy_estimate([0, 1, 2])


def test_argument_errors():
    d = builtin_family("qrt_example")
    with pytest.raises(ValueError):
        degree_sequence(d, 0)
    with pytest.raises(ValueError):
        degree_sequence(d, 5, mode="floating")
    with pytest.raises(ValueError):
        degree_sequence(d, 5, primes=(1048583, 1048583))
    with pytest.raises(TypeError):
        degree_sequence(builtin_family("kdv_lattice"), 5)


def test_degenerate_orbit():
    with pytest.raises(DegenerateOrbit):
        degree_sequence(parse_mapping("x[n+1] = 1/(x[n] - x[n])"), 4)


def test_csv_and_json():
    s = degree_sequence(builtin_family("qrt_example"), 6)
    assert s.to_csv().splitlines()[0] == "n,d_n,ratio"
    assert '"degrees"' in s.to_json()
