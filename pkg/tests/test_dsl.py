import pytest

from entropyforge.dsl import (
    FAMILIES, DSLError, FamilyError, LatticeDef, MappingDef, builtin_family, parse_mapping, parse_params,
)


@pytest.mark.parametrize("name", FAMILIES)
def test_round_trip(name, tmp_path):
    d = builtin_family(name)
    text = d.to_text(tmp_path)
    again = parse_mapping(text, tmp_path)
    assert again == d
    assert again.to_text(tmp_path) == text


def test_products_on_left_are_solved():
    d = parse_mapping("x[n+1]*x[n-1] = 1 - a[n]/x[n]\na: const 2")
    assert isinstance(d, MappingDef)
    assert (d.target, d.lowest, d.order) == (1, -1, 2)


def test_lattice_definition():
    d = builtin_family("kmt_lattice", {"k": 3})
    assert isinstance(d, LatticeDef) and d.k == 3


@pytest.mark.parametrize("text, where", [
    ("x[n+1] = ", "line 1, column 10"),
    ("x[n+1]*x[n+1] = x[n]", "line 1"),
    ("y[n] = 1", "line 1"),
    ("x[n+1] = x[n] +* 2", "column 16"),
    ("x[n+1] = a[n]/x[n]\na: bogus 3", "line 2"),
])
def test_parse_errors_carry_position(text, where):
    with pytest.raises(DSLError) as err:
        parse_mapping(text)
    assert where in str(err.value)


def test_family_errors():
    with pytest.raises(FamilyError):
        builtin_family("nope")
    with pytest.raises(FamilyError):
        builtin_family("kmt_reduction", {"k": 2, "l": 1})
    with pytest.raises(FamilyError):
        builtin_family("kmt_lattice", {"k": 1})


def test_params():
    assert parse_params("k=2,l=3") == {"k": 2, "l": 3}
    assert parse_params(None) == {}


def test_constraint_metadata_is_attached():
    d = builtin_family("kmt_reduction", {"k": 3, "l": 2})
    (rec,) = d.info.constraints
    assert rec.name == "a"
    # the default coefficient complies, the all-ones choice does not for odd k
    assert all(rec.holds(lambda n: d.coefficient("a", n), n) for n in range(-5, 20))
    bad = builtin_family("kmt_reduction", {"k": 3, "l": 2, "violate_constraint": 1})
    assert not all(rec.holds(lambda n: bad.coefficient("a", n), n) for n in range(-5, 20))
