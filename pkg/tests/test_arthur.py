from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from kneser import arthur
from kneser.arthur import (MissingDatum, ParseError, check_infinity, infinity_exponents, parse_parameter,
                           predict_eigenvalue, rallis_extend, standard_exponents, twist, validate)
from kneser.neighbours import isotropic_count_formula
from kneser.numbers import prime_from_label, quad_field, ray_class_character
from kneser.spectra import AlgebraicScalar
from kneser.verify import load_fixtures

TABLES = load_fixtures()["tables"]
ORTH_ROWS = [(name, t, row) for name, t in TABLES.items() if t["geometry"] == "orth" for row in t["rows"] if row]


@pytest.mark.parametrize("text, dim", [("[1]+[7]", 8), ("Sym2(Delta11)+[21]", 24), ("D5[2]+[1]+[3]", 8),
                                       ("chi*([5]+chi*[1])", 6), ("T(D(7,3),D(3,7))+D7[2]+[3]+[1]", 12),
                                       ("BC(Delta11)+[10]", 12), ("Delta21[2]+[1]+[19]", 24)])
def test_parse_and_dimension(text, dim):
    A = parse_parameter(text)
    assert A.dimension() == dim and validate(A, dim) and not validate(A, dim + 2)
    assert parse_parameter(str(A)) == A


@pytest.mark.parametrize("bad", ["[1]+", "Sym2([3])", "([1]+[2])[3]", "D5[2]]", "T(D5)"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_parameter(bad)


def test_nested_twists_cancel():
    A = parse_parameter("chi*(chi*([1]+[7]))")
    assert A == parse_parameter("[1]+[7]") == twist(twist(A))


@pytest.mark.parametrize("name, table, row", ORTH_ROWS, ids=[f"{n}:{r}" for n, _, r in ORTH_ROWS])
def test_twist_equivariance(name, table, row):
    m = table["field_m"]
    for label in table["expected"]:
        chi = ray_class_character(prime_from_label(quad_field(m), label)) if m else 1
        a = predict_eigenvalue(row, label, table["N"], field_m=m)
        b = predict_eigenvalue(twist(parse_parameter(row)), label, table["N"], field_m=m)
        assert b == a * chi


@pytest.mark.parametrize("name, table, row", ORTH_ROWS, ids=[f"{n}:{r}" for n, _, r in ORTH_ROWS])
def test_table_parameters_have_standard_infinity_type(name, table, row):
    assert check_infinity(row, table["N"], table["geometry"], field_m=table["field_m"])


@pytest.mark.parametrize("m, N, label", [(5, 8, "2"), (5, 12, "2"), (3, 8, "5"), (None, 24, "2"), (None, 16, "3")])
def test_trivial_parameter_counts_isotropic_lines(m, N, label):
    # [1]+[N-1] is the constant function, whose eigenvalue is the neighbour count
    q = prime_from_label(quad_field(m), label).q if m else int(label)
    assert predict_eigenvalue(f"[1]+[{N - 1}]", label, N, field_m=m) == AlgebraicScalar(isotropic_count_formula(N // 2, q))


def test_hermitian_trivial_parameter():
    from kneser.neighbours import hermitian_isotropic_count
    assert predict_eigenvalue("[12]", "2", 12, "herm", field_m=-3) == AlgebraicScalar(2 * hermitian_isotropic_count(12, 2))


@st.composite
def trivial_blocks(draw):
    m = draw(st.integers(1, 6))
    sizes, left = [], 2 * m
    while left:
        d = draw(st.integers(1, left))
        sizes.append(d)
        left -= d
    return m, sizes


@given(trivial_blocks(), st.integers(0, 4))
def test_rallis_extension_matches_adding_blocks(blocks, extra):
    m, sizes = blocks
    A = "+".join(f"[{d}]" for d in sizes)
    base = infinity_exponents(A)
    assert rallis_extend(base, 2 * m, m) == sorted(base)
    if extra:
        N = 2 * m + 2 * extra
        grown = infinity_exponents(A + f"+[{N - 2 * m - 1}]+[1]")
        assert rallis_extend(base, N, m) == grown


def test_rallis_extension_guards():
    with pytest.raises(ValueError):
        rallis_extend([0, 0], 2, 2)
    with pytest.raises(ValueError):
        rallis_extend([0], 4, 1)


def test_standard_exponents():
    assert standard_exponents(4) == [Fraction(-1), 0, 0, 1]
    assert standard_exponents(3, "herm") == [-1, 0, 1]


def test_missing_registry_entry():
    with pytest.raises(MissingDatum):
        predict_eigenvalue("Nowhere7[2]+[1]+[5]", "2", 8, field_m=5)


def test_registry_loads_with_unique_names():
    reg = arthur.load_registry()
    keys = [(e.field_m, e.name) for e in reg.entries()]
    assert len(keys) == len(set(keys))
