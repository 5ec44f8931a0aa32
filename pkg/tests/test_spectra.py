import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import assume, given, strategies as st

from kneser.lattice import default_seed
from kneser.neighbours import genus_enumerate
from kneser.numbers import prime_from_label, quad_field
from kneser.spectra import (AlgebraicScalar, DegreeContradiction, char_poly, congruence_scan, degree_inference,
                            eigen_decompose, factor_poly, inner_product, spinor_bipartition, trace_and_det_check)

x = sympy.Symbol("x")


def to_sympy(v) -> sympy.Expr:
    v = AlgebraicScalar.coerce(v)
    return sympy.Rational(v.a.numerator, v.a.denominator) + \
        sympy.Rational(v.b.numerator, v.b.denominator) * sympy.sqrt(v.m)


int_matrices = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=n, max_size=n))


@given(int_matrices)
def test_char_poly_matches_sympy(M):
    expected = sympy.Matrix(M).charpoly(x).all_coeffs()
    assert char_poly(M) == [int(c) for c in expected]


@given(st.lists(st.lists(st.integers(-6, 6), min_size=2, max_size=3), min_size=1, max_size=3))
def test_factor_poly_matches_sympy(factors):
    polys = [sympy.Poly([1] + f, x) for f in factors]
    p = sympy.prod(polys)
    ours = factor_poly([int(c) for c in p.all_coeffs()])
    rebuilt = sympy.prod([sympy.Poly(f, x) ** e for f, e in ours])
    assert rebuilt == p
    theirs = sorted((tuple(int(c) for c in f.all_coeffs()), e) for f, e in sympy.factor_list(p)[1])
    assert sorted((tuple(f), e) for f, e in ours) == theirs


scalars = st.builds(lambda a, b, d: AlgebraicScalar(Fraction(a, d), b, 5),
                    st.integers(-30, 30), st.integers(-30, 30), st.sampled_from([1, 2, 3]))


@given(scalars, scalars, scalars)
def test_scalar_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b).norm() == a.norm() * b.norm()
    if not a.is_zero():
        assert a * a.inverse() == AlgebraicScalar(1)
    assert sympy.simplify(to_sympy(a * b) - to_sympy(a) * to_sympy(b)) == 0


@pytest.mark.parametrize("text, value", [("33+3*sqrt(73)", (33, 3, 73)), ("-4sqrt3", (0, -4, 3)),
                                         ("1/2", (Fraction(1, 2), 0, 1)), ("6sqrt(3)", (0, 6, 3)),
                                         ("12-12sqrt(3)", (12, -12, 3)), ("sqrt(8)", (0, 2, 2))])
def test_scalar_parse(text, value):
    s = AlgebraicScalar.parse(text)
    assert (s.a, s.b, s.m) == tuple(Fraction(v) for v in value)
    assert AlgebraicScalar.parse(str(s)) == s


def _check_eigenpairs(spec, matrices):
    """Independent check of M v = lambda v in sympy."""
    for s in spec.systems:
        if s.vector is None:
            continue
        v = sympy.Matrix([to_sympy(c) for c in s.vector])
        for k, M in matrices.items():
            diff = sympy.Matrix(np.asarray(M).tolist()) * v - to_sympy(s.eigenvalues[k]) * v
            assert all(sympy.simplify(d) == 0 for d in diff)


@st.composite
def commuting_pair(draw):
    """A = U D U^-1 with D made of 1x1 and 2x2 integer blocks, and B a polynomial in A."""
    blocks = draw(st.lists(st.one_of(st.integers(-5, 5).map(lambda a: [[a]]),
                                     st.lists(st.integers(-4, 4), min_size=4, max_size=4)
                                     .map(lambda t: [t[:2], t[2:]])), min_size=1, max_size=3))
    D = sympy.diag(*[sympy.Matrix(b) for b in blocks])
    n = D.shape[0]
    U = sympy.eye(n)
    for _ in range(draw(st.integers(0, 6))):
        i, j = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        if i != j:
            E = sympy.eye(n)
            E[i, j] = draw(st.sampled_from([-1, 1]))
            U = U * E
    A = U * D * U.inv()
    c = draw(st.integers(-3, 3))
    return np.array(A.tolist(), dtype=np.int64), np.array((A * A + c * A).tolist(), dtype=np.int64)


@given(commuting_pair())
def test_eigen_decompose_random_commuting_family(pair):
    A, B = pair
    assume(sympy.Matrix(A.tolist()).is_diagonalizable())
    spec = eigen_decompose({"A": A, "B": B})
    _check_eigenpairs(spec, {"A": A, "B": B})
    assert sum(s.multiplicity if s.is_block else 1 for s in spec.systems) == len(A)
    assert trace_and_det_check(spec, A, "A") and trace_and_det_check(spec, B, "B")


def test_irreducible_quartic_stays_a_block():
    f = [1, 0, -132, 0, 1728]
    companion = np.zeros((4, 4), dtype=np.int64)
    companion[1:, :3] = np.eye(3, dtype=np.int64)
    companion[:, 3] = [-c for c in f[:0:-1]]
    spec = eigen_decompose({"T": companion})
    assert len(spec.systems) == 1 and spec.systems[0].is_block
    assert [list(p) for p, _ in spec.systems[0].block_polys["T"]] == [f]


@pytest.fixture(scope="module")
def q3_n6():
    F = quad_field(3)
    return genus_enumerate(default_seed(3, 6), [prime_from_label(F, l) for l in ("1+sqrt3", "sqrt3")])


def test_hecke_eigensystems_are_exact_and_orthogonal(q3_n6):
    spec = eigen_decompose(q3_n6.hecke)
    _check_eigenpairs(spec, q3_n6.hecke)
    vecs = spec.vectors()
    assert len(vecs) == q3_n6.h
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            assert inner_product(vecs[i], vecs[j], q3_n6.aut_orders).is_zero()


def test_spinor_bipartition_of_neighbour_graph(q3_n6):
    parts = spinor_bipartition(q3_n6.hecke["1+sqrt3"])
    assert parts is not None
    M = q3_n6.hecke["1+sqrt3"]
    a, b = parts
    assert sorted(a + b) == list(range(q3_n6.h))
    assert all(M[i, j] == 0 for i in a for j in a) and all(M[i, j] == 0 for i in b for j in b)


def test_spinor_bipartition_rejects_odd_cycle():
    triangle = np.ones((3, 3), dtype=int) - np.eye(3, dtype=int)
    assert spinor_bipartition(triangle) is None


def test_congruence_scan_finds_ramanujan_691():
    eis = {str(p): 1 + p ** 11 for p in (2, 3, 5)}
    delta = {"2": -24, "3": 252, "5": 4830}
    rep = congruence_scan(eis, delta)
    assert 691 in rep.primes()
    assert rep.gcd % 691 == 0


def test_congruence_scan_with_quadratic_and_block_values():
    # Nm(12sqrt3 - 30sqrt3) = -972
    rep = congruence_scan({"p": AlgebraicScalar(0, 12, 3)}, {"p": AlgebraicScalar(0, 30, 3)})
    assert rep.gcd == 972
    f = [1, -144, 6588, -101088, 279936]
    rep = congruence_scan({"p": f}, {"p": AlgebraicScalar(135)})
    assert rep.gcd == abs(sum(c * 135 ** (4 - i) for i, c in enumerate(f)))
    assert congruence_scan({"p": [1, 0, -3]}, {"p": AlgebraicScalar(0, 1, 3)}).moduli == "all"


@st.composite
def degree_world(draw):
    n = draw(st.integers(3, 7))
    g = draw(st.lists(st.integers(0, 8), min_size=n, max_size=n))
    names = [str(i) for i in range(n)]
    triples = set()
    for _ in range(draw(st.integers(0, 12))):
        i, j, k = (draw(st.integers(0, n - 1)) for _ in range(3))
        # triangle inequality holds for every nonzero triple
        if max(g[i], g[j], g[k]) * 2 <= g[i] + g[j] + g[k]:
            triples.add((names[i], names[j], names[k]))
    anchors = {names[i]: g[i] for i in draw(st.sets(st.integers(0, n - 1), min_size=1))}
    return dict(zip(names, g)), triples, anchors


@given(degree_world())
def test_degree_inference_bounds_contain_truth(world):
    truth, triples, anchors = world
    b = degree_inference(anchors, triples, names=list(truth))
    for k, g in truth.items():
        assert b.lower[k] <= g <= b.upper[k]


def test_degree_inference_pins_and_contradicts():
    b = degree_inference({"a": 0, "b": 3}, [("a", "b", "c")])
    assert b.exact()["c"] == 3
    with pytest.raises(DegreeContradiction):
        degree_inference({"a": 0, "b": 1, "c": 5}, [("a", "b", "c")])
    assert math.isinf(degree_inference({"a": 0}, [], names=["z"]).upper["z"])
