import itertools
import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from kneser.lattice import (OLattice, SEED_NAMES, default_seed, fincke_pohst, int_det, representation_numbers, seed,
                            short_vectors)
from kneser.isometry import pari_short_vectors
from kneser.numbers import quad_field


def all_seeds():
    for name in SEED_NAMES:
        if name == "e8_tensor":
            for m in (2, 3, 5):
                yield name, seed(name, m)
        else:
            yield name, seed(name)


@pytest.mark.parametrize("name, L", list(all_seeds()), ids=lambda x: x if isinstance(x, str) else "")
def test_seeds_are_even_unimodular(name, L):
    assert L.is_even() and L.is_unimodular() and L.is_totally_positive_definite()
    T = L.trace_lattice()
    # Q(sqrt3) has no totally positive generator of its different, so T1 cannot be unimodular there
    expected = 3 ** L.rank if L.field_m == 3 else 1
    assert int_det(T.T1.tolist()) == expected
    assert np.all(np.diag(T.T1) % 2 == 0)


@pytest.mark.parametrize("m, rank, herm", [(5, 4, False), (5, 8, False), (2, 8, False), (3, 2, False),
                                           (3, 6, False), (None, 8, False), (-3, 4, True), (-3, 8, True)])
def test_default_seed_ranks(m, rank, herm):
    L = default_seed(m, rank, herm)
    assert L.rank == rank and L.is_unimodular()


def test_e8_theta_coefficients_follow_divisor_sums():
    L = seed("e8")
    got = representation_numbers(L, [0, 2, 4, 6, 8])
    assert got == [1] + [240 * int(sympy.divisor_sigma(n, 3)) for n in (1, 2, 3, 4)]


def test_icosian_norm_two_vectors():
    L = seed("icosian4")
    assert representation_numbers(L, [2]) == [120]
    # the trace form sees all 240 roots of E8
    T = L.trace_lattice().reduced()
    assert len(short_vectors(T, 2)[2]) == 240


def _box_count(G: np.ndarray, bound: int) -> int:
    """Brute force over a box that provably contains every vector of norm <= bound."""
    n = G.shape[0]
    Ginv = np.linalg.inv(G.astype(float))
    radius = [int(math.floor(math.sqrt(bound * Ginv[i, i]) + 1e-9)) for i in range(n)]
    count = 0
    for x in itertools.product(*(range(-r, r + 1) for r in radius)):
        v = np.array(x, dtype=np.int64)
        nm = int(v @ G @ v)
        if 0 < nm <= bound:
            count += 1
    return count


@st.composite
def pos_def_forms(draw, max_dim=4):
    n = draw(st.integers(1, max_dim))
    A = np.array(draw(st.lists(st.integers(-2, 2), min_size=n * n, max_size=n * n)), dtype=np.int64).reshape(n, n)
    G = A.T @ A + np.eye(n, dtype=np.int64)
    return G


@given(pos_def_forms(), st.integers(1, 12))
def test_fincke_pohst_matches_box_enumeration(G, bound):
    assert 2 * len(fincke_pohst(G, bound)) == _box_count(G, bound)


@given(pos_def_forms(max_dim=6), st.integers(1, 16))
def test_fincke_pohst_matches_pari(G, bound):
    ours = {tuple(v) for v in fincke_pohst(G, bound)}
    theirs = {tuple(v) if next(x for x in v if x) > 0 else tuple(-v) for v in pari_short_vectors(G, bound)}
    assert ours == theirs


def test_json_roundtrip_and_digest():
    L = seed("icosian4", copies=2)
    M = OLattice.from_json(L.to_json())
    assert M.gram == L.gram and M.digest() == L.digest()


def test_direct_sum_and_basis_change_preserve_determinant():
    F = quad_field(5)
    L = seed("icosian4")
    S = L.direct_sum(L)
    assert S.rank == 8 and S.det() == L.det() * L.det()
    B = [[F(int(i == j) + (1 if (i, j) == (0, 1) else 0)) for j in range(4)] for i in range(4)]
    assert L.change_basis(B).det() == L.det()
