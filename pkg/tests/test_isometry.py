import numpy as np
import pytest

from kneser.isometry import (all_isometries_bruteforce, are_isometric, automorphism_group, fingerprint,
                             native_automorphisms, native_isometry, permutation_group_order_from_reflections)
from kneser.lattice import TraceLattice, default_seed, seed
from conftest import random_unimodular


def zlat(G) -> TraceLattice:
    G = np.array(G, dtype=np.int64)
    return TraceLattice(G, None, G.shape[0], None, np.eye(G.shape[0], dtype=np.int64))


A2 = [[2, -1], [-1, 2]]
D4 = [[2, -1, 0, 0], [-1, 2, -1, -1], [0, -1, 2, 0], [0, -1, 0, 2]]
SMALL = {"Z2": ([[1, 0], [0, 1]], 8), "A2": (A2, 12), "A1^3": (np.eye(3, dtype=int) * 2, 48), "D4": (D4, 1152)}


@pytest.mark.parametrize("name", SMALL)
def test_native_and_pari_automorphism_orders_agree(name):
    G, order = SMALL[name]
    T = zlat(G)
    assert automorphism_group(T).order == order
    assert native_automorphisms(T)[0] == order


@pytest.mark.parametrize("name", ["Z2", "A2"])
def test_bruteforce_automorphism_count(name):
    G, order = SMALL[name]
    assert all_isometries_bruteforce(zlat(G)) == order


def test_e8_automorphisms_against_reflection_group():
    T = seed("e8").trace_lattice().reduced()
    assert automorphism_group(T).order == permutation_group_order_from_reflections(T.T1) == 696729600


def test_icosian_automorphisms_native_vs_pari():
    T = seed("icosian4").trace_lattice().reduced()
    assert automorphism_group(T).order == native_automorphisms(T)[0] == 14400


def _rebased(T: TraceLattice, U: np.ndarray) -> TraceLattice:
    return TraceLattice(U.T @ T.T1 @ U, None if T.T2 is None else U.T @ T.T2 @ U, T.rank_o, T.field_m, T.basis @ U)


LATTICES = {
    "D4": lambda: zlat(D4),
    "icosian": lambda: seed("icosian4").trace_lattice(),
    "sqrt3 rank 4": lambda: default_seed(3, 4).trace_lattice(),
    "hermitian rank 4": lambda: default_seed(-3, 4, True).trace_lattice(),
}


@pytest.mark.parametrize("name", LATTICES)
@pytest.mark.parametrize("trial", range(3))
def test_basis_change_is_detected_as_isometry(name, trial):
    T = LATTICES[name]()
    U = random_unimodular(T.dim, np.random.default_rng(trial))
    S = _rebased(T, U)
    W = are_isometric(T, S)
    assert W is not None
    for Fa, Fb in zip(T.forms(), S.forms()):
        assert np.array_equal(W.T @ Fb @ W, Fa)
    if T.dim <= 8:
        assert native_isometry(T, S) is not None


@pytest.mark.parametrize("name", LATTICES)
@pytest.mark.parametrize("trial", range(3))
def test_fingerprint_is_basis_independent(name, trial):
    T = LATTICES[name]()
    U = random_unimodular(T.dim, np.random.default_rng(100 + trial))
    assert fingerprint(T).key() == fingerprint(_rebased(T, U)).key()


def test_non_isometric_lattices():
    # same determinant, different root systems: A1 + A1 scaled vs Z^2 scaled
    a = zlat([[2, 0], [0, 2]])
    b = zlat([[2, 1], [1, 2]])
    assert are_isometric(a, b) is None
    assert native_isometry(a, b) is None
    assert fingerprint(a).key() != fingerprint(b).key()


def test_hermitian_forms_respect_o_structure():
    # only O-linear maps are counted: dropping the second form enlarges the group
    T = default_seed(-3, 4, True).trace_lattice().reduced()
    with_o = automorphism_group(T).order
    plain = automorphism_group(TraceLattice(T.T1, None, T.rank_o, None, T.basis)).order
    assert plain == 696729600 and with_o == 155520
