import itertools
from fractions import Fraction

import numpy as np
import pytest

from kneser.isometry import GuardTripped
from kneser.lattice import default_seed
from kneser.neighbours import (GenusLedger, ResidueForm, genus_enumerate, hecke_matrix, hermitian_isotropic_count,
                               isotropic_count_formula, isotropic_points, neighbours_of_point, isotropic_lines)
from kneser.numbers import prime_from_label, quad_field


def _residue_reps(prime):
    F = prime.field
    if prime.f == 1:
        return [F(a) for a in range(prime.p)]
    return [F(a, b) for a in range(prime.p) for b in range(prime.p)]


def brute_force_lines(L, prime) -> int:
    """Isotropic lines of L/pL counted from the exact Gram matrix, with no residue-field tables."""
    pi_inv = prime.generator.inverse()
    reps = _residue_reps(prime)
    n = L.rank
    herm = L.form_kind == "herm"
    zeros = 0
    for x in itertools.product(reps, repeat=n):
        if all(v.is_zero() for v in x):
            continue
        val = L.field.zero
        for i in range(n):
            for j in range(n):
                g = L.gram[i][j]
                if not g.is_zero():
                    val = val + x[i] * g * (x[j].conj() if herm else x[j])
        if not herm:
            val = val * Fraction(1, 2)
        if (val * pi_inv).is_integral():
            zeros += 1
    return zeros // (prime.q - 1)


CASES = [
    ("icosian4", 5, 4, "sqrt5", False),
    ("icosian4", 5, 4, "2", False),
    ("sqrt3", 3, 4, "1+sqrt3", False),
    ("sqrt3", 3, 4, "sqrt3", False),
    ("sqrt3", 3, 6, "sqrt3", False),
    ("e8_tensor", 2, 8, "sqrt2", False),
    ("hermitian", -3, 4, "2", True),
]


@pytest.mark.parametrize("name, m, rank, label, herm", CASES)
def test_isotropic_lines_match_brute_force(name, m, rank, label, herm):
    L = default_seed(m, rank, herm)
    P = prime_from_label(quad_field(m), label)
    pts = isotropic_points(ResidueForm(L, P))
    assert len(pts) == brute_force_lines(L, P)
    if herm:
        assert len(pts) == hermitian_isotropic_count(rank, P.p)
    elif P.kind != "ramified":
        assert len(pts) == isotropic_count_formula(rank // 2, P.q)


@pytest.mark.parametrize("name, m, rank, label, herm", CASES[:4])
def test_neighbours_are_even_unimodular(name, m, rank, label, herm):
    L = default_seed(m, rank, herm)
    P = prime_from_label(quad_field(m), label)
    for k, pt in enumerate(isotropic_lines(L, P)):
        if k >= 6:
            break
        for M in neighbours_of_point(L, P, pt):
            assert M.is_even() and M.is_unimodular() and M.is_totally_positive_definite()


GENERA = {
    "q5-n8": (5, 8, False, ["sqrt5", "2"]),
    "q3-n6": (3, 6, False, ["1+sqrt3", "sqrt3"]),
    "q2-n8": (2, 8, False, ["sqrt2"]),
    "herm-n8": (-3, 8, True, ["2"]),
}


@pytest.fixture(scope="module")
def ledgers():
    out = {}
    for name, (m, rank, herm, labels) in GENERA.items():
        F = quad_field(m)
        out[name] = genus_enumerate(default_seed(m, rank, herm), [prime_from_label(F, l) for l in labels])
    return out


@pytest.mark.parametrize("name", GENERA)
def test_row_sums_count_neighbours(ledgers, name):
    m, rank, herm, labels = GENERA[name]
    led = ledgers[name]
    for P in led.primes:
        M = led.hecke[P.label()]
        sums = set(M.sum(axis=1).tolist())
        assert len(sums) == 1
        lines = hermitian_isotropic_count(rank, P.p) * P.p if herm else None
        if not herm and P.kind != "ramified":
            lines = isotropic_count_formula(rank // 2, P.q)
        if lines is not None:
            assert sums == {lines}


@pytest.mark.parametrize("name", GENERA)
def test_hecke_matrices_are_self_adjoint_for_the_mass_pairing(ledgers, name):
    led = ledgers[name]
    auts = led.aut_orders
    for M in led.hecke.values():
        h = led.h
        for i in range(h):
            for j in range(h):
                assert Fraction(int(M[i, j]), auts[i]) == Fraction(int(M[j, i]), auts[j])


@pytest.mark.parametrize("name", ["q5-n8", "q3-n6"])
def test_hecke_operators_commute(ledgers, name):
    A, B = ledgers[name].hecke.values()
    assert np.array_equal(A.astype(object) @ B.astype(object), B.astype(object) @ A.astype(object))


def test_mass_matches_known_values(ledgers):
    assert ledgers["q5-n8"].mass() == Fraction(67, 17418240000)
    assert ledgers["q3-n6"].aut_orders.count(46080) == 2


def test_ledger_roundtrip(ledgers, tmp_path):
    led = ledgers["q5-n8"]
    path = tmp_path / "g.json"
    led.save(str(path))
    back = GenusLedger.load(str(path))
    assert back.h == led.h and back.aut_orders == led.aut_orders and back.digest() == led.digest()
    for k, M in led.hecke.items():
        assert np.array_equal(back.hecke[k], M)


def test_threads_do_not_change_results():
    F = quad_field(5)
    P = prime_from_label(F, "sqrt5")
    a = genus_enumerate(default_seed(5, 8), [P], threads=1)
    b = genus_enumerate(default_seed(5, 8), [P], threads=2)
    assert a.aut_orders == b.aut_orders
    assert np.array_equal(a.hecke["sqrt5"], b.hecke["sqrt5"])


def test_class_budget_guard():
    F = quad_field(3)
    with pytest.raises(GuardTripped):
        genus_enumerate(default_seed(3, 6), [prime_from_label(F, "1+sqrt3")], max_classes=2)


def test_partial_rows_then_full_matrix(ledgers):
    led = ledgers["q5-n8"]
    P = prime_from_label(quad_field(5), "2")
    full = led.hecke.pop("2")
    try:
        part = hecke_matrix(led, P, rows=[1])
        assert np.array_equal(part[1], full[1]) and not part[0].any()
        assert np.array_equal(hecke_matrix(led, P), full)
    finally:
        led.hecke["2"] = full
