import dataclasses
from collections import Counter

import pytest
import sympy

from kneser.lattice import default_seed, fincke_pohst, seed
from kneser.neighbours import genus_enumerate
from kneser.numbers import prime_from_label, quad_field
from kneser.spectra import AlgebraicScalar, inner_product
from kneser.theta import (NoProbe, NotEigenform, HeckeUnavailable, extract_eigenvalue,
                          hecke_on_expansion, theta_degree1, theta_map, totally_positive_elements)

F5 = quad_field(5)


def brute_theta(L, bound: int) -> Counter:
    """Counts of <x,x> = nu for every nu of trace <= bound, from a native enumeration and exact field arithmetic."""
    F = L.field
    T = L.trace_lattice(F.one)
    out = Counter()
    for z in fincke_pohst(T.T1, bound):
        x = [F(a, b) for a, b in T.to_o_coords(z)]
        nu = F.zero
        for i in range(L.rank):
            for j in range(L.rank):
                nu = nu + x[i] * L.gram[i][j] * x[j]
        out[nu] += 2
    return out


def test_e8_coefficients_are_divisor_sums():
    f = theta_degree1(seed("e8"), bound=16)
    for n in range(1, 5):
        assert f.coefficient(2 * n) == AlgebraicScalar(240 * sympy.divisor_sigma(n, 3))
    assert f.coefficient(3) == AlgebraicScalar(0)


@pytest.mark.parametrize("p, lam", [(2, 9), (3, 28)])
def test_e8_hecke_eigenvalues(p, lam):
    f = theta_degree1(seed("e8"), bound=40)
    assert extract_eigenvalue(f, p) == AlgebraicScalar(lam)


def test_icosian_coefficients_match_native_enumeration():
    L = seed("icosian4")
    f = theta_degree1(L, bound=12)
    brute = brute_theta(L, 12)
    assert set(brute) <= set(totally_positive_elements(F5, 12))
    for nu in totally_positive_elements(F5, 12):
        assert f.coefficient(nu) == AlgebraicScalar(brute[nu])
    expected = {F5(2): 120, F5(4): 600, F5(5) - F5.sqrt_m: 720, F5(6): 1200}
    for nu, c in expected.items():
        assert f.coefficient(nu) == AlgebraicScalar(c)


@pytest.mark.parametrize("label, lam", [("sqrt5", 6), ("2", 5)])
def test_icosian_theta_is_an_eisenstein_eigenform(label, lam):
    # weight 2: the eigenvalue is 1 + Nm(p)
    f = theta_degree1(seed("icosian4"), bound=20)
    P = prime_from_label(F5, label)
    assert lam == 1 + P.q
    assert extract_eigenvalue(f, P, min_probes=3) == AlgebraicScalar(lam)


def test_unit_orbits_share_coefficients():
    f = theta_degree1(seed("icosian4"), bound=16)
    eps2 = F5.fundamental_unit() ** 2
    for nu in totally_positive_elements(F5, 8):
        assert f.coefficient(nu) == f.coefficient(nu * eps2) == f.coefficient(nu * eps2.inverse())


def test_direct_sum_is_a_product_of_series():
    L = seed("icosian4")
    f = theta_degree1(L, bound=10)
    g = theta_degree1(L.direct_sum(L), bound=10)
    for nu in totally_positive_elements(F5, 10):
        conv = 2 * f.coefficient(nu)
        for a in totally_positive_elements(F5, int(nu.trace())):
            rest = nu - a
            if rest.is_totally_positive():
                conv = conv + f.coefficient(a) * f.coefficient(rest)
        assert g.coefficient(nu) == conv


def test_theta_map_constant_term_is_pairing_with_ones():
    led = genus_enumerate(default_seed(5, 8), [prime_from_label(F5, "2")])
    v = [AlgebraicScalar(3), AlgebraicScalar(-7)]
    f = theta_map(v, led, bound=4)
    assert f.constant == inner_product(v, [1] * led.h, led.aut_orders)
    # (-25, 42) is the cusp direction: its image has no constant term
    assert theta_map([-25, 42], led, bound=4).constant.is_zero()


def test_probe_guard_and_non_eigenform():
    f = theta_degree1(seed("icosian4"), bound=4)
    with pytest.raises(NoProbe):
        extract_eigenvalue(f, prime_from_label(F5, "2"), min_probes=3)
    f = theta_degree1(seed("icosian4"), bound=20)
    bumped = dataclasses.replace(f, coeffs={**f.coeffs, F5(4): f.coeffs[F5(4)] + AlgebraicScalar(1)})
    with pytest.raises(NotEigenform):
        extract_eigenvalue(bumped, prime_from_label(F5, "2"))


def test_hecke_on_q_sqrt3_is_refused():
    f = theta_degree1(default_seed(3, 2), bound=8)
    with pytest.raises(HeckeUnavailable):
        hecke_on_expansion(f, prime_from_label(quad_field(3), "1+sqrt3"))


@pytest.mark.slow
def test_rank8_genus_theta_eigenvalues():
    led = genus_enumerate(default_seed(5, 8), [prime_from_label(F5, "2")])
    f = theta_map([1] * led.h, led, bound=20)
    got = tuple(extract_eigenvalue(f, prime_from_label(F5, l)) for l in ("sqrt5", "2"))
    assert got == (AlgebraicScalar(1 + 5 ** 3), AlgebraicScalar(1 + 4 ** 3))
