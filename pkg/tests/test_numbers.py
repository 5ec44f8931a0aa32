from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, strategies as st

from kneser.numbers import (bernoulli_number, dedekind_zeta_algebraic_part, dedekind_zeta_at_negative,
                            factor_rational_prime, generalized_bernoulli, kronecker, kronecker_character,
                            parse_element, prime_from_label, quad_field, ray_class_character)

FIELDS = [5, 2, 3, -3]
small = st.integers(-50, 50)


def elem(m):
    F = quad_field(m)
    return st.builds(lambda x, y: F(x, y), small, small)


@pytest.mark.parametrize("m", FIELDS)
@given(data=st.data())
def test_ring_axioms(m, data):
    a, b, c = (data.draw(elem(m)) for _ in range(3))
    assert (a + b) * c == a * c + b * c
    assert a * (b * c) == (a * b) * c
    assert (a * b).norm() == a.norm() * b.norm()
    assert (a + b).trace() == a.trace() + b.trace()
    if not a.is_zero():
        assert a * a.inverse() == quad_field(m).one


@pytest.mark.parametrize("m, d", [(5, 5), (2, 8), (3, 12), (-3, -3)])
def test_discriminants(m, d):
    assert quad_field(m).d == d


@pytest.mark.parametrize("m", [5, 2, 3])
def test_fundamental_unit_has_norm_pm1(m):
    u = quad_field(m).fundamental_unit()
    assert abs(u.norm()) == 1 and u.is_integral() and u != quad_field(m).one


@pytest.mark.parametrize("m", FIELDS)
@pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
def test_prime_factorisation_norms(m, p):
    F = quad_field(m)
    primes = factor_rational_prime(F, p)
    assert sum(P.e * P.f for P in primes) == 2
    for P in primes:
        assert abs(P.generator.norm()) == P.q
        # the splitting type agrees with the Kronecker symbol of the discriminant
        k = kronecker(F.d, p)
        assert P.kind == {1: "split", -1: "inert", 0: "ramified"}[k]


@pytest.mark.parametrize("m, label, q", [(5, "sqrt5", 5), (5, "2", 4), (2, "sqrt2", 2), (3, "1+sqrt3", 2),
                                         (3, "sqrt3", 3), (3, "5", 25), (-3, "2", 4)])
def test_prime_labels(m, label, q):
    P = prime_from_label(quad_field(m), label)
    assert P.q == q
    rf = P.residue_field()
    assert rf.q == q
    # the residue field is a field: every nonzero code has an inverse
    assert all(rf.mul[c, rf.inv[c]] == 1 for c in range(1, q))


def test_narrow_class_character():
    F = quad_field(3)
    assert ray_class_character(prime_from_label(F, "1+sqrt3")) == -1
    assert ray_class_character(prime_from_label(F, "sqrt3")) == -1
    assert ray_class_character(prime_from_label(F, "5")) == 1
    assert ray_class_character(prime_from_label(quad_field(5), "2")) == 1


@given(st.integers(-200, 200), st.integers(1, 199).filter(lambda n: n % 2))
def test_kronecker_matches_jacobi_for_odd_moduli(a, n):
    assert kronecker(a, n) == sympy.jacobi_symbol(a % n, n)


@pytest.mark.parametrize("k", range(0, 21))
def test_bernoulli_numbers(k):
    expected = sympy.bernoulli(k)
    if k == 1:
        expected = sympy.Rational(-1, 2)  # sympy >= 1.12 uses B_1 = +1/2
    assert bernoulli_number(k) == Fraction(int(expected.p), int(expected.q))


@pytest.mark.parametrize("d", [5, 8, 12, -3, -4])
@pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
def test_generalized_bernoulli_against_direct_definition(d, k):
    # sum_{a=1}^{f} chi(a) t e^{at} / (e^{ft} - 1) = sum_k B_{k,chi} t^k / k!
    chi = kronecker_character(d)
    f = chi.modulus
    t = sympy.Symbol("t")
    gen = sum(chi(a) * t * sympy.exp(a * t) for a in range(1, f + 1)) / (sympy.exp(f * t) - 1)
    coeff = sympy.series(gen, t, 0, k + 1).removeO().coeff(t, k) * sympy.factorial(k)
    coeff = sympy.nsimplify(coeff)
    assert generalized_bernoulli(k, chi) == Fraction(int(coeff.p), int(coeff.q))


def _numeric_zeta(D: int, k: int) -> mpmath.mpf:
    # zeta_E(k) = zeta(k) * L(k, chi_D), L via Hurwitz zeta
    chi = kronecker_character(D)
    L = sum(chi(a) * mpmath.zeta(k, mpmath.mpf(a) / D) for a in range(1, D + 1)) / mpmath.mpf(D) ** k
    return mpmath.zeta(k) * L


@pytest.mark.parametrize("m", [5, 2, 3])
@pytest.mark.parametrize("k", [2, 4, 6, 8, 10])
def test_zeta_algebraic_part_numerically(m, k):
    mpmath.mp.dps = 40
    F = quad_field(m)
    r = dedekind_zeta_algebraic_part(F, k)
    approx = _numeric_zeta(F.d, k) * mpmath.sqrt(F.d) / mpmath.pi ** (2 * k)
    assert abs(approx - mpmath.mpf(r.numerator) / r.denominator) < mpmath.mpf(10) ** -30 * abs(approx)


@pytest.mark.parametrize("m", [5, 2, 3])
@pytest.mark.parametrize("k", [2, 4, 6])
def test_functional_equation_links_negative_and_positive_values(m, k):
    # zeta_E(1-k) = zeta_E(k) * D^(k-1/2) * ((k-1)!)^2 * 4 / (2 pi)^(2k) for even k
    F = quad_field(m)
    lhs = dedekind_zeta_at_negative(F, k)
    rhs = dedekind_zeta_algebraic_part(F, k) * Fraction(F.d) ** (k - 1) * sympy.factorial(k - 1) ** 2 * 4 / Fraction(4) ** k
    assert lhs == Fraction(int(sympy.Rational(rhs).p), int(sympy.Rational(rhs).q))


def test_zeta_value_q5_k6():
    r = dedekind_zeta_algebraic_part(quad_field(5), 6)
    assert r == Fraction(536, 221484375)
    assert r.numerator % 67 == 0


@pytest.mark.parametrize("text", ["3+4*sqrt5", "-1/2+1/2*sqrt5", "7", "sqrt5", "4-sqrt5"])
def test_parse_element_roundtrip(text):
    F = quad_field(5)
    x = parse_element(F, text)
    assert parse_element(F, str(x)) == x
