"""Degree-1 theta series of lattices over Z and real quadratic rings.

Coefficients are indexed by nu = <x,x> (no division by the different); a
generator of the totally positive different is kept as metadata.  Indices
are reduced modulo the squares of units: nu and eps^2 nu carry the same
coefficient because x -> eps*x is a bijection.  Lattices are even, so every
index lies in 2O; the Hecke formula below is stated for that index set.  The canonical representative
of an orbit is the one whose two embeddings are closest in ratio, which is
also the element of smallest trace, so an orbit meets the trace ball
Tr(nu) <= B exactly when its representative does.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .isometry import level_counts
from .lattice import OLattice
from .numbers import FieldElem, PrimeIdeal, QuadField, rational_field
from .spectra import AlgebraicScalar, FieldMismatch

__all__ = [
    "HilbertQExpansion", "OutOfRange", "NoProbe", "NotEigenform", "HeckeUnavailable",
    "canonical_index", "totally_positive_elements", "totally_positive_elements_canonical", "theta_degree1", "class_expansions",
    "theta_map", "hecke_on_expansion", "extract_eigenvalue",
]


class OutOfRange(KeyError):
    """The requested coefficient lies beyond the truncation bound."""


class NoProbe(ValueError):
    """No index with a nonzero coefficient is available for the eigenvalue ratio."""


class NotEigenform(ValueError):
    """Ratios differ between probe indices."""


class HeckeUnavailable(ValueError):
    """Hecke operators on expansions need narrow class number one."""


# ---------------------------------------------------------------------------
# index bookkeeping


def _square_unit(F: QuadField) -> FieldElem:
    u = F.fundamental_unit()
    return u * u


def _log_ratio(nu: FieldElem) -> float:
    s1, s2 = nu.embeddings()
    return math.log(s1 / s2)


def canonical_index(nu: FieldElem) -> FieldElem:
    """Representative of nu modulo squares of units (identity over Q)."""
    F = nu.field
    if F.m == 1:
        return nu
    if not nu.is_totally_positive():
        raise ValueError(f"{nu} is not totally positive")
    u = _square_unit(F)
    step = _log_ratio(u)
    k = round(-_log_ratio(nu) / step)
    best = None
    for j in (k - 1, k, k + 1):
        cand = nu * (u ** j if j >= 0 else u.inverse() ** (-j))
        key = (round(abs(_log_ratio(cand)), 9), cand.embeddings()[0])
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1]


def _is_index(nu: FieldElem) -> bool:
    return (nu * Fraction(1, 2)).is_integral()


def totally_positive_elements(F: QuadField, bound: int) -> Iterator[FieldElem]:
    """Every totally positive element of 2O with trace <= bound, by trace then first embedding."""
    for alpha in _totally_positive_integers(F, bound // 2):
        yield alpha * 2


def _totally_positive_integers(F: QuadField, bound: int) -> Iterator[FieldElem]:
    if F.m == 1:
        for n in range(1, bound // 2 + 1):
            yield F(n)
        return
    root = math.sqrt(F.m)
    for t in range(1, bound + 1):
        a = Fraction(t, 2)
        # integral elements a + b sqrt(m): b in Z (t even) or, when m = 1 mod 4, b in Z + 1/2 matching t
        if F.t:
            start = Fraction(t % 2, 2)
        else:
            if t % 2:
                continue
            start = Fraction(0)
        bmax = a / Fraction(root).limit_denominator(10**12) + 1
        b = start
        cands = []
        while b <= bmax:
            for s in ((b,) if b == 0 else (b, -b)):
                nu = F.from_sqrt_coords(a, s)
                if nu.is_integral() and nu.is_totally_positive():
                    cands.append(nu)
            b += 1
        yield from sorted(cands, key=lambda z: z.embeddings()[0])


def _trace(nu: FieldElem) -> Fraction:
    return nu.trace()


def _weight(L: OLattice) -> Fraction:
    return Fraction(L.rank, 2)


# ---------------------------------------------------------------------------
# expansions


@dataclass(frozen=True)
class HilbertQExpansion:
    """Truncated expansion: coefficients at canonical nu with Tr(nu) <= bound; missing means zero.

    Over Q the trace of an integer n is taken as 2n, so the same bound means
    the same thing as for the real quadratic fields.
    """

    field: QuadField
    weight: Fraction
    constant: AlgebraicScalar
    coeffs: dict
    bound: int
    different: FieldElem | None = None

    def coefficient(self, nu) -> AlgebraicScalar:
        nu = nu if isinstance(nu, FieldElem) else self.field(nu)
        if nu.is_zero():
            return self.constant
        if self.field.m != 1 and not nu.is_totally_positive():
            return AlgebraicScalar(0)
        if self.field.m == 1 and nu.x < 0:
            return AlgebraicScalar(0)
        if not _is_index(nu):
            return AlgebraicScalar(0)
        key = canonical_index(nu)
        if _trace(key) > self.bound:
            raise OutOfRange(str(nu))
        return self.coeffs.get(key, AlgebraicScalar(0))

    def indices(self) -> list[FieldElem]:
        return list(totally_positive_elements_canonical(self.field, self.bound))

    def nonzero(self) -> list[tuple[FieldElem, AlgebraicScalar]]:
        return [(nu, self.coeffs[nu]) for nu in self.indices() if not self.coeffs.get(nu, AlgebraicScalar(0)).is_zero()]

    def is_zero(self) -> bool:
        return self.constant.is_zero() and all(c.is_zero() for c in self.coeffs.values())

    def scaled(self, s) -> "HilbertQExpansion":
        s = AlgebraicScalar.coerce(s)
        return HilbertQExpansion(self.field, self.weight, self.constant * s,
                                 {k: v * s for k, v in self.coeffs.items()}, self.bound, self.different)

    def __add__(self, other: "HilbertQExpansion") -> "HilbertQExpansion":
        if other.field != self.field or other.weight != self.weight:
            raise ValueError("expansions live in different spaces")
        bound = min(self.bound, other.bound)
        keys = {k for k in (*self.coeffs, *other.coeffs) if _trace(k) <= bound}
        zero = AlgebraicScalar(0)
        coeffs = {k: self.coeffs.get(k, zero) + other.coeffs.get(k, zero) for k in keys}
        return HilbertQExpansion(self.field, self.weight, self.constant + other.constant,
                                 {k: v for k, v in coeffs.items() if not v.is_zero()}, bound, self.different)

    def is_proportional_to(self, other: "HilbertQExpansion") -> bool:
        """Projective equality on the common index range."""
        bound = min(self.bound, other.bound)
        pairs = [(self.constant, other.constant)]
        for nu in totally_positive_elements_canonical(self.field, bound):
            pairs.append((self.coefficient(nu), other.coefficient(nu)))
        ref = next(((a, b) for a, b in pairs if not (a.is_zero() and b.is_zero())), None)
        if ref is None:
            return True
        a0, b0 = ref
        return all((a * b0 - b * a0).is_zero() for a, b in pairs)

    def to_json(self) -> dict:
        rows = []
        for nu in totally_positive_elements_canonical(self.field, self.bound):
            c = self.coeffs.get(nu)
            if c is not None and not c.is_zero():
                rows.append({"nu": {"x": str(nu.x), "y": str(nu.y)}, "c": c.to_json()})
        return {
            "field_m": None if self.field.m == 1 else self.field.m,
            "weight": str(self.weight),
            "bound": self.bound,
            "different": None if self.different is None else self.different.to_json(),
            "constant": self.constant.to_json(),
            "coefficients": rows,
        }


def totally_positive_elements_canonical(F: QuadField, bound: int) -> Iterator[FieldElem]:
    seen = set()
    for nu in totally_positive_elements(F, bound):
        k = canonical_index(nu)
        if k not in seen and _trace(k) <= bound:
            seen.add(k)
            yield k


# ---------------------------------------------------------------------------
# theta series of a single lattice


def _levels_to_index(F: QuadField, t: int, s: int) -> FieldElem:
    """Recover nu from (Tr nu, Tr(omega nu))."""
    if F.m == 1:
        return F(Fraction(t, 2))
    w = F.omega
    tw, tw2 = w.trace(), (w * w).trace()
    det = 2 * tw2 - tw * tw
    x = (t * tw2 - s * tw) / det
    y = (2 * s - tw * t) / det
    return F(x, y)


def theta_degree1(L: OLattice, bound: int = 20) -> HilbertQExpansion:
    """Representation numbers #{x : <x,x> = nu} for every canonical nu with Tr(nu) <= bound."""
    if L.form_kind == "herm":
        raise ValueError("Hermitian theta expansions are not provided")
    F = L.field if not L.is_rational else rational_field()
    scale = None if L.is_rational else F.one
    T = L.trace_lattice(scale).reduced()
    # over Q the Gram already is the form; Tr(n) = 2n there, so halve the bound
    enum_bound = bound // 2 if L.is_rational else bound
    coeffs: dict[FieldElem, AlgebraicScalar] = {}
    for (t, s), count in level_counts(T, enum_bound).items():
        nu = _levels_to_index(F, 2 * t if L.is_rational else t, s)
        key = canonical_index(nu)
        prev = coeffs.get(key)
        if prev is not None and prev != AlgebraicScalar(count):
            raise AssertionError(f"unit orbit of {key} has unequal counts")
        coeffs[key] = AlgebraicScalar(count)
    coeffs = {k: v for k, v in coeffs.items() if _trace(k) <= bound}
    delta = None if L.is_rational else F.totally_positive_different_generator()
    return HilbertQExpansion(F, _weight(L), AlgebraicScalar(1), coeffs, bound, delta)


def _theta_job(args):
    data, bound = args
    return theta_degree1(OLattice.from_json(data), bound)


def class_expansions(ledger, bound: int = 20, threads: int = 1) -> list[HilbertQExpansion]:
    """theta_degree1 of every class representative, optionally in parallel."""
    jobs = [(c.lattice.to_json(), bound) for c in ledger.classes]
    if threads <= 1:
        return [_theta_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(_theta_job, jobs))


def theta_map(v: Sequence, ledger, bound: int = 20, expansions: Sequence[HilbertQExpansion] | None = None,
              threads: int = 1) -> HilbertQExpansion:
    """sum_j v_j / |Aut(L_j)| * theta(L_j)."""
    if len(v) != ledger.h:
        raise ValueError(f"vector has {len(v)} entries, genus has {ledger.h} classes")
    if expansions is None:
        expansions = class_expansions(ledger, bound, threads)
    total = None
    for x, n, f in zip(v, ledger.aut_orders, expansions):
        term = f.scaled(AlgebraicScalar.coerce(x) * Fraction(1, n))
        total = term if total is None else total + term
    return total


# ---------------------------------------------------------------------------
# Hecke action


def _hecke_generator(F: QuadField, prime) -> tuple[FieldElem, int]:
    if F.m == 1:
        p = int(prime.p if isinstance(prime, PrimeIdeal) else prime)
        return F(p), p
    if F.m > 0 and not F.units_mod_squares_sign():
        raise HeckeUnavailable(f"Q(sqrt{F.m}) has narrow class number 2")
    if not isinstance(prime, PrimeIdeal):
        raise TypeError("a prime ideal is needed over a quadratic field")
    return prime.totally_positive_generator(), prime.q


def hecke_on_expansion(f: HilbertQExpansion, prime) -> HilbertQExpansion:
    """c(T f, nu) = c(f, pi nu) + Nm(p)^(k-1) c(f, nu/pi), kept where every term is known."""
    F = f.field
    pi, q = _hecke_generator(F, prime)
    if f.weight.denominator != 1:
        raise ValueError("half-integral weight is not supported")
    factor = q ** (int(f.weight) - 1)

    def value(nu):
        out = f.coefficient(pi * nu)
        down = nu / pi
        if _is_index(down):
            out = out + f.coefficient(down) * factor
        return out

    coeffs = {}
    new_bound = f.bound
    for nu in totally_positive_elements_canonical(F, f.bound):
        try:
            c = value(nu)
        except OutOfRange:
            new_bound = int(_trace(nu)) - 1
            break
        if not c.is_zero():
            coeffs[nu] = c
    coeffs = {k: v for k, v in coeffs.items() if _trace(k) <= new_bound}
    constant = f.constant * (1 + factor)
    return HilbertQExpansion(F, f.weight, constant, coeffs, new_bound, f.different)


def extract_eigenvalue(f: HilbertQExpansion, prime, min_probes: int = 3) -> AlgebraicScalar:
    """Eigenvalue of T_p on f, read off one nonzero coefficient and checked on every reachable index."""
    g = hecke_on_expansion(f, prime)
    probes = list(totally_positive_elements_canonical(f.field, g.bound))
    if len(probes) < min_probes:
        raise NoProbe(f"only {len(probes)} indices within reach; raise the trace bound")
    ref = next((nu for nu in probes if not f.coefficient(nu).is_zero()), None)
    if ref is None:
        raise NoProbe("expansion vanishes on every reachable index")
    try:
        lam = g.coefficient(ref) * f.coefficient(ref).inverse()
    except FieldMismatch as exc:
        raise NotEigenform(str(exc)) from exc
    for nu in probes:
        if not (g.coefficient(nu) - lam * f.coefficient(nu)).is_zero():
            raise NotEigenform(f"ratio at {nu} differs from {lam}")
    if not (g.constant - lam * f.constant).is_zero():
        raise NotEigenform("constant term is inconsistent")
    return lam
