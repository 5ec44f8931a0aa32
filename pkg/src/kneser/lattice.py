"""Lattices over Z and over O_E with symmetric or Hermitian Gram matrices.

Restriction of scalars
----------------------
An O_E-lattice of rank N with Gram matrix G is turned into a pair of integral
Z-forms on Z^(2N), with Z-basis (e_1, ..., e_N, w e_1, ..., w e_N):

    T1(x, y) = Tr(c <x, y>),    T2(x, y) = Tr(c w <x, y>).

The scale ``c`` is 1/delta for a totally positive generator delta of the
different when one exists (Q(sqrt5), Q(sqrt2)), which makes T1 even
unimodular; 1/2 for Q(sqrt3), whose different has no totally positive
generator; and 1 for Hermitian lattices over Q(sqrt-3), whose Gram entries
already lie in the inverse different.

A Z-linear bijection g preserving both T1 and T2 is O_E-linear: the values
Tr(c a) and Tr(c w a) determine a because {1, w} is a basis and the trace
pairing is nondegenerate, so <gx, gy> = <x, y> for all x, y.  Then
<g(wx), gy> = <wx, y> = w<x, y> = <w gx, gy> for all y, and since g is onto
and the form is nondegenerate, g(wx) = w g(x).  The same argument works in
the Hermitian case with <x, y> linear in x and conjugate-linear in y.
Hence |Aut(T1, T2)| counts exactly the O_E-linear isometries.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from importlib import resources

import numpy as np

from .numbers import FieldElem, QuadField, quad_field, rational_field

Matrix = list  # list of lists of FieldElem


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    zero = a[0][0].field.zero
    out = []
    for i in range(n):
        row = []
        ai = a[i]
        for j in range(m):
            s = zero
            for t in range(k):
                if not ai[t].is_zero() and not b[t][j].is_zero():
                    s = s + ai[t] * b[t][j]
            row.append(s)
        out.append(row)
    return out


def transpose(a: Matrix) -> Matrix:
    return [list(r) for r in zip(*a)]


def conj_transpose(a: Matrix) -> Matrix:
    return [[e.conj() for e in r] for r in zip(*a)]


def determinant(a: Matrix) -> FieldElem:
    """Determinant over the field by Gaussian elimination."""
    n = len(a)
    m = [list(r) for r in a]
    det = m[0][0].field.one
    for c in range(n):
        piv = next((r for r in range(c, n) if not m[r][c].is_zero()), None)
        if piv is None:
            return m[0][0].field.zero
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        p = m[c][c]
        det = det * p
        inv = p.inverse()
        for r in range(c + 1, n):
            if m[r][c].is_zero():
                continue
            f = m[r][c] * inv
            m[r] = [m[r][k] - f * m[c][k] for k in range(n)]
    return det


def inverse_matrix(a: Matrix) -> Matrix:
    n = len(a)
    F = a[0][0].field
    m = [list(r) + [F.one if i == j else F.zero for j in range(n)] for i, r in enumerate(a)]
    for c in range(n):
        piv = next((r for r in range(c, n) if not m[r][c].is_zero()), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[c], m[piv] = m[piv], m[c]
        inv = m[c][c].inverse()
        m[c] = [e * inv for e in m[c]]
        for r in range(n):
            if r != c and not m[r][c].is_zero():
                f = m[r][c]
                m[r] = [m[r][k] - f * m[c][k] for k in range(2 * n)]
    return [r[n:] for r in m]


def int_ldl_pivots(a) -> list[Fraction]:
    """Pivots of the exact LDL^T decomposition of a symmetric rational matrix."""
    n = len(a)
    m = [[Fraction(int(a[i][j])) if not isinstance(a[i][j], Fraction) else a[i][j] for j in range(n)]
         for i in range(n)]
    piv = []
    for c in range(n):
        p = m[c][c]
        piv.append(p)
        if p == 0:
            return piv
        for r in range(c + 1, n):
            if m[r][c]:
                f = m[r][c] / p
                for k in range(c + 1, n):
                    m[r][k] -= f * m[c][k]
    return piv


def int_det(a) -> int:
    """Exact determinant of an integer matrix (Bareiss)."""
    n = len(a)
    if n == 0:
        return 1
    m = [[int(v) for v in row] for row in a]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            sw = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if sw is None:
                return 0
            m[k], m[sw] = m[sw], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@dataclass
class TraceLattice:
    """Integral Z-forms T1 (and T2 over a quadratic field) on Z^(2N).

    ``basis`` is the 2N x 2N integer matrix whose columns express the working
    Z-basis in the standard coordinates (e_1..e_N, w e_1..w e_N); it is the
    identity for an unreduced trace lattice.
    """

    T1: np.ndarray
    T2: np.ndarray | None
    rank_o: int
    field_m: int | None
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.T1.shape[0]

    def forms(self) -> list[np.ndarray]:
        return [self.T1] if self.T2 is None else [self.T1, self.T2]

    def reduced(self) -> "TraceLattice":
        """LLL-reduce T1 and carry T2 and the basis along."""
        from .isometry import lll_transform
        U = lll_transform(self.T1)
        T1 = U.T @ self.T1 @ U
        T2 = None if self.T2 is None else U.T @ self.T2 @ U
        return TraceLattice(T1, T2, self.rank_o, self.field_m, self.basis @ U)

    def to_o_coords(self, z) -> list[tuple[int, int]]:
        """Standard coordinates of an O-vector from working Z-coordinates, as (x, y) pairs."""
        s = self.basis @ np.asarray(z, dtype=object)
        if self.T2 is None:
            return [(int(v), 0) for v in s]
        n = self.rank_o
        return [(int(s[i]), int(s[n + i])) for i in range(n)]

    def o_norm(self, z) -> tuple[int, int]:
        """(T1(z,z), T2(z,z)), which together determine <z,z>."""
        z = np.asarray(z, dtype=object)
        a = int(z @ self.T1 @ z)
        b = 0 if self.T2 is None else int(z @ self.T2 @ z)
        return a, b


class OLattice:
    """A free O_E-module (or Z-module) with a Gram matrix of FieldElem."""

    def __init__(self, field: QuadField, gram: Matrix, form_kind: str = "sym"):
        if form_kind not in ("sym", "herm"):
            raise ValueError("form_kind must be 'sym' or 'herm'")
        if form_kind == "herm" and field.is_real:
            raise ValueError("Hermitian lattices need an imaginary quadratic field")
        self.field = field
        self.form_kind = form_kind
        self.gram = [[e if isinstance(e, FieldElem) else field(e) for e in row] for row in gram]
        n = len(self.gram)
        if any(len(r) != n for r in self.gram):
            raise ValueError("Gram matrix must be square")
        for i in range(n):
            for j in range(n):
                other = self.gram[j][i].conj() if form_kind == "herm" else self.gram[j][i]
                if self.gram[i][j] != other:
                    kind = "Hermitian" if form_kind == "herm" else "symmetric"
                    raise ValueError(f"Gram matrix not {kind} at ({i},{j})")

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def is_rational(self) -> bool:
        return self.field.m == 1

    @property
    def field_m(self) -> int | None:
        return None if self.is_rational else self.field.m

    def __repr__(self):
        return f"OLattice(m={self.field_m}, rank={self.rank}, {self.form_kind})"

    # construction ---------------------------------------------------------
    def change_basis(self, B: Matrix) -> "OLattice":
        """Lattice with basis given by the rows of B (in current coordinates)."""
        if self.form_kind == "herm":
            g = mat_mul(mat_mul(B, self.gram), conj_transpose(B))
        else:
            g = mat_mul(mat_mul(B, self.gram), transpose(B))
        return OLattice(self.field, g, self.form_kind)

    def direct_sum(self, other: "OLattice") -> "OLattice":
        if other.field != self.field or other.form_kind != self.form_kind:
            raise ValueError("direct sum of incompatible lattices")
        n, m = self.rank, other.rank
        z = self.field.zero
        g = [list(r) + [z] * m for r in self.gram] + [[z] * n + list(r) for r in other.gram]
        return OLattice(self.field, g, self.form_kind)

    def scaled(self, c) -> "OLattice":
        return OLattice(self.field, [[e * c for e in r] for r in self.gram], self.form_kind)

    # predicates -----------------------------------------------------------
    def det(self) -> FieldElem:
        return determinant(self.gram)

    def is_integral(self) -> bool:
        if self.form_kind == "herm":
            return self.trace_lattice_is_integral()
        return all(e.is_integral() for r in self.gram for e in r)

    def trace_lattice_is_integral(self) -> bool:
        t = self.trace_lattice_exact()
        return all(v.denominator == 1 for row in t[0] for v in row)

    def is_even(self) -> bool:
        if self.form_kind == "herm":
            T1 = self.trace_lattice().T1
            return all(int(T1[i, i]) % 2 == 0 for i in range(T1.shape[0]))
        for i in range(self.rank):
            half = self.gram[i][i] * Fraction(1, 2)
            if not half.is_integral():
                return False
        return self.is_integral()

    def is_unimodular(self) -> bool:
        if self.form_kind == "herm":
            t = self.trace_lattice_exact()[0]
            if any(v.denominator != 1 for row in t for v in row):
                return False
            return abs(int_det([[int(v) for v in row] for row in t])) == 1
        if not self.is_integral():
            return False
        return self.det().is_unit()

    def is_totally_positive_definite(self) -> bool:
        """Exact LDL pivots of T1 are all positive (certifies every real embedding)."""
        t1 = self.trace_lattice_exact()[0]
        return all(p > 0 for p in int_ldl_pivots(t1))

    def dual_gram(self) -> Matrix:
        return inverse_matrix(self.gram)

    # trace forms ----------------------------------------------------------
    @cached_property
    def trace_scale(self) -> FieldElem:
        return trace_scale(self.field, self.form_kind)

    def trace_lattice_exact(self, scale: FieldElem | None = None) -> tuple[list, list | None]:
        """Exact Gram matrices of Tr(c<x,y>) and Tr(c w <x,y>); c defaults to the unimodular scaling."""
        F = self.field
        n = self.rank
        if self.is_rational:
            return [[e.x for e in r] for r in self.gram], None
        c = self.trace_scale if scale is None else scale
        w = F.omega
        powers = [F.one, w]
        conj_powers = [F.one, w.conj()] if self.form_kind == "herm" else powers
        T1 = [[Fraction(0)] * (2 * n) for _ in range(2 * n)]
        T2 = [[Fraction(0)] * (2 * n) for _ in range(2 * n)]
        for a in range(2):
            for b in range(2):
                f = powers[a] * conj_powers[b] * c
                fw = f * w
                for i in range(n):
                    for j in range(n):
                        g = self.gram[i][j]
                        if g.is_zero():
                            continue
                        T1[a * n + i][b * n + j] = (f * g).trace()
                        T2[a * n + i][b * n + j] = (fw * g).trace()
        return T1, T2

    def trace_lattice(self, scale: FieldElem | None = None) -> TraceLattice:
        T1, T2 = self.trace_lattice_exact(scale)
        if any(v.denominator != 1 for row in T1 for v in row):
            raise ValueError("trace form T1 is not integral")
        a1 = np.array([[int(v) for v in row] for row in T1], dtype=np.int64)
        a2 = None if T2 is None else np.array([[int(v) for v in row] for row in T2], dtype=np.int64)
        if np.abs(a1).max() > 2**40 or (a2 is not None and np.abs(a2).max() > 2**40):
            raise OverflowError("trace form entries too large for int64 arithmetic")
        return TraceLattice(a1, a2, self.rank, self.field_m, np.eye(a1.shape[0], dtype=np.int64))

    # serialisation --------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "field_m": self.field_m,
            "form_kind": self.form_kind,
            "gram": [[{"x": _fs(e.x), "y": _fs(e.y)} for e in r] for r in self.gram],
        }

    @staticmethod
    def from_json(obj: dict) -> "OLattice":
        m = obj.get("field_m")
        F = rational_field() if m is None else quad_field(int(m))
        gram = [[F(Fraction(e["x"]), Fraction(e.get("y", "0"))) for e in r] for r in obj["gram"]]
        return OLattice(F, gram, obj.get("form_kind", "sym"))

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()[:16]


def _fs(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def trace_scale(field: QuadField, form_kind: str) -> FieldElem:
    if field.m == 1 or form_kind == "herm":
        return field.one
    delta = field.totally_positive_different_generator()
    if delta is not None and delta.norm() == abs(field.d):
        return delta.inverse()
    return field(Fraction(1, 2))


# ---------------------------------------------------------------------------
# short vectors


def short_vectors(T: TraceLattice, bound: int, backend: str = "pari") -> dict[int, list[np.ndarray]]:
    """Nonzero vectors x with T1(x,x) <= bound, grouped by norm; both x and -x are listed."""
    if bound <= 0:
        return {}
    if backend == "pari":
        from .isometry import pari_short_vectors
        vecs = pari_short_vectors(T.T1, bound)
    else:
        vecs = fincke_pohst(T.T1, bound)
    out: dict[int, list[np.ndarray]] = {}
    for v in vecs:
        n = int(v @ T.T1 @ v)
        out.setdefault(n, []).append(v)
        out[n].append(-v)
    return dict(sorted(out.items()))


def fincke_pohst(gram: np.ndarray, bound: int) -> list[np.ndarray]:
    """One of each pair +-x with 0 < x^T G x <= bound.

    Uses the exact rational LDL^T of G with float pruning widened by a small
    slack; every candidate norm is then recomputed exactly in integers.
    """
    n = gram.shape[0]
    G = [[Fraction(int(gram[i, j])) for j in range(n)] for i in range(n)]
    # G = L D L^T with unit lower-triangular L, i.e. q(x) = sum_i d_i (x_i + sum_{j>i} mu_ji x_j)^2
    mu = [[Fraction(0)] * n for _ in range(n)]
    d = [Fraction(0)] * n
    for i in range(n):
        s = G[i][i] - sum(mu[i][k] ** 2 * d[k] for k in range(i))
        d[i] = s
        if s <= 0:
            raise ValueError("form is not positive definite")
        for j in range(i + 1, n):
            mu[j][i] = (G[j][i] - sum(mu[j][k] * mu[i][k] * d[k] for k in range(i))) / s
    # process coordinates from last to first: q = sum_i d_i (x_i + sum_{j>i} mu[j][i] x_j)^2
    df = [float(v) for v in d]
    muf = [[float(v) for v in r] for r in mu]
    eps = 1e-6 * max(1.0, float(bound))
    x = [0] * n
    out: list[np.ndarray] = []
    G_int = np.asarray(gram, dtype=object)

    def rec(i: int, remaining: float):
        c = -sum(muf[j][i] * x[j] for j in range(i + 1, n))
        r = math.sqrt(max(remaining, 0.0) / df[i]) + 1e-9
        lo, hi = math.ceil(c - r - 1e-9), math.floor(c + r + 1e-9)
        for v in range(lo, hi + 1):
            rest = remaining - df[i] * (v - c) ** 2
            if rest < -eps:
                continue
            x[i] = v
            if i == 0:
                if any(x):
                    vec = np.array(x, dtype=object)
                    nm = int(vec @ G_int @ vec)
                    if 0 < nm <= bound and _first_nonzero_positive(x):
                        out.append(np.array(x, dtype=np.int64))
            else:
                rec(i - 1, rest)
        x[i] = 0

    rec(n - 1, float(bound) + eps)
    return out


def _first_nonzero_positive(x) -> bool:
    for v in x:
        if v:
            return v > 0
    return False


def representation_numbers(L: OLattice, targets: list, backend: str = "pari") -> list[int]:
    """#{x in L : <x,x> = t} for each target t (totally positive or zero)."""
    F = L.field
    ts = [t if isinstance(t, FieldElem) else F(t) for t in targets]
    for t in ts:
        if t.is_zero():
            continue
        if F.is_real and not (t.is_rational() and t.x > 0 or t.is_totally_positive()):
            raise ValueError(f"target {t} is not totally positive")
        if not F.is_real and (not t.is_rational() or t.x <= 0):
            raise ValueError(f"target {t} is not a positive rational")
    T = L.trace_lattice().reduced()
    c = L.trace_scale
    levels = {}
    for t in ts:
        if t.is_zero():
            continue
        if L.is_rational:
            # over Q the trace form is the Gram matrix itself
            levels[t] = (int(t.x), 0)
        else:
            levels[t] = (int((c * t).trace()), int((c * F.omega * t).trace()) if T.T2 is not None else 0)
    bound = max((a for a, _ in levels.values()), default=0)
    counts: dict[tuple[int, int], int] = {}
    for nm, vecs in short_vectors(T, bound, backend).items():
        for v in vecs:
            key = T.o_norm(v)
            counts[key] = counts.get(key, 0) + 1
    return [1 if t.is_zero() else counts.get(levels[t], 0) for t in ts]


# ---------------------------------------------------------------------------
# seeds


def _load_seed_file() -> dict:
    with resources.files("kneser").joinpath("data/seeds.json").open() as fh:
        return json.load(fh)


SEED_NAMES = ("icosian4", "sqrt3_rank2", "e8", "e8_tensor", "eisenstein_e8_hermitian")


def seed(name: str, field_m: int | None = None, copies: int = 1) -> OLattice:
    """Catalogue lattices.

    ``e8_tensor`` needs ``field_m``; ``copies`` > 1 returns the orthogonal
    direct sum of that many copies (so ``seed("icosian4", copies=3)`` is the
    rank-12 lattice over Q(sqrt5)).
    """
    data = _load_seed_file()
    if name == "e8_tensor":
        if field_m is None:
            raise ValueError("e8_tensor needs a field")
        base = OLattice.from_json(data["e8"])
        F = quad_field(field_m)
        L = OLattice(F, [[F(e.x) for e in r] for r in base.gram], "sym")
    elif name in data:
        L = OLattice.from_json(data[name])
        if field_m is not None and L.field_m != field_m:
            raise ValueError(f"seed {name} lives over m={L.field_m}, not {field_m}")
    else:
        raise KeyError(f"unknown seed {name!r}; known: {', '.join(SEED_NAMES)}")
    out = L
    for _ in range(copies - 1):
        out = out.direct_sum(L)
    return out


def default_seed(field_m: int | None, rank: int, hermitian: bool = False) -> OLattice:
    """An even unimodular lattice of the requested rank built from catalogue pieces."""
    if hermitian:
        if field_m != -3 or rank % 4:
            raise ValueError("Hermitian seeds exist for m=-3 and rank divisible by 4")
        return seed("eisenstein_e8_hermitian", copies=rank // 4)
    if field_m is None:
        if rank % 8:
            raise ValueError("even unimodular Z-lattices need rank divisible by 8")
        return seed("e8", copies=rank // 8)
    if field_m == 5:
        if rank % 4:
            raise ValueError("Q(sqrt5) seeds need rank divisible by 4")
        return seed("icosian4", copies=rank // 4)
    if field_m == 3:
        if rank % 2:
            raise ValueError("Q(sqrt3) seeds need even rank")
        return seed("sqrt3_rank2", copies=rank // 2)
    if field_m == 2:
        if rank % 8:
            raise ValueError("Q(sqrt2) seeds need rank divisible by 8")
        return seed("e8_tensor", field_m=2, copies=rank // 8)
    raise ValueError(f"no seed for m={field_m}")
