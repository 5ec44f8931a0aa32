"""Exact eigen-analysis of Hecke matrices, products of eigenvectors, degree bounds,
congruences and the spinor bipartition.

Characteristic polynomials come from the division-free Berkowitz recursion.
Factoring is numeric-guided: high-precision roots are grouped into candidate
factors whose integrality and exact divisibility are then checked, so every
reported factor is exact even though the search is floating point.

Simultaneous eigenspaces are found over Q by splitting along the rational
irreducible factors of each matrix in turn.  A piece of dimension 1 or 2
yields exact eigenvectors (over Q or a real quadratic field); larger pieces
are kept as blocks described by their factor polynomials and isolating
intervals.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np
import sympy

Number = int | Fraction


# ---------------------------------------------------------------------------
# scalars


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = c^2 * m with m squarefree; returns (c, m).  Sign stays with m."""
    if n == 0:
        return 0, 0
    sign = -1 if n < 0 else 1
    c, m = 1, 1
    for p, e in sympy.factorint(abs(n)).items():
        c *= p ** (e // 2)
        if e % 2:
            m *= p
    return c, sign * m


class FieldMismatch(ValueError):
    """Arithmetic between different quadratic fields."""


class AlgebraicScalar:
    """a + b*sqrt(m) with a, b rational and m squarefree (m = 1 means rational)."""

    __slots__ = ("a", "b", "m")

    def __init__(self, a: Number = 0, b: Number = 0, m: int = 1):
        a, b = Fraction(a), Fraction(b)
        if m == 1 or b == 0:
            self.a, self.b, self.m = a + (b if m == 1 else 0), Fraction(0), 1
        else:
            c, sq = _squarefree_split(m)
            if sq == 1:
                self.a, self.b, self.m = a + b * c, Fraction(0), 1
            else:
                self.a, self.b, self.m = a, b * c, sq

    @staticmethod
    def coerce(x) -> "AlgebraicScalar":
        return x if isinstance(x, AlgebraicScalar) else AlgebraicScalar(x)

    def _field(self, other: "AlgebraicScalar") -> int:
        if self.m == 1:
            return other.m
        if other.m in (1, self.m):
            return self.m
        raise FieldMismatch(f"sqrt({self.m}) vs sqrt({other.m})")

    def __add__(self, o):
        o = AlgebraicScalar.coerce(o)
        return AlgebraicScalar(self.a + o.a, self.b + o.b, self._field(o))

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicScalar(-self.a, -self.b, self.m)

    def __sub__(self, o):
        return self + (-AlgebraicScalar.coerce(o))

    def __rsub__(self, o):
        return AlgebraicScalar.coerce(o) - self

    def __mul__(self, o):
        o = AlgebraicScalar.coerce(o)
        m = self._field(o)
        return AlgebraicScalar(self.a * o.a + self.b * o.b * m, self.a * o.b + self.b * o.a, m)

    __rmul__ = __mul__

    def conj(self) -> "AlgebraicScalar":
        return AlgebraicScalar(self.a, -self.b, self.m)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.m

    def trace(self) -> Fraction:
        return 2 * self.a

    def inverse(self) -> "AlgebraicScalar":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return AlgebraicScalar(self.a / n, -self.b / n, self.m)

    def __truediv__(self, o):
        return self * AlgebraicScalar.coerce(o).inverse()

    def __rtruediv__(self, o):
        return AlgebraicScalar.coerce(o) * self.inverse()

    def __eq__(self, o):
        try:
            o = AlgebraicScalar.coerce(o)
        except (TypeError, ValueError):
            return NotImplemented
        return self.a == o.a and self.b == o.b and (self.b == 0 or self.m == o.m)

    def __hash__(self):
        return hash((self.a, self.b, self.m if self.b else 1))

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def is_algebraic_integer(self) -> bool:
        # minimal polynomial x^2 - 2a x + norm
        if self.b == 0:
            return self.a.denominator == 1
        return (2 * self.a).denominator == 1 and self.norm().denominator == 1

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.m) if self.m > 0 else float("nan")

    def numeric(self, dps: int = 30):
        with mpmath.workdps(dps):
            return mpmath.mpf(self.a.numerator) / self.a.denominator + \
                mpmath.mpf(self.b.numerator) / self.b.denominator * mpmath.sqrt(self.m)

    def __repr__(self):
        return f"AlgebraicScalar({self})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        sign = "+" if self.b > 0 else "-"
        bb = abs(self.b)
        bs = "" if bb == 1 else f"{bb}*"
        return f"{self.a}{sign}{bs}sqrt({self.m})" if self.a else f"{'' if sign == '+' else '-'}{bs}sqrt({self.m})"

    def to_json(self) -> dict:
        return {"a": _frac_str(self.a), "b": _frac_str(self.b), "m": self.m}

    @staticmethod
    def from_json(obj) -> "AlgebraicScalar":
        if isinstance(obj, (int, str)):
            return AlgebraicScalar(Fraction(obj))
        return AlgebraicScalar(Fraction(obj["a"]), Fraction(obj.get("b", "0")), int(obj.get("m", 1)))

    @staticmethod
    def parse(text: str) -> "AlgebraicScalar":
        """Read '33+3*sqrt(73)', '-4sqrt3', '12*sqrt(-5)', '1/2' and the like."""
        s = text.replace(" ", "").replace("√", "sqrt")
        m = _SCALAR_RE.fullmatch(s)
        if m is None:
            raise ValueError(f"cannot parse scalar {text!r}")
        a_str, b_str, rad1, rad2 = m.groups()
        if rad1 is None and rad2 is None:
            return AlgebraicScalar(Fraction(a_str))
        a = Fraction(a_str) if a_str else Fraction(0)
        b_str = (b_str or "+").rstrip("*")
        b = Fraction(1) if b_str in ("", "+") else Fraction(-1) if b_str == "-" else Fraction(b_str)
        return AlgebraicScalar(a, b, int(rad1 if rad1 is not None else rad2))


_SCALAR_RE = re.compile(
    r"([+-]?\d+(?:/\d+)?(?=[+-]|$))?([+-]?(?:\d+(?:/\d+)?\*?)?)?(?:sqrt\((-?\d+)\)|sqrt(\d+))?")


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def quadratic_roots(s: int, t: int) -> tuple[AlgebraicScalar, AlgebraicScalar]:
    """Roots of x^2 - s x + t, larger real root first."""
    disc = s * s - 4 * t
    c, m = _squarefree_split(disc)
    plus = AlgebraicScalar(Fraction(s, 2), Fraction(c, 2), m)
    minus = plus.conj()
    if m > 0 and float(plus) < float(minus):
        plus, minus = minus, plus
    return plus, minus


class MultiQuad:
    """Element of a multiquadratic field: {squarefree d: coefficient of sqrt(d)}.

    Only ring operations are provided; it is used to decide whether products
    of eigenvector entries from different quadratic fields vanish, and for
    absolute norms.
    """

    __slots__ = ("c",)

    def __init__(self, coeffs: dict[int, Fraction] | None = None):
        self.c = {d: Fraction(v) for d, v in (coeffs or {}).items() if v != 0}

    @staticmethod
    def of(x) -> "MultiQuad":
        x = AlgebraicScalar.coerce(x)
        return MultiQuad({1: x.a, x.m: x.b} if x.b else {1: x.a})

    def __add__(self, o):
        out = dict(self.c)
        for d, v in o.c.items():
            out[d] = out.get(d, 0) + v
        return MultiQuad(out)

    def __neg__(self):
        return MultiQuad({d: -v for d, v in self.c.items()})

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        out: dict[int, Fraction] = {}
        for d1, v1 in self.c.items():
            for d2, v2 in o.c.items():
                a, b = abs(d1), abs(d2)
                g = math.gcd(a, b)
                d = (a // g) * (b // g)
                coef = v1 * v2 * g
                if d1 < 0 and d2 < 0:
                    coef = -coef
                elif d1 < 0 or d2 < 0:
                    d = -d
                out[d] = out.get(d, 0) + coef
        return MultiQuad(out)

    def scale(self, r: Fraction) -> "MultiQuad":
        return MultiQuad({d: v * r for d, v in self.c.items()})

    def is_zero(self) -> bool:
        return not self.c

    def radicals(self) -> list[int]:
        """Squarefree primes (and -1) generating the field of this element."""
        gens: set[int] = set()
        for d in self.c:
            if d < 0:
                gens.add(-1)
            gens.update(sympy.primefactors(abs(d)))
        return sorted(gens)

    def conjugate(self, flips: set[int]) -> "MultiQuad":
        out = {}
        for d, v in self.c.items():
            k = (1 if d < 0 and -1 in flips else 0) + sum(1 for p in sympy.primefactors(abs(d)) if p in flips)
            out[d] = -v if k % 2 else v
        return MultiQuad(out)

    def norm(self) -> Fraction:
        """Absolute norm down to Q."""
        gens = self.radicals()
        prod = MultiQuad({1: Fraction(1)})
        for r in range(len(gens) + 1):
            for sub in itertools.combinations(gens, r):
                prod = prod * self.conjugate(set(sub))
        if set(prod.c) - {1}:
            raise ArithmeticError("norm did not descend to Q")
        return prod.c.get(1, Fraction(0))


# ---------------------------------------------------------------------------
# polynomials (coefficient lists, highest degree first)


def berkowitz(M: Sequence[Sequence[Number]]) -> list:
    """Coefficients of det(xI - M), highest degree first, without division."""
    n = len(M)
    if n == 0:
        return [1]
    A = [[M[i][j] for j in range(n)] for i in range(n)]
    # Build Toeplitz columns for each leading principal submatrix and multiply.
    vect = [1, -A[0][0]]
    for r in range(1, n):
        R = [A[r][j] for j in range(r)]           # row r, first r entries
        C = [A[i][r] for i in range(r)]           # column r, first r entries
        Ar = [row[:r] for row in A[:r]]
        a = A[r][r]
        # Q = [1, -a, -R C, -R A C, ..., -R A^{r-1} C]
        q = [1, -a]
        v = C
        for _ in range(r):
            q.append(-sum(R[k] * v[k] for k in range(r)))
            v = [sum(Ar[i][k] * v[k] for k in range(r)) for i in range(r)]
        # multiply Toeplitz(q) (size (r+2) x (r+1)) by vect
        new = []
        for i in range(r + 2):
            s = 0
            for j in range(min(i + 1, r + 1)):
                s += q[i - j] * vect[j]
            new.append(s)
        vect = new
    return vect


def char_poly(M) -> list[int]:
    """Characteristic polynomial of an integer matrix, highest degree first."""
    rows = [[int(x) for x in row] for row in np.asarray(M, dtype=object).tolist()] \
        if not isinstance(M, list) else [[x for x in row] for row in M]
    coeffs = berkowitz(rows)
    out = []
    for c in coeffs:
        c = Fraction(c)
        if c.denominator != 1:
            raise ArithmeticError("characteristic polynomial not integral")
        out.append(int(c))
    return out


def poly_eval(p: Sequence[Number], x):
    acc = 0
    for c in p:
        acc = acc * x + c
    return acc


def poly_divmod(p: Sequence[Number], d: Sequence[Number]) -> tuple[list, list]:
    p = [Fraction(c) for c in p]
    d = [Fraction(c) for c in d]
    if len(d) == 0 or d[0] == 0:
        raise ZeroDivisionError("division by zero polynomial")
    q = []
    r = list(p)
    while len(r) >= len(d):
        f = r[0] / d[0]
        q.append(f)
        for i in range(len(d)):
            r[i] -= f * d[i]
        r.pop(0)
    while r and r[0] == 0:
        r.pop(0)
    return q, r


def poly_mul(a: Sequence[Number], b: Sequence[Number]) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def poly_gcd(a: Sequence[Number], b: Sequence[Number]) -> list[Fraction]:
    a = [Fraction(c) for c in a]
    b = [Fraction(c) for c in b]
    while b:
        _, r = poly_divmod(a, b)
        a, b = b, r
    return [c / a[0] for c in a]


def poly_derivative(p: Sequence[Number]) -> list:
    n = len(p) - 1
    return [c * (n - i) for i, c in enumerate(p[:-1])]


def _as_int_poly(p: Sequence[Number]) -> list[int]:
    out = []
    for c in p:
        c = Fraction(c)
        if c.denominator != 1:
            raise ArithmeticError("expected an integer polynomial")
        out.append(int(c))
    return out


def squarefree_decomposition(p: Sequence[Number]) -> list[tuple[list[int], int]]:
    """Yun's algorithm over Q for a monic integer polynomial: [(factor, multiplicity)]."""
    p = [Fraction(c) for c in p]
    out = []
    if len(p) <= 1:
        return out
    g = poly_gcd(p, poly_derivative(p))
    c, _ = poly_divmod(p, g)
    i = 1
    w = c
    y = g
    while len(w) > 1:
        z = poly_gcd(w, y)
        f, _ = poly_divmod(w, z)
        if len(f) > 1:
            out.append((_as_int_poly(f), i))
        w = z
        y, _ = poly_divmod(y, z)
        i += 1
    return out


def numeric_roots(p: Sequence[int], dps: int | None = None) -> list:
    if len(p) <= 1:
        return []
    size = max(len(str(abs(int(c)))) for c in p)
    dps = dps or max(40, 2 * size + 10 * len(p))
    with mpmath.workdps(dps):
        roots = mpmath.polyroots([mpmath.mpf(int(c)) for c in p], maxsteps=400 + 40 * len(p), extraprec=4 * dps)
    return roots


def _round_int(z, tol) -> int | None:
    if abs(mpmath.im(z)) > tol:
        return None
    r = int(mpmath.nint(mpmath.re(z)))
    return r if abs(mpmath.re(z) - r) <= tol * max(1, abs(r)) else None


def factor_squarefree(p: Sequence[int], max_degree: int = 4) -> list[list[int]]:
    """Irreducible factors of degree <= max_degree of a squarefree monic integer polynomial.

    Whatever is left (a product of factors of larger degree) is appended as
    the final entry if nontrivial.
    """
    p = list(p)
    roots = list(numeric_roots(p))
    found: list[list[int]] = []
    tol = mpmath.mpf(10) ** -8
    for deg in range(1, max_degree + 1):
        if len(p) - 1 < deg:
            break
        progress = True
        while progress and len(p) - 1 >= deg:
            progress = False
            for combo in itertools.combinations(range(len(roots)), deg):
                if len(p) - 1 == deg:
                    cand = p
                else:
                    zs = [roots[i] for i in combo]
                    elem = [mpmath.mpf(1)]
                    for z in zs:
                        elem = [a - z * b for a, b in zip(elem + [0], [0] + elem)]
                    ints = [_round_int(c, tol) for c in elem]
                    if any(v is None for v in ints):
                        continue
                    cand = ints
                q, r = poly_divmod(p, cand)
                if r:
                    continue
                found.append(list(cand))
                p = _as_int_poly(q)
                roots = [z for i, z in enumerate(roots) if i not in combo]
                progress = True
                break
    if len(p) > 1:
        found.append(p)
    return found


def factor_poly(p: Sequence[int], max_degree: int = 4) -> list[tuple[list[int], int]]:
    """[(irreducible factor, multiplicity)]; a trailing factor of degree > max_degree may be reducible."""
    out = []
    for f, e in squarefree_decomposition(p):
        for g in factor_squarefree(f, max_degree):
            out.append((g, e))
    return out


def isolating_intervals(p: Sequence[int]) -> list[tuple[Fraction, Fraction]]:
    """Disjoint rational intervals each containing exactly one real root of squarefree p."""
    roots = sorted(float(mpmath.re(z)) for z in numeric_roots(p) if abs(mpmath.im(z)) < 1e-20)
    eps = Fraction(1, 2)
    if len(roots) >= 2:
        eps = min(eps, Fraction(min(b - a for a, b in zip(roots, roots[1:]))) / 3)
    for _ in range(60):
        ivs = [(Fraction(r) - eps, Fraction(r) + eps) for r in roots]
        if all(poly_eval(p, lo) * poly_eval(p, hi) < 0 for lo, hi in ivs):
            return ivs
        eps /= 2
    raise ArithmeticError("could not certify isolating intervals")


# ---------------------------------------------------------------------------
# linear algebra over Q and quadratic fields


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, AlgebraicScalar) else x == 0


def rref(M: list[list]) -> tuple[list[list], list[int]]:
    A = [list(r) for r in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    piv = []
    r = 0
    for c in range(cols):
        k = next((i for i in range(r, rows) if not _is_zero(A[i][c])), None)
        if k is None:
            continue
        A[r], A[k] = A[k], A[r]
        inv = 1 / A[r][c] if not isinstance(A[r][c], AlgebraicScalar) else A[r][c].inverse()
        A[r] = [x * inv for x in A[r]]
        for i in range(rows):
            if i != r and not _is_zero(A[i][c]):
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        piv.append(c)
        r += 1
        if r == rows:
            break
    return A, piv


def nullspace(M: list[list]) -> list[list]:
    """Basis of {v : M v = 0}; each basis vector has a 1 at its free coordinate."""
    if not M:
        return []
    n = len(M[0])
    R, piv = rref([[x if isinstance(x, AlgebraicScalar) else Fraction(x) for x in row] for row in M])
    free = [c for c in range(n) if c not in piv]
    out = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, c in enumerate(piv):
            v[c] = -R[r][f]
        out.append(v)
    return out


def mat_vec(M, v):
    return [sum((M[i][j] * v[j] for j in range(len(v))), Fraction(0)) for i in range(len(M))]


def _int_matrix(M) -> list[list[int]]:
    return [[int(x) for x in row] for row in np.asarray(M).tolist()]


def poly_of_matrix(p: Sequence[Number], M: list[list]) -> list[list]:
    n = len(M)
    acc = [[Fraction(0)] * n for _ in range(n)]
    for c in p:
        acc = [[sum(acc[i][k] * M[k][j] for k in range(n) if acc[i][k]) for j in range(n)] for i in range(n)]
        for i in range(n):
            acc[i][i] += c
    return acc


# ---------------------------------------------------------------------------
# eigen-decomposition


@dataclass
class Subspace:
    """Column basis B (h x r) with B[pivots[k]] = e_k."""

    basis: list[list[Fraction]]  # list of r column vectors, each of length h
    pivots: list[int]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @staticmethod
    def from_vectors(vectors: list[list[Fraction]]) -> "Subspace":
        R, piv = rref(vectors)
        R = [row for row in R[:len(piv)]]
        return Subspace(R, piv)

    def restrict(self, M: list[list[int]]) -> list[list[Fraction]]:
        """Matrix R with M B = B R."""
        cols = [mat_vec(M, b) for b in self.basis]
        r = self.dim
        return [[cols[j][self.pivots[i]] for j in range(r)] for i in range(r)]

    def lift(self, y: Sequence) -> list:
        h = len(self.basis[0])
        out = [AlgebraicScalar(0) if any(isinstance(c, AlgebraicScalar) for c in y) else Fraction(0)] * h
        out = list(out)
        for k, b in enumerate(self.basis):
            if _is_zero(y[k]):
                continue
            for i in range(h):
                if b[i]:
                    out[i] = out[i] + y[k] * b[i]
        return out


@dataclass
class Eigensystem:
    """One simultaneous eigenvector (or an unsplit block) of a family of matrices."""

    eigenvalues: dict[str, AlgebraicScalar | None]
    vector: list | None
    multiplicity: int = 1
    block_polys: dict[str, list[tuple[list[int], int]]] = dc_field(default_factory=dict)
    block_basis: list[list[Fraction]] | None = None
    intervals: dict[str, list[tuple[Fraction, Fraction]]] = dc_field(default_factory=dict)

    @property
    def is_block(self) -> bool:
        return self.vector is None

    def numeric(self, key: str) -> float:
        ev = self.eigenvalues.get(key)
        if ev is not None:
            return float(ev)
        ivs = self.intervals.get(key) or []
        return max(float(hi) for _, hi in ivs) if ivs else float("nan")

    def to_json(self) -> dict:
        out = {"multiplicity": self.multiplicity,
               "eigenvalues": {k: (v.to_json() if v is not None else None) for k, v in self.eigenvalues.items()}}
        if self.vector is not None:
            out["vector"] = [AlgebraicScalar.coerce(x).to_json() for x in self.vector]
        if self.block_polys:
            out["residual_factors"] = {k: [[list(map(int, f)), e] for f, e in v] for k, v in self.block_polys.items()}
            out["isolating_intervals"] = {k: [[_frac_str(a), _frac_str(b)] for a, b in v]
                                          for k, v in self.intervals.items()}
        return out


@dataclass
class Spectrum:
    keys: list[str]
    systems: list[Eigensystem]

    def eigenvalues(self, key: str) -> list:
        out = []
        for s in self.systems:
            if s.eigenvalues.get(key) is not None:
                out.extend([s.eigenvalues[key]] * s.multiplicity)
        return out

    def vectors(self) -> list[list]:
        return [s.vector for s in self.systems if s.vector is not None]

    def to_json(self) -> dict:
        return {"keys": self.keys, "systems": [s.to_json() for s in self.systems]}


def _split(space: Subspace, M: list[list[int]]) -> list[tuple[Subspace, list[int], int]]:
    """Decompose the space along the irreducible factors of M restricted to it."""
    R = space.restrict(M)
    cp = char_poly_frac(R)
    pieces = []
    for f, e in factor_poly(cp):
        K = poly_of_matrix(f, R)
        ker = nullspace(K)
        if not ker:
            raise ArithmeticError("empty eigenspace for a factor of the characteristic polynomial")
        if len(ker) != (len(f) - 1) * e:
            raise ArithmeticError("matrix is not semisimple on this subspace")
        vecs = [space.lift(y) for y in ker]
        pieces.append((Subspace.from_vectors(vecs), f, e))
    return pieces


def char_poly_frac(R: list[list[Fraction]]) -> list[int]:
    return _as_int_poly(berkowitz(R))


def eigen_decompose(matrices: dict[str, np.ndarray] | Sequence[np.ndarray],
                    check_commute: bool = True) -> Spectrum:
    """Common eigen-decomposition of commuting integer matrices.

    Pieces are split by the first matrix, then each piece that is still
    reducible is split further by the next matrices.
    """
    if not isinstance(matrices, dict):
        matrices = {str(i): m for i, m in enumerate(matrices)}
    keys = list(matrices)
    Ms = {k: _int_matrix(v) for k, v in matrices.items()}
    h = len(next(iter(Ms.values())))
    if check_commute:
        for a, b in itertools.combinations(keys, 2):
            A, B = np.array(Ms[a], dtype=object), np.array(Ms[b], dtype=object)
            if not np.array_equal(A.dot(B), B.dot(A)):
                raise ValueError(f"matrices {a} and {b} do not commute")
    whole = Subspace([[Fraction(int(i == j)) for i in range(h)] for j in range(h)], list(range(h)))
    leaves: list[tuple[Subspace, dict[str, tuple[list[int], int]]]] = []

    def recurse(space: Subspace, level: int, known: dict):
        if level == len(keys):
            leaves.append((space, known))
            return
        k = keys[level]
        pieces = _split(space, Ms[k])
        for sub, f, e in pieces:
            kn = dict(known)
            kn[k] = (f, e)
            if sub.dim == len(f) - 1 or level + 1 == len(keys):
                # irreducible action (or nothing left to split by)
                for k2 in keys[level + 1:]:
                    cp = char_poly_frac(sub.restrict(Ms[k2]))
                    kn[k2] = factor_poly(cp)[0] if len(factor_poly(cp)) == 1 else (cp, 0)
                leaves.append((sub, kn))
            else:
                recurse(sub, level + 1, kn)

    recurse(whole, 0, {})
    systems: list[Eigensystem] = []
    for space, known in leaves:
        systems.extend(_leaf_systems(space, known, Ms, keys))
    ref = keys[0]
    systems.sort(key=lambda s: (-s.numeric(ref), s.is_block))
    spec = Spectrum(keys, systems)
    verify_spectrum(spec, Ms)
    return spec


def _leaf_systems(space: Subspace, known, Ms, keys) -> list[Eigensystem]:
    r = space.dim
    restricted = {k: space.restrict(Ms[k]) for k in keys}
    # find a matrix acting irreducibly with squarefree char poly of degree r
    gen = None
    for k in keys:
        cp = char_poly_frac(restricted[k])
        fac = factor_poly(cp)
        if len(fac) == 1 and fac[0][1] == 1 and len(fac[0][0]) - 1 == r:
            gen = (k, fac[0][0])
            break
    if r == 1:
        y = [Fraction(1)]
        v = space.lift(y)
        evs = {k: AlgebraicScalar(restricted[k][0][0]) for k in keys}
        return [Eigensystem(evs, _primitive(v))]
    if r == 2 and gen is not None:
        k0, f = gen
        R = restricted[k0]
        out = []
        for lam in quadratic_roots(-f[1], f[2]):
            p, q = R[0][0], R[0][1]
            y = [AlgebraicScalar(q), lam - p]
            if y[0].is_zero():
                y = [lam - R[1][1], AlgebraicScalar(R[1][0])]
            v = space.lift(y)
            evs = {}
            for k in keys:
                Rk = restricted[k]
                col = [Rk[0][0] * y[0] + Rk[0][1] * y[1], Rk[1][0] * y[0] + Rk[1][1] * y[1]]
                i = 0 if not y[0].is_zero() else 1
                evs[k] = col[i] / y[i]
            out.append(Eigensystem(evs, v))
        return out
    if gen is None and all(len(known[k][0]) == 2 for k in keys if known[k][1] != 0):
        # a repeated rational system: eigenvalue known, eigenspace of dimension r
        evs = {k: AlgebraicScalar(-known[k][0][1]) for k in keys}
        return [Eigensystem(evs, None, multiplicity=r, block_basis=space.basis,
                            block_polys={k: [known[k]] for k in keys})]
    polys = {}
    ivs = {}
    for k in keys:
        cp = char_poly_frac(restricted[k])
        polys[k] = factor_poly(cp)
        ivs[k] = [iv for f, _ in polys[k] for iv in isolating_intervals(f)]
    return [Eigensystem({k: None for k in keys}, None, multiplicity=r, block_polys=polys,
                        block_basis=space.basis, intervals=ivs)]


def _primitive(v: list[Fraction]) -> list[Fraction]:
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    return [Fraction(x // g) for x in ints] if g else [Fraction(x) for x in ints]


def verify_spectrum(spec: Spectrum, Ms: dict[str, list[list[int]]]) -> None:
    """Exact checks: every eigenpair, every block annihilated by its factors."""
    total = 0
    for s in spec.systems:
        total += s.multiplicity if s.vector is None else 1
        if s.vector is not None:
            for k, M in Ms.items():
                lam = s.eigenvalues[k]
                Mv = [sum((AlgebraicScalar.coerce(s.vector[j]) * M[i][j] for j in range(len(M)) if M[i][j]),
                          AlgebraicScalar(0)) for i in range(len(M))]
                for i in range(len(M)):
                    if not (Mv[i] - lam * s.vector[i]).is_zero():
                        raise ArithmeticError(f"eigenpair check failed for {k}")
        else:
            for k, M in Ms.items():
                prod = [1]
                for f, e in s.block_polys[k]:
                    for _ in range(max(e, 1)):
                        prod = poly_mul(prod, f)
                for b in s.block_basis:
                    # evaluate prod(M) b via Horner on vectors
                    acc = [Fraction(0)] * len(b)
                    for c in prod:
                        acc = mat_vec(M, acc)
                        acc = [a + c * bb for a, bb in zip(acc, b)]
                    if any(acc):
                        raise ArithmeticError(f"block not annihilated by its factor polynomial ({k})")
    h = len(next(iter(Ms.values())))
    if total != h:
        raise ArithmeticError(f"multiplicities sum to {total}, expected {h}")


def trace_and_det_check(spec: Spectrum, M: np.ndarray, key: str) -> bool:
    """Sum and product of all eigenvalues (blocks via their factor coefficients) equal trace and det."""
    vals = []
    for s in spec.systems:
        ev = s.eigenvalues.get(key)
        if ev is not None:
            vals.extend([ev] * (s.multiplicity if s.vector is None else 1))
        else:
            for f, e in s.block_polys[key]:
                vals.append(("poly", f, e))
    tr_total = Fraction(0)
    prod = MultiQuad({1: Fraction(1)})
    for v in vals:
        if isinstance(v, tuple):
            _, f, e = v
            tr_total += -Fraction(f[1]) * e
            prod = prod.scale(Fraction((-1) ** (len(f) - 1) * f[-1]) ** e)
        else:
            tr_total += v.a
            prod = prod * MultiQuad.of(v)
    Mi = _int_matrix(M)
    true_tr = sum(Mi[i][i] for i in range(len(Mi)))
    true_det = int(sympy.Matrix(Mi).det())
    return tr_total == true_tr and set(prod.c) <= {1} and prod.c.get(1, Fraction(0)) == true_det


# ---------------------------------------------------------------------------
# products of eigenvectors


def _mq(x) -> MultiQuad:
    return x if isinstance(x, MultiQuad) else MultiQuad.of(x)


def inner_product(v: Sequence, w: Sequence, auts: Sequence[int]):
    """(v, w) = sum v_t w_t / |Aut(L_t)|  (bilinear, no conjugation)."""
    try:
        return sum((AlgebraicScalar.coerce(a) * AlgebraicScalar.coerce(b) * Fraction(1, n)
                    for a, b, n in zip(v, w, auts)), AlgebraicScalar(0))
    except FieldMismatch:
        acc = MultiQuad()
        for a, b, n in zip(v, w, auts):
            acc = acc + (_mq(a) * _mq(b)).scale(Fraction(1, n))
        return acc


def circ(v: Sequence, w: Sequence) -> list:
    """Coordinate-wise product in the basis of classes."""
    try:
        return [AlgebraicScalar.coerce(a) * AlgebraicScalar.coerce(b) for a, b in zip(v, w)]
    except FieldMismatch:
        return [_mq(a) * _mq(b) for a, b in zip(v, w)]


def triple(vk: Sequence, vi: Sequence, vj: Sequence, auts: Sequence[int]):
    """(v_k, v_i o v_j) = sum_t c_kt c_it c_jt / |Aut(L_t)|."""
    acc = MultiQuad()
    for a, b, c, n in zip(vk, vi, vj, auts):
        acc = acc + (_mq(a) * _mq(b) * _mq(c)).scale(Fraction(1, n))
    if set(acc.c) <= {1}:
        return AlgebraicScalar(acc.c.get(1, 0))
    keys = [d for d in acc.c if d != 1]
    if len(keys) == 1:
        return AlgebraicScalar(acc.c.get(1, 0), acc.c[keys[0]], keys[0])
    return acc


def is_nonzero(x) -> bool:
    return not x.is_zero()


def nonzero_triples(vectors: dict, auts: Sequence[int]) -> set[tuple]:
    """All unordered triples {k, i, j} (repetition allowed) with nonzero triple product."""
    names = list(vectors)
    out = set()
    for a, b, c in itertools.combinations_with_replacement(names, 3):
        if is_nonzero(triple(vectors[a], vectors[b], vectors[c], auts)):
            out.add((a, b, c))
    return out


# ---------------------------------------------------------------------------
# degrees


class DegreeContradiction(ValueError):
    pass


@dataclass
class DegreeBounds:
    lower: dict
    upper: dict

    def exact(self) -> dict:
        return {k: self.lower[k] for k in self.lower if self.upper[k] == self.lower[k]}

    def to_json(self) -> dict:
        inf = lambda x: None if x == math.inf else x
        return {str(k): {"lower": self.lower[k], "upper": inf(self.upper[k])} for k in self.lower}


def degree_inference(anchors: dict, triples: Iterable[tuple], names: Iterable | None = None,
                     cap: int | None = None) -> DegreeBounds:
    """Propagate g_k <= g_i + g_j and g_k >= g_i - g_j over nonzero triples to a fixpoint.

    A nonzero (v_k, v_i o v_j) is symmetric in k, i, j, so every ordering of a
    triple is used.  ``cap`` optionally bounds every degree from above.
    """
    triples = [tuple(t) for t in triples]
    allnames = set(anchors) | {x for t in triples for x in t} | set(names or [])
    lo = {k: 0 for k in allnames}
    hi = {k: (cap if cap is not None else math.inf) for k in allnames}
    for k, g in anchors.items():
        lo[k] = hi[k] = g
    changed = True
    while changed:
        changed = False
        for t in triples:
            for k, i, j in {(t[0], t[1], t[2]), (t[1], t[0], t[2]), (t[2], t[0], t[1])}:
                nh = hi[i] + hi[j]
                if nh < hi[k]:
                    hi[k] = nh
                    changed = True
                for a, b in ((i, j), (j, i)):
                    nl = lo[k] - hi[b]
                    if nl > lo[a]:
                        lo[a] = nl
                        changed = True
        for k in allnames:
            if lo[k] > hi[k]:
                raise DegreeContradiction(f"degree of {k}: lower {lo[k]} > upper {hi[k]}")
    return DegreeBounds(lo, hi)


# ---------------------------------------------------------------------------
# congruences


ALL_MODULI = "all"


@dataclass
class CongruenceReport:
    moduli: list[tuple[int, int, bool]] | str  # (prime, exponent, likely_spurious) or "all"
    primes_used: list[str]
    gcd: int
    via_norm: bool

    def primes(self) -> list[int]:
        return [] if self.moduli == ALL_MODULI else [p for p, _, _ in self.moduli]

    def to_json(self) -> dict:
        return {"moduli": self.moduli if self.moduli == ALL_MODULI else
                [{"prime": p, "exponent": e, "likely_spurious": s} for p, e, s in self.moduli],
                "primes_used": self.primes_used, "gcd": self.gcd, "mixed_fields_via_norm": self.via_norm}


def _min_poly(x) -> list[int]:
    if isinstance(x, (list, tuple)):
        return [int(c) for c in x]
    x = AlgebraicScalar.coerce(x)
    if x.is_rational():
        return _as_int_poly([1, -x.a])
    return _as_int_poly([1, -x.trace(), x.norm()])


def _difference_norm(a, b) -> Fraction:
    if isinstance(a, (list, tuple)) or isinstance(b, (list, tuple)):
        # block eigenvalues: the resultant is the product of all conjugate differences
        t = sympy.Symbol("t")
        fa, fb = (sympy.Poly(_min_poly(v), t) for v in (a, b))
        return Fraction(int(sympy.resultant(fa, fb)))
    return (MultiQuad.of(AlgebraicScalar.coerce(a)) - MultiQuad.of(AlgebraicScalar.coerce(b))).norm()


def system_values(sy: Eigensystem) -> dict:
    """Eigenvalue per prime, or the irreducible factor for blocks that carry a single one."""
    out = {}
    for k, v in sy.eigenvalues.items():
        if v is not None:
            out[k] = v
        elif len(sy.block_polys.get(k, [])) == 1:
            out[k] = list(sy.block_polys[k][0][0])
    return out


def congruence_scan(sys_i: dict, sys_j: dict, h: int | None = None) -> CongruenceReport:
    """Primes dividing gcd_p Nm(lambda_i(T_p) - lambda_j(T_p)) over the common primes.

    Differences are taken in a common multiquadratic field and their absolute
    norms are used; when the two systems live in different quadratic fields
    this is weaker than an ideal-theoretic congruence, which is flagged.
    A value given as an integer polynomial stands for any of its roots, and the
    resultant replaces the norm.
    Primes <= h (if given) are marked as likely spurious.
    """
    keys = [k for k in sys_i if k in sys_j and sys_i[k] is not None and sys_j[k] is not None]
    g = 0
    fields = set()
    for k in keys:
        a, b = sys_i[k], sys_j[k]
        for x in (a, b):
            if isinstance(x, (list, tuple)):
                fields.add(("poly", tuple(x)))
            elif AlgebraicScalar.coerce(x).b:
                fields.add(AlgebraicScalar.coerce(x).m)
        n = _difference_norm(a, b)
        if n.denominator != 1:
            raise ArithmeticError("eigenvalue difference is not an algebraic integer")
        g = math.gcd(g, abs(int(n)))
    if g == 0:
        return CongruenceReport(ALL_MODULI, keys, 0, len(fields) > 1)
    fac = sympy.factorint(g)
    moduli = [(int(p), int(e), h is not None and p <= h) for p, e in sorted(fac.items())]
    return CongruenceReport(moduli, keys, g, len(fields) > 1)


# ---------------------------------------------------------------------------
# spinor bipartition


def spinor_bipartition(M) -> tuple[list[int], list[int]] | None:
    """Two-colouring of the neighbour graph of M, or None when it is not bipartite."""
    A = np.asarray(M)
    h = A.shape[0]
    if any(A[i, i] != 0 for i in range(h)):
        return None
    colour = [-1] * h
    for s in range(h):
        if colour[s] >= 0:
            continue
        colour[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for w in range(h):
                if A[u, w] != 0 or A[w, u] != 0:
                    if colour[w] < 0:
                        colour[w] = 1 - colour[u]
                        stack.append(w)
                    elif colour[w] == colour[u]:
                        return None
    a = [i for i in range(h) if colour[i] == 0]
    b = [i for i in range(h) if colour[i] == 1]
    return a, b
