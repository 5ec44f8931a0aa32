"""Kneser neighbours, genus enumeration and Hecke matrices.

Residue-field points are stored as int64 codes: a vector (x_1..x_N) over
F_q (each x_i itself a residue code in [0, q)) is encoded big-endian as
sum x_i q^(N-1-i).  Projective points are normalised so that their first
nonzero coordinate is 1.

Neighbour construction.  Let x be a lift of an isotropic point and write
a_i = <e_i, x> (Hermitian: <e_i, x> with the form conjugate-linear in the
second slot).  Pick j with a_j a unit at p.  The sublattice
L_x = {y : <y, x> in p} has basis b_i = e_i - c_i e_j (i != j, c_i = a_i/a_j
mod p) and b_j = pi e_j.  After adjusting x inside x + pi O e_j so that
<x,x> lies in 2 p^2 (Hermitian: in 4Z, which leaves two choices), write the
adjusted vector in the basis b; a coordinate u_k is a unit, and
L' = O w + sum_{i != k} O b_i with w = (b_k + sum_{i != k} r_i b_i)/pi,
r_i = u_i/u_k mod p.  Then [L : L cap L'] = [L' : L cap L'] = Nm p.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .isometry import (AutomorphismGroup, Fingerprint, GuardTripped, are_isometric,
                       automorphism_group, fingerprint, from_pari, isometry_init, to_pari)
from .lattice import OLattice, TraceLattice, determinant
from .numbers import FieldElem, PrimeIdeal, ResidueField

PAIR_TABLE_LIMIT = 4096
CHUNK = 1 << 21


# ---------------------------------------------------------------------------
# residue forms


class ResidueForm:
    """The quadratic form <x,x>/2 (or Hermitian <x,x>) reduced modulo p.

    Stored as an upper-triangular coefficient matrix of residue codes: the
    value at x is sum_i C_ii x_i^2 + sum_{i<j} C_ij x_i x_j in the orthogonal
    case and sum_i C_ii x_i conj(x_i) + sum_{i<j} Tr(x_i C_ij conj(x_j)) in the
    Hermitian case, conj being the Frobenius of F_{p^2}.
    """

    def __init__(self, L: OLattice, prime: PrimeIdeal):
        self.rf: ResidueField = prime.residue_field()
        self.q = self.rf.q
        self.n = L.rank
        self.hermitian = L.form_kind == "herm"
        if self.hermitian and prime.kind != "inert":
            raise NotImplementedError("Hermitian neighbours are implemented at inert primes only")
        C = np.zeros((self.n, self.n), dtype=np.int64)
        half = Fraction(1, 2)
        for i in range(self.n):
            d = L.gram[i][i] if self.hermitian else L.gram[i][i] * half
            C[i, i] = self.rf.reduce(d)
            for j in range(i + 1, self.n):
                C[i, j] = self.rf.reduce(L.gram[i][j])
        self.C = C

    def _tr(self, z):
        return self.rf.add[z, self.rf.frob[z]]

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        add, mul, frob = self.rf.add, self.rf.mul, self.rf.frob
        X = np.asarray(X, dtype=np.int64)
        val = np.zeros(X.shape[0], dtype=np.int64)
        for i in range(X.shape[1]):
            xi = X[:, i]
            if self.C[i, i]:
                sq = mul[xi, frob[xi]] if self.hermitian else mul[xi, xi]
                val = add[val, mul[self.C[i, i], sq]]
            for j in range(i + 1, X.shape[1]):
                c = self.C[i, j]
                if not c:
                    continue
                if self.hermitian:
                    val = add[val, self._tr(mul[mul[xi, c], frob[X[:, j]]])]
                else:
                    val = add[val, mul[mul[xi, c], X[:, j]]]
        return val

    def restricted(self, idx: list[int]) -> "ResidueForm":
        out = object.__new__(ResidueForm)
        out.rf, out.q, out.hermitian = self.rf, self.q, self.hermitian
        out.n = len(idx)
        out.C = self.C[np.ix_(idx, idx)]
        return out


def _digits(codes: np.ndarray, q: int, n: int) -> np.ndarray:
    out = np.empty((len(codes), n), dtype=np.int64)
    c = np.asarray(codes, dtype=np.int64).copy()
    for i in range(n - 1, -1, -1):
        out[:, i] = c % q
        c //= q
    return out


def _encode(X: np.ndarray, q: int) -> np.ndarray:
    n = X.shape[1]
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return X.astype(np.int64) @ powers


def _normalised_block(q: int, length: int, lead: int) -> np.ndarray:
    """All vectors of the given length whose first nonzero entry is a 1 at ``lead``."""
    free = length - lead - 1
    tail = _digits(np.arange(q ** free, dtype=np.int64), q, free) if free else np.zeros((1, 0), np.int64)
    out = np.zeros((tail.shape[0], length), dtype=np.int64)
    out[:, lead] = 1
    out[:, lead + 1:] = tail
    return out


def isotropic_points(form: ResidueForm) -> np.ndarray:
    """Sorted codes of all normalised isotropic points of the residue form.

    The coordinates are split into a head and a tail of length k with
    q^k <= PAIR_TABLE_LIMIT.  For a fixed head u the value on (u, w) is
    Q(u) + Q(w) + B(c(u), w), where c(u) collects the cross coefficients; the
    last term is a table lookup indexed by (code of c(u), code of w).
    """
    q, n, rf = form.q, form.n, form.rf
    k = 1
    while k + 1 <= n - 1 and q ** (k + 1) <= PAIR_TABLE_LIMIT:
        k += 1
    if n == 1:
        k = 1
    h = n - k
    add, mul, frob = rf.add, rf.mul, rf.frob
    W = _digits(np.arange(q ** k, dtype=np.int64), q, k)
    tail_idx = list(range(h, n))
    head_idx = list(range(h))
    Qw = form.restricted(tail_idx).evaluate(W)
    # pairing table B[c, w] = sum_j c_j w_j  (Hermitian: sum_j Tr(c_j conj(w_j)))
    B = np.zeros((q ** k, q ** k), dtype=np.int16)
    for j in range(k):
        cj = W[:, j][:, None]
        wj = (frob[W[:, j]] if form.hermitian else W[:, j])[None, :]
        t = mul[cj, wj]
        if form.hermitian:
            t = add[t, frob[t]]
        B = add[B, t].astype(np.int16)
    out = []
    # head zero: normalised tail points
    nz = W.any(axis=1)
    lead_vals = W[np.arange(len(W)), np.argmax(W != 0, axis=1)]
    norm_tail = nz & (lead_vals == 1)
    iso_tail = norm_tail & (Qw == 0)
    out.append(np.nonzero(iso_tail)[0].astype(np.int64))
    if h:
        head_form = form.restricted(head_idx)
        Chead = form.C[np.ix_(head_idx, tail_idx)]
        powk = q ** np.arange(k - 1, -1, -1, dtype=np.int64)
        step = max(1, CHUNK // (q ** k))
        for lead in range(h):
            U_all = _normalised_block(q, h, lead)
            for s in range(0, len(U_all), step):
                U = U_all[s:s + step]
                Qu = head_form.evaluate(U)
                cu = np.zeros((len(U), k), dtype=np.int64)
                for j in range(k):
                    acc = np.zeros(len(U), dtype=np.int64)
                    for i in range(h):
                        if Chead[i, j]:
                            acc = add[acc, mul[U[:, i], Chead[i, j]]]
                    cu[:, j] = acc
                ccode = cu @ powk
                val = add[add[Qu[:, None], Qw[None, :]], B[ccode].astype(np.int64)]
                ui, wi = np.nonzero(val == 0)
                hcode = _encode(U, q)
                out.append(hcode[ui] * (q ** k) + wi)
    pts = np.concatenate(out) if out else np.zeros(0, dtype=np.int64)
    pts.sort()
    return pts


def isotropic_lines(L: OLattice, prime: PrimeIdeal):
    """Iterate over normalised isotropic points as tuples of residue codes."""
    form = ResidueForm(L, prime)
    pts = isotropic_points(form)
    for row in _digits(pts, form.q, form.n):
        yield tuple(int(v) for v in row)


def isotropic_count_formula(n_half: int, q: int, split: bool = True) -> int:
    """Isotropic lines of a nondegenerate quadratic space of dimension 2n over F_q."""
    n = n_half
    if split:
        return (q ** (n - 1) + 1) * (q ** n - 1) // (q - 1)
    return (q ** (n - 1) - 1) * (q ** n + 1) // (q - 1)


def hermitian_isotropic_count(N: int, p: int) -> int:
    """Isotropic lines of a nondegenerate Hermitian space of dimension N over F_{p^2}."""
    return (p ** N - (-1) ** N) * (p ** (N - 1) - (-1) ** (N - 1)) // (p * p - 1)


# ---------------------------------------------------------------------------
# neighbour construction


def _lift_vector(rf: ResidueField, codes) -> list[FieldElem]:
    return [rf.lift(int(c)) for c in codes]


def _gram_apply(L: OLattice, x: list[FieldElem]) -> list[FieldElem]:
    """a_i = <e_i, x>."""
    n = L.rank
    xs = [v.conj() for v in x] if L.form_kind == "herm" else x
    out = []
    for i in range(n):
        s = L.field.zero
        row = L.gram[i]
        for k in range(n):
            if not row[k].is_zero() and not xs[k].is_zero():
                s = s + row[k] * xs[k]
        out.append(s)
    return out


def _inner(L: OLattice, x: list[FieldElem], y: list[FieldElem]) -> FieldElem:
    a = _gram_apply(L, y)
    s = L.field.zero
    for xi, ai in zip(x, a):
        s = s + xi * ai
    return s


def _first_unit(rf: ResidueField, vals: list[FieldElem]) -> int:
    for i, v in enumerate(vals):
        if rf.reduce(v) != 0:
            return i
    raise ArithmeticError("no unit coordinate (point not primitive, or form degenerate)")


def _neighbour_from_lift(L: OLattice, prime: PrimeIdeal, x: list[FieldElem], j: int,
                         cs: list[FieldElem]) -> OLattice:
    """L' from an adjusted lift x (isotropic to the required depth) given the L_x data."""
    rf = prime.residue_field()
    F = L.field
    pi = prime.generator
    n = L.rank
    inv_pi = pi.inverse()
    u = list(x)
    s = x[j]
    for i in range(n):
        if i != j:
            s = s + x[i] * cs[i]
    u[j] = s * inv_pi
    if not u[j].is_integral():
        raise ArithmeticError("lift is not in L_x")
    k = _first_unit(rf, u)
    uk_inv = rf.inv[rf.reduce(u[k])]
    rs = [rf.lift(int(rf.mul[rf.reduce(u[i]), uk_inv])) if i != k else F.one for i in range(n)]
    # basis b of L_x in e-coordinates
    b = []
    for i in range(n):
        row = [F.zero] * n
        if i == j:
            row[j] = pi
        else:
            row[i] = F.one
            row[j] = -cs[i]
        b.append(row)
    w = [F.zero] * n
    for i in range(n):
        if rs[i].is_zero():
            continue
        for t in range(n):
            if not b[i][t].is_zero():
                w[t] = w[t] + rs[i] * b[i][t]
    w = [v * inv_pi for v in w]
    rows = [w if i == k else b[i] for i in range(n)]
    return L.change_basis(rows)


def kneser_neighbour(L: OLattice, prime: PrimeIdeal, point) -> OLattice:
    """The p-neighbour of an even unimodular lattice attached to an isotropic point."""
    if L.form_kind == "herm":
        raise ValueError("use hermitian_neighbours for Hermitian lattices")
    rf = prime.residue_field()
    pi = prime.generator
    x = _lift_vector(rf, point)
    a = _gram_apply(L, x)
    j = _first_unit(rf, a)
    aj_inv = rf.inv[rf.reduce(a[j])]
    cs = [rf.lift(int(rf.mul[rf.reduce(a[i]), aj_inv])) for i in range(L.rank)]
    qx = _inner(L, x, x) * Fraction(1, 2)
    t = qx / pi
    if not t.is_integral():
        raise ArithmeticError("point is not isotropic")
    c = rf.lift(int(rf.mul[rf.neg[rf.reduce(t)], aj_inv]))
    x = list(x)
    x[j] = x[j] + pi * c
    if not (_inner(L, x, x) * Fraction(1, 2) / (pi * pi)).is_integral():
        raise AssertionError("lift adjustment failed")
    return _neighbour_from_lift(L, prime, x, j, cs)


def hermitian_neighbours(L: OLattice, prime: PrimeIdeal, point) -> list[OLattice]:
    """The p neighbours of a Hermitian lattice at an inert prime p attached to one isotropic line."""
    if L.form_kind != "herm":
        raise ValueError("not a Hermitian lattice")
    if prime.kind != "inert":
        raise NotImplementedError("Hermitian neighbours are implemented at inert primes only")
    rf = prime.residue_field()
    p = prime.p
    x0 = _lift_vector(rf, point)
    a = _gram_apply(L, x0)
    j = _first_unit(rf, a)
    aj_inv = rf.inv[rf.reduce(a[j])]
    cs = [rf.lift(int(rf.mul[rf.reduce(a[i]), aj_inv])) for i in range(L.rank)]
    out = []
    for code in range(rf.q):
        c = rf.lift(code)
        x = list(x0)
        x[j] = x[j] + p * c
        nx = _inner(L, x, x)
        if not nx.is_rational() or nx.x.denominator != 1:
            raise ArithmeticError("Hermitian norm not an integer")
        if nx.x % (p * p) == 0:
            out.append(_neighbour_from_lift(L, prime, x, j, cs))
    if len(out) != p:
        raise AssertionError(f"expected {p} admissible lifts, found {len(out)}")
    return out


def neighbours_of_point(L: OLattice, prime: PrimeIdeal, point) -> list[OLattice]:
    if L.form_kind == "herm":
        return hermitian_neighbours(L, prime, point)
    return [kneser_neighbour(L, prime, point)]


# ---------------------------------------------------------------------------
# basis reduction over O


def reduce_lattice(L: OLattice) -> OLattice:
    """A lattice isometric to L with a short O-basis, when one is easy to find.

    The LLL-reduced Z-basis of the trace form gives short O-vectors; the first
    N of them that are O-independent are used when they generate L (their
    transition matrix has unit determinant).  Otherwise L is returned as is.
    """
    T = L.trace_lattice()
    from .isometry import lll_transform
    U = lll_transform(T.T1)
    n = L.rank
    F = L.field
    if L.is_rational:
        rows = [[F(int(U[i, c])) for i in range(n)] for c in range(n)]
        return L.change_basis(rows)
    cols = [[F(int(U[i, c]), int(U[n + i, c])) for i in range(n)] for c in range(U.shape[1])]
    picked: list[list[FieldElem]] = []
    echelon: list[tuple[int, list[FieldElem]]] = []
    for v in cols:
        r = list(v)
        for piv, e in echelon:
            if not r[piv].is_zero():
                f = r[piv] / e[piv]
                r = [ri - f * ei for ri, ei in zip(r, e)]
        nz = next((i for i, e in enumerate(r) if not e.is_zero()), None)
        if nz is None:
            continue
        echelon.append((nz, r))
        picked.append(v)
        if len(picked) == n:
            break
    if len(picked) == n and determinant(picked).is_unit():
        return L.change_basis(picked)
    return L


# ---------------------------------------------------------------------------
# orbits of Aut(L) on isotropic points


def o_linear_automorphisms(L: OLattice, T: TraceLattice, aut: AutomorphismGroup) -> list[list[list[FieldElem]]]:
    """Generators of Aut(L) as N x N matrices over O acting on column coordinates."""
    basis = T.basis
    Binv = from_pari(to_pari(basis) ** -1)
    n = L.rank
    F = L.field
    out = []
    for g in aut.generators:
        gs = basis @ g @ Binv
        if L.is_rational:
            out.append([[F(int(gs[i, j])) for j in range(n)] for i in range(n)])
        else:
            out.append([[F(int(gs[i, j]), int(gs[n + i, j])) for j in range(n)] for i in range(n)])
    return out


def _apply_mod(rf: ResidueField, A: np.ndarray, X: np.ndarray) -> np.ndarray:
    add, mul = rf.add, rf.mul
    n = X.shape[1]
    Y = np.zeros_like(X)
    for i in range(n):
        acc = np.zeros(X.shape[0], dtype=np.int64)
        for j in range(n):
            if A[i, j]:
                acc = add[acc, mul[A[i, j], X[:, j]]]
        Y[:, i] = acc
    return Y


def _normalise(rf: ResidueField, Y: np.ndarray) -> np.ndarray:
    lead_pos = np.argmax(Y != 0, axis=1)
    lead = Y[np.arange(len(Y)), lead_pos]
    inv = rf.inv[lead]
    return rf.mul[inv[:, None], Y]


def line_orbits(points: np.ndarray, gens_mod: list[np.ndarray], rf: ResidueField, n: int):
    """Orbit representatives (indices into points) and orbit sizes."""
    m = len(points)
    if m == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    rows, cols = [], []
    q = rf.q
    for A in gens_mod:
        perm = np.empty(m, dtype=np.int64)
        for s in range(0, m, CHUNK):
            X = _digits(points[s:s + CHUNK], q, n)
            Y = _normalise(rf, _apply_mod(rf, A, X))
            codes = _encode(Y, q)
            pos = np.searchsorted(points, codes)
            if np.any(pos >= m) or np.any(points[np.minimum(pos, m - 1)] != codes):
                raise ArithmeticError("automorphism does not preserve the isotropic points")
            perm[s:s + CHUNK] = pos
        rows.append(np.arange(m, dtype=np.int64))
        cols.append(perm)
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(m, m))
        _, labels = connected_components(graph, directed=True, connection="weak")
    else:
        labels = np.arange(m)
    order = np.argsort(labels, kind="stable")
    first = np.ones(m, dtype=bool)
    first[1:] = labels[order][1:] != labels[order][:-1]
    reps = order[first]
    sizes = np.bincount(labels)[labels[reps]]
    idx = np.argsort(reps)
    return reps[idx], sizes[idx]


# ---------------------------------------------------------------------------
# genus ledger


@dataclass
class GenusClass:
    lattice: OLattice
    trace: TraceLattice
    aut: AutomorphismGroup
    fingerprint: Fingerprint
    discovery: int
    _init: object = None

    @property
    def aut_order(self) -> int:
        return self.aut.order

    def isometry_data(self):
        if self._init is None:
            self._init = isometry_init(self.trace)
        return self._init


def quick_key(T: TraceLattice) -> tuple:
    """Cheap invariant used to shortlist classes before an isometry test."""
    return fingerprint(T, max_level=2).key()


def make_class(L: OLattice, discovery: int) -> GenusClass:
    T = L.trace_lattice().reduced()
    aut = automorphism_group(T)
    return GenusClass(L, T, aut, fingerprint(T), discovery)


@dataclass
class GenusLedger:
    seed: OLattice
    primes: list[PrimeIdeal]
    classes: list[GenusClass]
    hecke: dict[str, np.ndarray] = dc_field(default_factory=dict)
    partial_rows: dict[str, dict[int, list[int]]] = dc_field(default_factory=dict)
    _quick: dict = dc_field(default_factory=dict)

    @property
    def h(self) -> int:
        return len(self.classes)

    @property
    def aut_orders(self) -> list[int]:
        return [c.aut_order for c in self.classes]

    def mass(self) -> Fraction:
        return sum((Fraction(1, c.aut_order) for c in self.classes), Fraction(0))

    def digest(self) -> str:
        return ledger_digest(self.seed, self.primes)

    def quick_keys(self):
        if len(self._quick) != len(self.classes):
            self._quick = {i: quick_key(c.trace) for i, c in enumerate(self.classes)}
        return self._quick

    def classify(self, L: OLattice, T: TraceLattice | None = None, key=None) -> int | None:
        """Index of the class isometric to L, or None."""
        if T is None:
            T = L.trace_lattice().reduced()
        if key is None:
            key = quick_key(T)
        for i, k in self.quick_keys().items():
            if k != key:
                continue
            c = self.classes[i]
            if are_isometric(c.trace, T, target_init=c.isometry_data()) is not None:
                return i
        return None

    def to_json(self) -> dict:
        return {
            "seed": self.seed.to_json(),
            "primes": [p.to_json() for p in self.primes],
            "digest": self.digest(),
            "classes": [{"lattice": c.lattice.to_json(), "aut_order": c.aut_order,
                         "fingerprint": c.fingerprint.to_json()} for c in self.classes],
            "hecke": {k: v.tolist() for k, v in self.hecke.items()},
            "partial_rows": {k: {str(i): r for i, r in v.items()} for k, v in self.partial_rows.items()},
        }

    @staticmethod
    def from_json(obj: dict) -> "GenusLedger":
        seed_l = OLattice.from_json(obj["seed"])
        primes = [PrimeIdeal.from_json(p) for p in obj["primes"]]
        classes = []
        for i, c in enumerate(obj["classes"]):
            L = OLattice.from_json(c["lattice"])
            T = L.trace_lattice().reduced()
            aut = automorphism_group(T)
            if aut.order != int(c["aut_order"]):
                raise ValueError(f"cached aut order of class {i} does not match recomputation")
            classes.append(GenusClass(L, T, aut, Fingerprint.from_json(c["fingerprint"]), i))
        led = GenusLedger(seed_l, primes, classes)
        led.hecke = {k: np.array(v, dtype=np.int64) for k, v in obj.get("hecke", {}).items()}
        led.partial_rows = {k: {int(i): r for i, r in v.items()} for k, v in obj.get("partial_rows", {}).items()}
        return led

    def save(self, path: str):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @staticmethod
    def load(path: str) -> "GenusLedger":
        with open(path) as fh:
            return GenusLedger.from_json(json.load(fh))


def ledger_digest(seed_l: OLattice, primes: list[PrimeIdeal]) -> str:
    payload = json.dumps({"seed": seed_l.to_json(), "primes": [p.to_json() for p in primes]}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def prime_key(prime: PrimeIdeal) -> str:
    return prime.label()


# ---------------------------------------------------------------------------
# Hecke rows


def _neighbour_job(args):
    L_json, prime_json, point = args
    L = OLattice.from_json(L_json)
    prime = PrimeIdeal.from_json(prime_json)
    out = []
    for M in neighbours_of_point(L, prime, point):
        M = reduce_lattice(M)
        T = M.trace_lattice().reduced()
        out.append((M.to_json(), T.T1.tolist(), None if T.T2 is None else T.T2.tolist(),
                    T.basis.tolist(), quick_key(T)))
    return out


def _unpack(job_out, field_m):
    res = []
    for M_json, T1, T2, basis, key in job_out:
        M = OLattice.from_json(M_json)
        T = TraceLattice(np.array(T1, dtype=np.int64), None if T2 is None else np.array(T2, dtype=np.int64),
                         M.rank, M.field_m, np.array(basis, dtype=np.int64))
        res.append((M, T, key))
    return res


def orbit_data(cls: GenusClass, prime: PrimeIdeal):
    """(points, representative indices, orbit sizes, residue form) for one class."""
    L = cls.lattice
    form = ResidueForm(L, prime)
    pts = isotropic_points(form)
    rf = form.rf
    gens = o_linear_automorphisms(L, cls.trace, cls.aut)
    gens_mod = [np.array([[rf.reduce(e) for e in row] for row in A], dtype=np.int64) for A in gens]
    reps, sizes = line_orbits(pts, gens_mod, rf, L.rank)
    return pts, reps, sizes, form


def hecke_row(ledger: GenusLedger, i: int, prime: PrimeIdeal, allow_new: bool = False,
              threads: int = 1, log=None) -> list[int]:
    """Row i of T_p: counts of neighbours of class i by class (appending new classes if allowed)."""
    cls = ledger.classes[i]
    pts, reps, sizes, form = orbit_data(cls, prime)
    points = _digits(pts[reps], form.q, form.n)
    jobs = [(cls.lattice.to_json(), prime.to_json(), tuple(int(v) for v in row)) for row in points]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_neighbour_job, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        results = [_neighbour_job(j) for j in jobs]
    counts: dict[int, int] = {}
    for res, size in zip(results, sizes):
        for M, T, key in _unpack(res, cls.lattice.field_m):
            idx = ledger.classify(M, T, key)
            if idx is None:
                if not allow_new:
                    raise LookupError("neighbour matches no class: genus not closed under this prime")
                new = make_class(M, len(ledger.classes))
                ledger.classes.append(new)
                ledger._quick[len(ledger.classes) - 1] = quick_key(new.trace)
                idx = len(ledger.classes) - 1
                if log:
                    log(f"  new class {idx}: |Aut| = {new.aut_order}")
            counts[idx] = counts.get(idx, 0) + int(size)
    h = len(ledger.classes)
    if log:
        log(f"  row {i} at ({prime.label()}): {len(pts)} lines, {len(reps)} orbits")
    return [counts.get(k, 0) for k in range(h)]


def genus_enumerate(seed_l: OLattice, primes: list[PrimeIdeal], max_classes: int = 1000,
                    threads: int = 1, log=None) -> GenusLedger:
    """Breadth-first closure of the seed's class under p-neighbours for the given primes.

    The Hecke matrices at those primes come out as a by-product.  Classes are
    finally ordered by (fingerprint, discovery index).
    """
    if not (seed_l.is_even() and seed_l.is_unimodular()):
        raise ValueError("seed must be even unimodular")
    ledger = GenusLedger(seed_l, list(primes), [make_class(reduce_lattice(seed_l), 0)])
    rows: dict[str, dict[int, list[int]]] = {prime_key(p): {} for p in primes}
    i = 0
    while i < len(ledger.classes):
        for p in primes:
            rows[prime_key(p)][i] = hecke_row(ledger, i, p, allow_new=True, threads=threads, log=log)
            if len(ledger.classes) > max_classes:
                raise GuardTripped(f"class budget {max_classes} exceeded")
        i += 1
    h = len(ledger.classes)
    order = sorted(range(h), key=lambda k: (ledger.classes[k].fingerprint.key(), ledger.classes[k].discovery))
    ledger.classes = [ledger.classes[k] for k in order]
    for pos, c in enumerate(ledger.classes):
        c.discovery = pos
    ledger._quick = {}
    for p in primes:
        M = np.zeros((h, h), dtype=np.int64)
        for old_i, row in rows[prime_key(p)].items():
            row = row + [0] * (h - len(row))
            M[order.index(old_i)] = [row[order[k]] for k in range(h)]
        ledger.hecke[prime_key(p)] = M
    return ledger


def hecke_matrix(ledger: GenusLedger, prime: PrimeIdeal, threads: int = 1, log=None,
                 rows: list[int] | None = None) -> np.ndarray:
    """T_p as an integer matrix (b_ij = number of neighbours of L_i isometric to L_j).

    With ``rows`` only those rows are computed and the rest are left zero; the
    partial result is kept in ``ledger.partial_rows`` rather than ``ledger.hecke``.
    """
    key = prime_key(prime)
    if rows is None and key in ledger.hecke:
        return ledger.hecke[key]
    h = ledger.h
    todo = list(range(h)) if rows is None else list(rows)
    done = ledger.partial_rows.setdefault(key, {})
    for i in todo:
        if i not in done:
            done[i] = hecke_row(ledger, i, prime, allow_new=False, threads=threads, log=log)
    M = np.zeros((h, h), dtype=np.int64)
    for i, r in done.items():
        M[i] = r
    if rows is None:
        ledger.hecke[key] = M
        ledger.partial_rows.pop(key, None)
    return M
