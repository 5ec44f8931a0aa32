"""Automorphism groups, isometry tests and fingerprints of trace lattices.

Two interchangeable engines are provided.  The default delegates to PARI's
``qfauto`` / ``qfisom`` (Plesken-Souvignier, with the second form passed as
an extra invariant form).  The native engine is a direct backtracking search
over short-vector images, used for small ranks and as an independent check.
Every witness is verified exactly in integers before it is returned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .lattice import TraceLattice, fincke_pohst, int_det

_PARI = None


def pari():
    global _PARI
    if _PARI is None:
        import cypari2
        _PARI = cypari2.Pari(size=2**28, sizemax=2**32)
        _PARI("kn_flat(M)=if(#M==0,[]~,concat(Vec(M)))")
        # streams the enumeration so memory stays flat however many vectors there are
        _PARI(
            "kn_levels(G1,G2,B)=my(M=Map(),k,c);"
            "forqfvec(v,G1,B,k=[v~*G1*v,if(G2==0,0,v~*G2*v)];"
            "if(mapisdefined(M,k,&c),mapput(M,k,c+2),mapput(M,k,2)));"
            "my(K=Mat(M));vector(#K~,i,[K[i,1][1],K[i,1][2],K[i,2]])"
        )
    return _PARI


class GuardTripped(RuntimeError):
    """A configured search limit was exceeded."""


def to_pari(a: np.ndarray):
    a = np.asarray(a)
    n, m = a.shape
    return pari().matrix(n, m, [int(v) for v in a.flatten()])


def from_pari(M) -> np.ndarray:
    n, m = int(M.nrows()), int(M.ncols())
    if n == 0 or m == 0:
        return np.zeros((n, m), dtype=np.int64)
    flat = pari()("kn_flat")(M)
    vals = np.array([int(v) for v in flat], dtype=np.int64)
    return vals.reshape(m, n).T


def _forms_pari(T: TraceLattice):
    if T.T2 is None:
        return to_pari(T.T1)
    return pari().List([to_pari(T.T1), to_pari(T.T2)]).Vec()


def lll_transform(gram: np.ndarray) -> np.ndarray:
    """Unimodular U with U^T G U LLL-reduced."""
    U = from_pari(pari().qflllgram(to_pari(gram)))
    if U.shape != gram.shape:
        raise ValueError("LLL did not return a square transform (form not definite?)")
    return U


def pari_short_vectors(gram: np.ndarray, bound: int) -> list[np.ndarray]:
    """One of each pair +-x with 0 < x^T G x <= bound."""
    res = pari().qfminim(to_pari(gram), bound)
    M = from_pari(res[2])
    return [M[:, i].copy() for i in range(M.shape[1])]


def level_counts(T: TraceLattice, bound: int) -> dict[tuple[int, int], int]:
    """Number of vectors at each (T1, T2) norm pair with T1 <= bound (counting +-x)."""
    P = pari()
    g2 = 0 if T.T2 is None else to_pari(T.T2)
    res = P("kn_levels")(to_pari(T.T1), g2, bound)
    return {(int(r[0]), int(r[1])): int(r[2]) for r in res}


# ---------------------------------------------------------------------------
# automorphism groups


@dataclass
class AutomorphismGroup:
    order: int
    generators: list[np.ndarray]  # integer matrices g with g^T T g = T for every form


def automorphism_group(T: TraceLattice, backend: str = "pari", node_limit: int = 10**7) -> AutomorphismGroup:
    if backend == "pari":
        res = pari().qfauto(_forms_pari(T))
        order = int(res[0])
        gens = [from_pari(g) for g in res[1]]
    else:
        order, gens = native_automorphisms(T, node_limit)
    for g in gens:
        for F in T.forms():
            if not np.array_equal(g.T @ F @ g, F):
                raise ArithmeticError("automorphism generator fails to preserve a form")
    return AutomorphismGroup(order, gens)


def automorphism_order(T: TraceLattice, backend: str = "pari", node_limit: int = 10**7) -> int:
    return automorphism_group(T, backend, node_limit).order


def are_isometric(Ta: TraceLattice, Tb: TraceLattice, backend: str = "pari",
                  node_limit: int = 10**7, target_init=None):
    """Return W with W^T Tb W = Ta for every form, or None if no isometry exists.

    ``target_init`` may hold a precomputed PARI ``qfisominit`` of Ta.
    """
    if Ta.dim != Tb.dim or (Ta.T2 is None) != (Tb.T2 is None):
        return None
    if backend == "pari":
        P = pari()
        a = target_init if target_init is not None else _forms_pari(Ta)
        S = P.qfisom(a, _forms_pari(Tb))
        if S == 0:
            return None
        W = from_pari(S)
    else:
        W = native_isometry(Ta, Tb, node_limit)
        if W is None:
            return None
    for Fa, Fb in zip(Ta.forms(), Tb.forms()):
        if not np.array_equal(W.T @ Fb @ W, Fa):
            raise ArithmeticError("isometry witness fails exact verification")
    return W


def isometry_init(T: TraceLattice):
    return pari().qfisominit(_forms_pari(T))


# ---------------------------------------------------------------------------
# native Plesken-Souvignier style search


class _Search:
    """Backtracking over images of the standard basis among short vectors.

    Candidates for the image of b_i are vectors v with F(v,v) = F(b_i,b_i) for
    every form F; at depth i they are filtered by F(v, img_j) = F(b_i, b_j)
    for all j < i (both orders, since T2 need not be symmetric).
    """

    def __init__(self, src: TraceLattice, dst: TraceLattice, node_limit: int):
        self.n = src.dim
        self.src_forms = [np.asarray(F, dtype=np.int64) for F in src.forms()]
        self.dst_forms = [np.asarray(F, dtype=np.int64) for F in dst.forms()]
        self.node_limit = node_limit
        self.nodes = 0
        diag = [int(src.T1[i, i]) for i in range(self.n)]
        bound = max(diag)
        half = fincke_pohst(dst.T1, bound)
        vecs = []
        for v in half:
            vecs.append(v)
            vecs.append(-v)
        V = np.array(vecs, dtype=np.int64).reshape(-1, self.n)
        self.V = V
        # per-form products: prod[f] = V @ F  (rows: vectors)
        self.VF = [V @ F for F in self.dst_forms]        # v^T F
        self.FV = [V @ F.T for F in self.dst_forms]      # (F v)^T, i.e. F(., v)
        self.norms = [np.einsum("ij,ij->i", VF, V) for VF in self.VF]
        self.cands0 = []
        for i in range(self.n):
            mask = np.ones(len(V), dtype=bool)
            for f, F in enumerate(self.src_forms):
                mask &= self.norms[f] == F[i, i]
            self.cands0.append(np.nonzero(mask)[0])

    def candidates(self, i: int, images: list[int]) -> np.ndarray:
        c = self.cands0[i]
        for j, img in enumerate(images):
            for f, F in enumerate(self.src_forms):
                # F(b_i, b_j) must equal F(v, img_j); F(b_j, b_i) must equal F(img_j, v)
                c = c[self.VF[f][c] @ self.V[img] == F[i, j]]
                if len(c) == 0:
                    return c
                c = c[self.FV[f][c] @ self.V[img] == F[j, i]]
                if len(c) == 0:
                    return c
        return c

    def extend(self, images: list[int]) -> list[int] | None:
        """Depth-first completion of a partial image list; first success."""
        i = len(images)
        if i == self.n:
            return images
        for v in self.candidates(i, images):
            self.nodes += 1
            if self.nodes > self.node_limit:
                raise GuardTripped(f"isometry search exceeded {self.node_limit} nodes")
            res = self.extend(images + [int(v)])
            if res is not None:
                return res
        return None

    def matrix(self, images: list[int]) -> np.ndarray:
        return self.V[images].T.copy()


def native_isometry(Ta: TraceLattice, Tb: TraceLattice, node_limit: int = 10**7):
    s = _Search(Ta, Tb, node_limit)
    res = s.extend([])
    if res is None:
        return None
    W = s.matrix(res)
    if abs(int_det(W.tolist())) != 1:
        raise ArithmeticError("native isometry is not unimodular")
    return W


def native_automorphisms(T: TraceLattice, node_limit: int = 10**7) -> tuple[int, list[np.ndarray]]:
    """|Aut| by orbit-stabilizer along the basis b_1, ..., b_n.

    Working from the deepest level upwards, G_i denotes the pointwise
    stabilizer of b_1..b_i.  The orbit of b_i under G_{i-1} is grown from the
    generators found so far; each candidate image outside the current orbit is
    either realised by a new generator (found by backtracking with b_1..b_{i-1}
    fixed) or shown impossible, in which case its whole orbit under the known
    subgroup is discarded.  |Aut| is the product of the orbit lengths.
    """
    s = _Search(T, T, node_limit)
    n = s.n
    index = {tuple(v): k for k, v in enumerate(s.V)}
    gens: list[np.ndarray] = []
    order = 1
    identity_images = [index[tuple(np.eye(n, dtype=np.int64)[:, i])] for i in range(n)]

    def act(g: np.ndarray, k: int) -> int:
        return index[tuple(g @ s.V[k])]

    for level in range(n - 1, -1, -1):
        fixed = identity_images[:level]
        level_gens = [g for g in gens]  # every generator found so far fixes b_1..b_level
        cands = [int(c) for c in s.candidates(level, fixed)]
        start = identity_images[level]
        orbit = {start}
        frontier = [start]

        def grow(frontier_list):
            while frontier_list:
                k = frontier_list.pop()
                for g in level_gens:
                    k2 = act(g, k)
                    if k2 not in orbit:
                        orbit.add(k2)
                        frontier_list.append(k2)

        grow(frontier)
        excluded: set[int] = set()
        for c in cands:
            if c in orbit or c in excluded:
                continue
            res = s.extend(fixed + [c])
            if res is None:
                bad = {c}
                stack = [c]
                while stack:
                    k = stack.pop()
                    for g in level_gens:
                        k2 = act(g, k)
                        if k2 not in bad:
                            bad.add(k2)
                            stack.append(k2)
                excluded |= bad
                continue
            g = s.matrix(res)
            gens.append(g)
            level_gens.append(g)
            orbit.add(c)
            grow([c] + list(orbit))
        order *= len(orbit)
    return order, gens


# ---------------------------------------------------------------------------
# fingerprints


@dataclass(frozen=True)
class Fingerprint:
    det: int
    levels: tuple  # ((T1 norm, T2 norm, count), ...)
    pair_profile: tuple  # ((T1 product, T2 product, count), ...) over norm-2 vectors

    def key(self) -> tuple:
        return (self.det, self.levels, self.pair_profile)

    def to_json(self) -> dict:
        return {"det": self.det, "levels": [list(x) for x in self.levels],
                "pair_profile": [list(x) for x in self.pair_profile]}

    @staticmethod
    def from_json(obj: dict) -> "Fingerprint":
        return Fingerprint(int(obj["det"]), tuple(tuple(x) for x in obj["levels"]),
                           tuple(tuple(x) for x in obj["pair_profile"]))


def default_levels(dim: int) -> int:
    """Largest T1 norm counted in fingerprints: 6 up to rank 8, 4 beyond."""
    return 6 if dim <= 8 else 4


def fingerprint(T: TraceLattice, max_level: int | None = None, backend: str = "pari") -> Fingerprint:
    det = int_det(T.T1.tolist())
    if max_level is None:
        max_level = default_levels(T.dim)
    if backend == "pari":
        counts = level_counts(T, max_level)
        roots = pari_short_vectors(T.T1, 2)
    else:
        counts = {}
        for v in fincke_pohst(T.T1, max_level):
            key = T.o_norm(v)
            counts[key] = counts.get(key, 0) + 2
        roots = [v for v in fincke_pohst(T.T1, 2)]
    levels = tuple(sorted((a, b, c) for (a, b), c in counts.items()))
    profile: tuple = ()
    if roots:
        V = np.array(roots + [-r for r in roots], dtype=np.int64)
        P1 = V @ T.T1 @ V.T
        P2 = V @ T.T2 @ V.T if T.T2 is not None else np.zeros_like(P1)
        # ordered pairs: T2 is not symmetric for Hermitian lattices
        off = ~np.eye(len(V), dtype=bool)
        pairs = np.stack([P1[off], P2[off]], axis=1)
        vals, cnt = np.unique(pairs, axis=0, return_counts=True)
        profile = tuple((int(a), int(b), int(c)) for (a, b), c in zip(vals, cnt))
    return Fingerprint(det, levels, profile)


def permutation_group_order_from_reflections(gram: np.ndarray) -> int:
    """|W| for the group generated by reflections in the basis roots, acting on all norm-2 vectors.

    Independent oracle (sympy Schreier-Sims); for E8 this is the full
    automorphism group.
    """
    from sympy.combinatorics import Permutation, PermutationGroup
    half = fincke_pohst(gram, 2)
    roots = [tuple(v) for v in half] + [tuple(-v) for v in half]
    idx = {r: k for k, r in enumerate(roots)}
    n = gram.shape[0]
    perms = []
    for i in range(n):
        e = np.zeros(n, dtype=np.int64)
        e[i] = 1
        img = []
        for r in roots:
            v = np.array(r, dtype=np.int64)
            w = v - int(e @ gram @ v) * e  # reflection in e_i (norm 2)
            img.append(idx[tuple(w)])
        perms.append(Permutation(img))
    return int(PermutationGroup(perms).order())


def all_isometries_bruteforce(T: TraceLattice, coeff_bound: int = 1) -> int:
    """Count automorphisms among integer matrices with entries in [-b, b] (tiny ranks only)."""
    n = T.dim
    rng = range(-coeff_bound, coeff_bound + 1)
    count = 0
    for entries in itertools.product(rng, repeat=n * n):
        g = np.array(entries, dtype=np.int64).reshape(n, n)
        if all(np.array_equal(g.T @ F @ g, F) for F in T.forms()):
            count += 1
    return count
