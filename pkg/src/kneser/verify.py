"""Run the bundled fixtures against fresh or cached computations."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from importlib import resources

import numpy as np
import sympy

from . import arthur
from .arthur import check_infinity, predict_eigenvalue
from .cache import ensure_hecke, load_or_enumerate
from .isometry import GuardTripped
from .lattice import seed
from .neighbours import GenusLedger
from .numbers import dedekind_zeta_algebraic_part, prime_from_label, quad_field, rational_field, ray_class_character
from .spectra import (AlgebraicScalar, Spectrum, char_poly, congruence_scan, degree_inference, eigen_decompose,
                      inner_product, nonzero_triples, spinor_bipartition, system_values)
from .theta import extract_eigenvalue, theta_map

TIERS = ("fast", "moderate", "full")


def load_fixtures(path: str | None = None) -> dict:
    if path:
        with open(path) as fh:
            return json.load(fh)
    with resources.files("kneser").joinpath("data/fixtures.json").open() as fh:
        return json.load(fh)


@dataclass
class CheckResult:
    id: str
    criterion: int | None
    tier: str
    status: str  # PASS, FAIL, ERROR or SKIP
    detail: str = ""
    provenance: str = ""

    def to_json(self) -> dict:
        return self.__dict__.copy()


def _field(m):
    return rational_field() if m is None else quad_field(m)


def _scalar(x) -> AlgebraicScalar:
    return x if isinstance(x, AlgebraicScalar) else AlgebraicScalar.parse(str(x))


def _sym(x: AlgebraicScalar):
    return sympy.Rational(x.a) + sympy.Rational(x.b) * sympy.sqrt(x.m)


def expected_char_poly(values: list[str], factors=()) -> list[int]:
    """Integer coefficients (highest first) of prod (x - value) * prod factor^mult, expanded by sympy."""
    x = sympy.Symbol("x")
    expr = sympy.Integer(1)
    for v in values:
        expr *= x - _sym(_scalar(v))
    for coeffs, mult in factors:
        expr *= sympy.Poly(coeffs, x).as_expr() ** mult
    poly = sympy.Poly(sympy.expand(expr), x)
    out = [sympy.nsimplify(c) for c in poly.all_coeffs()]
    if not all(c.is_integer for c in out):
        raise ValueError("expected eigenvalues do not form a rational characteristic polynomial")
    return [int(c) for c in out]


def match_permutation(M: np.ndarray, E: np.ndarray) -> tuple[list[int] | None, list[int], int]:
    """(exact perm or None, best perm, mismatches of best) with M[p[i], p[j]] compared to E[i, j]."""
    h = len(E)
    best, best_bad = list(range(h)), None
    if h <= 7:
        candidates = itertools.permutations(range(h))
    else:
        candidates = _backtrack_permutations(M, E)
    for p in candidates:
        bad = int(np.count_nonzero(M[np.ix_(p, p)] != E))
        if best_bad is None or bad < best_bad:
            best, best_bad = list(p), bad
        if bad == 0:
            return list(p), list(p), 0
    return None, best, best_bad if best_bad is not None else h * h


def _backtrack_permutations(M, E):
    h = len(E)
    sig_m = [(M[i, i], tuple(sorted(M[i]))) for i in range(h)]
    sig_e = [(E[i, i], tuple(sorted(E[i]))) for i in range(h)]
    p: list[int] = []
    used = [False] * h

    def rec(i):
        if i == h:
            yield tuple(p)
            return
        for c in range(h):
            if used[c] or sig_m[c] != sig_e[i]:
                continue
            if any(M[c, p[j]] != E[i, j] or M[p[j], c] != E[j, i] for j in range(i)):
                continue
            used[c] = True
            p.append(c)
            yield from rec(i + 1)
            p.pop()
            used[c] = False

    return rec(0)


def _proportional(a: list, b: list) -> bool:
    a = [AlgebraicScalar.coerce(x) for x in a]
    b = [AlgebraicScalar.coerce(x) for x in b]
    return all((a[i] * b[j] - a[j] * b[i]).is_zero() for i in range(len(a)) for j in range(len(a)))


def _ms(values) -> list[str]:
    return sorted(str(_scalar(v)) for v in values)


@dataclass
class Session:
    """Holds ledgers and derived data so that each genus is computed at most once per run."""

    fixtures: dict
    threads: int = 1
    force: bool = False
    log: object = None
    ledgers: dict = dc_field(default_factory=dict)
    spectra: dict = dc_field(default_factory=dict)
    perms: dict = dc_field(default_factory=dict)

    def genus_spec(self, name: str) -> dict:
        return self.fixtures["genera"][name]

    def primes(self, name: str, labels=None) -> list:
        spec = self.genus_spec(name)
        F = _field(spec["field_m"])
        return [prime_from_label(F, l) for l in (labels or spec["primes"])]

    def ledger(self, name: str) -> GenusLedger:
        if name not in self.ledgers:
            spec = self.genus_spec(name)
            L = seed(spec["seed"], spec["field_m"] if spec["seed"] == "e8_tensor" else None, spec.get("copies", 1))
            led, path = load_or_enumerate(L, self.primes(name), force=self.force, threads=self.threads, log=self.log)
            self.ledgers[name] = (led, path)
        return self.ledgers[name][0]

    def hecke(self, name: str, label: str) -> np.ndarray:
        led = self.ledger(name)
        path = self.ledgers[name][1]
        return ensure_hecke(led, path, self.primes(name, [label])[0], threads=self.threads, log=self.log)

    def spectrum(self, name: str, labels: tuple) -> Spectrum:
        key = (name, tuple(labels))
        if key not in self.spectra:
            self.spectra[key] = eigen_decompose({l: self.hecke(name, l) for l in labels})
        return self.spectra[key]

    def system(self, name: str, label: str, value: str):
        spec = self.spectrum(name, (label,))
        target = _scalar(value)
        hits = [s for s in spec.systems if s.eigenvalues.get(label) == target]
        if len(hits) != 1 or hits[0].vector is None:
            raise LookupError(f"{len(hits)} eigenvector(s) with eigenvalue {value} at ({label})")
        return hits[0]


# ---------------------------------------------------------------------------
# individual check kinds


def _class_count(s: Session, c: dict):
    h = s.ledger(c["genus"]).h
    return h == c["expected"], f"h = {h}, mass = {s.ledger(c['genus']).mass()}"


def _aut_orders(s: Session, c: dict):
    got = s.ledger(c["genus"]).aut_orders
    return sorted(got) == sorted(c["expected"]), f"|Aut| = {got}"


def _matrix(s: Session, c: dict):
    M = s.hecke(c["genus"], c["prime"])
    E = np.array(c["expected"], dtype=np.int64)
    if M.shape != E.shape:
        return False, f"shape {M.shape} vs {E.shape}"
    exact, best, bad = match_permutation(M, E)
    s.perms[c["id"]] = exact or best
    if exact is not None:
        return True, f"permutation {exact}"
    P = M[np.ix_(best, best)]
    diffs = [f"[{i},{j}] computed {P[i, j]} expected {E[i, j]}" for i, j in zip(*np.nonzero(P != E))]
    return False, f"best permutation {best}; {bad} differing entries: " + "; ".join(diffs)


def _spectrum(s: Session, c: dict):
    M = s.hecke(c["genus"], c["prime"])
    expected_cp = expected_char_poly(c["expected"], c.get("factors", []))
    cp = char_poly(M)
    spec = s.spectrum(c["genus"], (c["prime"],))
    got, blocks = [], []
    for sy in spec.systems:
        ev = sy.eigenvalues.get(c["prime"])
        if ev is None:
            blocks.extend([tuple(f), e] for f, e in sy.block_polys[c["prime"]])
        else:
            got.extend([ev] * (sy.multiplicity if sy.vector is None else 1))
    want_blocks = sorted([tuple(f), m] for f, m in c.get("factors", []))
    ok_values = _ms(got) == _ms(c["expected"]) and sorted(blocks) == want_blocks
    detail = f"char poly {'equal' if cp == expected_cp else 'DIFFERS'}; eigenvalues {_ms(got)}"
    if blocks:
        detail += f"; irreducible blocks {sorted(blocks)}"
    return cp == expected_cp and ok_values, detail


def _eigenvector(s: Session, c: dict):
    sy = s.system(c["genus"], c["prime"], c["eigenvalue"])
    v = list(sy.vector)
    perm = s.perms.get(c.get("align_with"), list(range(len(v))))
    v = [v[p] for p in perm]
    ok = _proportional(v, [_scalar(x) for x in c["expected"]])
    detail = f"computed (class order aligned) {[str(x) for x in v]}"
    if "weighted" in c:
        auts = s.ledger(c["genus"]).aut_orders
        w = [AlgebraicScalar.coerce(x) * Fraction(1, auts[p]) for x, p in zip(v, perm)]
        okw = _proportional(w, [_scalar(x) for x in c["weighted"]])
        ok = ok and okw
        detail += f"; v/|Aut| {'proportional' if okw else 'NOT proportional'} to {c['weighted']}"
    return ok, detail


def _theta_constant(s: Session, c: dict):
    sy = s.system(c["genus"], c["prime"], c["eigenvalue"])
    led = s.ledger(c["genus"])
    f = theta_map(sy.vector, led, bound=2)
    ok = f.constant == _scalar(c["expected"])
    ok = ok and inner_product(sy.vector, [1] * led.h, led.aut_orders) == f.constant
    # compare the sign pattern up to class order and overall sign, keyed by |Aut|
    got = sorted(zip(led.aut_orders, (str(AlgebraicScalar.coerce(x)) for x in sy.vector)))
    exp = sorted(zip(c["expected_aut"], c["expected_vector"]))
    neg = sorted(zip(c["expected_aut"], (str(-_scalar(x)) for x in c["expected_vector"])))
    pattern = got == exp or got == neg
    return ok and pattern, f"constant term {f.constant}; vector by |Aut| {got}"


def _predict(s: Session, c: dict):
    v = predict_eigenvalue(c["param"], c["prime"], c["N"], c["geometry"], field_m=c["field_m"])
    return v == _scalar(c["expected"]), f"predicted {v}"


def _infinity(s: Session, c: dict):
    bad = []
    n = 0
    for name in c["tables"]:
        t = s.fixtures["tables"][name]
        for row in t["rows"]:
            n += 1
            if not check_infinity(row, t["N"], t["geometry"], field_m=t["field_m"]):
                bad.append(f"{name}: {row}")
    return not bad, f"{n} rows checked" + (f"; failing {bad}" if bad else "")


def _table_predictions(s: Session, c: dict):
    bad = []
    n = 0
    for name in c["tables"]:
        t = s.fixtures["tables"][name]
        for label, values in t["expected"].items():
            for row, want in zip(t["rows"], values):
                n += 1
                got = predict_eigenvalue(row, label, t["N"], t["geometry"], field_m=t["field_m"])
                if got != _scalar(want):
                    bad.append(f"{name} {row} at ({label}): predicted {got}, table {want}")
    return not bad, f"{n} entries checked" + (f"; mismatches: {bad}" if bad else "")


def _zeta_exact(s: Session, c: dict):
    r = dedekind_zeta_algebraic_part(quad_field(c["field_m"]), c["k"])
    return r == Fraction(c["expected"]), f"r = {r} = {sympy.factorint(r.numerator)} / {sympy.factorint(r.denominator)}"


def _zeta_divides(s: Session, c: dict):
    r = dedekind_zeta_algebraic_part(quad_field(c["field_m"]), c["k"])
    return r.numerator % c["divisor"] == 0, f"numerator {r.numerator} = {sympy.factorint(r.numerator)}"


def _all_pairs_moduli(s: Session, name: str, labels: tuple) -> dict:
    spec = s.spectrum(name, labels)
    systems = [system_values(sy) for sy in spec.systems]
    found: dict[int, list] = {}
    h = s.ledger(name).h
    for a, b in itertools.combinations(range(len(systems)), 2):
        rep = congruence_scan(systems[a], systems[b], h)
        for p in rep.primes():
            found.setdefault(p, []).append((a, b))
    return found


def _congruence(s: Session, c: dict):
    labels = tuple(s.genus_spec(c["genus"])["primes"])
    found = _all_pairs_moduli(s, c["genus"], labels)
    return c["modulus"] in found, f"moduli over {labels}: {sorted(found)}"


def _congruence_set(s: Session, c: dict):
    labels = tuple(s.genus_spec(c["genus"])["primes"])
    found = _all_pairs_moduli(s, c["genus"], labels)
    missing = [m for m in c["moduli"] if m not in found]
    return not missing, f"primes used {labels}; wanted {c['moduli']}, missing {missing}"


def _row_systems(s: Session, c: dict) -> dict:
    return {str(i + 1): s.system(c["genus"], c["select_prime"], v) for i, v in enumerate(c["rows"])}


def _congruence_pairs(s: Session, c: dict):
    spec = s.genus_spec(c["genus"])
    led = s.ledger(c["genus"])
    # extra primes join in only once their (expensive) matrices are cached
    labels = spec["primes"] + [l for l in spec.get("extra_primes", []) if l in led.hecke]
    rows = _row_systems(s, c)
    if len(labels) > 1:
        full = s.spectrum(c["genus"], tuple(labels))
        for k, sy in rows.items():
            rows[k] = next(x for x in full.systems if x.vector is not None and
                           x.eigenvalues[c["select_prime"]] == sy.eigenvalues[c["select_prime"]])
    bad, notes = [], []
    for i, j, moduli in c["pairs"]:
        rep = congruence_scan(rows[str(i)].eigenvalues, rows[str(j)].eigenvalues)
        hit = [m for m in moduli if rep.gcd % m == 0]
        notes.append(f"({i},{j}) mod {moduli}: gcd {rep.gcd}")
        if not hit:
            bad.append((i, j))
    return not bad, f"primes used {labels}; " + "; ".join(notes)


def _bipartition(s: Session, c: dict):
    parts = spinor_bipartition(s.hecke(c["genus"], c["prime"]))
    if parts is None:
        return False, "neighbour graph is not bipartite"
    sizes = sorted(map(len, parts), reverse=True)
    return sizes == sorted(c["expected"], reverse=True), f"part sizes {sizes}"


def _theta_hecke(s: Session, c: dict):
    sy = s.system(c["genus"], c["select_prime"], c["eigenvalue"])
    led = s.ledger(c["genus"])
    f = theta_map(sy.vector, led, bound=c["bound"], threads=s.threads)
    F = _field(s.genus_spec(c["genus"])["field_m"])
    got = {}
    for label in c["expected"]:
        got[label] = extract_eigenvalue(f, prime_from_label(F, label), min_probes=c.get("min_probes", 3))
    ok = all(got[l] == _scalar(v) for l, v in c["expected"].items())
    nz = len(f.nonzero())
    return ok, f"eigenvalues {({k: str(v) for k, v in got.items()})}; bound {c['bound']}, {nz} nonzero coefficients"


def _degrees(s: Session, c: dict):
    rows = _row_systems(s, c)
    led = s.ledger(c["genus"])
    vectors = {k: sy.vector for k, sy in rows.items()}
    triples = nonzero_triples(vectors, led.aut_orders)
    anchors = {k: v for k, v in c["anchors"].items()}
    bounds = degree_inference(anchors, triples, names=list(vectors), cap=c.get("cap"))
    bad = []
    for k, want in c["expected"].items():
        lo, hi = bounds.lower[k], bounds.upper[k]
        if isinstance(want, str) and want.startswith("<="):
            if not hi <= int(want[2:]):
                bad.append(f"g{k} in [{lo},{hi}], want {want}")
        elif not lo == hi == want:
            bad.append(f"g{k} in [{lo},{hi}], want {want}")
    shown = {k: (bounds.lower[k], bounds.upper[k]) for k in sorted(bounds.lower, key=int)}
    return not bad, f"bounds {shown}" + (f"; off: {bad}" if bad else "")


def _block_image(s: Session, c: dict):
    """Blocks of T_p against images of a Hilbert eigenvalue polynomial under the predictor.

    The parameter contains one GL2 constituent named by c["form"]; predicting with
    Hilbert eigenvalue 0 and 1 gives the affine map t -> c0 + c1 t, and the
    expected blocks are the char polys of c0 + c1 t (and of its chi-twist).
    """
    g = s.genus_spec(c["genus"])
    m, label = g["field_m"], c["prime"]
    spec = s.spectrum(c["genus"], (label,))
    got = sorted(tuple(int(x) for x in f) for sy in spec.systems if sy.eigenvalues.get(label) is None
                 for f, _ in sy.block_polys[label])
    base = arthur.load_registry()
    vals = []
    for t in (0, 1):
        e = arthur.RegistryEntry(c["form"], m, "gl2", c["weight"], {label: AlgebraicScalar(t)})
        reg = arthur.Registry(base.entries() + [e])
        vals.append(arthur.predict_eigenvalue(c["parameter"], label, g["rank"], registry=reg, field_m=m))
    c0, c1 = vals[0], vals[1] - vals[0]
    if not (c0.is_rational() and c1.is_rational()):
        return False, f"affine map {c0} + {c1} t is not rational"
    t, x = sympy.symbols("t x")
    h = sympy.Poly(c["hilbert_poly"], t)
    signs = [1]
    if c.get("with_twist"):
        signs.append(ray_class_character(prime_from_label(quad_field(m), label)))
    want = set()
    for sgn in signs:
        img = sympy.Poly(sympy.resultant(h.as_expr(), x - sgn * (sympy.Rational(c0.a) + sympy.Rational(c1.a) * t), t), x)
        img = img.monic()
        want.add(tuple(int(k) for k in img.all_coeffs()))
    ok = got == sorted(want)
    return ok, f"t -> {c0} + {c1} t; expected blocks {sorted(want)}; computed {got}"


KINDS = {
    "class_count": _class_count,
    "aut_orders": _aut_orders,
    "matrix": _matrix,
    "spectrum": _spectrum,
    "eigenvector": _eigenvector,
    "theta_constant": _theta_constant,
    "predict": _predict,
    "infinity": _infinity,
    "table_predictions": _table_predictions,
    "zeta_exact": _zeta_exact,
    "zeta_divides": _zeta_divides,
    "congruence": _congruence,
    "congruence_set": _congruence_set,
    "congruence_pairs": _congruence_pairs,
    "bipartition": _bipartition,
    "theta_hecke": _theta_hecke,
    "degrees": _degrees,
    "block_image": _block_image,
}


def check_tier(fixtures: dict, c: dict) -> str:
    if "tier" in c:
        return c["tier"]
    if "genus" in c:
        return fixtures["genera"][c["genus"]]["tier"]
    return "fast"


def run_check(session: Session, c: dict) -> CheckResult:
    tier = check_tier(session.fixtures, c)
    try:
        ok, detail = KINDS[c["kind"]](session, c)
        status = "PASS" if ok else "FAIL"
    except GuardTripped:
        raise
    except Exception as exc:  # a crashing check is reported, never hidden
        status, detail = "ERROR", f"{type(exc).__name__}: {exc}"
    return CheckResult(c["id"], c.get("criterion"), tier, status, detail, c.get("provenance", ""))


def select_checks(fixtures: dict, suite: str = "fast", ids=None, criteria=None) -> list[dict]:
    level = TIERS.index(suite)
    out = []
    for c in fixtures["checks"]:
        if ids and c["id"] not in ids:
            continue
        if criteria and c.get("criterion") not in criteria:
            continue
        if TIERS.index(check_tier(fixtures, c)) <= level:
            out.append(c)
    return out


def run_suite(suite: str = "fast", threads: int = 1, force: bool = False, log=None, ids=None,
              criteria=None, fixtures: dict | None = None, on_result=None) -> list[CheckResult]:
    fixtures = fixtures or load_fixtures()
    session = Session(fixtures, threads=threads, force=force, log=log)
    results = []
    for c in select_checks(fixtures, suite, ids, criteria):
        r = run_check(session, c)
        results.append(r)
        if on_result:
            on_result(r)
    return results


def format_result(r: CheckResult) -> str:
    crit = "-" if r.criterion is None else str(r.criterion)
    return f"{r.status:5} [{crit:>2}] {r.id}: {r.detail}"
