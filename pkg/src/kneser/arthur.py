"""Formal Arthur parameters and the Hecke eigenvalues they predict.

A parameter is a formal sum of blocks Pi[d].  At an unramified prime with
residue cardinality q, a block contributes

    q^base * tr(t(Pi)) * sum_{j<d} q^((d-1)/2 - j)

with base = N/2 - 1 for orthogonal groups and (N-1)/2 for the unitary groups
attached to Hermitian lattices (which also add the constant (p^N - 1)/(p + 1)
at an inert p).  tr(t(Pi)) is the trace of the unitarily normalised Satake
parameter: a cusp form with motivic weight w and eigenvalue a contributes
a / q^(w/2).  Each contribution is therefore kept as a numerator together
with a weight, and the powers of sqrt(q) are combined exactly, so a wrong
normalisation shows up as a non-integral result.

Parameters are written in a small language:

    D5[2]+[1]+[3]        Sym2(D5)+[9]          chi*([1]+[3])
    T(D(7,3),D(3,7))+D7[2]+[3]+[1]             BC(Delta11)+[10]

Names refer to entries of an eigenform registry (see ``load_registry``).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field as dc_field, replace
from fractions import Fraction
from importlib import resources

from .numbers import PrimeIdeal, kronecker, prime_from_label, quad_field, rational_field, ray_class_character
from .spectra import AlgebraicScalar, MultiQuad

DIMENSIONS = {"trivial": 1, "char": 1, "gl2": 2, "sym2": 3, "spin": 4, "tensor": 4, "bc": 2}


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    field_m: int | None
    kind: str                      # "gl2" | "elliptic" | "spin"
    weight: int | tuple[int, int]  # motivic weight(s)
    eigenvalues: dict[str, AlgebraicScalar]
    nebentypus: int | None = None
    provenance: str = ""
    infinity: tuple | None = None  # per-place exponent lists for spin entries

    def weight_at(self, place: int) -> int:
        return self.weight[place] if isinstance(self.weight, tuple) else self.weight

    @property
    def max_weight(self) -> int:
        return max(self.weight) if isinstance(self.weight, tuple) else self.weight


class MissingDatum(KeyError):
    pass


class Registry:
    def __init__(self, entries: list[RegistryEntry]):
        self._by_key = {}
        for e in entries:
            key = (e.field_m, e.name)
            if key in self._by_key:
                raise ValueError(f"duplicate registry entry {e.name} for field {e.field_m}")
            self._by_key[key] = e

    def get(self, field_m: int | None, name: str) -> RegistryEntry:
        for key in ((field_m, name), (None, name)):
            if key in self._by_key:
                return self._by_key[key]
        raise MissingDatum(f"no registry entry {name!r} for field {field_m}")

    def eigenvalue(self, entry: RegistryEntry, label: str) -> AlgebraicScalar:
        try:
            return entry.eigenvalues[label]
        except KeyError:
            raise MissingDatum(f"{entry.name} has no eigenvalue at {label}") from None

    def entries(self) -> list[RegistryEntry]:
        return list(self._by_key.values())

    @staticmethod
    def from_json(obj: dict) -> "Registry":
        out = []
        for e in obj["entries"]:
            w = e["weight"]
            out.append(RegistryEntry(
                name=e["name"], field_m=e.get("field_m"), kind=e.get("kind", "gl2"),
                weight=tuple(w) if isinstance(w, list) else int(w),
                eigenvalues={k: AlgebraicScalar.from_json(v) for k, v in e["eigenvalues"].items()},
                nebentypus=e.get("nebentypus"), provenance=e.get("provenance", ""),
                infinity=tuple(tuple(Fraction(x) for x in pl) for pl in e["infinity"]) if e.get("infinity") else None,
            ))
        return Registry(out)


def load_registry(path: str | None = None) -> Registry:
    if path is None:
        text = resources.files("kneser.data").joinpath("registry.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return Registry.from_json(json.loads(text))


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class Constituent:
    kind: str                  # trivial | char | gl2 | sym2 | spin | tensor | bc
    refs: tuple[str, ...] = ()
    twisted: bool = False

    @property
    def n(self) -> int:
        return DIMENSIONS[self.kind]

    def __str__(self):
        body = {"trivial": "1", "char": "chi"}.get(self.kind)
        if body is None:
            if self.kind == "gl2":
                body = self.refs[0]
            elif self.kind == "sym2":
                body = f"Sym2({self.refs[0]})"
            elif self.kind == "spin":
                body = f"Spin({self.refs[0]})"
            elif self.kind == "tensor":
                body = f"T({self.refs[0]},{self.refs[1]})"
            else:
                body = f"BC({self.refs[0]})"
        return f"chi*{body}" if self.twisted else body


@dataclass(frozen=True)
class ArthurParameter:
    blocks: tuple[tuple[Constituent, int], ...]

    def dimension(self) -> int:
        return sum(c.n * d for c, d in self.blocks)

    def __str__(self):
        parts = []
        for c, d in self.blocks:
            if c.kind == "trivial":
                parts.append(("chi*" if c.twisted else "") + f"[{d}]")
            else:
                parts.append(str(c) + (f"[{d}]" if d != 1 else ""))
        return "+".join(parts)


_TOKEN = re.compile(r"\s*(?:(\[\d+\])|(\d*[A-Za-z][A-Za-z0-9]*(?:\(\d+(?:,\d+)*\))?'?)|([()+*,]))")
_KEYWORDS = {"Sym2", "T", "BC", "Spin", "chi"}


class ParseError(ValueError):
    pass


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected input at {text[pos:]!r}")
        out.append(next(g for g in m.groups() if g is not None))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        t = self.peek()
        if t is None or (expected is not None and t != expected):
            raise ParseError(f"expected {expected or 'token'}, found {t!r}")
        self.i += 1
        return t

    def parse(self) -> ArthurParameter:
        blocks = self.expr(False)
        if self.peek() is not None:
            raise ParseError(f"trailing input {self.toks[self.i:]}")
        return ArthurParameter(tuple(blocks))

    def expr(self, twisted: bool):
        blocks = self.term(twisted)
        while self.peek() == "+":
            self.take("+")
            blocks += self.term(twisted)
        return blocks

    def term(self, twisted: bool):
        t = self.peek()
        if t == "chi":
            self.take()
            if self.peek() == "*":
                self.take()
                return self.term(not twisted)
            return self.suffix([(Constituent("char", (), twisted), 1)])
        if t == "(":
            self.take()
            blocks = self.expr(twisted)
            self.take(")")
            if self.peek() and self.peek().startswith("["):
                raise ParseError("a shift [d] cannot follow a parenthesised sum")
            return blocks
        if t is not None and t.startswith("["):
            self.take()
            return [(Constituent("trivial", (), twisted), int(t[1:-1]))]
        if t in ("Sym2", "BC", "Spin"):
            self.take()
            self.take("(")
            ref = self.ref()
            self.take(")")
            kind = {"Sym2": "sym2", "BC": "bc", "Spin": "spin"}[t]
            return self.suffix([(Constituent(kind, (ref,), twisted), 1)])
        if t == "T":
            self.take()
            self.take("(")
            a = self.ref()
            self.take(",")
            b = self.ref()
            self.take(")")
            return self.suffix([(Constituent("tensor", (a, b), twisted), 1)])
        return self.suffix([(Constituent("gl2", (self.ref(),), twisted), 1)])

    def ref(self) -> str:
        t = self.take()
        if t in _KEYWORDS or not re.match(r"\d*[A-Za-z]", t):
            raise ParseError(f"expected an eigenform name, found {t!r}")
        return t

    def suffix(self, blocks):
        t = self.peek()
        if t is not None and t.startswith("["):
            self.take()
            (c, _), = blocks
            return [(c, int(t[1:-1]))]
        return blocks


def parse_parameter(text: str) -> ArthurParameter:
    """Parse the parameter mini-language into an ArthurParameter."""
    return _Parser(text).parse()


def validate(A: ArthurParameter, N: int) -> bool:
    """Dimension bookkeeping: sum of n_k d_k equals N."""
    return A.dimension() == N


def twist(A: ArthurParameter) -> ArthurParameter:
    """The quadratic twist chi (x) A: every Satake parameter is multiplied by chi(p)."""
    return ArthurParameter(tuple((replace(c, twisted=not c.twisted), d) for c, d in A.blocks))


# ---------------------------------------------------------------------------
# prediction


def _q_power(q: int, e2: int) -> MultiQuad:
    """q^(e2/2) exactly."""
    k, half = divmod(e2, 2)
    base = Fraction(q) ** k
    if not half:
        return MultiQuad({1: base})
    r = int(round(q ** 0.5))
    if r * r == q:
        return MultiQuad({1: base * r})
    # q = p^f with f odd
    p = next(d for d in range(2, q + 1) if q % d == 0)
    f = 0
    t = q
    while t % p == 0:
        t //= p
        f += 1
    return MultiQuad({p: base * Fraction(p) ** ((f - 1) // 2)})


def resolve_prime(field_m: int | None, prime: PrimeIdeal | str) -> PrimeIdeal:
    if isinstance(prime, PrimeIdeal):
        return prime
    F = rational_field() if field_m is None else quad_field(field_m)
    return prime_from_label(F, prime)


def _char_value(prime: PrimeIdeal) -> int:
    return ray_class_character(prime)


def satake_numerator(c: Constituent, prime: PrimeIdeal, registry: Registry, field_m: int | None,
                     hermitian: bool) -> tuple[MultiQuad, int]:
    """(numerator, weight) with tr(t_p(Pi)) = numerator / q^(weight/2)."""
    label = prime.label()
    q = prime.q
    if c.kind == "trivial":
        num, w = MultiQuad({1: Fraction(1)}), 0
    elif c.kind == "char":
        num, w = MultiQuad({1: Fraction(_char_value(prime))}), 0
    elif c.kind in ("gl2", "sym2", "tensor", "spin"):
        entries = [registry.get(field_m, r) for r in c.refs]
        vals = [MultiQuad.of(registry.eigenvalue(e, label)) for e in entries]
        ws = [e.max_weight for e in entries]
        if c.kind == "gl2":
            num, w = vals[0], ws[0]
        elif c.kind == "spin":
            num, w = vals[0], ws[0]
        elif c.kind == "sym2":
            num, w = vals[0] * vals[0] - _q_power(q, 2 * ws[0]), 2 * ws[0]
        else:
            num, w = vals[0] * vals[1], ws[0] + ws[1]
    elif c.kind == "bc":
        if not hermitian or prime.kind != "inert":
            raise ValueError("base-change constituents are only predicted at inert primes of Hermitian genera")
        e = registry.get(None, c.refs[0])
        p = prime.p
        a = MultiQuad.of(registry.eigenvalue(e, str(p)))
        chi = kronecker(e.nebentypus, p) if e.nebentypus else 1
        num = a * a - MultiQuad({1: Fraction(2 * chi * p ** e.max_weight)})
        w = e.max_weight
    else:
        raise ValueError(f"unknown constituent kind {c.kind}")
    if c.twisted:
        num = num.scale(Fraction(_char_value(prime)))
    return num, w


def _to_scalar(x: MultiQuad) -> AlgebraicScalar:
    keys = [d for d in x.c if d != 1]
    if not keys:
        return AlgebraicScalar(x.c.get(1, 0))
    if len(keys) == 1:
        return AlgebraicScalar(x.c.get(1, 0), x.c[keys[0]], keys[0])
    raise ArithmeticError(f"prediction does not lie in a quadratic field: {x.c}")


class NonIntegralPrediction(ArithmeticError):
    pass


def predict_eigenvalue(A: ArthurParameter | str, prime: PrimeIdeal | str, N: int,
                       geometry: str = "orth", registry: Registry | None = None,
                       field_m: int | None = None) -> AlgebraicScalar:
    """Hecke eigenvalue at the prime predicted by the parameter."""
    if isinstance(A, str):
        A = parse_parameter(A)
    registry = registry or load_registry()
    hermitian = geometry.startswith("herm")
    if isinstance(prime, PrimeIdeal):
        field_m = None if prime.field.is_rational else prime.field.m
    prime = resolve_prime(field_m, prime)
    if hermitian and prime.kind != "inert":
        raise NotImplementedError("Hermitian predictions are implemented at inert primes only")
    q = prime.q
    base2 = (N - 1) if hermitian else (N - 2)      # twice the base exponent
    reg_field = None if hermitian else field_m
    total = MultiQuad()
    for c, d in A.blocks:
        num, w = satake_numerator(c, prime, registry, reg_field, hermitian)
        for j in range(d):
            e2 = base2 - w + (d - 1) - 2 * j
            total = total + num * _q_power(q, e2)
    if hermitian:
        p = prime.p
        total = total + MultiQuad({1: Fraction(p ** N - 1, p + 1)})
    out = _to_scalar(total)
    if not out.is_algebraic_integer():
        raise NonIntegralPrediction(f"{A} at {prime.label()}: {out} is not an algebraic integer")
    return out


# ---------------------------------------------------------------------------
# infinity types


def _constituent_exponents(c: Constituent, registry: Registry, field_m, place: int, hermitian: bool) -> list[Fraction]:
    if c.kind in ("trivial", "char"):
        return [Fraction(0)]
    reg_field = None if c.kind == "bc" or hermitian else field_m
    entries = [registry.get(reg_field, r) for r in c.refs]
    if c.kind == "spin":
        if entries[0].infinity is None:
            raise MissingDatum(f"{entries[0].name} has no infinity data")
        return list(entries[0].infinity[place])
    ws = [Fraction(e.weight_at(place), 2) for e in entries]
    if c.kind in ("gl2", "bc"):
        return [ws[0], -ws[0]]
    if c.kind == "sym2":
        return [2 * ws[0], Fraction(0), -2 * ws[0]]
    if c.kind == "tensor":
        return [s1 * ws[0] + s2 * ws[1] for s1 in (1, -1) for s2 in (1, -1)]
    raise ValueError(c.kind)


def infinity_exponents(A: ArthurParameter | str, geometry: str = "orth", place: int = 0,
                       registry: Registry | None = None, field_m: int | None = None) -> list[Fraction]:
    """Sorted multiset of exponents e in (z/zbar)^e at one archimedean place."""
    if isinstance(A, str):
        A = parse_parameter(A)
    registry = registry or load_registry()
    hermitian = geometry.startswith("herm")
    out = []
    for c, d in A.blocks:
        for e in _constituent_exponents(c, registry, field_m, place, hermitian):
            out.extend(e + Fraction(d - 1, 2) - j for j in range(d))
    return sorted(out)


def standard_exponents(N: int, geometry: str = "orth") -> list[Fraction]:
    if geometry.startswith("herm"):
        return sorted(Fraction(N - 1, 2) - j for j in range(N))
    half = N // 2
    return sorted([Fraction(s * k) for k in range(1, half) for s in (1, -1)] + [Fraction(0)] * 2)


def check_infinity(A: ArthurParameter | str, N: int, geometry: str = "orth",
                   registry: Registry | None = None, field_m: int | None = None) -> bool:
    """True when every archimedean place carries the standard exponent multiset."""
    if isinstance(A, str):
        A = parse_parameter(A)
    places = 2 if (field_m not in (None, -3) and not geometry.startswith("herm")) else 1
    target = standard_exponents(N, geometry)
    return all(infinity_exponents(A, geometry, pl, registry, field_m) == target for pl in range(places))


def rallis_extend(exponents: list, N: int, m: int) -> list[Fraction]:
    """Exponent multiset {alpha^(+-1)} (size 2m, as powers of p) extended to size N.

    Adds {+-(N/2 - m - 1), ..., +-1, 0, 0} when N/2 > m and nothing when N/2 = m.
    """
    if 2 * m > N:
        raise ValueError("need N/2 >= m")
    out = [Fraction(x) for x in exponents]
    if len(out) != 2 * m:
        raise ValueError(f"expected {2 * m} exponents, got {len(out)}")
    if N // 2 > m:
        top = N // 2 - m - 1
        out += [Fraction(s * k) for k in range(1, top + 1) for s in (1, -1)] + [Fraction(0)] * 2
    return sorted(out)


@dataclass
class PredictionRow:
    """One row of an eigenvalue table: a parameter with expected eigenvalues by prime label."""

    parameter: str | None
    expected: dict[str, AlgebraicScalar] = dc_field(default_factory=dict)
    label: str = ""
