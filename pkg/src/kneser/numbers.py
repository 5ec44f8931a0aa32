"""Exact arithmetic in the quadratic fields Q(sqrt m), m in {2, 3, 5, -3}.

Elements are stored in the integral basis {1, w} with w = (1+sqrt m)/2 when
m = 1 mod 4 and w = sqrt m otherwise, so that w**2 = t*w - n for the small
integers ``t`` and ``n`` held by the field.  All four fields have class
number one, which lets every prime ideal carry an explicit generator.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

SUPPORTED_FIELDS = (2, 3, 5, -3)


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(v)


def frac_str(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


class QuadField:
    """Q(sqrt m) together with its ring of integers Z[w]."""

    __slots__ = ("m", "d", "t", "n")

    def __init__(self, m: int):
        if m == 1:
            # the rational marker: only elements with y = 0 ever occur
            self.m, self.d, self.t, self.n = 1, 1, 0, 0
            return
        if m not in SUPPORTED_FIELDS:
            raise ValueError(f"unsupported field Q(sqrt {m}); supported: {SUPPORTED_FIELDS}")
        self.m = m
        if m % 4 == 1:
            self.t, self.n = 1, (1 - m) // 4
            self.d = m
        else:
            self.t, self.n = 0, -m
            self.d = 4 * m

    def __repr__(self):
        return f"QuadField({self.m})"

    def __eq__(self, other):
        return isinstance(other, QuadField) and other.m == self.m

    def __hash__(self):
        return hash(("QuadField", self.m))

    @property
    def is_real(self) -> bool:
        return self.m > 0

    @property
    def is_rational(self) -> bool:
        return self.m == 1

    def __call__(self, x=0, y=0) -> "FieldElem":
        return FieldElem(self, x, y)

    @property
    def one(self) -> "FieldElem":
        return FieldElem(self, 1, 0)

    @property
    def zero(self) -> "FieldElem":
        return FieldElem(self, 0, 0)

    @property
    def omega(self) -> "FieldElem":
        return FieldElem(self, 0, 1)

    @property
    def sqrt_m(self) -> "FieldElem":
        # sqrt m = 2w - t
        return FieldElem(self, -self.t, 2) if self.t else FieldElem(self, 0, 1)

    def from_sqrt_coords(self, a, b) -> "FieldElem":
        """The element a + b*sqrt(m)."""
        a, b = _frac(a), _frac(b)
        if self.t:
            return FieldElem(self, a - b, 2 * b)
        return FieldElem(self, a, b)

    def fundamental_unit(self) -> "FieldElem":
        if self.m == 5:
            return FieldElem(self, 0, 1)          # golden ratio, norm -1
        if self.m == 2:
            return FieldElem(self, 1, 1)          # 1 + sqrt2, norm -1
        if self.m == 3:
            return FieldElem(self, 2, 1)          # 2 + sqrt3, norm +1
        return FieldElem(self, 0, 1)              # primitive 6th root of unity

    def units_mod_squares_sign(self) -> bool:
        """True when some unit has norm -1 (narrow and wide class groups agree)."""
        return self.is_real and self.fundamental_unit().norm() == -1

    def roots_of_unity(self) -> list["FieldElem"]:
        if self.m == -3:
            w = self.omega
            out, u = [], self.one
            for _ in range(6):
                out.append(u)
                u = u * w
            return out
        return [self.one, -self.one]

    def totally_positive_different_generator(self) -> "FieldElem | None":
        """A totally positive generator of the different, if one exists."""
        if not self.is_real:
            return None
        delta = self.sqrt_m if self.t else 2 * self.sqrt_m
        u = self.fundamental_unit()
        for cand in (delta, -delta, delta * u, -delta * u):
            if cand.is_totally_positive():
                return cand
        return None

    def to_json(self) -> dict:
        return {"m": self.m}


@lru_cache(maxsize=None)
def quad_field(m: int) -> QuadField:
    return QuadField(m)


def rational_field() -> QuadField:
    """Q, represented as a degenerate field whose elements all have y = 0."""
    return quad_field(1)


class FieldElem:
    """x + y*w with rational x, y."""

    __slots__ = ("field", "x", "y")

    def __init__(self, field: QuadField, x=0, y=0):
        self.field = field
        self.x = _frac(x)
        self.y = _frac(y)

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.field.m != self.field.m:
                raise ValueError("elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElem(self.field, other, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElem(self.field, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __neg__(self):
        return FieldElem(self.field, -self.x, -self.y)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElem(self.field, self.x - o.x, self.y - o.y)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        f = self.field
        yy = self.y * o.y
        return FieldElem(f, self.x * o.x - f.n * yy, self.x * o.y + self.y * o.x + f.t * yy)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElem":
        nm = self.norm()
        if nm == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conj()
        return FieldElem(self.field, c.x / nm, c.y / nm)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.field.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.y == 0 and self.x == other
        if not isinstance(other, FieldElem):
            return NotImplemented
        return self.field.m == other.field.m and self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.field.m, self.x, self.y))

    # invariants -----------------------------------------------------------
    def conj(self) -> "FieldElem":
        return FieldElem(self.field, self.x + self.field.t * self.y, -self.y)

    def norm(self) -> Fraction:
        f = self.field
        return self.x * self.x + f.t * self.x * self.y + f.n * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x + self.field.t * self.y

    def is_integral(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    def is_unit(self) -> bool:
        return self.is_integral() and abs(self.norm()) == 1

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def is_rational(self) -> bool:
        return self.y == 0

    def sqrt_coords(self) -> tuple[Fraction, Fraction]:
        """(a, b) with self = a + b*sqrt(m)."""
        if self.field.t:
            return self.x + self.y / 2, self.y / 2
        return self.x, self.y

    def embeddings(self) -> tuple[float, float]:
        a, b = self.sqrt_coords()
        if self.field.is_real:
            r = math.sqrt(self.field.m)
            return float(a) + float(b) * r, float(a) - float(b) * r
        r = complex(0, math.sqrt(-self.field.m))
        return complex(float(a)) + float(b) * r, complex(float(a)) - float(b) * r

    def is_totally_positive(self) -> bool:
        if not self.field.is_real:
            raise ValueError("total positivity needs a real field")
        return self.trace() > 0 and self.norm() > 0

    def sign_at(self, place: int) -> int:
        """Exact sign of the real embedding ``place`` (0 or 1)."""
        a, b = self.sqrt_coords()
        if place == 1:
            b = -b
        return _sign_a_plus_b_sqrt(a, b, self.field.m)

    # presentation ---------------------------------------------------------
    def __repr__(self):
        return f"FieldElem({self.field.m}, {self})"

    def __str__(self):
        a, b = self.sqrt_coords()
        root = f"sqrt{self.field.m}" if self.field.m > 0 else f"sqrt({self.field.m})"
        return _format_surd(a, b, root)

    def to_json(self) -> dict:
        return {"m": self.field.m, "x": frac_str(self.x), "y": frac_str(self.y)}

    @staticmethod
    def from_json(obj: dict) -> "FieldElem":
        return FieldElem(quad_field(int(obj["m"])), Fraction(obj["x"]), Fraction(obj["y"]))

    def as_int_pair(self) -> tuple[int, int]:
        if not self.is_integral():
            raise ValueError(f"{self} is not integral")
        return int(self.x), int(self.y)


def _sign_a_plus_b_sqrt(a: Fraction, b: Fraction, m: int) -> int:
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # opposite signs: compare a^2 with m b^2
    diff = a * a - m * b * b
    if diff == 0:
        return 0
    return sa if diff > 0 else sb


def _format_surd(a: Fraction, b: Fraction, root: str) -> str:
    if b == 0:
        return str(a)
    if b == 1:
        bs = root
    elif b == -1:
        bs = "-" + root
    else:
        bs = f"{b}*{root}"
    if a == 0:
        return bs
    if bs.startswith("-"):
        return f"{a}{bs}"
    return f"{a}+{bs}"


def parse_element(field: QuadField, text: str) -> FieldElem:
    """Parse strings like '2', 'sqrt5', '1+sqrt3', '4-sqrt3', '3*sqrt2', '-1/2+1/2*sqrt5'."""
    s = text.replace(" ", "").replace("√", "sqrt").replace("(", "").replace(")", "")
    root = f"sqrt{field.m}"
    s = s.replace(f"sqrt{field.m}", "R").replace("sqrt", "R")
    if "R" not in s:
        return field.from_sqrt_coords(Fraction(s), 0)
    head, _, tail = s.partition("R")
    if tail:
        raise ValueError(f"cannot parse {text!r} (expected a+b*{root})")
    if head.endswith("*"):
        head = head[:-1]
    # split head into a rational part and the coefficient of R
    idx = max(head.rfind("+"), head.rfind("-"))
    if idx <= 0:
        a_str, b_str = "0", head
    else:
        a_str, b_str = head[:idx], head[idx:]
    if b_str in ("", "+"):
        b = Fraction(1)
    elif b_str == "-":
        b = Fraction(-1)
    else:
        b = Fraction(b_str)
    return field.from_sqrt_coords(Fraction(a_str), b)


# ---------------------------------------------------------------------------
# characters and Kronecker symbols


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # now n odd positive: Jacobi symbol
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


class DirichletData:
    """A quadratic (or trivial) Dirichlet character given by its value table."""

    __slots__ = ("modulus", "values", "label")

    def __init__(self, modulus: int, values, label: str = ""):
        self.modulus = modulus
        self.values = tuple(int(v) for v in values)
        if len(self.values) != modulus:
            raise ValueError("value table must have one entry per residue")
        self.label = label

    def __call__(self, n: int) -> int:
        return self.values[n % self.modulus]

    def __repr__(self):
        return f"DirichletData({self.label or self.modulus})"


def trivial_character() -> DirichletData:
    return DirichletData(1, [1], "trivial")


def kronecker_character(d: int) -> DirichletData:
    """n -> (d/n), the character of conductor |d| for a fundamental discriminant d."""
    f = abs(d)
    return DirichletData(f, [kronecker(d, a) for a in range(f)], f"chi_{d}")


# ---------------------------------------------------------------------------
# primes


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    for q in range(2, math.isqrt(p) + 1):
        if p % q == 0:
            return False
    return True


class PrimeIdeal:
    """A prime of O_E with an explicit generator."""

    __slots__ = ("field", "generator", "p", "e", "f", "_residue")

    def __init__(self, field: QuadField, generator: FieldElem, p: int, e: int, f: int):
        self.field = field
        self.generator = generator
        self.p = p
        self.e = e
        self.f = f
        self._residue = None

    @property
    def q(self) -> int:
        return self.p ** self.f

    @property
    def kind(self) -> str:
        if self.e == 2:
            return "ramified"
        return "inert" if self.f == 2 else "split"

    def label(self) -> str:
        return str(self.generator).replace("*", "")

    def __repr__(self):
        return f"PrimeIdeal(({self.label()}), p={self.p}, e={self.e}, f={self.f})"

    def __eq__(self, other):
        if not isinstance(other, PrimeIdeal) or other.field != self.field:
            return False
        r = self.generator / other.generator
        return r.is_unit()

    def __hash__(self):
        return hash((self.field.m, self.p, self.e, self.f, self.residue_field().root))

    def contains(self, x: FieldElem) -> bool:
        """Membership for integral x."""
        return self.residue_field().reduce(x) == 0

    def valuation(self, x: FieldElem) -> int:
        if x.is_zero():
            raise ValueError("valuation of zero")
        v = 0
        while not x.is_integral():
            x = x * self.p
            v -= self.e
        pi_inv = self.generator.inverse()
        while x.is_integral() and self.contains(x):
            x = x * pi_inv
            v += 1
        return v

    def totally_positive_generator(self) -> FieldElem:
        g = totally_positive_associate(self.generator)
        if g is None:
            raise ValueError(f"{self} has no totally positive generator")
        return g

    def residue_field(self) -> "ResidueField":
        if self._residue is None:
            self._residue = ResidueField(self)
        return self._residue

    def to_json(self) -> dict:
        return {"generator": self.generator.to_json(), "p": self.p, "e": self.e, "f": self.f}

    @staticmethod
    def from_json(obj: dict) -> "PrimeIdeal":
        g = FieldElem.from_json(obj["generator"])
        return PrimeIdeal(g.field, g, int(obj["p"]), int(obj["e"]), int(obj["f"]))


def totally_positive_associate(x: FieldElem) -> FieldElem | None:
    """A totally positive unit multiple of x, or None if there is none."""
    field = x.field
    if not field.is_real:
        raise ValueError("total positivity needs a real field")
    u = field.fundamental_unit()
    for cand in (x, -x, x * u, -x * u):
        if cand.is_totally_positive():
            return cand
    return None


def _generator_key(g: FieldElem):
    a, b = g.sqrt_coords()
    return (abs(a) + abs(b), a < 0, b < 0, abs(b), a, b)


def _search_generator(field: QuadField, target_norm: int, p: int) -> list[FieldElem]:
    bound = 4 * p
    found = []
    for x in range(-bound, bound + 1):
        for y in range(-bound, bound + 1):
            if y == 0 and x == 0:
                continue
            nm = x * x + field.t * x * y + field.n * y * y
            if abs(nm) == target_norm:
                found.append(FieldElem(field, x, y))
    if not found:
        raise ArithmeticError(f"no element of norm +-{target_norm} with |x|,|y| <= {bound}")
    return found


def factor_rational_prime(field: QuadField, p: int) -> list[PrimeIdeal]:
    """The primes of O_E above p, each with an explicit generator."""
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    if field.is_rational:
        return [PrimeIdeal(field, field(p, 0), p, 1, 1)]
    k = kronecker(field.d, p)
    if k == -1:
        return [PrimeIdeal(field, field(p, 0), p, 1, 2)]
    cands = _search_generator(field, p, p)
    if k == 0:
        best = min(cands, key=_generator_key)
        return [PrimeIdeal(field, best, p, 2, 1)]
    # split: two classes of generators, separated by their residue root
    groups: dict[int, list[FieldElem]] = {}
    for g in cands:
        pr = PrimeIdeal(field, g, p, 1, 1)
        groups.setdefault(pr.residue_field().root, []).append(g)
    out = [PrimeIdeal(field, min(gs, key=_generator_key), p, 1, 1) for gs in groups.values()]
    out.sort(key=lambda pr: _generator_key(pr.generator))
    if len(out) != 2:
        raise ArithmeticError(f"expected two primes above split {p}, found {len(out)}")
    return out


def prime_from_generator(field: QuadField, g: FieldElem) -> PrimeIdeal:
    if not g.is_integral():
        raise ValueError(f"{g} is not integral")
    if field.is_rational:
        p = abs(int(g.x))
        if not _is_prime(p):
            raise ValueError(f"{g} is not prime")
        return PrimeIdeal(field, field(p, 0), p, 1, 1)
    nm = abs(int(g.norm()))
    if _is_prime(nm):
        p = nm
        k = kronecker(field.d, p)
        if k == -1:
            raise ValueError(f"{g} has prime norm but {p} is inert")
        return PrimeIdeal(field, g, p, 2 if k == 0 else 1, 1)
    r = math.isqrt(nm)
    if r * r == nm and _is_prime(r) and kronecker(field.d, r) == -1:
        return PrimeIdeal(field, g, r, 1, 2)
    raise ValueError(f"{g} does not generate a prime ideal")


def prime_from_label(field: QuadField, label: str) -> PrimeIdeal:
    return prime_from_generator(field, parse_element(field, label))


def ray_class_character(prime: PrimeIdeal) -> int:
    """The character of the narrow class group: +1 iff the prime has a totally positive generator.

    For fields with a unit of norm -1 the narrow and wide class groups agree
    and the character is trivial.  Otherwise a generator of positive norm has
    a totally positive associate (multiply by -1), and one of negative norm
    has none because every unit has norm +1.
    """
    field = prime.field
    if not field.is_real:
        raise ValueError("narrow class character needs a real field")
    if field.units_mod_squares_sign():
        return 1
    return 1 if prime.generator.norm() > 0 else -1


# ---------------------------------------------------------------------------
# residue fields


class ResidueField:
    """O_E / p as coded integers 0..q-1 with numpy lookup tables.

    Degree one: code = image in F_p of x + y*w, via w -> root.
    Degree two: code = (x mod p) + p*(y mod p), i.e. F_p[w]/(w^2 - t w + n).
    """

    def __init__(self, prime: PrimeIdeal):
        self.prime = prime
        field = prime.field
        p = prime.p
        self.p = p
        self.q = prime.q
        self.t = field.t % p
        self.n = field.n % p
        if field.is_rational:
            self.root = 0
        elif prime.f == 1:
            gx, gy = prime.generator.as_int_pair()
            # generator = gx + gy*w lies in the prime, so w = -gx/gy in the residue field
            if gy % p == 0:
                raise ArithmeticError("degree-one prime generator divisible by p")
            self.root = (-gx * pow(gy, -1, p)) % p
            assert (self.root * self.root - self.t * self.root + self.n) % p == 0
        else:
            self.root = None
        q = self.q
        codes = np.arange(q)
        if prime.f == 1:
            self.add = (codes[:, None] + codes[None, :]) % p
            self.mul = (codes[:, None] * codes[None, :]) % p
        else:
            a, b = codes % p, codes // p
            self.add = ((a[:, None] + a[None, :]) % p) + p * ((b[:, None] + b[None, :]) % p)
            bb = b[:, None] * b[None, :]
            ra = (a[:, None] * a[None, :] - self.n * bb) % p
            rb = (a[:, None] * b[None, :] + b[:, None] * a[None, :] + self.t * bb) % p
            self.mul = ra + p * rb
        self.add = self.add.astype(np.int64)
        self.mul = self.mul.astype(np.int64)
        self.neg = np.array([int(np.nonzero(self.add[c] == 0)[0][0]) for c in range(q)], dtype=np.int64)
        inv = np.zeros(q, dtype=np.int64)
        for c in range(1, q):
            inv[c] = int(np.nonzero(self.mul[c] == 1)[0][0])
        self.inv = inv
        # Frobenius x -> x^p, the conjugation of F_{p^2} over F_p
        frob = np.zeros(q, dtype=np.int64)
        for c in range(q):
            v = 1
            for _ in range(p):
                v = int(self.mul[v, c])
            frob[c] = v
        self.frob = frob

    def _mod(self, v: Fraction) -> int:
        p = self.p
        if v.denominator % p == 0:
            raise ValueError(f"{v} is not integral at {p}")
        return (v.numerator * pow(v.denominator, -1, p)) % p

    def reduce_pair(self, x: int, y: int) -> int:
        p = self.p
        if self.root is not None:
            return (x + y * self.root) % p
        return (x % p) + p * (y % p)

    def reduce(self, e: FieldElem) -> int:
        """Image of a p-integral element.  Requires the element to be integral at every prime above p."""
        if self.root is not None:
            if e.x.denominator % self.p == 0 or e.y.denominator % self.p == 0:
                # may still be integral at this prime (ramified/split); scale by the generator
                raise ValueError(f"{e} has denominator divisible by {self.p}")
            return (self._mod(e.x) + self._mod(e.y) * self.root) % self.p
        return self._mod(e.x) + self.p * self._mod(e.y)

    def lift_pair(self, code: int) -> tuple[int, int]:
        if self.root is not None:
            return int(code), 0
        return int(code) % self.p, int(code) // self.p

    def lift(self, code: int) -> FieldElem:
        x, y = self.lift_pair(code)
        return self.prime.field(x, y)

    def elements(self) -> range:
        return range(self.q)


# ---------------------------------------------------------------------------
# Bernoulli numbers and zeta values


@lru_cache(maxsize=None)
def bernoulli_number(k: int) -> Fraction:
    """B_k with B_1 = -1/2."""
    if k < 0:
        raise ValueError("k >= 0")
    if k == 0:
        return Fraction(1)
    if k == 1:
        return Fraction(-1, 2)
    if k % 2:
        return Fraction(0)
    s = Fraction(0)
    for j in range(k):
        s += math.comb(k + 1, j) * bernoulli_number(j)
    return -s / (k + 1)


def bernoulli_polynomial(k: int, x: Fraction) -> Fraction:
    x = _frac(x)
    return sum((math.comb(k, j) * bernoulli_number(j) * x ** (k - j) for j in range(k + 1)), Fraction(0))


def generalized_bernoulli(k: int, chi: DirichletData) -> Fraction:
    """B_{k,chi} = f^(k-1) * sum_{a=1}^{f} chi(a) B_k(a/f), so that L(1-k, chi) = -B_{k,chi}/k."""
    if k < 1:
        raise ValueError("k >= 1")
    f = chi.modulus
    total = Fraction(0)
    for a in range(1, f + 1):
        c = chi(a)
        if c:
            total += c * bernoulli_polynomial(k, Fraction(a, f))
    return total * Fraction(f) ** (k - 1)


def dirichlet_l_at_negative(k: int, chi: DirichletData) -> Fraction:
    """L(1-k, chi)."""
    return -generalized_bernoulli(k, chi) / k


def dedekind_zeta_at_negative(field: QuadField, k: int) -> Fraction:
    """zeta_E(1-k) = zeta(1-k) L(1-k, chi_D) = B_k B_{k,chi_D} / k^2 for even k."""
    chi = kronecker_character(field.d)
    return bernoulli_number(k) * generalized_bernoulli(k, chi) / (k * k)


def dedekind_zeta_algebraic_part(field: QuadField, k: int) -> Fraction:
    """The rational r with zeta_E(k) = r * pi^(2k) / sqrt(D) for a real quadratic field of discriminant D.

    zeta_E(k) = zeta(k) L(k, chi_D), and for even k:

        zeta(k)      = (-1)^(k/2+1) B_k (2 pi)^k / (2 k!)
        L(k, chi_D)  = (-1)^(k/2+1) (sqrt(D)/2) (2 pi / D)^k B_{k,chi_D} / k!

    (the second is the functional equation for an even primitive character,
    whose Gauss sum is sqrt(D)).  Multiplying,

        zeta_E(k) sqrt(D) / pi^(2k) = B_k B_{k,chi_D} 4^(k-1) / (D^(k-1) (k!)^2).
    """
    if not field.is_real:
        raise ValueError("needs a real quadratic field")
    if k < 2 or k % 2:
        raise ValueError("k must be even and >= 2")
    D = field.d
    chi = kronecker_character(D)
    return (bernoulli_number(k) * generalized_bernoulli(k, chi) * Fraction(4) ** (k - 1)
            / (Fraction(D) ** (k - 1) * math.factorial(k) ** 2))
