"""Exact arithmetic for rational matrix group points.

A rational group point is stored as an integer numerator matrix ``u``
together with a positive integer denominator ``v`` such that the actual
matrix is ``u / v``, ``det(u) == v**n_dim`` and ``gcd`` of all entries of
``u`` together with ``v`` is 1.  That normalization is unique, so equality
of points is plain tuple equality.

No floating point is used anywhere in this module.  Matrices are tuples of
tuples, hence immutable and hashable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NotUnimodular

IntMatrix = tuple[tuple[int, ...], ...]
FracMatrix = tuple[tuple[Fraction, ...], ...]


# ---------------------------------------------------------------------------
# small integer helpers


def ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def frac_ceil(x: Fraction) -> int:
    return ceil_div(x.numerator, x.denominator)


def frac_floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with a*s + b*t == g == gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def int_valuation(m: int, p: int) -> int:
    """Exponent of p in m.  m must be nonzero."""
    if m == 0:
        raise ValueError("valuation of zero is undefined")
    m = abs(m)
    k = 0
    while m % p == 0:
        m //= p
        k += 1
    return k


def prime_factorization(n: int) -> dict[int, int]:
    """Trial-division factorization, meant for moduli of desk scale."""
    if n < 1:
        raise ValueError("need a positive integer")
    out: dict[int, int] = {}
    m = n
    d = 2
    while d * d <= m:
        while m % d == 0:
            out[d] = out.get(d, 0) + 1
            m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def n_coprime_part(w: Fraction | int, n: int) -> int:
    """The positive part of w left after stripping every prime dividing n.

    w must be nonzero and its denominator must only involve primes of n
    (so that w is a unit times an integer coprime to n).
    """
    w = Fraction(w)
    if w == 0:
        raise ValueError("zero has no coprime part")
    num = abs(w.numerator)
    den = w.denominator
    if n == 1:
        if den != 1:
            raise ValueError(f"denominator {den} is not a unit for n = 1")
        return num
    if den != 1:
        for p in prime_factorization(den):
            if n % p:
                raise ValueError(f"denominator has prime {p} not dividing n = {n}")
    for p in prime_factorization(n):
        while num % p == 0:
            num //= p
    return num


def snap_dyadic(x, bits: int = 53) -> Fraction:
    """Round x to the dyadic grid of spacing 2**-bits, exactly."""
    q = Fraction(x)
    scale = 1 << bits
    return Fraction(round(q * scale), scale)


# ---------------------------------------------------------------------------
# matrices


def identity_matrix(n_dim: int) -> IntMatrix:
    return tuple(
        tuple(1 if i == j else 0 for j in range(n_dim)) for i in range(n_dim)
    )


def mat_det(m: Sequence[Sequence]) -> int | Fraction:
    """Determinant by cofactor expansion, exact for int or Fraction entries."""
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in [tuple(r) for r in m[1:]]]
        term = m[0][j] * mat_det(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> tuple:
    n = len(a)
    k = len(b[0])
    return tuple(
        tuple(sum(a[i][t] * b[t][j] for t in range(len(b))) for j in range(k))
        for i in range(n)
    )


def to_fraction_matrix(raw: Sequence[Sequence]) -> FracMatrix:
    return tuple(tuple(Fraction(x) for x in row) for row in raw)


# ---------------------------------------------------------------------------
# rational group points


@dataclass(frozen=True)
class RationalGroupPoint:
    """A matrix with rational entries, det 1, in normalized u/v form."""

    u: IntMatrix
    v: int
    n_dim: int

    @property
    def den(self) -> int:
        return self.v

    def entries(self) -> FracMatrix:
        return tuple(tuple(Fraction(e, self.v) for e in row) for row in self.u)

    def flat_numerator(self) -> tuple[int, ...]:
        return tuple(e for row in self.u for e in row)

    def validate(self) -> None:
        if len(self.u) != self.n_dim or any(len(r) != self.n_dim for r in self.u):
            raise ValueError("numerator matrix has the wrong shape")
        if self.v < 1:
            raise ValueError("denominator must be positive")
        d = mat_det(self.u)
        if d != self.v**self.n_dim:
            raise NotUnimodular(Fraction(d, self.v**self.n_dim))
        g = self.v
        for e in self.flat_numerator():
            g = math.gcd(g, e)
        if g != 1:
            raise ValueError(f"numerator and denominator share the factor {g}")

    def mul(self, other: "RationalGroupPoint") -> "RationalGroupPoint":
        if self.n_dim != other.n_dim:
            raise ValueError("dimension mismatch")
        prod = mat_mul(self.u, other.u)
        return reduce(
            tuple(
                tuple(Fraction(e, self.v * other.v) for e in row) for row in prod
            )
        )

    def distance_to(self, center: Sequence[Sequence]) -> Fraction:
        """Entrywise max distance to a rational matrix, exact."""
        best = Fraction(0)
        for i in range(self.n_dim):
            for j in range(self.n_dim):
                d = abs(Fraction(self.u[i][j], self.v) - Fraction(center[i][j]))
                if d > best:
                    best = d
        return best

    # canonical JSON form: all integers as decimal strings, bit exact
    def to_json_dict(self) -> dict:
        return {
            "n_dim": self.n_dim,
            "u": [[str(e) for e in row] for row in self.u],
            "v": str(self.v),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, d: dict) -> "RationalGroupPoint":
        u = tuple(tuple(int(e) for e in row) for row in d["u"])
        z = cls(u=u, v=int(d["v"]), n_dim=int(d["n_dim"]))
        z.validate()
        return z

    @classmethod
    def from_json(cls, s: str) -> "RationalGroupPoint":
        return cls.from_json_dict(json.loads(s))


def reduce(raw: Sequence[Sequence]) -> RationalGroupPoint:
    """Normalize a rational matrix of determinant 1 to its unique u/v form.

    The denominator is the lcm of the entry denominators; the gcd condition
    then holds automatically because some entry realizes each prime power of
    the lcm exactly.
    """
    rows = to_fraction_matrix(raw)
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("matrix must be square")
    v = 1
    for row in rows:
        for e in row:
            v = v * e.denominator // math.gcd(v, e.denominator)
    u = tuple(tuple(int(e * v) for e in row) for row in rows)
    d = mat_det(u)
    if d != v**n:
        raise NotUnimodular(Fraction(d, v**n))
    z = RationalGroupPoint(u=u, v=v, n_dim=n)
    return z


def padic_norm(z: RationalGroupPoint, p: int) -> int:
    """Max over entries of the p-adic absolute value, as an integer power of p.

    For a normalized point this equals p**k where p**k exactly divides v.
    Computed entrywise all the same, so the normalization is exercised, not
    assumed.
    """
    vp = int_valuation(z.v, p) if z.v % p == 0 else 0
    min_val = None
    for e in z.flat_numerator():
        if e == 0:
            continue
        val = int_valuation(e, p)
        if min_val is None or val < min_val:
            min_val = val
        if min_val == 0:
            break
    if min_val is None:
        raise ValueError("zero matrix")
    k = vp - min_val
    if k < 0:
        raise ValueError("point is not in normalized form at p")
    return p**k


# ---------------------------------------------------------------------------
# adelic balls


@dataclass(frozen=True)
class BallSpec:
    """A closed archimedean box of radius ``radius`` around ``center``
    together with the finite data of a modulus ``n``: membership at the
    finite places means the point has denominator exactly ``n``."""

    center: FracMatrix
    radius: Fraction
    modulus: int
    n_dim: int
    factorization: tuple[tuple[int, int], ...]

    @classmethod
    def make(
        cls,
        center: Sequence[Sequence],
        radius,
        modulus: int,
        snap_bits: int | None = 53,
    ) -> "BallSpec":
        if modulus < 1:
            raise ValueError("modulus must be a positive integer")
        c = to_fraction_matrix(center)
        if snap_bits is not None:
            c = tuple(tuple(snap_dyadic(e, snap_bits) for e in row) for row in c)
        r = Fraction(radius)
        if r < 0:
            raise ValueError("radius must be nonnegative")
        fac = tuple(sorted(prime_factorization(modulus).items()))
        return cls(
            center=c,
            radius=r,
            modulus=modulus,
            n_dim=len(c),
            factorization=fac,
        )


def ball_membership(z: RationalGroupPoint, ball: BallSpec) -> bool:
    """Exact membership test.

    Archimedean part: entrywise max distance to the center is <= radius
    (closed ball).  Finite part: the p-adic norm matches the prime
    factorization of the modulus at every prime of the modulus, and the
    denominator involves no other primes.  That conjunction is equivalent to
    den(z) == modulus, which is asserted.
    """
    if z.n_dim != ball.n_dim:
        raise ValueError("dimension mismatch")
    finite_ok = all(padic_norm(z, p) == p**a for p, a in ball.factorization)
    if finite_ok:
        rest = z.v
        for p, _ in ball.factorization:
            while rest % p == 0:
                rest //= p
        finite_ok = rest == 1
    den_ok = z.v == ball.modulus
    assert finite_ok == den_ok, "normalization broke the denominator criterion"
    if not den_ok:
        return False
    return z.distance_to(ball.center) <= ball.radius


# ---------------------------------------------------------------------------
# polynomial families


@dataclass(frozen=True)
class Polynomial:
    """Integer-coefficient polynomial in the n_dim**2 matrix entries.

    Monomials map an exponent tuple (row major over entries) to a nonzero
    integer coefficient.
    """

    monomials: tuple[tuple[tuple[int, ...], int], ...]
    n_dim: int

    @classmethod
    def from_monomials(cls, mono: dict, n_dim: int) -> "Polynomial":
        nvars = n_dim * n_dim
        clean = {}
        for exps, c in mono.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent tuple {exps}")
            c = int(c)
            if c:
                clean[exps] = clean.get(exps, 0) + c
        clean = {e: c for e, c in clean.items() if c}
        if not clean:
            raise ValueError("the zero polynomial is not allowed in a family")
        return cls(monomials=tuple(sorted(clean.items())), n_dim=n_dim)

    @classmethod
    def entry(cls, i: int, j: int, n_dim: int = 2) -> "Polynomial":
        exps = [0] * (n_dim * n_dim)
        exps[i * n_dim + j] = 1
        return cls.from_monomials({tuple(exps): 1}, n_dim)

    @classmethod
    def trace_minus(cls, constant: int, n_dim: int = 2) -> "Polynomial":
        mono: dict = {}
        for i in range(n_dim):
            exps = [0] * (n_dim * n_dim)
            exps[i * n_dim + i] = 1
            mono[tuple(exps)] = 1
        mono[tuple([0] * (n_dim * n_dim))] = -constant
        return cls.from_monomials(mono, n_dim)

    @classmethod
    def sum_entries(cls, n_dim: int = 2) -> "Polynomial":
        mono = {}
        for k in range(n_dim * n_dim):
            exps = [0] * (n_dim * n_dim)
            exps[k] = 1
            mono[tuple(exps)] = 1
        return cls.from_monomials(mono, n_dim)

    @property
    def degree(self) -> int:
        return max(sum(e) for e, _ in self.monomials)

    def eval_flat(self, values: Sequence):
        total = 0
        for exps, c in self.monomials:
            term = c
            for val, e in zip(values, exps):
                if e:
                    term = term * val**e
            total = total + term
        return total


@dataclass(frozen=True)
class PolynomialFamily:
    """A finite family f_1, ..., f_t of nonzero integer polynomials.

    Irreducibility (and pairwise distinctness) of the members is a trusted
    input flag; nothing here attempts to verify it.
    """

    polys: tuple[Polynomial, ...]
    n_dim: int
    assume_irreducible: bool = True

    def __post_init__(self):
        if not self.polys:
            raise ValueError("a family needs at least one polynomial")
        if any(p.n_dim != self.n_dim for p in self.polys):
            raise ValueError("family members disagree on dimension")

    @property
    def t(self) -> int:
        return len(self.polys)

    @property
    def total_degree(self) -> int:
        """Degree of the product f_1 * ... * f_t."""
        return sum(p.degree for p in self.polys)

    def values(self, z: RationalGroupPoint) -> tuple[Fraction, ...]:
        flat = tuple(Fraction(e, z.v) for e in z.flat_numerator())
        return tuple(p.eval_flat(flat) for p in self.polys)


def eval_family(
    family: PolynomialFamily,
    z: RationalGroupPoint,
    on_numerator: bool = False,
):
    """Product value f(z) = f_1(z) * ... * f_t(z), exact.

    With ``on_numerator`` the product is instead evaluated on the integer
    numerator matrix, giving an integer.
    """
    if on_numerator:
        flat = z.flat_numerator()
        total = 1
        for p in family.polys:
            total *= p.eval_flat(flat)
        return total
    total = Fraction(1)
    for val in family.values(z):
        total *= val
    return total


FAMILY_PRESETS = {
    "entry11": lambda n_dim: PolynomialFamily(
        polys=(Polynomial.entry(0, 0, n_dim),), n_dim=n_dim
    ),
    "trace-minus-2": lambda n_dim: PolynomialFamily(
        polys=(Polynomial.trace_minus(2, n_dim),), n_dim=n_dim
    ),
    "sum-entries": lambda n_dim: PolynomialFamily(
        polys=(Polynomial.sum_entries(n_dim),), n_dim=n_dim
    ),
}


def family_from_preset(name: str, n_dim: int = 2) -> PolynomialFamily:
    try:
        return FAMILY_PRESETS[name](n_dim)
    except KeyError:
        raise ValueError(
            f"unknown family preset {name!r}; known: {sorted(FAMILY_PRESETS)}"
        ) from None


def family_from_file(path: str) -> PolynomialFamily:
    """Load a family from JSON: {"n_dim": N, "polys": [[[coeff, [exps...]], ...], ...]}."""
    with open(path) as fp:
        raw = json.load(fp)
    n_dim = int(raw["n_dim"])
    polys = []
    for monomials in raw["polys"]:
        mono = {tuple(exps): int(c) for c, exps in monomials}
        polys.append(Polynomial.from_monomials(mono, n_dim))
    return PolynomialFamily(polys=tuple(polys), n_dim=n_dim)
