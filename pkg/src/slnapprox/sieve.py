"""Arithmetic of Z[1/n] values, sieve axiom checks, and the lower bound.

A nonzero rational w whose denominator only involves primes of n splits as
(unit of Z[1/n]) times a positive integer coprime to n, the coprime part
[w]_n.  Everything here works with that integer: factor counting, r-prime
tests, congruence counts against density data, and the combinatorial lower
bound

    S >= T * W(z) * (C1 - C2 * l * (loglog 3T)^(3t+2) / log T)

with W(z) the product of (1 - rho(p)/p) over sieving primes p <= z.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import sympy

from .config import DEFAULT_CONFIG, Config
from .core import PolynomialFamily, RationalGroupPoint, n_coprime_part
from .errors import MissingDensities, ZeroValue

log = logging.getLogger(__name__)


def _rho_value(rho, q: int) -> Fraction:
    """Accept a DensityFunction-style handle or a plain callable."""
    if hasattr(rho, "value"):
        return Fraction(rho.value(q))
    return Fraction(rho(q))


def sieving_primes(z: float, n: int, delta: int = 1) -> tuple[int, ...]:
    """Primes p <= z that are coprime to delta * n."""
    if z < 2:
        return ()
    excluded = delta * n
    return tuple(
        p for p in sympy.primerange(2, int(z) + 1) if math.gcd(p, excluded) == 1
    )


def factorize_full(
    m: int, config: Config = DEFAULT_CONFIG
) -> tuple[dict[int, int], int, bool]:
    """Factor a positive integer: trial division, then a general factorizer.

    Returns (factors, cofactor, complete).  When the remaining cofactor is
    composite and wider than the configured bit budget it is left unfactored
    and complete is False.
    """
    if m < 1:
        raise ValueError("m must be positive")
    factors: dict[int, int] = {}
    rest = m
    d = 2
    while d * d <= rest and d <= config.factor_trial_limit:
        while rest % d == 0:
            factors[d] = factors.get(d, 0) + 1
            rest //= d
        d += 1 if d == 2 else 2
    if rest == 1:
        return factors, 1, True
    if d * d > rest or sympy.isprime(rest):
        factors[rest] = factors.get(rest, 0) + 1
        return factors, 1, True
    if rest.bit_length() <= config.factor_bit_budget:
        for p, a in sympy.factorint(rest).items():
            factors[p] = factors.get(p, 0) + a
        return factors, 1, True
    log.warning("cofactor %d bits left unfactored", rest.bit_length())
    return factors, rest, False


@dataclass(frozen=True)
class SievedValue:
    """A value of f cleared to its n-coprime integer part, with factors.

    When factorization hit the bit budget, ``complete`` is False, the
    composite remainder sits in ``cofactor``, and ``factor_count`` is a
    certified lower bound (the cofactor contributes 2, the least a
    composite can).
    """

    raw: Fraction
    n: int
    coprime_part: int
    factors: tuple[tuple[int, int], ...]
    cofactor: int
    complete: bool

    @property
    def factor_count(self) -> int:
        base = sum(a for _, a in self.factors)
        return base + (2 if self.cofactor > 1 else 0)


def coprime_part(w, n: int, config: Config = DEFAULT_CONFIG) -> SievedValue:
    """Split w in Z[1/n] into unit times [w]_n and factor the integer part."""
    w = Fraction(w)
    if w == 0:
        raise ZeroValue("coprime part of 0 is undefined")
    m = n_coprime_part(w, n)
    factors, cofactor, complete = factorize_full(m, config)
    return SievedValue(
        raw=w,
        n=n,
        coprime_part=m,
        factors=tuple(sorted(factors.items())),
        cofactor=cofactor,
        complete=complete,
    )


def _family_product(family: PolynomialFamily, z: RationalGroupPoint) -> Fraction:
    prod = Fraction(1)
    for val in family.values(z):
        prod *= val
    return prod


def is_r_prime(
    point: RationalGroupPoint,
    family: PolynomialFamily,
    n: int,
    r: int,
    config: Config = DEFAULT_CONFIG,
):
    """Whether f_1(z)...f_t(z) has at most r prime factors in Z[1/n].

    Returns True or False when decidable; None when factorization was
    incomplete and the certified lower bound does not already exceed r.
    """
    value = _family_product(family, point)
    sv = coprime_part(value, n, config)
    if sv.complete:
        return sv.factor_count <= r
    if sv.factor_count > r:
        return False
    return None


def almost_prime_count(
    points,
    family: PolynomialFamily,
    n: int,
    z: float,
    delta: int = 1,
    zero_policy: str = "exclude",
) -> int:
    """Count points whose value avoids every sieving prime p <= z.

    Sieving primes are those coprime to delta * n.  Points where the value
    vanishes follow ``zero_policy``: "exclude" (default, logged) or
    "include".
    """
    if zero_policy not in ("exclude", "include"):
        raise ValueError(f"unknown zero_policy {zero_policy!r}")
    primes = sieving_primes(z, n, delta)
    count = 0
    zeros = 0
    for pt in _point_seq(points):
        value = _family_product(family, pt)
        if value == 0:
            zeros += 1
            if zero_policy == "include":
                count += 1
            continue
        m = n_coprime_part(value, n)
        if all(m % p for p in primes):
            count += 1
    if zeros and zero_policy == "exclude":
        log.info("almost_prime_count: excluded %d zero values", zeros)
    return count


def _point_seq(points) -> Sequence[RationalGroupPoint]:
    return points.points if hasattr(points, "points") else points


def squarefree_moduli(q_max: int, excluded: int) -> list[int]:
    """Square-free q <= q_max whose prime factors are all coprime to excluded."""
    out = []
    for q in range(1, q_max + 1):
        m = q
        ok = True
        p = 2
        while p * p <= m:
            if m % p == 0:
                m //= p
                if m % p == 0 or excluded % p == 0:
                    ok = False
                    break
            p += 1
        if ok and m > 1 and excluded % m == 0:
            ok = False
        if ok:
            out.append(q)
    return out


def value_histogram(
    points, family: PolynomialFamily, n: int
) -> Counter:
    """a_k = number of points whose coprime part equals k; zeros land at 0."""
    a = Counter()
    for pt in _point_seq(points):
        value = _family_product(family, pt)
        a[0 if value == 0 else n_coprime_part(value, n)] += 1
    return a


def congruence_count_direct(points, family: PolynomialFamily, q: int) -> int:
    """#{points : f(z) = 0 mod q}, by reducing the exact value mod q.

    The value's denominator must be invertible mod q; with q coprime to the
    denominator modulus that always holds.  Kept separate from the
    histogram route so the two can be compared.
    """
    count = 0
    for pt in _point_seq(points):
        value = _family_product(family, pt)
        if math.gcd(value.denominator, q) != 1:
            raise ValueError(f"denominator not invertible mod {q}")
        if value.numerator % q == 0:
            count += 1
    return count


@dataclass(frozen=True)
class AxiomReport:
    """Exact remainders and the two summatory checks on one point cell."""

    T: int
    t: int
    n: int
    delta: int
    z: float
    a_k: tuple[tuple[int, int], ...]
    zero_values: int
    remainders: tuple[tuple[int, Fraction], ...]
    a1_sum_abs: Fraction
    a1_zeta: float | None
    a2_rows: tuple[tuple[int, float], ...]
    a2_l: float
    a2_c3: float

    def remainder(self, q: int) -> Fraction:
        for qq, r in self.remainders:
            if qq == q:
                return r
        raise KeyError(q)


def axiom_report(
    points,
    family: PolynomialFamily,
    q_max: int,
    rho,
    n: int,
    delta: int = 1,
    z: float | None = None,
) -> AxiomReport:
    """Check the density axioms on an enumerated cell.

    For every square-free q <= q_max supported on primes coprime to
    delta * n, the exact remainder R_q = #{f = 0 mod q} - (rho(q)/q) T is
    computed from the value histogram.  The summary reports the fitted
    exponent zeta with sum |R_q| = T^(1 - zeta), and the partial-sum
    deviations sum_{w <= p < z} rho(p) log p / p - t log(z/w) bracketed as
    [-l, c3].
    """
    pts = _point_seq(points)
    T = len(pts)
    t = family.t
    if z is None:
        z = float(q_max)
    a = value_histogram(pts, family, n)
    zeros = a.get(0, 0)
    moduli = squarefree_moduli(q_max, delta * n)
    remainders = []
    for q in moduli:
        direct = sum(cnt for k, cnt in a.items() if k % q == 0)
        r_q = Fraction(direct) - _rho_value(rho, q) / q * T
        remainders.append((q, r_q))
    sum_abs = sum((abs(r) for _, r in remainders), Fraction(0))
    if T > 1 and sum_abs > 0:
        zeta = 1.0 - math.log(float(sum_abs)) / math.log(T)
    else:
        zeta = None
    # deviations of the prime sum from t*log(z/w), over starting points w
    primes = [p for p in sieving_primes(z, n, delta) if p < z]
    for p in primes:
        _rho_value(rho, p)  # raises MissingDensities early if absent
    rows = []
    for w in range(2, max(2, int(z)) + 1):
        if w > z:
            break
        partial = sum(
            float(_rho_value(rho, p)) * math.log(p) / p for p in primes if p >= w
        )
        rows.append((w, partial - t * math.log(z / w)))
    devs = [d for _, d in rows]
    a2_l = max(0.0, -min(devs)) if devs else 0.0
    a2_c3 = max(0.0, max(devs)) if devs else 0.0
    return AxiomReport(
        T=T,
        t=t,
        n=n,
        delta=delta,
        z=z,
        a_k=tuple(sorted(a.items())),
        zero_values=zeros,
        remainders=tuple(remainders),
        a1_sum_abs=sum_abs,
        a1_zeta=zeta,
        a2_rows=tuple(rows),
        a2_l=a2_l,
        a2_c3=a2_c3,
    )


@dataclass(frozen=True)
class SieveBound:
    value: float
    W_z: Fraction
    z: float
    T: int
    l: float
    primes_used: tuple[int, ...]
    vacuous: bool
    degenerate: bool


def beta_sieve_lower_bound(
    T: int,
    rho,
    t: int,
    tau: float,
    s: float,
    l: float,
    z: float | None = None,
    C1: float = 1.0,
    C2: float = 1.0,
    n: int = 1,
    delta: int = 1,
) -> SieveBound:
    """Evaluate the combinatorial lower bound at level z = T^(tau/s).

    Requires s > 9t.  W(z) is computed exactly from the density handle; the
    result may be negative, in which case it is flagged vacuous.  T <= 1
    degenerates to T * W * C1 (the log-power correction needs log T > 0).
    """
    if s <= 9 * t:
        raise ValueError(f"need s > 9t, got s={s}, t={t}")
    if tau <= 0:
        raise ValueError("tau must be positive")
    if T < 0:
        raise ValueError("T must be nonnegative")
    if z is None:
        z = float(T) ** (tau / s) if T > 0 else 1.0
    primes = sieving_primes(z, n, delta)
    W = Fraction(1)
    for p in primes:
        rho_p = _rho_value(rho, p)
        W *= 1 - rho_p / p
    degenerate = T <= 1
    if degenerate:
        value = T * float(W) * C1
    else:
        correction = C2 * l * math.log(math.log(3 * T)) ** (3 * t + 2) / math.log(T)
        value = T * float(W) * (C1 - correction)
    return SieveBound(
        value=value,
        W_z=W,
        z=z,
        T=T,
        l=l,
        primes_used=primes,
        vacuous=value < 0,
        degenerate=degenerate,
    )


@dataclass(frozen=True)
class SieveReport:
    """Everything the sieve pipeline produced on one cell."""

    T: int
    t: int
    n: int
    delta: int
    tau: float
    s: float
    z: float
    remainders: tuple[tuple[int, Fraction], ...]
    W_z: Fraction
    lower_bound: float
    direct_count: int
    vacuous: bool
    axioms: AxiomReport
    bound: SieveBound
    consistent: bool


def run_sieve(
    points,
    family: PolynomialFamily,
    n: int,
    rho,
    tau: float,
    s: float,
    q_max: int | None = None,
    delta: int = 1,
    C1: float = 1.0,
    C2: float = 1.0,
) -> SieveReport:
    """Axiom check, lower bound, and direct count on one enumerated cell."""
    pts = _point_seq(points)
    T = len(pts)
    t = family.t
    z = float(T) ** (tau / s) if T > 0 else 1.0
    if q_max is None:
        q_max = max(1, int(z))
    axioms = axiom_report(pts, family, q_max, rho, n, delta=delta, z=z)
    bound = beta_sieve_lower_bound(
        T, rho, t, tau, s, axioms.a2_l, z=z, C1=C1, C2=C2, n=n, delta=delta
    )
    direct = almost_prime_count(pts, family, n, z, delta=delta)
    consistent = bound.vacuous or bound.value <= direct
    return SieveReport(
        T=T,
        t=t,
        n=n,
        delta=delta,
        tau=tau,
        s=s,
        z=z,
        remainders=axioms.remainders,
        W_z=bound.W_z,
        lower_bound=bound.value,
        direct_count=direct,
        vacuous=bound.vacuous,
        axioms=axioms,
        bound=bound,
        consistent=consistent,
    )


def _frac_json(fr: Fraction) -> dict:
    return {"num": str(fr.numerator), "den": str(fr.denominator)}


def sieve_report_to_json_dict(report: SieveReport) -> dict:
    """JSON form with every exact rational as {num, den} decimal strings."""
    ax = report.axioms
    return {
        "T": report.T,
        "t": report.t,
        "n": report.n,
        "delta": report.delta,
        "tau": report.tau,
        "s": report.s,
        "z": report.z,
        "W_z": _frac_json(report.W_z),
        "lower_bound": report.lower_bound,
        "direct_count": report.direct_count,
        "vacuous": report.vacuous,
        "consistent": report.consistent,
        "remainders": [
            {"q": q, "R": _frac_json(r)} for q, r in report.remainders
        ],
        "axioms": {
            "a_k": [{"k": str(k), "count": c} for k, c in ax.a_k],
            "zero_values": ax.zero_values,
            "a1_sum_abs": _frac_json(ax.a1_sum_abs),
            "a1_zeta": ax.a1_zeta,
            "a2_l": ax.a2_l,
            "a2_c3": ax.a2_c3,
            "a2_rows": [{"w": w, "deviation": d} for w, d in ax.a2_rows],
        },
        "sieving_primes": list(report.bound.primes_used),
    }
