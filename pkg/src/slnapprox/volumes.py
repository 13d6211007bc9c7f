"""Finite-place ball volumes for the 2x2 group, with counting oracles.

Normalization: the compact group of p-adically integral points has measure 1.
The shell of p-adic norm p**ell is a disjoint union of translates of that
compact group, one per class of primitive integer matrices of determinant
p**(2*ell) under left unimodular action.  Classes are parametrized by their
Hermite normal forms [[a, b], [0, d]] with a*d = p**(2*ell), 0 <= b < d and
gcd(a, b, d) = 1, so the volume equals that count.  The closed form
(p+1) * p**(2*ell - 1) is always checked against the count at small sizes,
never trusted alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .config import DEFAULT_CONFIG, Config
from .errors import (
    BudgetExceeded,
    LevelInsufficient,
    NoRecurrenceFound,
    UnsupportedDimension,
)
from .core import prime_factorization


def _require_sl2(n_dim: int) -> None:
    if n_dim != 2:
        raise UnsupportedDimension(
            f"volume formulas are implemented for 2x2 matrices, got n_dim={n_dim}"
        )


@lru_cache(maxsize=None)
def hnf_coset_oracle(p: int, ell: int) -> int:
    """Count primitive Hermite classes [[a, b], [0, d]] of determinant p**(2*ell).

    Literal enumeration over divisor splits a = p**i, d = p**(2*ell-i) and
    residues 0 <= b < d with gcd(a, b, d) = 1.  For huge d the b loop is
    replaced by the equivalent count of residues not divisible by p; the
    closed-form volume expression is never consulted.
    """
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    if ell == 0:
        return 1
    total = 0
    for i in range(2 * ell + 1):
        a = p**i
        d = p ** (2 * ell - i)
        if i == 0 or i == 2 * ell:
            # gcd(a, b, d) = 1 automatically: one of a, d is 1
            total += d
        elif d <= 10**5:
            for b in range(d):
                if math.gcd(math.gcd(a, b), d) == 1:
                    total += 1
        else:
            # primitive iff p does not divide b
            total += d - d // p
    return total


def hnf_representatives(p: int, ell: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """The primitive Hermite matrices themselves, in (a, b, d) scan order."""
    if ell == 0:
        return [((1, 0), (0, 1))]
    reps = []
    for i in range(2 * ell + 1):
        a = p**i
        d = p ** (2 * ell - i)
        for b in range(d):
            if math.gcd(math.gcd(a, b), d) == 1:
                reps.append(((a, b), (0, d)))
    return reps


@lru_cache(maxsize=None)
def _local_volume_checked(p: int, ell: int, crosscheck_limit: int) -> int:
    closed = 1 if ell == 0 else (p + 1) * p ** (2 * ell - 1)
    if p ** (2 * ell) <= crosscheck_limit:
        counted = hnf_coset_oracle(p, ell)
        if counted != closed:
            raise AssertionError(
                f"volume mismatch at (p={p}, ell={ell}): closed {closed}, count {counted}"
            )
    return closed


def local_ball_volume(
    p: int, ell: int, n_dim: int = 2, config: Config = DEFAULT_CONFIG
) -> int:
    """Volume of the norm-p**ell shell: (p+1) * p**(2*ell-1), 1 at ell = 0.

    Cross-checked against the Hermite count whenever p**(2*ell) is within
    the configured crosscheck limit.
    """
    _require_sl2(n_dim)
    if p < 2:
        raise ValueError("p must be a prime >= 2")
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    return _local_volume_checked(p, ell, config.volume_crosscheck_limit)


def finite_volume(n: int, n_dim: int = 2, config: Config = DEFAULT_CONFIG) -> int:
    """Product of local shell volumes over the primes of n; 1 for n = 1."""
    _require_sl2(n_dim)
    if n < 1:
        raise ValueError("n must be a positive integer")
    vol = 1
    for p, a in prime_factorization(n).items():
        vol *= local_ball_volume(p, a, n_dim, config)
    return vol


# ---------------------------------------------------------------------------
# growth of finite volumes


@dataclass(frozen=True)
class GrowthEstimate:
    samples: tuple[tuple[int, int], ...]  # (n, volume)
    fitted_exponent: float | None
    window: tuple[int, int]
    degenerate: bool


def growth_exponent(
    n_max: int,
    restrict_primes: frozenset[int] | set[int] | None = None,
    n_dim: int = 2,
    config: Config = DEFAULT_CONFIG,
) -> GrowthEstimate:
    """Least-squares slope of log volume against log n over 1 <= n <= n_max.

    With ``restrict_primes`` only moduli whose prime factors all lie in the
    given set are sampled.  The n = 1 sample is recorded but excluded from
    the fit, and fewer than two usable samples yields a degenerate estimate
    with no fitted slope.
    """
    _require_sl2(n_dim)
    if n_max < 1:
        raise ValueError("n_max must be positive")
    # smallest prime factor sieve, so factoring all n is linearithmic
    spf = list(range(n_max + 1))
    for p in range(2, int(n_max**0.5) + 1):
        if spf[p] == p:
            for m in range(p * p, n_max + 1, p):
                if spf[m] == m:
                    spf[m] = p
    samples = []
    for n in range(1, n_max + 1):
        m = n
        fac: dict[int, int] = {}
        while m > 1:
            p = spf[m]
            fac[p] = fac.get(p, 0) + 1
            m //= p
        if restrict_primes is not None and any(
            p not in restrict_primes for p in fac
        ):
            continue
        vol = 1
        for p, a in fac.items():
            vol *= local_ball_volume(p, a, n_dim, config)
        samples.append((n, vol))
    fit_pts = [
        (math.log(n), math.log(vol)) for n, vol in samples if n >= 2
    ]
    if len(fit_pts) < 2:
        return GrowthEstimate(
            samples=tuple(samples),
            fitted_exponent=None,
            window=(1, n_max),
            degenerate=True,
        )
    mx = sum(x for x, _ in fit_pts) / len(fit_pts)
    my = sum(y for _, y in fit_pts) / len(fit_pts)
    sxx = sum((x - mx) ** 2 for x, _ in fit_pts)
    sxy = sum((x - mx) * (y - my) for x, y in fit_pts)
    return GrowthEstimate(
        samples=tuple(samples),
        fitted_exponent=sxy / sxx,
        window=(1, n_max),
        degenerate=False,
    )


# ---------------------------------------------------------------------------
# rationality of the volume generating sequence


@dataclass(frozen=True)
class RecurrenceReport:
    p: int
    length: int
    order: int
    coefficients: tuple[Fraction, ...]
    start_index: int
    verified: bool


def fit_linear_recurrence(
    seq, max_order: int = 3, start_index: int = 0
) -> tuple[int, tuple[Fraction, ...]]:
    """Smallest-order exact linear recurrence valid from start_index on.

    Returns (order, coefficients c_1..c_k) with
    seq[i] = c_1*seq[i-1] + ... + c_k*seq[i-k] for all i >= start_index + k.
    Raises NoRecurrenceFound if nothing of order <= max_order fits.
    """
    tail = [Fraction(x) for x in seq[start_index:]]
    for k in range(1, max_order + 1):
        if len(tail) < 2 * k:
            break
        # solve the k x k system from the first 2k terms by elimination
        rows = [tail[i : i + k] + [tail[i + k]] for i in range(k)]
        coeffs = _solve_exact(rows)
        if coeffs is None:
            continue
        ok = all(
            tail[i + k] == sum(coeffs[j] * tail[i + k - 1 - j] for j in range(k))
            for i in range(len(tail) - k)
        )
        if ok:
            return k, tuple(coeffs)
    raise NoRecurrenceFound(
        f"no linear recurrence of order <= {max_order} fits the sequence"
    )


def _solve_exact(rows):
    """Gaussian elimination over the rationals; None when singular.

    Row i encodes seq[i..i+k-1] and the target seq[i+k]; unknowns are the
    recurrence coefficients applied to the most recent terms first.
    """
    k = len(rows)
    # reorder each row so column j multiplies c_{j+1} (most recent term first)
    mat = [[Fraction(r[k - 1 - j]) for j in range(k)] + [Fraction(r[k])] for r in rows]
    for col in range(k):
        piv = next((r for r in range(col, k) if mat[r][col] != 0), None)
        if piv is None:
            return None
        mat[col], mat[piv] = mat[piv], mat[col]
        inv = 1 / mat[col][col]
        mat[col] = [x * inv for x in mat[col]]
        for r in range(k):
            if r != col and mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[col])]
    return [mat[j][k] for j in range(k)]


def poincare_rationality_check(
    p: int,
    length: int,
    max_order: int = 3,
    n_dim: int = 2,
    config: Config = DEFAULT_CONFIG,
) -> RecurrenceReport:
    """Fit an exact recurrence to the shell volumes v(0..length).

    The constant-coefficient recurrence certifies rationality of the
    generating function; for the 2x2 group the tail ell >= 1 satisfies
    v(ell+1) = p**2 * v(ell).
    """
    _require_sl2(n_dim)
    seq = [local_ball_volume(p, ell, n_dim, config) for ell in range(length + 1)]
    # v(0) = 1 sits off the geometric tail, so fit from index 1
    start = 1 if length >= 1 else 0
    order, coeffs = fit_linear_recurrence(seq, max_order=max_order, start_index=start)
    return RecurrenceReport(
        p=p,
        length=length,
        order=order,
        coefficients=coeffs,
        start_index=start,
        verified=True,
    )


# ---------------------------------------------------------------------------
# spherical decay integrand


def _valuation_capped(c: int, p: int, cap: int) -> int:
    """p-adic valuation of c as a residue mod p**cap; cap means 'at least cap'."""
    if c % p**cap == 0:
        return cap
    v = 0
    while c % p == 0:
        c //= p
        v += 1
    return v


def _xi_column_sum(p: int, ell: int, level_exp: int) -> tuple[Fraction, bool]:
    """Average the Iwasawa height over primitive first columns mod p**level_exp.

    A compact-group element contributes through its first column only: the
    upper-triangular part of diag(p**ell, p**-ell) * u has corner entry a
    with |a|_p = max norm of the column (p**ell * u11, p**-ell * u21), so the
    integrand is p ** min(ell + val(u11), val(u21) - ell).  The average over
    the group at a principal congruence level equals the average over
    primitive columns because the group permutes them transitively with
    fibers of equal size.

    Returns (value, resolved); resolved is False when some residue class
    leaves the min ambiguous at this level.
    """
    level = p**level_exp
    total = Fraction(0)
    count = 0
    powers = {k: Fraction(p) ** k for k in range(-ell, ell + 1)}
    for c1 in range(level):
        a = _valuation_capped(c1, p, level_exp)
        for c2 in range(level):
            b = _valuation_capped(c2, p, level_exp)
            if a >= 1 and b >= 1:
                continue  # not primitive
            t1 = ell + a
            t2 = b - ell
            # a capped valuation leaves the min ambiguous only if the other
            # term exceeds the cap's guaranteed floor
            if a >= level_exp and ell + level_exp < t2:
                return Fraction(0), False
            if b >= level_exp and level_exp - ell < t1:
                return Fraction(0), False
            e = min(t1, t2)
            total += powers[e] if e in powers else Fraction(p) ** e
            count += 1
    return total / count, True


def harish_chandra_xi(
    p: int, ell: int, n_dim: int = 2, config: Config = DEFAULT_CONFIG
) -> Fraction:
    """Exact spherical decay value at the diagonal element diag(p**ell, p**-ell).

    Integral over the compact group of the inverse square root of the Borel
    modulus of the upper-triangular Iwasawa component, computed as an exact
    coset average at principal congruence level p**(2*ell).  If a level ever
    fails to resolve the integrand it is escalated once, then
    LevelInsufficient is raised.
    """
    _require_sl2(n_dim)
    if p < 2 or ell < 0:
        raise ValueError("need a prime p and nonnegative ell")
    if ell == 0:
        return Fraction(1)
    for level_exp in (2 * ell, 2 * ell + 1):
        value, resolved = _xi_column_sum(p, ell, level_exp)
        if resolved:
            return value
    raise LevelInsufficient(
        f"integrand for (p={p}, ell={ell}) unresolved at level p**{2 * ell + 1}"
    )


def harish_chandra_xi_group_oracle(p: int, ell: int, max_group_size: int = 10**6) -> Fraction:
    """Reference computation averaging over the full congruence quotient.

    Enumerates every 2x2 determinant-1 matrix mod p**(2*ell) and averages the
    same integrand over them.  Exponential in ell, so only for cross-checks.
    """
    if ell == 0:
        return Fraction(1)
    m = p ** (2 * ell)
    # |SL2(Z/m)| = m**3 * (1 - p**-2), exactly
    order = m**3 * (p * p - 1) // (p * p)
    if order > max_group_size:
        raise BudgetExceeded(f"group of order {order} exceeds {max_group_size}")
    total = Fraction(0)
    count = 0
    for a in range(m):
        g = math.gcd(a, m)
        av = _valuation_capped(a, p, 2 * ell)
        for b in range(m):
            for c in range(m):
                # number of d with a*d == 1 + b*c (mod m) is g when g divides
                # the right side, else zero; the integrand ignores b and d
                if (1 + b * c) % g:
                    continue
                cv = _valuation_capped(c, p, 2 * ell)
                e = min(ell + av, cv - ell)
                total += g * Fraction(p) ** e
                count += g
    assert count == order
    return total / count
