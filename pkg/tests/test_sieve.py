"""Coprime parts, almost-prime counting, axiom checks, the lower bound."""

import dataclasses
import json
import math
import random
from fractions import Fraction

import pytest

from slnapprox.config import DEFAULT_CONFIG
from slnapprox.core import BallSpec, family_from_preset, reduce
from slnapprox.densities import density_table
from slnapprox.enumeration import enumerate_points
from slnapprox.errors import MissingDensities, ZeroValue
from slnapprox.sieve import (
    almost_prime_count,
    axiom_report,
    beta_sieve_lower_bound,
    congruence_count_direct,
    coprime_part,
    is_r_prime,
    run_sieve,
    sieve_report_to_json_dict,
    sieving_primes,
    squarefree_moduli,
    value_histogram,
)

F = Fraction

IDENTITY = ((F(1), F(0)), (F(0), F(1)))
ENTRY11 = family_from_preset("entry11")


@pytest.fixture(scope="module")
def cell8():
    """The eight denominator-2 points within 1/2 of the identity."""
    return enumerate_points(BallSpec.make(IDENTITY, F(1, 2), 2))


@pytest.fixture(scope="module")
def rho_small():
    return density_table(ENTRY11, [3, 5, 7, 11, 13])


class TestCoprimePart:
    def test_unit_value(self):
        sv = coprime_part(F(1, 6), 6)
        assert sv.coprime_part == 1
        assert sv.factor_count == 0
        assert sv.complete

    def test_strips_only_modulus_primes(self):
        sv = coprime_part(F(3, 2), 2)
        assert sv.coprime_part == 3
        assert sv.factors == ((3, 1),)
        assert sv.factor_count == 1

    def test_twelve_at_coprime_modulus(self):
        sv = coprime_part(F(12), 35)
        assert sv.coprime_part == 12
        assert sv.factor_count == 3  # 2, 2, 3

    def test_zero_rejected(self):
        with pytest.raises(ZeroValue):
            coprime_part(F(0), 2)

    def test_factor_count_additive(self):
        rng = random.Random(10)
        for _ in range(30):
            a = rng.randrange(2, 10**4)
            b = rng.randrange(2, 10**4)
            if math.gcd(a, b) != 1:
                continue
            fa = coprime_part(F(a), 1)
            fb = coprime_part(F(b), 1)
            fab = coprime_part(F(a * b), 1)
            assert fab.factor_count == fa.factor_count + fb.factor_count

    def test_incomplete_factorization_lower_bound(self):
        stingy = dataclasses.replace(
            DEFAULT_CONFIG, factor_trial_limit=10, factor_bit_budget=8
        )
        m = 10007 * 10009
        sv = coprime_part(F(m), 1, config=stingy)
        assert not sv.complete
        assert sv.cofactor == m
        assert sv.factor_count == 2  # composite cofactor counts at least 2


class TestIsRPrime:
    def test_unit_value_is_zero_prime(self):
        z = reduce(((F(1, 6), 1), (F(5, 6), 11)))
        assert is_r_prime(z, ENTRY11, 6, 0) is True

    def test_semiprime_value(self):
        m = 101 * 103
        z = reduce(((m, 1), (m * m - 1, m)))
        assert is_r_prime(z, ENTRY11, 2, 2) is True
        assert is_r_prime(z, ENTRY11, 2, 1) is False

    def test_incomplete_factorization_indeterminate(self):
        stingy = dataclasses.replace(
            DEFAULT_CONFIG, factor_trial_limit=10, factor_bit_budget=8
        )
        m = 10007 * 10009
        z = reduce(((m, 1), (m * m - 1, m)))
        assert is_r_prime(z, ENTRY11, 1, 2, config=stingy) is None
        assert is_r_prime(z, ENTRY11, 1, 1, config=stingy) is False


class TestSievingPrimes:
    def test_excludes_modulus_primes(self):
        assert sieving_primes(10, 2) == (3, 5, 7)
        assert sieving_primes(10, 1) == (2, 3, 5, 7)
        assert sieving_primes(10, 2, delta=3) == (5, 7)

    def test_below_two_is_empty(self):
        assert sieving_primes(1, 2) == ()

    def test_squarefree_moduli(self):
        assert squarefree_moduli(10, 2) == [1, 3, 5, 7]
        assert squarefree_moduli(10, 1) == [1, 2, 3, 5, 6, 7, 10]


class TestHistogramAndCounts:
    def test_cell_histogram(self, cell8):
        a = value_histogram(cell8, ENTRY11, 2)
        assert dict(a) == {1: 6, 3: 2}

    def test_zero_values_collect_at_zero(self, cell8):
        trace = family_from_preset("trace-minus-2")
        a = value_histogram(cell8, trace, 2)
        assert dict(a) == {0: 8}  # every point here has trace 2

    def test_dual_route_congruence_counts(self, cell8):
        a = value_histogram(cell8, ENTRY11, 2)
        for q in (1, 3, 5, 7, 9):
            via_hist = sum(cnt for k, cnt in a.items() if k % q == 0)
            assert congruence_count_direct(cell8, ENTRY11, q) == via_hist

    def test_almost_prime_counts(self, cell8):
        assert almost_prime_count(cell8, ENTRY11, 2, z=1) == 8
        assert almost_prime_count(cell8, ENTRY11, 2, z=2) == 8
        assert almost_prime_count(cell8, ENTRY11, 2, z=5) == 6

    def test_count_non_increasing_in_z(self, cell8):
        counts = [
            almost_prime_count(cell8, ENTRY11, 2, z=z) for z in (1, 2, 3, 5, 7, 11)
        ]
        assert counts == sorted(counts, reverse=True)

    def test_zero_policy(self, cell8):
        trace = family_from_preset("trace-minus-2")
        assert almost_prime_count(cell8, trace, 2, z=3) == 0
        assert almost_prime_count(cell8, trace, 2, z=3, zero_policy="include") == 8
        with pytest.raises(ValueError):
            almost_prime_count(cell8, trace, 2, z=3, zero_policy="drop")


class TestAxiomReport:
    def test_exact_remainders(self, cell8, rho_small):
        rep = axiom_report(cell8, ENTRY11, 5, rho_small, 2)
        assert rep.T == 8
        assert rep.remainder(1) == 0
        assert rep.remainder(3) == 0
        assert rep.remainder(5) == F(-4, 3)

    def test_a1_summary(self, cell8, rho_small):
        rep = axiom_report(cell8, ENTRY11, 5, rho_small, 2)
        assert rep.a1_sum_abs == F(4, 3)
        expect = 1.0 - math.log(4 / 3) / math.log(8)
        assert abs(rep.a1_zeta - expect) < 1e-12

    def test_a2_bracket(self, cell8, rho_small):
        rep = axiom_report(cell8, ENTRY11, 5, rho_small, 2)
        assert rep.a2_rows
        devs = [d for _, d in rep.a2_rows]
        assert rep.a2_l == max(0.0, -min(devs))
        assert rep.a2_c3 == max(0.0, max(devs))
        assert rep.a2_l >= 0 and rep.a2_c3 >= 0

    def test_empty_cell(self, rho_small):
        rep = axiom_report([], ENTRY11, 5, rho_small, 2)
        assert rep.T == 0
        assert all(r == 0 for _, r in rep.remainders)
        assert rep.a1_zeta is None

    def test_missing_density_raises(self, cell8):
        sparse = density_table(ENTRY11, [3])
        with pytest.raises(MissingDensities):
            axiom_report(cell8, ENTRY11, 5, sparse, 2)


class TestLowerBound:
    def test_requires_wide_s(self, rho_small):
        with pytest.raises(ValueError):
            beta_sieve_lower_bound(8, rho_small, 1, tau=0.5, s=9.0, l=0.0)

    def test_degenerate_tiny_cell(self, rho_small):
        b = beta_sieve_lower_bound(1, rho_small, 1, tau=0.5, s=10.0, l=5.0)
        assert b.degenerate
        assert b.value == 1.0  # z = 1, empty product, C1 = 1

    def test_small_z_empty_product(self, rho_small):
        b = beta_sieve_lower_bound(8, rho_small, 1, tau=0.5, s=10.0, l=0.0, n=2)
        assert b.z == 8.0 ** 0.05
        assert b.primes_used == ()
        assert b.W_z == 1
        assert b.value == pytest.approx(8.0)

    def test_exact_w_product(self, rho_small):
        b = beta_sieve_lower_bound(
            8, rho_small, 1, tau=0.5, s=10.0, l=0.0, z=6.0, n=2
        )
        assert b.primes_used == (3, 5)
        assert b.W_z == (1 - F(3, 4) / 3) * (1 - F(5, 6) / 5)
        assert not b.vacuous

    def test_large_l_goes_vacuous(self, rho_small):
        b = beta_sieve_lower_bound(8, rho_small, 1, tau=0.5, s=10.0, l=50.0, n=2)
        assert b.vacuous
        assert b.value < 0

    def test_input_validation(self, rho_small):
        with pytest.raises(ValueError):
            beta_sieve_lower_bound(8, rho_small, 1, tau=-1.0, s=10.0, l=0.0)
        with pytest.raises(ValueError):
            beta_sieve_lower_bound(-1, rho_small, 1, tau=0.5, s=10.0, l=0.0)


class TestRunSieve:
    def test_consistent_on_cell(self, cell8, rho_small):
        rep = run_sieve(cell8, ENTRY11, 2, rho_small, tau=0.5, s=10.0)
        assert rep.T == 8
        assert rep.consistent
        if not rep.vacuous:
            assert rep.lower_bound <= rep.direct_count

    def test_remainder_identity_at_one(self, cell8, rho_small):
        rep = run_sieve(cell8, ENTRY11, 2, rho_small, tau=0.5, s=10.0, q_max=5)
        assert rep.axioms.remainder(1) == 0

    def test_json_round_trip(self, cell8, rho_small):
        rep = run_sieve(cell8, ENTRY11, 2, rho_small, tau=0.5, s=10.0, q_max=5)
        d = sieve_report_to_json_dict(rep)
        blob = json.loads(json.dumps(d))
        assert blob["T"] == 8
        assert blob["W_z"] == {"num": "1", "den": "1"}
        r5 = [r for r in blob["remainders"] if r["q"] == 5]
        assert r5 == [{"q": 5, "R": {"num": "-4", "den": "3"}}]
