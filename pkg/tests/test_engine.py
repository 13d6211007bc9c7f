"""Exponent thresholds, witness search, counting ratio verification."""

import dataclasses
import random
from fractions import Fraction

import pytest

from slnapprox.config import DEFAULT_CONFIG, Config
from slnapprox.core import (
    ball_membership,
    BallSpec,
    family_from_preset,
    identity_matrix,
    to_fraction_matrix,
)
from slnapprox.engine import (
    BOUNDED_CENTERS,
    counting_verification,
    find_witness,
    exponent_parameters,
)
from slnapprox.enumeration import enumerate_points
from slnapprox.errors import AlphaTooLarge, NoWitness, ZeroValue
from slnapprox.sieve import coprime_part
from slnapprox.volumes import finite_volume

F = Fraction

IDENTITY = to_fraction_matrix(identity_matrix(2))
ENTRY11 = family_from_preset("entry11")
SPHERICAL_CONFIG = Config(r_g=2)  # derived integrability exponent 1


class TestExponentParameters:
    def test_frozen_spherical_instance(self):
        par = exponent_parameters(0.1, config=SPHERICAL_CONFIG)
        assert par.iota == 1
        assert par.alpha0 == F(1, 6)
        assert par.alpha == F(1, 10)
        assert par.r == 720
        assert par.kappa == F(1, 2)
        assert par.tau0 == F(1, 136)

    def test_frozen_default_instance(self):
        par = exponent_parameters(0.05)
        assert par.iota == 2
        assert par.alpha0 == F(1, 12)
        assert par.r == 1440

    def test_decimal_float_is_exact(self):
        # 0.1 must mean 1/10; the raw binary value would inflate r to 721
        par = exponent_parameters(0.1, config=SPHERICAL_CONFIG)
        assert par.alpha == F(1, 10)
        assert par.r == 720

    def test_restricted_threshold(self):
        par = exponent_parameters(0.1, config=SPHERICAL_CONFIG)
        assert par.alpha0_restricted == F(1, 6) * 2  # a / (2 iota d)
        par2 = exponent_parameters(0.1, config=SPHERICAL_CONFIG, a_restricted=1)
        assert par2.alpha0_restricted == F(1, 6)

    def test_boundary_rejected(self):
        with pytest.raises(AlphaTooLarge) as info:
            exponent_parameters(F(1, 6), config=SPHERICAL_CONFIG)
        assert info.value.alpha0 == F(1, 6)
        with pytest.raises(AlphaTooLarge):
            exponent_parameters(F(1, 2))

    def test_invalid_ranges(self):
        with pytest.raises(ValueError):
            exponent_parameters(0)
        with pytest.raises(ValueError):
            exponent_parameters(-0.1)
        with pytest.raises(ValueError):
            exponent_parameters(0.01, t=0)
        with pytest.raises(ValueError):
            exponent_parameters(0.01, d=0)
        with pytest.raises(ValueError):
            exponent_parameters(0.01, delta_n=-1)

    def test_bound_formula_random(self):
        rng = random.Random(14)
        for _ in range(100):
            t = rng.randrange(1, 4)
            deg = rng.randrange(1, 5)
            dn = rng.randrange(0, 3)
            alpha = F(rng.randrange(1, 12), 144)
            try:
                par = exponent_parameters(alpha, t=t, deg_f=deg, delta_n=dn)
            except AlphaTooLarge:
                assert alpha >= F(1, 12)
                continue
            denom = F(1, 2) / 4 * 2 - alpha * 3  # a/(4 iota) with a=2, iota=2
            lower = F(9 * t * deg * 16) / denom
            assert par.r - dn - 1 < lower <= par.r - dn
            assert 0 < par.alpha < par.alpha0

    def test_kappa_tau_positive_inside_range(self):
        for num in range(1, 12):
            par = exponent_parameters(F(num, 144))
            assert par.kappa > 0
            assert par.tau0 > 0


class TestFindWitness:
    def test_minimal_factor_count_wins(self):
        rec = find_witness(IDENTITY, 2, 1.0, ENTRY11)
        assert rec.candidates == 8
        assert rec.factor_count == 0
        assert rec.epsilon == F(1, 2)
        assert rec.z.den == 2
        assert rec.distance <= rec.epsilon

    def test_witness_is_certified_best(self):
        rec = find_witness(IDENTITY, 6, 0.4, ENTRY11)
        ball = BallSpec.make(IDENTITY, rec.epsilon, 6)
        assert ball_membership(rec.z, ball)
        for z in enumerate_points(ball).points:
            prod = F(1)
            for val in ENTRY11.values(z):
                prod *= val
            if prod == 0:
                continue
            assert rec.factor_count <= coprime_part(prod, 6).factor_count

    def test_integral_target(self):
        rec = find_witness(IDENTITY, 1, 0.5, ENTRY11)
        assert rec.z.den == 1
        assert rec.factor_count == 0

    def test_no_witness_reports_probe(self):
        with pytest.raises(NoWitness) as info:
            find_witness(IDENTITY, 2, 2.0, ENTRY11)
        assert info.value.requested_radius == F(1, 4)
        assert info.value.smallest_radius == F(1, 2)

    def test_all_zero_values(self):
        trace = family_from_preset("trace-minus-2")
        with pytest.raises(ZeroValue):
            find_witness(IDENTITY, 2, 1.0, trace)

    def test_rejects_bad_modulus(self):
        with pytest.raises(ValueError):
            find_witness(IDENTITY, 0, 1.0, ENTRY11)

    def test_quality_monotone_in_radius(self):
        # a wider ball can only improve the minimal factor count
        wide = find_witness(IDENTITY, 30, 0.2, ENTRY11)
        narrow = find_witness(IDENTITY, 30, 0.3, ENTRY11)
        assert narrow.epsilon < wide.epsilon
        assert wide.factor_count <= narrow.factor_count


class TestCountingVerification:
    def test_single_cell_spread_is_one(self):
        rep = counting_verification([IDENTITY], [53], F(1, 2), count_threshold=100)
        assert rep.significant_cells == 1
        assert rep.spread == 1
        row = rep.rows[0]
        assert row.T == enumerate_points(BallSpec.make(IDENTITY, F(1, 2), 53)).count
        assert row.ratio == F(row.T) / (finite_volume(53))
        assert isinstance(row.ratio, F)

    def test_insignificant_cells_excluded(self):
        rep = counting_verification([IDENTITY], [2], F(1, 2), count_threshold=1000)
        assert rep.rows[0].T == 8
        assert not rep.rows[0].significant
        assert rep.spread is None
        assert rep.not_significant

    def test_budget_skip_marked(self):
        tight = dataclasses.replace(DEFAULT_CONFIG, optimized_row_budget=100)
        rep = counting_verification(
            [IDENTITY], [97], F(1, 2), count_threshold=10, config=tight
        )
        assert rep.rows[0].skipped is not None
        assert rep.rows[0].T is None
        assert rep.spread is None

    def test_bounded_centers_are_unimodular(self):
        assert len(BOUNDED_CENTERS) == 5
        for c in BOUNDED_CENTERS:
            det = c[0][0] * c[1][1] - c[0][1] * c[1][0]
            assert det == 1

    def test_two_cell_spread(self):
        rep = counting_verification(
            [IDENTITY], [53, 59], F(1, 2), count_threshold=100
        )
        assert rep.significant_cells == 2
        ratios = [row.ratio for row in rep.rows]
        assert rep.spread == max(ratios) / min(ratios)
        assert rep.spread >= 1
