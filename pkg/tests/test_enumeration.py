"""Point enumeration: oracle vs optimized, frozen cells, JSONL round trip."""

import dataclasses
import io
import random
from fractions import Fraction

import pytest

from slnapprox.config import DEFAULT_CONFIG
from slnapprox.core import BallSpec, ball_membership, reduce
from slnapprox.enumeration import (
    count_table,
    entry_bounds,
    enumerate_points,
    power_epsilon_rule,
    read_jsonl_points,
    write_jsonl,
)
from slnapprox.errors import SearchSpaceTooLarge, UnsupportedDimension

F = Fraction

IDENTITY = ((F(1), F(0)), (F(0), F(1)))

# den-2 points within distance 1/2 of the identity, found by exhaustive scan
CELL_N2_HALF = [
    (1, -1, 1, 3),
    (1, 1, -1, 3),
    (2, -1, 0, 2),
    (2, 0, -1, 2),
    (2, 0, 1, 2),
    (2, 1, 0, 2),
    (3, -1, 1, 1),
    (3, 1, -1, 1),
]


def flats(result):
    return [z.flat_numerator() for z in result.points]


class TestFrozenCells:
    def test_eight_point_cell(self):
        ball = BallSpec.make(IDENTITY, F(1, 2), 2)
        res = enumerate_points(ball, strategy="oracle")
        assert res.count == 8
        assert flats(res) == CELL_N2_HALF

    def test_named_members_present(self):
        ball = BallSpec.make(IDENTITY, F(1, 2), 2)
        pts = set(enumerate_points(ball).points)
        assert reduce(((1, F(1, 2)), (0, 1))) in pts
        assert reduce(((1, F(-1, 2)), (0, 1))) in pts
        assert reduce(((1, 0), (F(1, 2), 1))) in pts
        assert reduce(((1, 0), (F(-1, 2), 1))) in pts
        diag = [z for z in pts if sorted((z.u[0][0], z.u[1][1])) == [1, 3]]
        assert len(diag) == 4

    def test_smaller_radius_is_empty(self):
        ball = BallSpec.make(IDENTITY, F(2, 5), 2)
        for strategy in ("oracle", "optimized"):
            assert enumerate_points(ball, strategy=strategy).count == 0

    def test_integral_ball_contains_identity(self):
        ball = BallSpec.make(IDENTITY, F(2), 1)
        res = enumerate_points(ball, strategy="oracle")
        assert reduce(IDENTITY) in set(res.points)


class TestStrategyEquivalence:
    def test_matrix_of_cells(self):
        # 24 cells, n up to 50, identical point lists both ways; the radius
        # shrinks with n to keep the oracle box at unit-test scale
        rng = random.Random(7)
        centers = [IDENTITY]
        for _ in range(3):
            a = F(rng.randrange(-2, 3), 4)
            b = F(rng.randrange(-2, 3), 4)
            centers.append(((1 + a, b), (F(0), 1 / (1 + a))))
        radius = {2: F(3, 5), 3: F(3, 5), 7: F(3, 5), 25: F(1, 4), 36: F(1, 5), 50: F(3, 20)}
        cells = nonempty = 0
        for center in centers:
            for n, eps in radius.items():
                ball = BallSpec.make(center, eps, n)
                fast = enumerate_points(ball, strategy="optimized")
                slow = enumerate_points(ball, strategy="oracle")
                assert flats(fast) == flats(slow)
                cells += 1
                nonempty += bool(fast.count)
        assert cells >= 20
        assert nonempty >= 10

    def test_both_strategy_checks_internally(self):
        ball = BallSpec.make(IDENTITY, F(1, 2), 2)
        res = enumerate_points(ball, strategy="both")
        assert res.count == 8

    def test_unknown_strategy(self):
        ball = BallSpec.make(IDENTITY, F(1, 2), 2)
        with pytest.raises(ValueError):
            enumerate_points(ball, strategy="fast")

    def test_optimized_rejects_3x3(self):
        center3 = tuple(
            tuple(F(1) if i == j else F(0) for j in range(3)) for i in range(3)
        )
        ball = BallSpec.make(center3, F(1, 2), 2)
        with pytest.raises(UnsupportedDimension):
            enumerate_points(ball, strategy="optimized")

    def test_oracle_handles_3x3(self):
        center3 = tuple(
            tuple(F(1) if i == j else F(0) for j in range(3)) for i in range(3)
        )
        ball = BallSpec.make(center3, F(1, 2), 1)
        res = enumerate_points(ball, strategy="oracle")
        assert res.count == 1


class TestResultContract:
    def test_membership_and_denominator(self):
        for n in (2, 3, 6, 10):
            ball = BallSpec.make(IDENTITY, F(3, 4), n)
            res = enumerate_points(ball)
            for z in res.points:
                z.validate()
                assert z.den == n
                assert ball_membership(z, ball)

    def test_canonical_order_no_duplicates(self):
        ball = BallSpec.make(IDENTITY, F(3, 4), 6)
        fs = flats(enumerate_points(ball))
        assert fs == sorted(fs)
        assert len(fs) == len(set(fs))

    def test_ball_closure_monotone(self):
        small = enumerate_points(BallSpec.make(IDENTITY, F(1, 2), 6))
        large = enumerate_points(BallSpec.make(IDENTITY, F(4, 5), 6))
        assert set(small.points) <= set(large.points)
        assert small.count <= large.count

    def test_chunk_size_irrelevant(self):
        ball = BallSpec.make(IDENTITY, F(3, 4), 10)
        baseline = flats(enumerate_points(ball, chunk=64))
        for chunk in (1, 3, 1000):
            assert flats(enumerate_points(ball, chunk=chunk)) == baseline

    def test_budget_enforced(self):
        tight = dataclasses.replace(
            DEFAULT_CONFIG, oracle_cell_budget=10, optimized_row_budget=10
        )
        ball = BallSpec.make(IDENTITY, F(1, 2), 100)
        for strategy in ("oracle", "optimized"):
            with pytest.raises(SearchSpaceTooLarge) as info:
                enumerate_points(ball, strategy=strategy, config=tight)
            assert info.value.budget == 10
            assert info.value.needed > 10


class TestEntryBounds:
    def test_exact_closed_intervals(self):
        ball = BallSpec.make(IDENTITY, F(1, 2), 2)
        assert entry_bounds(ball) == [
            [(1, 3), (-1, 1)],
            [(-1, 1), (1, 3)],
        ]


class TestCountTable:
    def test_fixed_epsilon_rows(self):
        rows = count_table(IDENTITY, [2, 3, 5], F(1, 2))
        assert [r.count for r in rows] == [8, 8, 16]
        assert all(r.skipped is None for r in rows)
        # counts ordered like the finite volumes 6, 12, 30
        assert rows[0].count <= rows[1].count <= rows[2].count

    def test_integral_count_is_one(self):
        rows = count_table(IDENTITY, [1], F(1, 2))
        assert rows[0].count == 1

    def test_empty_n_list(self):
        assert count_table(IDENTITY, [], F(1, 2)) == []

    def test_callable_rule(self):
        rows = count_table(IDENTITY, [2], lambda n: F(1, n))
        assert rows[0].epsilon == F(1, 2)
        assert rows[0].count == 8

    def test_power_rule_snaps(self):
        rule = power_epsilon_rule(0.25)
        eps = rule(2)
        # finite volume at n=2 is 6; 6**-0.25 is about 0.639
        assert F(3, 5) < eps < F(2, 3)

    def test_skipped_rows_marked(self):
        tight = dataclasses.replace(DEFAULT_CONFIG, optimized_row_budget=10)
        rows = count_table(IDENTITY, [2, 1000], F(1, 2), config=tight)
        assert rows[0].count == 8
        assert rows[1].count is None
        assert "budget" in rows[1].skipped


class TestJsonl:
    def test_round_trip_with_summary(self):
        ball = BallSpec.make(IDENTITY, F(1, 2), 2)
        res = enumerate_points(ball)
        buf = io.StringIO()
        write_jsonl(res, buf)
        lines = buf.getvalue().strip().splitlines()
        assert len(lines) == 9
        assert '"count":8' in lines[-1]
        assert '"strategy":"optimized"' in lines[-1]
        buf.seek(0)
        assert read_jsonl_points(buf) == list(res.points)
