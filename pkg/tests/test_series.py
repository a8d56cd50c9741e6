import random
from fractions import Fraction

import pytest

from certheat.errors import PreconditionError
from certheat.series import (TruncationPlan, arith_geom_sum, choose_K_disk,
                             geometric_tail, higher_arith_geom)


def brute_arith_geom(m: int, x: Fraction, tol: Fraction) -> Fraction:
    """Partial summation oracle; stops when the geometric tail is below tol."""
    total = Fraction(0)
    k = m
    while True:
        total += (k + 1) * x ** k
        # tail bound: (k+2) |x|^(k+1) / (1-|x|)^2
        if (k + 2) * abs(x) ** (k + 1) / (1 - abs(x)) ** 2 < tol:
            return total
        k += 1


def brute_higher(m: int, p: int, x: Fraction, tol: Fraction) -> Fraction:
    total = Fraction(0)
    k = m
    while True:
        rising = 1
        for i in range(1, p + 1):
            rising *= k + i
        total += rising * x ** k
        if (k + p + 1) ** p * abs(x) ** (k + 1) / (1 - abs(x)) ** 2 < tol:
            return total
        k += 1


TOL = Fraction(1, 10**15)


def test_arith_geom_frozen_examples():
    assert arith_geom_sum(0, Fraction(1, 2)) == 4
    assert arith_geom_sum(1, Fraction(1, 2)) == 3
    assert arith_geom_sum(0, 0) == 1


def test_arith_geom_matches_partial_sums():
    rng = random.Random(314)
    for _ in range(25):
        m = rng.randrange(0, 8)
        x = Fraction(rng.randrange(-7, 8), rng.randrange(8, 16))
        got = arith_geom_sum(m, x)
        assert abs(got - brute_arith_geom(m, x, TOL)) < 2 * TOL


def test_higher_arith_geom_frozen_examples():
    assert higher_arith_geom(0, 0, Fraction(1, 2)) == 2
    assert higher_arith_geom(0, 1, Fraction(1, 2)) == 4
    third = Fraction(1, 3)
    assert abs(higher_arith_geom(3, 2, third) - brute_higher(3, 2, third, TOL)) < 2 * TOL


def test_higher_matches_partial_sums():
    rng = random.Random(2718)
    for _ in range(20):
        m = rng.randrange(0, 6)
        p = rng.randrange(0, 5)
        x = Fraction(rng.randrange(-6, 7), rng.randrange(8, 14))
        got = higher_arith_geom(m, p, x)
        assert abs(got - brute_higher(m, p, x, TOL)) < 2 * TOL


def test_p1_identity_with_arith_geom():
    rng = random.Random(1)
    for _ in range(20):
        m = rng.randrange(0, 10)
        x = Fraction(rng.randrange(-9, 10), rng.randrange(10, 20))
        assert higher_arith_geom(m, 1, x) == arith_geom_sum(m, x)


def test_geometric_tail():
    assert geometric_tail(Fraction(1, 2), 10, 1) == Fraction(1, 512)
    assert geometric_tail(Fraction(1, 2), 0, 3) == 6
    assert geometric_tail(Fraction(9, 10), 100, 1) == Fraction(9, 10) ** 100 * 10
    with pytest.raises(PreconditionError):
        geometric_tail(1, 0, 1)
    with pytest.raises(PreconditionError):
        geometric_tail(0, 0, 1)


def test_choose_K_disk_examples():
    assert choose_K_disk(1, Fraction(1, 2)) == 2
    assert choose_K_disk(8, Fraction(1, 2)) == 5
    assert choose_K_disk(Fraction(3), 0) == 1


def test_choose_K_postcondition_exact():
    cases = [(Fraction(1), Fraction(1, 2)), (Fraction(8), Fraction(1, 2)),
             (Fraction(1, 3), Fraction(7, 9)), (Fraction(100), Fraction(9, 10))]
    for C, r0 in cases:
        K = choose_K_disk(C, r0)
        rK = r0 ** K
        for N in range(1, 65):
            assert C * rK ** N < Fraction(1, 2 ** N)


def test_choose_K_monotone():
    r0 = Fraction(3, 4)
    Ks = [choose_K_disk(Fraction(c), r0) for c in (1, 2, 5, 20, 100)]
    assert Ks == sorted(Ks)
    C = Fraction(5)
    Ks = [choose_K_disk(C, Fraction(num, 10)) for num in range(0, 10)]
    assert Ks == sorted(Ks)


def test_rejects_bad_domains():
    with pytest.raises(PreconditionError):
        arith_geom_sum(0, 1)
    with pytest.raises(PreconditionError):
        arith_geom_sum(0, Fraction(-5, 4))
    with pytest.raises(PreconditionError):
        higher_arith_geom(0, 1, 1)
    with pytest.raises(PreconditionError):
        choose_K_disk(1, 1)


def test_truncation_plan_budget():
    plan = TruncationPlan(order=12, budget_split=[("tail", 18), ("rounding", 18)],
                          justification="test")
    assert plan.total_budget() == Fraction(1, 2 ** 17)
    assert plan.validates(17)
    assert not plan.validates(18)
