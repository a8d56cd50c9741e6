"""Tests for the evaluable-function wrappers."""

import random
from fractions import Fraction

import mpmath as mp
import pytest

from certheat.dyadic import DyadicDecimal, as_fraction
from certheat.evaluable import (TrigPoly, constant_fn, lipschitz_modulus,
                                piecewise_linear_fn, polynomial_fn,
                                sine_modes_fn, trig_poly_fn)

mp.mp.prec = 500


def to_mp(f: Fraction) -> mp.mpf:
    return mp.mpf(f.numerator) / f.denominator


def test_lipschitz_modulus_contract():
    # |f(x)-f(y)| <= 3.7 |x-y|; spacing 2*2^-m(k) must keep variation <= 2^-k
    m = lipschitz_modulus(Fraction(37, 10))
    for k in range(0, 20):
        assert Fraction(37, 10) * 2 * Fraction(1, 2 ** m(k)) <= 2 * Fraction(1, 2 ** k)


def test_trig_poly_eval_vs_mpmath():
    tp = TrigPoly(const=Fraction(1, 3),
                  sin_coeffs={1: Fraction(1, 2), 3: Fraction(-2, 7)},
                  cos_coeffs={2: Fraction(5, 4)})
    rng = random.Random(11)
    for _ in range(25):
        rho = Fraction(rng.randrange(0, 2000), 1000)
        for p in (12, 30):
            cv = tp.eval_cv(rho, p)
            ref = (mp.mpf(1) / 3 + mp.sin(mp.pi * to_mp(rho)) / 2
                   - mp.mpf(2) / 7 * mp.sin(3 * mp.pi * to_mp(rho))
                   + mp.mpf(5) / 4 * mp.cos(2 * mp.pi * to_mp(rho)))
            assert cv.err_fraction() <= Fraction(1, 2 ** p)
            assert abs(to_mp(cv.value_fraction()) - ref) <= to_mp(cv.err_fraction()) + mp.mpf(10) ** -30


def test_trig_poly_bounds():
    tp = TrigPoly(const=Fraction(-1), sin_coeffs={2: Fraction(3)}, cos_coeffs={5: Fraction(-1, 2)})
    assert tp.degree() == 5
    assert tp.coeff_l1() == Fraction(7, 2)
    assert tp.sup_bound() == Fraction(9, 2)
    # pi * (2*3 + 5/2) overestimated with pi <= 4
    assert tp.lipschitz_pi_units() == 34


def test_sine_modes_exact_boundary_zeros():
    fn = sine_modes_fn({1: Fraction(2), 4: Fraction(-1, 3)}, Fraction(1))
    for x in (Fraction(0), Fraction(1)):
        cv = fn.eval_cv(x, 40)
        assert cv.value_fraction() == 0
        assert cv.err_fraction() == 0


def test_sine_modes_vs_mpmath():
    L = Fraction(3, 2)
    fn = sine_modes_fn({2: Fraction(1, 2), 3: Fraction(-1)}, L)
    rng = random.Random(5)
    for _ in range(20):
        x = Fraction(rng.randrange(0, 1500), 1000)
        cv = fn.eval_cv(x, 25)
        ref = mp.sin(2 * mp.pi * to_mp(x / L)) / 2 - mp.sin(3 * mp.pi * to_mp(x / L))
        assert cv.err_fraction() <= Fraction(1, 2 ** 25)
        assert abs(to_mp(cv.value_fraction()) - ref) <= to_mp(cv.err_fraction()) + mp.mpf(10) ** -30


def test_piecewise_linear_exact_interpolation():
    pts = [(Fraction(0), Fraction(0)), (Fraction(1, 2), Fraction(1)), (Fraction(1), Fraction(0))]
    fn = piecewise_linear_fn(pts)
    assert fn.eval_exact(Fraction(1, 4)) == Fraction(1, 2)
    assert fn.eval_exact(Fraction(1, 2)) == 1
    assert fn.eval_exact(Fraction(7, 8)) == Fraction(1, 4)
    assert fn.sup_bound == 1
    with pytest.raises(ValueError):
        fn.eval_exact(Fraction(3, 2))


def test_piecewise_linear_rejects_bad_nodes():
    with pytest.raises(ValueError):
        piecewise_linear_fn([(Fraction(0), Fraction(1))])
    with pytest.raises(ValueError):
        piecewise_linear_fn([(Fraction(0), Fraction(1)), (Fraction(0), Fraction(2))])


def test_polynomial_matches_fraction_horner():
    cs = [Fraction(1), Fraction(-2), Fraction(0), Fraction(1, 3)]
    fn = polynomial_fn(cs, (Fraction(-1), Fraction(2)))
    rng = random.Random(3)
    for _ in range(30):
        x = Fraction(rng.randrange(-1000, 2001), 1000)
        want = sum(c * x ** i for i, c in enumerate(cs))
        assert fn.eval_exact(x) == want
    assert fn.sup_bound >= max(abs(fn.eval_exact(Fraction(v, 100))) for v in range(-100, 201))


def test_constant_fn():
    fn = constant_fn(Fraction(5, 7), (Fraction(0), Fraction(1)))
    assert fn.eval_exact(Fraction(1, 3)) == Fraction(5, 7)
    assert fn.sup_bound == Fraction(5, 7)


def test_public_eval_contract():
    # |eval(d, n) - f(value(d))| <= 2^-n with the declared output precision
    fn = piecewise_linear_fn([(Fraction(0), Fraction(0)), (Fraction(1), Fraction(1, 3))])
    d = DyadicDecimal.parse("+.1")
    out = fn.eval(d, 8)
    assert out.pcs >= 8
    assert abs(out.as_fraction() - Fraction(1, 6)) <= Fraction(1, 2 ** 8)


def test_segment_grid_clipping():
    fn = piecewise_linear_fn([(Fraction(0), Fraction(1)), (Fraction(1, 4), Fraction(0)),
                              (Fraction(3, 4), Fraction(2)), (Fraction(1), Fraction(1))])
    assert fn.segment_grid(Fraction(0), Fraction(1)) == \
        [Fraction(0), Fraction(1, 4), Fraction(3, 4), Fraction(1)]
    assert fn.segment_grid(Fraction(1, 8), Fraction(1, 2)) == \
        [Fraction(1, 8), Fraction(1, 4), Fraction(1, 2)]
    # uniform grid declared only through a segment count
    fn2 = sine_modes_fn({1: Fraction(1)}, Fraction(1))
    fn2.linear_segments = 4
    assert fn2.segment_grid(Fraction(0), Fraction(1)) == \
        [Fraction(k, 4) for k in range(5)]
    assert fn2.segment_grid(Fraction(1, 8), Fraction(5, 8)) == \
        [Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), Fraction(5, 8)]


def test_modulus_property_random_pairs():
    tp = TrigPoly(sin_coeffs={2: Fraction(1)}, cos_coeffs={1: Fraction(1, 2)})
    fn = trig_poly_fn(tp)
    rng = random.Random(17)
    for _ in range(40):
        k = rng.randrange(0, 12)
        m = fn.modulus(k)
        x = Fraction(rng.randrange(0, 2 * 10 ** 6), 10 ** 6)
        # |x - y| <= 2^-m(k) must force |f(x) - f(y)| <= 2^-k
        step = Fraction(rng.randrange(-(2 ** m), 2 ** m + 1), 4 ** m)
        y = min(max(x + step, Fraction(0)), Fraction(2))
        fx = fn.eval_cv(x, 40).value_fraction()
        fy = fn.eval_cv(y, 40).value_fraction()
        assert abs(fx - fy) <= Fraction(1, 2 ** k) + Fraction(1, 2 ** 38)
