import random
from fractions import Fraction

import mpmath as mp
import pytest

from certheat import certified as C
from certheat.certified import CertifiedValue
from certheat.errors import PreconditionError

mp.mp.prec = 500


def mpf(f: Fraction) -> mp.mpf:
    return mp.mpf(f.numerator) / mp.mpf(f.denominator)


def assert_encloses(cv: CertifiedValue, true: mp.mpf, p: int):
    assert abs(mpf(cv.value_fraction()) - true) <= mpf(cv.err_fraction())
    assert mpf(cv.err_fraction()) <= mp.mpf(2) ** (-p)


def test_constructor_invariants():
    v = CertifiedValue.from_fraction(Fraction(1, 3), 24)
    assert v.contains(Fraction(1, 3))
    assert v.err_exponent >= 24
    with pytest.raises(ValueError):
        CertifiedValue(1, 4, -1, 4)
    with pytest.raises(ValueError):
        CertifiedValue.exact(Fraction(1, 3))
    assert CertifiedValue.exact(Fraction(5, 8)).err_exponent == C.EXACT_EXP


def test_error_mantissa_is_renormalised():
    v = CertifiedValue(0, 1, (1 << 200) + 12345, 400)
    assert v.en.bit_length() <= 33
    assert v.err_fraction() >= Fraction((1 << 200) + 12345, 1 << 400)


def test_spec_addition_example():
    # (1/2 +- 2^-10) + (1/4 +- 2^-10) carries a 2^-9 bound
    a = CertifiedValue(1, 1, 1, 10)
    b = CertifiedValue(1, 2, 1, 10)
    s = a + b
    assert s.value_fraction() == Fraction(3, 4)
    assert s.err_fraction() == Fraction(1, 512)
    assert s.err_exponent == 9


def test_arithmetic_encloses_true_value():
    rng = random.Random(42)
    for _ in range(150):
        fa = Fraction(rng.randrange(-999, 999), rng.randrange(1, 999))
        fb = Fraction(rng.randrange(-999, 999), rng.randrange(1, 999))
        p = rng.randrange(8, 60)
        a = CertifiedValue.from_fraction(fa, p)
        b = CertifiedValue.from_fraction(fb, p)
        assert (a + b).contains(fa + fb)
        assert (a - b).contains(fa - fb)
        assert (a * b).contains(fa * fb)
        assert (-a).contains(-fa)
        assert abs(a).contains(abs(fa))
        assert a.mul_exact(Fraction(3, 8)).contains(fa * Fraction(3, 8))
        assert a.shift(5).contains(fa * 32)
        assert a.rounded(6).contains(fa)


def test_sum_cv():
    parts = [CertifiedValue.from_fraction(Fraction(i, 7), 40) for i in range(10)]
    total = C.sum_cv(parts)
    assert total.contains(Fraction(45, 7))


def test_finalize_contract():
    v = CertifiedValue.from_fraction(Fraction(1, 3), 40)
    out = C.finalize(v, 16)
    assert out.approx.pcs == 18
    assert out.en == 1 and out.es == 16
    assert abs(out.value_fraction() - Fraction(1, 3)) <= Fraction(1, 1 << 16)
    with pytest.raises(AssertionError):
        C.finalize(CertifiedValue(1, 1, 1, 2), 16)  # bound 1/4 cannot shrink to 2^-16


def test_pi_various_precisions():
    for p in (10, 53, 130, 333):
        assert_encloses(C.pi_cv(p), mp.pi, p)


def test_sqrt_recip_div():
    for p in (16, 64, 150):
        assert_encloses(C.sqrt_cv(2, p), mp.sqrt(2), p)
        assert_encloses(C.sqrt_cv(Fraction(9, 16), p), mp.mpf(3) / 4, p)
        assert_encloses(C.recip_cv(3, p), mp.mpf(1) / 3, p)
        assert_encloses(C.recip_cv(Fraction(-7, 5), p), -mp.mpf(5) / 7, p)
        assert_encloses(C.div_cv(1, 7, p), mp.mpf(1) / 7, p)
    assert C.sqrt_cv(0, 30).en == 0
    with pytest.raises(PreconditionError):
        C.recip_cv(CertifiedValue(1, 10, 5, 10), 20)  # straddles zero
    with pytest.raises(PreconditionError):
        C.sqrt_cv(-2, 20)


def test_exp_various_arguments():
    for p in (16, 64, 150):
        for arg in (1, -1, Fraction(13, 3), Fraction(-29, 4), Fraction(1, 1024), 0):
            assert_encloses(C.exp_cv(arg, p), mp.exp(mpf(Fraction(arg))), p)


def test_exp_deeply_negative_shortcut():
    z = C.exp_cv(-5000, 40)
    assert z.m == 0
    assert z.err_fraction() <= Fraction(1, 1 << 40)


def test_sin_cos_with_range_reduction():
    args = [Fraction(1, 3), Fraction(201, 2), Fraction(-255, 7), Fraction(355, 113), 0]
    for p in (16, 80):
        for a in args:
            assert_encloses(C.sin_cv(a, p), mp.sin(mpf(a)), p)
            assert_encloses(C.cos_cv(a, p), mp.cos(mpf(a)), p)


def test_sin_pi_mul_exact_special_values():
    assert C.sin_pi_mul_cv(7, 50).en == 0
    assert C.sin_pi_mul_cv(7, 50).m == 0
    assert C.sin_pi_mul_cv(Fraction(-4), 50).en == 0
    assert C.sin_pi_mul_cv(Fraction(5, 2), 50).value_fraction() == 1
    assert C.sin_pi_mul_cv(Fraction(3, 2), 50).value_fraction() == -1
    assert C.cos_pi_mul_cv(Fraction(3, 2), 50).en == 0
    assert C.cos_pi_mul_cv(Fraction(1, 2), 50).m == 0
    assert C.cos_pi_mul_cv(2, 50).value_fraction() == 1
    assert C.cos_pi_mul_cv(1, 50).value_fraction() == -1


def test_sin_cos_pi_mul_generic():
    rng = random.Random(99)
    for _ in range(40):
        r = Fraction(rng.randrange(-300, 300), rng.randrange(1, 97))
        p = rng.choice([16, 48, 100])
        assert_encloses(C.sin_pi_mul_cv(r, p), mp.sinpi(mpf(r)), p)
        assert_encloses(C.cos_pi_mul_cv(r, p), mp.cospi(mpf(r)), p)


def test_gauss_primitive():
    for p in (16, 64, 150):
        for a in (Fraction(3, 2), -6, 8, Fraction(1, 128), 0):
            true = mp.sqrt(mp.pi) / 2 * mp.erf(mpf(Fraction(a)))
            assert_encloses(C.gauss_primitive_cv(a, p), true, p)
    with pytest.raises(PreconditionError):
        C.gauss_primitive_cv(9, 20)


def test_input_error_propagation():
    # a certified input's own uncertainty must flow through
    base = Fraction(1, 3)
    fuzz = CertifiedValue.from_fraction(base, 50)
    for fn, true in [
        (C.exp_cv, mp.exp(mpf(base))),
        (C.sqrt_cv, mp.sqrt(mpf(base))),
        (C.sin_cv, mp.sin(mpf(base))),
        (C.cos_cv, mp.cos(mpf(base))),
        (C.gauss_primitive_cv, mp.sqrt(mp.pi) / 2 * mp.erf(mpf(base))),
    ]:
        out = fn(fuzz, 30)
        assert abs(mpf(out.value_fraction()) - true) <= mpf(out.err_fraction())
    r = C.recip_cv(fuzz, 30)
    assert abs(mpf(r.value_fraction()) - 3) <= mpf(r.err_fraction())


def test_directed_pow_brackets_true_value():
    rng = random.Random(5)
    for _ in range(25):
        b = Fraction(rng.randrange(1, 2**40), rng.randrange(1, 2**40))
        n = rng.randrange(0, 5000)
        lo = C.pow_fraction_lower(b, n)
        hi = C.pow_fraction_upper(b, n)
        true = mpf(b) ** n
        assert mpf(lo) <= true <= mpf(hi)
        # 128-bit intermediate rounding keeps the bracket tight
        if true > 0 and n > 0:
            assert (mpf(hi) - mpf(lo)) <= true * mp.mpf(2) ** -100


def test_frac_err_exponent():
    assert C.frac_err_exponent(Fraction(1, 1024)) == 10
    assert C.frac_err_exponent(Fraction(1, 1023)) == 9
    assert C.frac_err_exponent(Fraction(3, 4096)) == 10
    assert C.frac_err_exponent(Fraction(5)) == -3
    assert C.frac_err_exponent(Fraction(0)) == C.EXACT_EXP
