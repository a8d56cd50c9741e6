"""Certified arithmetic: dyadic approximations with proven error bounds.

A :class:`CertifiedValue` holds an exact dyadic approximation ``m * 2**-s``
together with an error bound ``en * 2**-es`` such that the (possibly
irrational) true quantity lies within the bound of the approximation.  All
arithmetic propagates bounds conservatively in exact integer arithmetic;
nothing here rounds silently.

The second half of the module evaluates the transcendental functions the
solvers need (pi, sqrt, exp, sin/cos, the Gaussian antiderivative) to any
requested absolute accuracy ``2**-p``.  Each evaluator runs a scaled-integer
Taylor scheme with an explicit remainder term, so the returned bounds are
sound rather than heuristic.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Union

from .dyadic import DyadicDecimal, _round_half_even, as_fraction
from .errors import PreconditionError

ExactLike = Union[int, Fraction, DyadicDecimal]

# err_exponent reported for values known exactly.
EXACT_EXP = 1 << 30

_ERR_BITS = 32  # error mantissas are renormalised to at most this many bits


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class CertifiedValue:
    """Dyadic approximation ``m * 2**-s`` with error bound ``en * 2**-es``."""

    __slots__ = ("m", "s", "en", "es")

    def __init__(self, m: int, s: int, en: int, es: int):
        self.m = m
        self.s = s
        if en < 0:
            raise ValueError("error mantissa must be nonnegative")
        # Keep error mantissas short; rounding an error bound up is sound.
        extra = en.bit_length() - _ERR_BITS
        if extra > 0:
            en = (en >> extra) + 1
            es -= extra
        self.en = en
        self.es = es

    # -- constructors ------------------------------------------------------

    @classmethod
    def exact(cls, value: ExactLike) -> "CertifiedValue":
        f = as_fraction(value)
        den = f.denominator
        exp = den.bit_length() - 1
        if den != 1 << exp:
            raise ValueError(f"{f} is not dyadic; round it first")
        return cls(f.numerator, exp, 0, 0)

    @classmethod
    def from_fraction(cls, value: ExactLike, p: int) -> "CertifiedValue":
        """Round any rational to scale ``2**-p``; rounding error <= 2**-(p+1)."""
        f = as_fraction(value)
        m = _round_half_even(f.numerator << p, f.denominator)
        exact = (f.numerator << p) % f.denominator == 0
        return cls(m, p, 0 if exact else 1, p + 1)

    @classmethod
    def zero(cls) -> "CertifiedValue":
        return cls(0, 1, 0, 0)

    # -- views -------------------------------------------------------------

    @property
    def approx(self) -> DyadicDecimal:
        if self.s >= 1:
            return DyadicDecimal(self.m < 0, abs(self.m), self.s)
        return DyadicDecimal(self.m < 0, abs(self.m) << (1 - self.s), 1)

    @property
    def err_exponent(self) -> int:
        """Largest n with error bound <= 2**-n (EXACT_EXP when exact)."""
        if self.en == 0:
            return EXACT_EXP
        b = self.en.bit_length()
        if self.en == 1 << (b - 1):
            return self.es - b + 1
        return self.es - b

    def value_fraction(self) -> Fraction:
        if self.s >= 0:
            return Fraction(self.m, 1 << self.s)
        return Fraction(self.m << -self.s)

    def err_fraction(self) -> Fraction:
        if self.en == 0:
            return Fraction(0)
        if self.es >= 0:
            return Fraction(self.en, 1 << self.es)
        return Fraction(self.en << -self.es)

    def upper_fraction(self) -> Fraction:
        return self.value_fraction() + self.err_fraction()

    def lower_fraction(self) -> Fraction:
        return self.value_fraction() - self.err_fraction()

    def abs_upper(self) -> Fraction:
        return abs(self.value_fraction()) + self.err_fraction()

    def abs_lower(self) -> Fraction:
        lo = abs(self.value_fraction()) - self.err_fraction()
        return lo if lo > 0 else Fraction(0)

    def contains(self, value: ExactLike) -> bool:
        return abs(self.value_fraction() - as_fraction(value)) <= self.err_fraction()

    def __repr__(self) -> str:
        return f"CertifiedValue({self.approx.literal()}, err<=2^-{self.err_exponent})"

    def __float__(self) -> float:
        return self.m / 2.0 ** self.s

    # -- arithmetic --------------------------------------------------------

    def __neg__(self) -> "CertifiedValue":
        return CertifiedValue(-self.m, self.s, self.en, self.es)

    def __abs__(self) -> "CertifiedValue":
        return CertifiedValue(abs(self.m), self.s, self.en, self.es)

    def __add__(self, other: "CertifiedValue") -> "CertifiedValue":
        if not isinstance(other, CertifiedValue):
            return NotImplemented
        s = max(self.s, other.s)
        m = (self.m << (s - self.s)) + (other.m << (s - other.s))
        en, es = _err_add(self.en, self.es, other.en, other.es)
        return CertifiedValue(m, s, en, es)

    def __sub__(self, other: "CertifiedValue") -> "CertifiedValue":
        return self + (-other)

    def __mul__(self, other: "CertifiedValue") -> "CertifiedValue":
        if not isinstance(other, CertifiedValue):
            return NotImplemented
        m = self.m * other.m
        s = self.s + other.s
        # |ab - a'b'| <= |a'| eb + |b'| ea + ea eb   (primed: approximations)
        en, es = _err_add(abs(self.m) * other.en, self.s + other.es,
                          abs(other.m) * self.en, other.s + self.es)
        en, es = _err_add(en, es, self.en * other.en, self.es + other.es)
        return CertifiedValue(m, s, en, es)

    def mul_exact(self, value: ExactLike) -> "CertifiedValue":
        """Multiply by an exact dyadic scalar."""
        c = CertifiedValue.exact(value)
        return CertifiedValue(self.m * c.m, self.s + c.s,
                              self.en * abs(c.m), self.es + c.s)

    def mul_fraction(self, f, p: int) -> "CertifiedValue":
        """Multiply by an exact rational, rounding the result to p+4 bits."""
        return (self * CertifiedValue.from_fraction(f, p + 4)).rounded(p + 4)

    def shift(self, k: int) -> "CertifiedValue":
        """Multiply by 2**k exactly."""
        return CertifiedValue(self.m, self.s - k, self.en, self.es - k)

    def widen(self, en: int, es: int) -> "CertifiedValue":
        """Add an extra error term ``en * 2**-es``."""
        nen, nes = _err_add(self.en, self.es, en, es)
        return CertifiedValue(self.m, self.s, nen, nes)

    def widen_fraction(self, extra: Fraction) -> "CertifiedValue":
        if extra <= 0:
            return self
        es = extra.denominator.bit_length() + 4
        en = _ceil_div(extra.numerator << es, extra.denominator)
        return self.widen(en, es)

    def rounded(self, p: int) -> "CertifiedValue":
        """Shorten the mantissa to scale ``2**-p`` (folds the rounding error)."""
        if self.s <= p:
            return self
        den = 1 << (self.s - p)
        m = _round_half_even(self.m, den)
        if m * den == self.m:  # dropped bits were zero; no rounding happened
            return CertifiedValue(m, p, self.en, self.es)
        en, es = _err_add(self.en, self.es, 1, p + 1)
        return CertifiedValue(m, p, en, es)


def _err_add(en1: int, es1: int, en2: int, es2: int) -> tuple[int, int]:
    if en1 == 0:
        return en2, es2
    if en2 == 0:
        return en1, es1
    es = max(es1, es2)
    return (en1 << (es - es1)) + (en2 << (es - es2)), es


def sum_cv(values) -> CertifiedValue:
    acc = CertifiedValue.zero()
    for v in values:
        acc = acc + v
    return acc


def finalize(cv: CertifiedValue, n: int) -> CertifiedValue:
    """Round to ``n + 2`` fractional bits and certify total error <= 2**-n.

    Raises if the accumulated bound cannot absorb the final rounding step;
    that would mean a solver mis-budgeted, which is an internal error.
    """
    out = cv.rounded(n + 2)
    if out.err_fraction() > Fraction(1, 1 << n):
        raise AssertionError(
            f"error budget overrun: bound {float(out.err_fraction()):.3e} > 2^-{n}")
    if out.s < n + 2:
        out = CertifiedValue(out.m << (n + 2 - out.s), n + 2, out.en, out.es)
    return CertifiedValue(out.m, out.s, 1, n)


# ---------------------------------------------------------------------------
# scaled-integer evaluation helpers
#
# A "scaled" quantity is a pair (val, err) of integers at scale W, standing
# for val * 2**-W with absolute error at most err * 2**-W.


def _scaled_from_fraction(f: Fraction, W: int) -> tuple[int, int]:
    num = f.numerator << W
    v = _round_half_even(num, f.denominator)
    return v, (0 if num % f.denominator == 0 else 1)


def _smul(a: int, ea: int, b: int, eb: int, W: int) -> tuple[int, int]:
    v = _round_half_even(a * b, 1 << W)
    e = _ceil_div(abs(a) * eb + abs(b) * ea + ea * eb, 1 << W) + 1
    return v, e


def _sdiv_int(a: int, ea: int, d: int) -> tuple[int, int]:
    """Divide a scaled value by a positive integer, truncating toward zero."""
    v = a // d if a >= 0 else -((-a) // d)
    return v, ea // d + 1


def _as_exact_pair(x) -> tuple[Fraction, Fraction]:
    """(approximation value, input error bound) as exact rationals."""
    if isinstance(x, CertifiedValue):
        return x.value_fraction(), x.err_fraction()
    return as_fraction(x), Fraction(0)


# ---------------------------------------------------------------------------
# pi


@lru_cache(maxsize=None)
def _pi_bucket(P: int) -> CertifiedValue:
    # Machin: pi = 16 atan(1/5) - 4 atan(1/239); alternating series, so each
    # remainder is below the first omitted term.
    def atan_inv(q: int, tail_exp: int) -> Fraction:
        total = Fraction(0)
        j = 0
        sign = 1
        while True:
            term = Fraction(1, (2 * j + 1) * q ** (2 * j + 1))
            if term < Fraction(1, 1 << tail_exp):
                break
            total += sign * term
            sign = -sign
            j += 1
        return total

    guard = P + 8
    approx = 16 * atan_inv(5, guard) - 4 * atan_inv(239, guard)
    return CertifiedValue.from_fraction(approx, guard).widen(20, guard)


def pi_cv(p: int) -> CertifiedValue:
    P = ((max(p, 16) + 63) // 64) * 64
    return _pi_bucket(P)


def recip_pi_cv(p: int) -> CertifiedValue:
    return recip_cv(pi_cv(p + 4), p)


def sqrt_pi_cv(p: int) -> CertifiedValue:
    return sqrt_cv(pi_cv(p + 4), p)


def recip_sqrt_pi_cv(p: int) -> CertifiedValue:
    return recip_cv(sqrt_pi_cv(p + 4), p)


# ---------------------------------------------------------------------------
# sqrt / reciprocal


def sqrt_cv(x, p: int) -> CertifiedValue:
    """Certified square root; error <= 2**-p plus the propagated input error."""
    val, ierr = _as_exact_pair(x)
    if val < 0:
        if val + ierr >= 0:  # enclosure straddles zero from below
            val = Fraction(0)
        else:
            raise PreconditionError("sqrt of a negative value")
    if val == 0 and ierr == 0:
        return CertifiedValue.zero()
    W = p + 2
    M = (val.numerator << (2 * W)) // val.denominator
    out = CertifiedValue(isqrt(M), W, 2, W)
    if ierr:
        lo = val - ierr
        if lo > 0:
            # |sqrt u - sqrt v| <= |u - v| / (2 sqrt(lo))
            slo = _fraction_sqrt_lower(lo)
            out = out.widen_fraction(ierr / (2 * slo))
        else:
            out = out.widen_fraction(_fraction_sqrt_upper(val + ierr))
    return out


def _fraction_sqrt_lower(f: Fraction, bits: int = 16) -> Fraction:
    r = isqrt((f.numerator << (2 * bits)) // f.denominator)
    return Fraction(r, 1 << bits) if r else Fraction(1, 1 << (2 * bits + 2))


def _fraction_sqrt_upper(f: Fraction, bits: int = 16) -> Fraction:
    r = isqrt(_ceil_div(f.numerator << (2 * bits), f.denominator)) + 1
    return Fraction(r, 1 << bits)


def recip_cv(x, p: int) -> CertifiedValue:
    """Certified 1/x for x bounded away from zero."""
    val, ierr = _as_exact_pair(x)
    lo = abs(val) - ierr
    if lo <= 0:
        raise PreconditionError("reciprocal of a value not bounded away from 0")
    W = p + 2
    sign = 1 if val > 0 else -1
    m = _round_half_even((1 << W) * val.denominator, abs(val.numerator))
    out = CertifiedValue(sign * m, W, 1, W)
    if ierr:
        out = out.widen_fraction(ierr / (lo * lo))
    return out


def div_cv(a, b, p: int) -> CertifiedValue:
    r = recip_cv(b, p + 4)
    num = a if isinstance(a, CertifiedValue) else CertifiedValue.exact(a)
    return (num * r).rounded(p + 4)


# ---------------------------------------------------------------------------
# exp

_LN2_HI = Fraction(693148, 1000000)   # > ln 2


def exp_cv(x, p: int) -> CertifiedValue:
    """Certified e**x; absolute error <= 2**-p plus propagated input error."""
    val, ierr = _as_exact_pair(x)
    if ierr > Fraction(1, 4):
        raise PreconditionError("exp input error too large to propagate")
    # Deeply negative argument: the value itself sits below the target error.
    if val < 0 and -val >= (p + 2) * _LN2_HI:
        return CertifiedValue(0, p, 1, p + 1)
    if val > 128:
        raise PreconditionError("exp argument unexpectedly large")

    j = 0
    r = val
    while abs(r) > Fraction(1, 2):
        r /= 2
        j += 1
    W = p + 2 * j + 12
    rv, re = _scaled_from_fraction(r, W)
    acc, eacc = 1 << W, 0
    term, eterm = 1 << W, 0
    i = 1
    while True:
        term, eterm = _smul(term, eterm, rv, re, W)
        term, eterm = _sdiv_int(term, eterm, i)
        acc += term
        eacc += eterm
        # tail <= |term| * sum (|r|/(i+1))^k <= |term| for |r| <= 1/2, i >= 1
        if i >= 2 and abs(term) <= 1 and eterm <= 2:
            eacc += abs(term) + eterm + 2
            break
        i += 1
    for _ in range(j):
        acc, eacc = _smul(acc, eacc, acc, eacc, W)
    out = CertifiedValue(acc, W, eacc, W)
    if ierr:
        # |e^(a+d) - e^a| <= e^a (e^|d| - 1) <= 2 e^a |d| for |d| <= 1/2
        out = out.widen_fraction(2 * out.abs_upper() * ierr)
    return out.rounded(p + 4)


# ---------------------------------------------------------------------------
# sin / cos with certified range reduction


def _sin_taylor(rv: int, re: int, W: int) -> tuple[int, int]:
    x2, ex2 = _smul(rv, re, rv, re, W)
    acc, eacc = rv, re
    term, eterm = rv, re
    k = 0
    while True:
        k += 1
        term, eterm = _smul(term, eterm, x2, ex2, W)
        term, eterm = _sdiv_int(-term, eterm, (2 * k) * (2 * k + 1))
        acc += term
        eacc += eterm
        # |arg| <= 4.25 after reduction, so the terms decrease once k >= 4 and
        # the alternating tail is below the last added term.
        if k >= 4 and abs(term) <= 1 and eterm <= 2:
            eacc += abs(term) + eterm + 2
            break
    return acc, eacc


def _cos_taylor(rv: int, re: int, W: int) -> tuple[int, int]:
    x2, ex2 = _smul(rv, re, rv, re, W)
    acc, eacc = 1 << W, 0
    term, eterm = 1 << W, 0
    k = 0
    while True:
        k += 1
        term, eterm = _smul(term, eterm, x2, ex2, W)
        term, eterm = _sdiv_int(-term, eterm, (2 * k - 1) * (2 * k))
        acc += term
        eacc += eterm
        if k >= 4 and abs(term) <= 1 and eterm <= 2:
            eacc += abs(term) + eterm + 2
            break
    return acc, eacc


def _reduced_arg(val: Fraction, p: int) -> tuple[Fraction, Fraction]:
    """val - 2 pi q with |result| <= pi + slack; returns (value, error)."""
    if abs(val) <= 3:
        return val, Fraction(0)
    qbits = int(abs(val)).bit_length() + 4
    piv = pi_cv(p + qbits)
    twopi = 2 * piv.value_fraction()
    q = int(val / twopi + Fraction(1, 2)) if val >= 0 else -int(-val / twopi + Fraction(1, 2))
    return val - q * twopi, 2 * abs(q) * piv.err_fraction()


def sin_cv(x, p: int) -> CertifiedValue:
    val, ierr = _as_exact_pair(x)
    rval, rerr = _reduced_arg(val, p + 8)
    W = p + 8
    rv, re = _scaled_from_fraction(rval, W)
    acc, eacc = _sin_taylor(rv, re, W)
    out = CertifiedValue(acc, W, eacc, W).rounded(p + 4)
    extra = ierr + rerr
    return out.widen_fraction(extra) if extra else out


def cos_cv(x, p: int) -> CertifiedValue:
    val, ierr = _as_exact_pair(x)
    rval, rerr = _reduced_arg(val, p + 8)
    W = p + 8
    rv, re = _scaled_from_fraction(rval, W)
    acc, eacc = _cos_taylor(rv, re, W)
    out = CertifiedValue(acc, W, eacc, W).rounded(p + 4)
    extra = ierr + rerr
    return out.widen_fraction(extra) if extra else out


def sin_pi_mul_cv(r, p: int) -> CertifiedValue:
    """Certified sin(pi * r) for exact rational r, with exact reduction.

    Integer r yields an exact zero, so interval-solver boundary values come
    out exactly zero rather than merely small.
    """
    f = as_fraction(r) % 2  # exact reduction into [0, 2)
    if f.denominator == 1:
        return CertifiedValue.zero()
    sign = 1
    if f > 1:
        f, sign = f - 1, -1
    if f > Fraction(1, 2):
        f = 1 - f
    if f == Fraction(1, 2):
        out = CertifiedValue.exact(1)
        return -out if sign < 0 else out
    piv = pi_cv(p + 6)
    W = p + 8
    rv, re = _scaled_from_fraction(piv.value_fraction() * f, W)
    acc, eacc = _sin_taylor(rv, re, W)
    out = CertifiedValue(acc, W, eacc, W).rounded(p + 4)
    out = out.widen_fraction(piv.err_fraction() * f)
    return -out if sign < 0 else out


def cos_pi_mul_cv(r, p: int) -> CertifiedValue:
    """Certified cos(pi * r) for exact rational r, with exact reduction."""
    f = as_fraction(r) % 2
    if f > 1:
        f = 2 - f  # cos(2 pi - x) = cos(x)
    sign = 1
    if f > Fraction(1, 2):
        f, sign = 1 - f, -1  # cos(pi - x) = -cos(x)
    if f == Fraction(1, 2):
        return CertifiedValue.zero()
    if f == 0:
        return CertifiedValue.exact(sign)
    piv = pi_cv(p + 6)
    W = p + 8
    rv, re = _scaled_from_fraction(piv.value_fraction() * f, W)
    acc, eacc = _cos_taylor(rv, re, W)
    out = CertifiedValue(acc, W, eacc, W).rounded(p + 4)
    out = out.widen_fraction(piv.err_fraction() * f)
    return -out if sign < 0 else out


# ---------------------------------------------------------------------------
# Gaussian antiderivative  F(x) = integral_0^x e^{-w^2} dw


def gauss_primitive_cv(x, p: int) -> CertifiedValue:
    """Certified integral of e^{-w^2} over [0, x] for |x| <= 8."""
    val, ierr = _as_exact_pair(x)
    if abs(val) > 8:
        raise PreconditionError("gauss primitive argument out of supported range")
    # intermediate terms reach e^{x^2} before the alternating sum cancels,
    # so widen the working scale accordingly
    guard = int(Fraction(3, 2) * val * val) + 1
    W = p + 10 + guard
    rv, re = _scaled_from_fraction(val, W)
    x2, ex2 = _smul(rv, re, rv, re, W)
    acc, eacc = rv, re
    pow_, epow = rv, re
    j = 0
    while True:
        j += 1
        pow_, epow = _smul(pow_, epow, x2, ex2, W)
        pow_, epow = _sdiv_int(-pow_, epow, j)
        term, eterm = _sdiv_int(pow_, epow, 2 * j + 1)
        acc += term
        eacc += eterm
        # terms decrease once j >= x^2; the alternating tail is then bounded
        # by the first omitted term
        if abs(term) <= 1 and eterm <= 2 and j * (1 << W) >= abs(x2) + ex2:
            eacc += abs(term) + eterm + 2
            break
        if j > 400:
            raise AssertionError("gauss primitive series failed to converge")
    out = CertifiedValue(acc, W, eacc, W)
    if ierr:
        out = out.widen_fraction(ierr)  # integrand is bounded by 1
    return out.rounded(p + 4)


# ---------------------------------------------------------------------------
# directed rational powers (plan inequalities with huge exponents)


def pow_fraction_upper(base: Fraction, n: int, bits: int = 128) -> Fraction:
    """Upper bound on base**n (base >= 0), intermediates rounded up."""
    if base < 0:
        raise PreconditionError("pow_fraction_upper needs a nonnegative base")
    result = Fraction(1)
    b = base
    e = n
    while e:
        if e & 1:
            result = _round_frac_up(result * b, bits)
        e >>= 1
        if e:
            b = _round_frac_up(b * b, bits)
    return result


def pow_fraction_lower(base: Fraction, n: int, bits: int = 128) -> Fraction:
    if base < 0:
        raise PreconditionError("pow_fraction_lower needs a nonnegative base")
    result = Fraction(1)
    b = base
    e = n
    while e:
        if e & 1:
            result = _round_frac_down(result * b, bits)
        e >>= 1
        if e:
            b = _round_frac_down(b * b, bits)
    return result


def _round_frac_up(f: Fraction, bits: int) -> Fraction:
    # round to `bits` significant bits of the ratio, never downward
    num, den = f.numerator, f.denominator
    if num == 0 or (num.bit_length() <= bits and den.bit_length() <= bits):
        return f
    k = bits - (num.bit_length() - den.bit_length())
    if k >= 0:
        return Fraction(_ceil_div(num << k, den), 1 << k)
    return Fraction(_ceil_div(num, den << -k) * (1 << -k))


def _round_frac_down(f: Fraction, bits: int) -> Fraction:
    num, den = f.numerator, f.denominator
    if num == 0 or (num.bit_length() <= bits and den.bit_length() <= bits):
        return f
    k = bits - (num.bit_length() - den.bit_length())
    if k >= 0:
        return Fraction((num << k) // den, 1 << k)
    return Fraction((num // (den << -k)) * (1 << -k))


def frac_err_exponent(bound: Fraction) -> int:
    """Largest n with bound <= 2**-n, i.e. floor(-log2(bound)) for bound > 0."""
    if bound <= 0:
        return EXACT_EXP
    num, den = bound.numerator, bound.denominator
    n = den.bit_length() - num.bit_length()
    # candidate within 1; fix up exactly
    while num * (1 << max(n + 1, 0)) <= den * (1 << max(-(n + 1), 0)):
        n += 1
    while num * (1 << max(n, 0)) > den * (1 << max(-n, 0)):
        n -= 1
    return n
