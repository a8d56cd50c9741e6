"""Kernel and special-function evaluations.

The heat-kernel time-derivative families are the computational heart of the
half-line solvers.  Everything rational about them is kept exact:

* ``heat_g_rational_core`` produces the finite sum S with
  g^(n)(t,x) = x * t^(-3/2) * e^(-x^2/t) * S(n,t,x) as an exact rational
  (the half-integer Gamma ratios are rational, so S is).
* The same family at t = 1 collapses to scaled Laguerre polynomials, which
  the solvers evaluate through integer three-term recurrences
  (``laguerre_half_table`` / ``laguerre_minus_half_table``), avoiding any
  error growth through the recursion.
* Hermite values at the Gaussian-integral endpoints come from an integer
  pair recurrence in w^2, so only the sign-carrying factor w and e^(-w^2)
  need certified arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from .certified import (CertifiedValue, cos_pi_mul_cv, exp_cv, pi_cv,
                        recip_cv, recip_pi_cv, sin_pi_mul_cv, sqrt_cv)
from .dyadic import as_fraction
from .errors import PreconditionError
from .evaluable import _log2_ceil


# ---------------------------------------------------------------------------
# Poisson kernel on the unit disk


def poisson_kernel_2d(r, theta, tau, p: int) -> CertifiedValue:
    """(1 - r^2) / (1 - 2 r cos(theta - tau) + r^2), angles in units of pi."""
    r = as_fraction(r)
    theta, tau = as_fraction(theta), as_fraction(tau)
    if not 0 <= r < 1:
        raise PreconditionError("poisson kernel needs r in [0,1)")
    if r == 0:
        return CertifiedValue.exact(1)
    pp = p + 8
    c = cos_pi_mul_cv(theta - tau, pp)
    den = CertifiedValue.from_fraction(1 + r * r, pp) - c.mul_fraction(2 * r, pp)
    # den >= (1-r)^2 > 0, so the reciprocal is well defined
    return (CertifiedValue.from_fraction(1 - r * r, pp) * recip_cv(den, pp)).rounded(p + 4)


# ---------------------------------------------------------------------------
# heat-kernel derivative family g^(n), g~^(n)


def _gamma_ratio(n: int, m: int) -> Fraction:
    """Gamma(3/2+n) / Gamma(3/2+n-m) as an exact rational."""
    out = Fraction(1)
    for i in range(m):
        out *= Fraction(2 * (n - i) + 1, 2)
    return out


def heat_g_rational_core(n: int, t, x) -> Fraction:
    """S with g^(n)(t,x) = x t^(-3/2) e^(-x^2/t) S; exact rational."""
    t, x = as_fraction(t), as_fraction(x)
    if t <= 0:
        raise PreconditionError("t must be positive")
    total = Fraction(0)
    for m in range(n + 1):
        total += ((-1) ** m * comb(n, m) * _gamma_ratio(n, m)
                  * x ** (2 * (n - m)) * t ** -(2 * n - m))
    return total


def _assemble_gstyle(rational_part: Fraction, t: Fraction, x: Fraction, p: int) -> CertifiedValue:
    """rational_part * t^(-1/2) * e^(-x^2/t), certified to 2^-p."""
    if rational_part == 0:
        return CertifiedValue.zero()
    pp = p + 10 + max(0, _log2_ceil(abs(rational_part) + 1))
    rsqrt_t = recip_cv(sqrt_cv(t, pp), pp)
    ex = exp_cv(-x * x / t, pp)
    out = (rsqrt_t * ex).mul_fraction(rational_part, pp)
    return out.rounded(p + 4)


def heat_g(n: int, t, x, p: int) -> CertifiedValue:
    """Certified n-th time derivative of g(t,x) = x t^(-3/2) e^(-x^2/t)."""
    t, x = as_fraction(t), as_fraction(x)
    if t <= 0:
        raise PreconditionError("t must be positive")
    if n < 0:
        raise PreconditionError("derivative order must be nonnegative")
    if x == 0:
        return CertifiedValue.zero()
    S = heat_g_rational_core(n, t, x)
    return _assemble_gstyle(x * S / t, t, x, p)


def heat_g_tilde(n: int, t, x, p: int) -> CertifiedValue:
    """Certified n-th time derivative of g~(t,x) = t^(-1/2) e^(-x^2/t).

    Computed through the Leibniz rule on t * g(t,x) / x, which gives
    (t g^(n) + n g^(n-1)) / x; the division by x cancels symbolically.
    """
    t, x = as_fraction(t), as_fraction(x)
    if t <= 0:
        raise PreconditionError("t must be positive")
    if x == 0:
        raise PreconditionError("x must be nonzero")
    Q = t * heat_g_rational_core(n, t, x)
    if n >= 1:
        Q += n * heat_g_rational_core(n - 1, t, x)
    return _assemble_gstyle(Q / t, t, x, p)


def heat_g_tilde_printed_variant(n: int, t, x, p: int) -> CertifiedValue:
    """The (t g^(n) + g^(n-1)) / x variant, kept for the consistency log.

    Differs from the Leibniz result for n >= 2; the finite-difference tests
    record which of the two matches the actual derivative.
    """
    t, x = as_fraction(t), as_fraction(x)
    if t <= 0 or x == 0:
        raise PreconditionError("t must be positive and x nonzero")
    Q = t * heat_g_rational_core(n, t, x)
    if n >= 1:
        Q += heat_g_rational_core(n - 1, t, x)
    return _assemble_gstyle(Q / t, t, x, p)


# ---------------------------------------------------------------------------
# integer Laguerre tables (t = 1 specialization)
#
# g^(n)(1,x)/n!  = (-1)^n x e^(-x^2) L_n^(1/2)(x^2)
# g~^(n)(1,x)/n! = (-1)^n   e^(-x^2) L_n^(-1/2)(x^2)
#
# For z = zn/zd the scaled values I_n = L_n^(1/2)(z) * n! * (2 zd)^n are
# integers obeying a three-term recurrence, so the whole table is exact.


@lru_cache(maxsize=32)
def laguerre_half_table(T: int, zn: int, zd: int) -> tuple[int, ...]:
    """I_n with L_n^(1/2)(zn/zd) = I_n / (n! (2 zd)^n), n = 0..T."""
    out = [1, 3 * zd - 2 * zn]
    for n in range(2, T + 1):
        out.append(((4 * n - 1) * zd - 2 * zn) * out[-1]
                   - (2 * n - 1) * (n - 1) * 2 * zd * zd * out[-2])
    return tuple(out[:T + 1])


@lru_cache(maxsize=32)
def laguerre_minus_half_table(T: int, zn: int, zd: int) -> tuple[int, ...]:
    """I_n with L_n^(-1/2)(zn/zd) = I_n / (n! (2 zd)^n), n = 0..T."""
    out = [1, zd - 2 * zn]
    for n in range(2, T + 1):
        out.append(((4 * n - 3) * zd - 2 * zn) * out[-1]
                   - (2 * n - 3) * (n - 1) * 2 * zd * zd * out[-2])
    return tuple(out[:T + 1])


def hermite_pair_table(J: int, u: int, v: int) -> tuple[int, ...]:
    """K_j encoding H_j(w) for w^2 = u/v:

    even j: H_j(w) = K_j / v^(j/2);  odd j: H_j(w) = w * K_j / v^((j-1)/2).
    """
    out = [1, 2]
    for j in range(1, J):
        mult = 2 * u if j % 2 == 1 else 2
        out.append(mult * out[-1] - 2 * j * v * out[-2])
    return tuple(out[:J + 1])


# ---------------------------------------------------------------------------
# growth bound for |g^(n)(1,x)| / n!


_N_CAL = 16
_GRID = 32


@lru_cache(maxsize=16)
def _growth_constant(x0: Fraction) -> Fraction:
    """Calibrated C with |g^(n)(1,x)|/n! <= C (n+1) x0 on [0, x0]."""
    xs = [x0 * i / _GRID for i in range(1, _GRID + 1)]
    best = Fraction(0)
    for n in range(_N_CAL + 1):
        fact = factorial(n)
        for x in xs:
            ub = heat_g(n, 1, x, 40).abs_upper()
            ratio = ub / (fact * (n + 1) * x0)
            if ratio > best:
                best = ratio
    C = 2 * best
    # sanity window beyond the calibration range
    for n in range(_N_CAL + 1, 2 * _N_CAL + 1):
        fact = factorial(n)
        for x in xs[::4]:
            if heat_g(n, 1, x, 40).abs_upper() / fact > C * (n + 1) * x0:
                raise AssertionError("growth-bound calibration failed to extend")
    return C


def deriv_growth_bound(n: int, x0) -> Fraction:
    """Sound overestimate of sup over [0,x0] of |g^(n)(1,x)| / n!."""
    x0 = as_fraction(x0)
    if x0 <= 0:
        raise PreconditionError("x0 must be positive")
    return _growth_constant(x0) * (n + 1) * x0


# ---------------------------------------------------------------------------
# spherical harmonics (d = 3 explicit; general d counting)


def sph_count(d: int, l: int) -> int:
    """Dimension N(d,l) of the degree-l harmonics on the (d-1)-sphere."""
    if d < 2 or l < 0:
        raise PreconditionError("need d >= 2 and l >= 0")
    if l == 0:
        return 1
    val = Fraction(2 * l + d - 2, l) * comb(l + d - 3, l - 1)
    if val.denominator != 1:
        raise AssertionError(f"N({d},{l}) came out non-integral")
    return int(val)


def _assoc_legendre_cs(l: int, m: int, c: CertifiedValue, s: CertifiedValue,
                       p: int) -> CertifiedValue:
    """P_l^m given certified cos and sin of the polar angle."""
    pp = p + 8
    # seed P_m^m = (-1)^m (2m-1)!! s^m, then climb l with the standard
    # three-term recurrence (Condon-Shortley phase included)
    df = 1
    for i in range(1, 2 * m, 2):
        df *= i
    cur = CertifiedValue.exact((-1) ** m * df)
    for _ in range(m):
        cur = (cur * s).rounded(pp)
    if l == m:
        return cur.rounded(p + 4)
    prev = cur
    cur = (c * cur).mul_fraction(2 * m + 1, pp)
    for ll in range(m + 2, l + 1):
        nxt = (c * cur).mul_fraction(Fraction(2 * ll - 1, ll - m), pp) - \
            prev.mul_fraction(Fraction(ll + m - 1, ll - m), pp)
        prev, cur = cur, nxt.rounded(pp)
    return cur.rounded(p + 4)


def assoc_legendre(l: int, m: int, x, p: int) -> CertifiedValue:
    """Certified associated Legendre P_l^m(x) for |x| <= 1."""
    if not 0 <= m <= l:
        raise PreconditionError("need 0 <= m <= l")
    x = as_fraction(x)
    if abs(x) > 1:
        raise PreconditionError("|x| must be at most 1")
    pp = p + 8
    c = CertifiedValue.from_fraction(x, pp)
    s = sqrt_cv(1 - x * x, pp)
    return _assoc_legendre_cs(l, m, c, s, p)


def real_sph_harmonic_3d(l: int, m: int, theta, phi, p: int) -> CertifiedValue:
    """Real orthonormal Y_{l,m} on S^2; theta, phi in units of pi.

    theta in [0,1] is the polar angle, phi in [0,2] the azimuth; m runs over
    -l..l with the cos/sin real convention.
    """
    if abs(m) > l:
        raise PreconditionError("need |m| <= l")
    theta, phi = as_fraction(theta), as_fraction(phi)
    pp = p + 10
    c = cos_pi_mul_cv(theta, pp)
    s = sin_pi_mul_cv(theta, pp)
    am = abs(m)
    leg = _assoc_legendre_cs(l, am, c, s, pp)
    ratio = Fraction(2 * l + 1) * Fraction(factorial(l - am), factorial(l + am)) / 4
    norm = sqrt_cv(recip_pi_cv(pp).mul_fraction(ratio, pp), pp)
    out = (norm * leg).rounded(pp)
    if m > 0:
        out = (out * sqrt_cv(2, pp) * cos_pi_mul_cv(m * phi, pp)).rounded(pp)
    elif m < 0:
        out = (out * sqrt_cv(2, pp) * sin_pi_mul_cv(am * phi, pp)).rounded(pp)
    return out.rounded(p + 4)
