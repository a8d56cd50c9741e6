"""Certified integration.

Two regimes:

* Functions with declared piecewise-linear structure integrate exactly: the
  midpoint rule is exact on each linear piece, so sampling one midpoint per
  segment (clipped to the requested range) gives the true integral up to
  point-evaluation error only.
* Generic continuous functions fall back to composite midpoint driven by the
  declared modulus of continuity.  The error bound is (b-a) * 2^-k per the
  modulus contract, which forces a panel count that can be astronomically
  large; a hard cap turns that into QuadratureBudgetError instead of a
  non-terminating loop.  This cost cliff is the point of the benchmark
  harness, not an implementation accident.
"""

from __future__ import annotations

from fractions import Fraction

from .certified import (CertifiedValue, cos_pi_mul_cv, recip_pi_cv,
                        sin_pi_mul_cv)
from .dyadic import as_fraction
from .errors import PreconditionError, QuadratureBudgetError
from .evaluable import EvaluableFunction, _log2_ceil

DEFAULT_MAX_PANELS = 1 << 22


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def integrate(fn: EvaluableFunction, lo, hi, p: int,
              max_panels: int = DEFAULT_MAX_PANELS) -> CertifiedValue:
    """Certified integral of fn over [lo, hi] with error <= 2^-p."""
    lo, hi = as_fraction(lo), as_fraction(hi)
    if lo > hi:
        raise PreconditionError("integration range is reversed")
    if lo < fn.domain[0] or hi > fn.domain[1]:
        raise PreconditionError("integration range leaves the function domain")
    if lo == hi:
        return CertifiedValue.zero()
    width = hi - lo
    pe = p + 2 + max(0, _log2_ceil(width))
    if fn.poly_coeffs is not None:
        total = Fraction(0)  # exact antiderivative, no sampling at all
        for i, c in enumerate(fn.poly_coeffs):
            total += c * (hi ** (i + 1) - lo ** (i + 1)) / (i + 1)
        return CertifiedValue.from_fraction(total, pe)
    if fn.has_linear_structure():
        return _integrate_linear(fn, lo, hi, pe)
    return _integrate_modulus(fn, lo, hi, p, pe, max_panels)


def _integrate_linear(fn: EvaluableFunction, lo: Fraction, hi: Fraction,
                      pe: int) -> CertifiedValue:
    grid = fn.segment_grid(lo, hi)
    if fn.eval_exact is not None:
        total = Fraction(0)
        for a, b in zip(grid, grid[1:]):
            total += fn.eval_exact((a + b) / 2) * (b - a)
        return CertifiedValue.from_fraction(total, pe)
    pp = pe + len(grid).bit_length() + 2  # per-segment rounding must not pile up
    acc = CertifiedValue.zero()
    for a, b in zip(grid, grid[1:]):
        acc = acc + fn.eval_cv((a + b) / 2, pp).mul_fraction(b - a, pp)
    return acc


def _integrate_modulus(fn: EvaluableFunction, lo: Fraction, hi: Fraction,
                       p: int, pe: int, max_panels: int) -> CertifiedValue:
    width = hi - lo
    k = p + 1 + max(0, _log2_ceil(width))
    spacing = Fraction(2, 2 ** fn.modulus(k))  # panel width with half-width 2^-m(k)
    panels = _ceil_div(width.numerator * spacing.denominator,
                       width.denominator * spacing.numerator)
    if panels > max_panels:
        raise QuadratureBudgetError(
            f"modulus-driven quadrature needs {panels} panels "
            f"(cap {max_panels}); declare structure or lower precision")
    w = width / panels
    pp = pe + panels.bit_length() + 2  # per-panel rounding must not pile up
    acc = CertifiedValue.zero()
    x = lo + w / 2
    for _ in range(panels):
        acc = acc + fn.eval_cv(x, pp).mul_fraction(w, pp)
        x += w
    # modulus bound: each panel contributes at most (panel width) * 2^-k
    return acc.widen_fraction(width * Fraction(1, 2 ** k))


# ---------------------------------------------------------------------------
# closed forms for (linear) x (trig) pieces, angles in units of pi
#
# All arguments rational; trig arguments reduce exactly, so these are the
# workhorses of the exact Fourier-coefficient paths.


def int_linear_sin_pi(c0, c1, a, b, k: int, phase, p: int) -> CertifiedValue:
    """Integral over [a,b] of (c0 + c1 rho) sin(pi (k rho + phase)) d rho."""
    c0, c1, a, b = map(as_fraction, (c0, c1, a, b))
    phase = as_fraction(phase)
    if k == 0:
        area = c0 * (b - a) + c1 * (b * b - a * a) / 2
        return sin_pi_mul_cv(phase, p + 4).mul_fraction(area, p)
    pp = p + 6
    rp = recip_pi_cv(pp)

    def F(rho: Fraction) -> CertifiedValue:
        lin = c0 + c1 * rho
        t1 = cos_pi_mul_cv(k * rho + phase, pp).mul_fraction(-lin, pp) * rp
        t1 = t1.mul_fraction(Fraction(1, k), pp)
        t2 = sin_pi_mul_cv(k * rho + phase, pp).mul_fraction(c1, pp) * rp * rp
        t2 = t2.mul_fraction(Fraction(1, k * k), pp)
        return t1 + t2

    return (F(b) - F(a)).rounded(p + 4)


def int_linear_cos_pi(c0, c1, a, b, k: int, phase, p: int) -> CertifiedValue:
    """Integral over [a,b] of (c0 + c1 rho) cos(pi (k rho + phase)) d rho."""
    c0, c1, a, b = map(as_fraction, (c0, c1, a, b))
    phase = as_fraction(phase)
    if k == 0:
        area = c0 * (b - a) + c1 * (b * b - a * a) / 2
        return cos_pi_mul_cv(phase, p + 4).mul_fraction(area, p)
    pp = p + 6
    rp = recip_pi_cv(pp)

    def F(rho: Fraction) -> CertifiedValue:
        lin = c0 + c1 * rho
        t1 = sin_pi_mul_cv(k * rho + phase, pp).mul_fraction(lin, pp) * rp
        t1 = t1.mul_fraction(Fraction(1, k), pp)
        t2 = cos_pi_mul_cv(k * rho + phase, pp).mul_fraction(c1, pp) * rp * rp
        t2 = t2.mul_fraction(Fraction(1, k * k), pp)
        return t1 + t2

    return (F(b) - F(a)).rounded(p + 4)
