"""Certified Dirichlet solvers for the Laplace equation on the unit disk and
unit ball, plus the counting-reduction boundary construction.

Angles are kept in units of pi throughout (an angle value a means a*pi
radians), so the angular domain is the rational box [0,2] and every
trigonometric call reduces its argument exactly.  Fourier coefficients are
indexed with a_k the sine coefficient and b_k the cosine coefficient.

The solvers follow one discipline: an exact rational plan fixes the series
order and splits the error budget, certified arithmetic carries the partial
sums, and the analytic tail bound is added to the final error envelope.  The
plan records every inequality it relied on, so it can be re-audited later
with exact comparisons only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .certified import (CertifiedValue, cos_pi_mul_cv, sin_pi_mul_cv)
from .dyadic import as_fraction
from .errors import PreconditionError, QuadratureBudgetError
from .evaluable import EvaluableFunction, _log2_ceil, lipschitz_modulus
from .kernels import real_sph_harmonic_3d, sph_count
from .quadrature import (DEFAULT_MAX_PANELS, int_linear_cos_pi,
                         int_linear_sin_pi, integrate)
from .series import TruncationPlan, choose_K_disk, higher_arith_geom


def _exact_cv(f: Fraction, prec: int) -> CertifiedValue:
    """Exact enclosure when f is dyadic, else one far below the budget."""
    if f.denominator & (f.denominator - 1) == 0:
        return CertifiedValue.exact(f)
    return CertifiedValue.from_fraction(f, prec + 40)


@dataclass
class DiskProblem:
    """Dirichlet data on the unit circle with a guaranteed evaluation radius.

    g lives on [0,2] in pi-units; r0 < 1 bounds where solutions will be
    requested, and the tail constant scales like 1/(1-r0).
    """

    g: EvaluableFunction
    r0: Fraction

    def __post_init__(self):
        self.r0 = as_fraction(self.r0)
        if not 0 <= self.r0 < 1:
            raise PreconditionError("r0 must lie in [0,1)")
        lo, hi = self.g.domain
        if (lo, hi) != (Fraction(0), Fraction(2)):
            raise PreconditionError("boundary data must live on [0,2] in pi-units")
        a = self.g.eval_cv(Fraction(0), 20)
        b = self.g.eval_cv(Fraction(2), 20)
        gap = abs(a.value_fraction() - b.value_fraction())
        if gap > a.err_fraction() + b.err_fraction() + Fraction(1, 2 ** 18):
            raise PreconditionError("boundary data is not periodic at the seam")


# ---------------------------------------------------------------------------
# Fourier coefficients


def _pl_segments(fn: EvaluableFunction, lo: Fraction, hi: Fraction):
    """(c0, c1, a, b) per linear piece of fn over [lo, hi]."""
    grid = fn.segment_grid(lo, hi)
    for a, b in zip(grid, grid[1:]):
        ya, yb = fn.eval_exact(a), fn.eval_exact(b)
        c1 = (yb - ya) / (b - a)
        yield ya - a * c1, c1, a, b


def _pl_fourier(fn: EvaluableFunction, k: int, phase: Fraction, kind: str,
                p: int) -> CertifiedValue:
    """Integral of fn * sin/cos(pi (k rho + phase)) over fn's linear pieces."""
    close = int_linear_sin_pi if kind == "sin" else int_linear_cos_pi
    grid = fn.segment_grid(*fn.domain)
    pp = p + len(grid).bit_length() + 2
    acc = CertifiedValue.zero()
    for c0, c1, a, b in _pl_segments(fn, *fn.domain):
        acc = acc + close(c0, c1, a, b, k, phase, pp)
    return acc


def fourier_coeffs(g: EvaluableFunction, k: int, prec: int):
    """Certified (a_k, b_k) with a_k the sine and b_k the cosine coefficient.

    a_k = (1/pi) * integral of g sin(k tau) over a full period, which in
    pi-units is the plain integral of g(rho) sin(k pi rho) over [0,2];
    likewise for b_k with cosine (so b_0 is twice the mean of g).
    """
    if k < 0:
        raise PreconditionError("coefficient index must be nonnegative")
    tp = g.trig_poly
    if tp is not None:
        a = tp.sin_coeffs.get(k, Fraction(0))
        b = 2 * tp.const if k == 0 else tp.cos_coeffs.get(k, Fraction(0))
        return _exact_cv(a, prec), _exact_cv(b, prec)
    red = getattr(g, "hardness", None)
    if isinstance(red, DiskReduction):
        return _hardness_fourier(red, k, prec)
    if g.has_linear_structure() and g.eval_exact is not None:
        zero = Fraction(0)
        return (_pl_fourier(g, k, zero, "sin", prec).rounded(prec + 2),
                _pl_fourier(g, k, zero, "cos", prec).rounded(prec + 2))
    return (_product_quadrature(g, k, "sin", prec),
            _product_quadrature(g, k, "cos", prec))


def _product_quadrature(g: EvaluableFunction, k: int, kind: str, prec: int) -> CertifiedValue:
    """Modulus-driven fallback for boundaries without declared structure."""
    trig = sin_pi_mul_cv if kind == "sin" else cos_pi_mul_cv

    def ev(rho: Fraction, p: int) -> CertifiedValue:
        return (g.eval_cv(rho, p + 2) * trig(k * rho, p + 2)).rounded(p)

    # |d/drho trig(k pi rho)| <= 4k, |product'| <= 4k sup + Lip_g
    trig_lip = Fraction(4 * max(k, 1)) * max(g.sup_bound, 1)

    def mod(j: int) -> int:
        return max(g.modulus(j + 1), lipschitz_modulus(trig_lip)(j + 1))

    prod = EvaluableFunction(domain=g.domain, sup_bound=g.sup_bound,
                             modulus=mod, eval_cv=ev, label="fourier-product")
    return integrate(prod, g.domain[0], g.domain[1], prec)


# ---------------------------------------------------------------------------
# disk solver


def plan_disk(p: DiskProblem, n: int) -> TruncationPlan:
    """Series order K*(n+1) with the tail constant C = 4||g|| / (1-r0)."""
    C = 4 * p.g.sup_bound / (1 - p.r0)
    K = choose_K_disk(C, p.r0)
    order = K * (n + 1)
    plan = TruncationPlan(order,
                          [("truncation", n + 1), ("summation", n + 1)],
                          f"disk series, K={K} per output bit")
    if p.r0 > 0:
        plan.claim("per-block decay", C * p.r0 ** K, Fraction(1, 2))
    plan.claim("tail", C * p.r0 ** order, Fraction(1, 2 ** (n + 1)))
    assert plan.validates(n)
    return plan


def _coeff_indices(g: EvaluableFunction, order: int) -> list[int]:
    tp = g.trig_poly
    if tp is not None:
        ks = set(tp.sin_coeffs) | set(tp.cos_coeffs)
        return sorted(k for k in ks if 1 <= k <= order)
    return list(range(1, order + 1))


def solve_disk(p: DiskProblem, r, theta, n: int,
               plan: TruncationPlan | None = None) -> CertifiedValue:
    """Certified u(r, theta) with |error| <= 2^-n; theta in units of pi."""
    r, theta = as_fraction(r), as_fraction(theta)
    if not 0 <= r <= p.r0:
        raise PreconditionError("evaluation radius exceeds the declared r0")
    if plan is None:
        plan = plan_disk(p, n)
    order = plan.order
    ks = _coeff_indices(p.g, order)
    pc = n + 1 + max(1, len(ks) + 1).bit_length() + 3
    _, b0 = fourier_coeffs(p.g, 0, pc)
    acc = b0.mul_fraction(Fraction(1, 2), pc)
    rk = Fraction(1)
    last = 0
    for k in ks:
        rk *= r ** (k - last)
        last = k
        if rk == 0:
            break
        a_k, b_k = fourier_coeffs(p.g, k, pc)
        term = a_k * sin_pi_mul_cv(k * theta, pc) + b_k * cos_pi_mul_cv(k * theta, pc)
        acc = (acc + term.mul_fraction(rk, pc)).rounded(pc)
    C = 4 * p.g.sup_bound / (1 - p.r0)
    return acc.widen_fraction(C * p.r0 ** order)


# ---------------------------------------------------------------------------
# counting-reduction boundary data


@dataclass
class DiskReduction:
    """Metadata tying reweighted boundary data to its point-value identity.

    The boundary g was built as gtilde divided by the Poisson kernel at
    (r0, theta0), which forces u(r0, theta0) to equal the plain mean of
    gtilde over the circle regardless of what gtilde is.
    """

    r0: Fraction
    theta0: Fraction
    gtilde: EvaluableFunction

    def certified_point_value(self, n: int) -> CertifiedValue:
        """u(r0, theta0) = (1/2) * integral of gtilde over [0,2]."""
        return integrate(self.gtilde, 0, 2, n + 1).mul_fraction(Fraction(1, 2), n + 1)


def interpolated_closure(h: EvaluableFunction) -> EvaluableFunction:
    """Extend h from [0,1] to [0,2] by the linear bridge back to h(0).

    The bridge keeps the closure continuous and exactly periodic on the
    circle; piecewise-linear structure on h is preserved so integrals of the
    closure stay exact.
    """
    if h.domain != (Fraction(0), Fraction(1)):
        raise PreconditionError("profile must live on [0,1]")
    if h.eval_exact is None:
        raise PreconditionError("profile needs exact pointwise evaluation")
    h0, h1 = h.eval_exact(Fraction(0)), h.eval_exact(Fraction(1))

    def exact(x: Fraction) -> Fraction:
        if x <= 1:
            return h.eval_exact(x)
        return h1 + (h0 - h1) * (x - 1)

    bridge_lip = abs(h0 - h1)

    def mod(k: int) -> int:
        return max(h.modulus(k), lipschitz_modulus(max(bridge_lip, Fraction(1)))(k))

    out = EvaluableFunction(
        domain=(Fraction(0), Fraction(2)),
        sup_bound=max(h.sup_bound, abs(h0), abs(h1), Fraction(1, 2 ** 30)),
        modulus=mod,
        eval_cv=lambda x, p: CertifiedValue.from_fraction(exact(x), p + 2),
        label=(h.label or "profile") + "-closure",
        eval_exact=exact,
    )
    if h.linear_segments is not None:
        out.linear_segments = 2 * h.linear_segments
    elif h.breakpoints is not None:
        out.breakpoints = list(h.breakpoints) + [Fraction(2)]
    elif h.poly_coeffs is not None and len(h.poly_coeffs) <= 2:
        out.breakpoints = [Fraction(0), Fraction(1), Fraction(2)]
    return out


def hardness_boundary_disk(r0, theta0, h: EvaluableFunction) -> EvaluableFunction:
    """Boundary data whose solution at (r0, theta0) is the mean of h's closure.

    g(rho) = gtilde(rho) * (1 - 2 r0 cos(pi(theta0 - rho)) + r0^2) / (1 - r0^2)
    cancels the Poisson kernel at the marked point, so evaluating the solution
    there is exactly the integration task (1/2) * integral of gtilde.
    """
    r0, theta0 = as_fraction(r0), as_fraction(theta0)
    if not 0 <= r0 < 1:
        raise PreconditionError("r0 must lie in [0,1)")
    if not 0 <= theta0 <= 2:
        raise PreconditionError("theta0 must lie in [0,2] (pi-units)")
    gt = interpolated_closure(h)
    one_plus = 1 + r0 * r0
    inv_den = Fraction(1) / (1 - r0 * r0)

    def ev(rho: Fraction, p: int) -> CertifiedValue:
        pp = p + 6
        kern = CertifiedValue.from_fraction(one_plus, pp) - \
            cos_pi_mul_cv(theta0 - rho, pp).mul_fraction(2 * r0, pp)
        return (gt.eval_cv(rho, pp) * kern).mul_fraction(inv_den, pp).rounded(p)

    dmax = (1 + r0) / (1 - r0) if r0 else Fraction(1)
    dlip = 8 * r0 * inv_den  # |d/drho| of the kernel factor, pi <= 4
    shift = max(0, _log2_ceil(dmax)) + 1

    def mod(k: int) -> int:
        return max(gt.modulus(k + shift),
                   lipschitz_modulus(max(gt.sup_bound * dlip, Fraction(1)))(k + 1))

    out = EvaluableFunction(
        domain=(Fraction(0), Fraction(2)),
        sup_bound=gt.sup_bound * dmax,
        modulus=mod,
        eval_cv=ev,
        label="reduction-boundary",
    )
    out.hardness = DiskReduction(r0, theta0, gt)
    return out


def _hardness_fourier(red: DiskReduction, k: int, prec: int):
    """Closed-form Fourier coefficients of gtilde times the kernel factor.

    The product against sin/cos(k pi rho) expands into shifted-phase modes
    k-1, k, k+1, each of which integrates in closed form against the linear
    pieces of gtilde.
    """
    gt = red.gtilde
    if not (gt.has_linear_structure() and gt.eval_exact is not None):
        raise PreconditionError("closed-form route needs a piecewise-linear profile")
    r0, th0 = red.r0, red.theta0
    inv_den = Fraction(1) / (1 - r0 * r0)
    one_plus = 1 + r0 * r0
    pp = prec + 4

    def combo(kind: str) -> CertifiedValue:
        main = _pl_fourier(gt, k, Fraction(0), kind, pp).mul_fraction(one_plus, pp)
        # cos(pi(theta0 - rho)) * trig(k pi rho) splits into modes k -+ 1
        side = _pl_fourier(gt, k - 1, th0, kind, pp) + \
            _pl_fourier(gt, k + 1, -th0, kind, pp)
        return (main - side.mul_fraction(r0, pp)).mul_fraction(inv_den, pp)

    return combo("sin").rounded(prec + 2), combo("cos").rounded(prec + 2)


# ---------------------------------------------------------------------------
# ball solver (d = 3 explicit basis)


@dataclass
class BallProblem:
    """Dirichlet data on the unit sphere in R^d, evaluation radius bound r0."""

    d: int
    g: EvaluableFunction
    r0: Fraction

    def __post_init__(self):
        self.r0 = as_fraction(self.r0)
        if self.d < 3:
            raise PreconditionError("ball solver starts at dimension 3")
        if not 0 <= self.r0 < 1:
            raise PreconditionError("r0 must lie in [0,1)")


def plan_ball_truncation(d: int, sup_g, r0, n: int) -> TruncationPlan:
    """Smallest degree cutoff M making the harmonic tail drop below 2^-(n+1).

    Uses N(d,l) <= 2 (l+1)...(l+d-2) / (d-2)! so the tail is an
    arithmetico-geometric sum of order d-2.
    """
    sup_g, r0 = as_fraction(sup_g), as_fraction(r0)
    if d < 3:
        raise PreconditionError("dimension must be at least 3")
    if not 0 <= r0 < 1:
        raise PreconditionError("r0 must lie in [0,1)")
    budget = Fraction(1, 2 ** (n + 1))
    scale = 2 * sup_g / factorial(d - 2)
    if r0 == 0:
        plan = TruncationPlan(0, [("truncation", n + 1), ("summation", n + 1)],
                              "center evaluation, only l=0 survives")
        assert plan.validates(n)
        return plan
    M = 0
    while scale * higher_arith_geom(M + 1, d - 2, r0) > budget:
        M += 1
    plan = TruncationPlan(M, [("truncation", n + 1), ("summation", n + 1)],
                          f"spherical-harmonic cutoff in dimension {d}")
    for l in range(M + 1, M + 4):
        count_bound = 2 * Fraction(factorial(l + d - 2), factorial(l)) / factorial(d - 2)
        plan.claim(f"mode count l={l}", Fraction(sph_count(d, l)), count_bound)
    plan.claim("tail", scale * higher_arith_geom(M + 1, d - 2, r0), budget)
    assert plan.validates(n)
    return plan


def solve_ball(p: BallProblem, r, theta, phi, n: int,
               plan: TruncationPlan | None = None) -> CertifiedValue:
    """Certified u(r, theta, phi) on the unit 3-ball, angles in pi-units.

    Needs boundary data with declared orthonormal-harmonic modes; data
    given only through pointwise evaluation would require certified product
    quadrature over the whole sphere, whose panel count is far beyond the
    budget cap at any useful precision.
    """
    if p.d != 3:
        raise PreconditionError("explicit solve supports d = 3 only")
    r = as_fraction(r)
    if not 0 <= r <= p.r0:
        raise PreconditionError("evaluation radius exceeds the declared r0")
    modes = p.g.sph_modes
    if modes is None:
        raise QuadratureBudgetError(
            "boundary data has no declared harmonic modes; certified sphere "
            f"quadrature would exceed {DEFAULT_MAX_PANELS} panels")
    if plan is None:
        sup = sum(map(abs, modes.values()), Fraction(0))
        plan = plan_ball_truncation(p.d, max(sup, Fraction(1)), p.r0, n)
    use = [(l, m) for (l, m) in sorted(modes) if l <= plan.order and modes[(l, m)]]
    pc = n + 1 + max(1, len(use)).bit_length() + 3
    acc = CertifiedValue.zero()
    for l, m in use:
        y = real_sph_harmonic_3d(l, m, theta, phi, pc)
        acc = (acc + y.mul_fraction(modes[(l, m)] * r ** l, pc)).rounded(pc)
    # dropped declared modes: |Y_{l,m}| <= sqrt((2l+1)/(4 pi)) <= (l+1)/3
    extra = sum((abs(c) * r ** l * Fraction(l + 1, 3)
                 for (l, _m), c in modes.items() if l > plan.order), Fraction(0))
    return acc.widen_fraction(extra)
