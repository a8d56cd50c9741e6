"""Series tail identities behind every truncation plan.

Everything here is exact rational arithmetic. The tails of the solver series
are bounded by arithmetic-geometric sums, and the plans pick truncation
orders by exact comparison against dyadic error budgets, so no floating
point is allowed anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .dyadic import as_fraction
from .errors import PreconditionError


def arith_geom_sum(m: int, x) -> Fraction:
    """Sum of (k+1) x^k for k >= m, as an exact rational.

    >>> arith_geom_sum(0, Fraction(1, 2))
    Fraction(4, 1)
    >>> arith_geom_sum(1, Fraction(1, 2))
    Fraction(3, 1)
    """
    x = as_fraction(x)
    if m < 0:
        raise PreconditionError("m must be nonnegative")
    if abs(x) >= 1:
        raise PreconditionError("arith_geom_sum requires |x| < 1")
    return x ** m * (m * (1 - x) + 1) / (1 - x) ** 2


def higher_arith_geom(m: int, p: int, x) -> Fraction:
    """Sum of x^k (k+p)!/k! for k >= m, exact.

    Computed by differentiating x^(p+m)/(1-x) p times term by term, keeping
    coefficients of x^a/(1-x)^b exactly, then evaluating at x.
    """
    x = as_fraction(x)
    if m < 0 or p < 0:
        raise PreconditionError("m and p must be nonnegative")
    if abs(x) >= 1:
        raise PreconditionError("higher_arith_geom requires |x| < 1")
    # terms: (a, b) -> coefficient, meaning coeff * x^a / (1-x)^b
    terms = {(p + m, 1): 1}
    for _ in range(p):
        nxt: dict[tuple[int, int], int] = {}
        for (a, b), c in terms.items():
            if a > 0:
                key = (a - 1, b)
                nxt[key] = nxt.get(key, 0) + c * a
            key = (a, b + 1)
            nxt[key] = nxt.get(key, 0) + c * b
        terms = nxt
    one_minus = 1 - x
    total = Fraction(0)
    for (a, b), c in terms.items():
        total += c * x ** a / one_minus ** b
    return total


def geometric_tail(r, start: int, scale) -> Fraction:
    """scale * r^start / (1 - r): closed form for scale * sum of r^k, k >= start."""
    r = as_fraction(r)
    scale = as_fraction(scale)
    if not 0 < r < 1:
        raise PreconditionError("geometric_tail requires r in (0,1)")
    return scale * r ** start / (1 - r)


def choose_K_disk(C, r0) -> int:
    """Smallest block size K making the disk series tail halve per extra bit.

    For C <= 1, smallest K with r0^K < 1/2; otherwise smallest K with
    r0^K < 1/(2C).  Either way C (r0^K)^N < 2^-N for every N >= 1.
    """
    C = as_fraction(C)
    r0 = as_fraction(r0)
    if C <= 0:
        raise PreconditionError("C must be positive")
    if not 0 <= r0 < 1:
        raise PreconditionError("r0 must lie in [0,1)")
    if r0 == 0:
        return 1
    threshold = Fraction(1, 2) if C <= 1 else Fraction(1, 2) / C
    K = 1
    power = r0
    while power >= threshold:
        K += 1
        power *= r0
    return K


@dataclass
class TruncationPlan:
    """How many series terms a solver will sum, and why that is enough.

    ``chain`` records the exact rational inequalities the plan rests on as
    (label, lhs, rhs) triples meaning lhs <= rhs.  Solvers append every bound
    they rely on (tail estimates, budget comparisons), so a finished plan can
    be re-audited independently of the float-free arithmetic that built it.
    """

    order: int
    budget_split: list[tuple[str, int]] = field(default_factory=list)
    justification: str = ""
    chain: list[tuple[str, Fraction, Fraction]] = field(default_factory=list)
    # solver-specific integers (cutoff index, working scale, ...) the solve
    # step needs back from planning
    params: dict[str, int] = field(default_factory=dict)

    def total_budget(self) -> Fraction:
        return sum((Fraction(1, 2) ** e for _, e in self.budget_split), Fraction(0))

    def validates(self, n_target: int) -> bool:
        """Exact check that the budget parts sum to at most 2^-n_target."""
        return self.total_budget() <= Fraction(1, 2) ** n_target

    def claim(self, label: str, lhs, rhs) -> None:
        """Record the inequality lhs <= rhs; raises if it does not hold."""
        lhs, rhs = as_fraction(lhs), as_fraction(rhs)
        if lhs > rhs:
            raise AssertionError(f"plan inequality {label} fails: {lhs} > {rhs}")
        self.chain.append((label, lhs, rhs))

    def chain_ok(self) -> bool:
        """Re-verify every recorded inequality with exact comparisons."""
        return all(lhs <= rhs for _, lhs, rhs in self.chain)
