"""Counting problems embedded into integrands, and the blowup benchmark.

A subset-sum instance with n_vars items becomes a piecewise-linear function
on [0,1]: the unit interval splits into 2^{n_vars} dyadic cells, one per
assignment, and a cell receives a triangular bump of exact area 4^{-n_vars}
precisely when its assignment hits the target sum.  Evaluating the function
at a point costs one verifier call (a few integer additions), so the
integrand is pointwise cheap; integrating it to enough bits to read off the
count forces any solver to look into every cell.  The benchmark runs that
integration through three solver reductions and records how the wall time
grows with instance size.
"""

from __future__ import annotations

import os
import statistics
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .certified import CertifiedValue, pi_cv, sqrt_cv
from .errors import (CertHeatError, ConfigError, InsufficientPrecision,
                     PreconditionError)
from .evaluable import EvaluableFunction, lipschitz_modulus
from .heat import hardness_initial_interval, solve_neumann_constant_force
from .laplace import hardness_boundary_disk

DEFAULT_MAX_VARS = 24


@dataclass(frozen=True)
class CountingInstance:
    """Subset-sum counting: how many S with sum(weights[i], i in S) == target."""

    weights: tuple[int, ...]
    target: int
    kind: str = "subset-sum-count"

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        if not self.weights or any(w <= 0 for w in self.weights):
            raise PreconditionError("weights must be positive integers")
        if self.target <= 0:
            raise PreconditionError("target must be a positive integer")

    @property
    def n_vars(self) -> int:
        return len(self.weights)

    def accepts(self, assignment: int) -> bool:
        """Verifier: does the bitmask assignment hit the target sum?"""
        total = 0
        for i, w in enumerate(self.weights):
            if assignment >> i & 1:
                total += w
        return total == self.target


def brute_force_count(inst: CountingInstance) -> int:
    """Independent oracle: full enumeration of all 2^{n_vars} assignments."""
    return sum(1 for a in range(1 << inst.n_vars) if inst.accepts(a))


def max_vars_cap() -> int:
    return int(os.environ.get("CERTHEAT_MAX_VARS", str(DEFAULT_MAX_VARS)))


def counting_integrand(inst: CountingInstance) -> EvaluableFunction:
    """Piecewise-linear integrand with integral = count * 4^{-n_vars} exactly.

    Cell index = leading n_vars bits of the evaluation point, bit i of the
    index = assignment of item i.  Accepted cells carry a tent of height
    2^{1-n_vars} and half-width 2^{-n_vars-1} (slope 4), vanishing at cell
    edges.  One verifier call per evaluation; the returned function exposes
    the call counter as ``verifier_calls()``.
    """
    nv = inst.n_vars
    if nv > max_vars_cap():
        raise PreconditionError(
            f"instance has {nv} items, cap is {max_vars_cap()} (CERTHEAT_MAX_VARS)")
    cells = 1 << nv
    height = Fraction(2, cells)
    calls = [0]

    def value(x: Fraction) -> Fraction:
        idx = min(int(x * cells), cells - 1)
        calls[0] += 1
        if not inst.accepts(idx):
            return Fraction(0)
        center = Fraction(2 * idx + 1, 2 * cells)
        bump = height - 4 * abs(x - center)
        return bump if bump > 0 else Fraction(0)

    fn = EvaluableFunction(
        domain=(Fraction(0), Fraction(1)),
        sup_bound=height,
        modulus=lipschitz_modulus(Fraction(4)),
        eval_cv=lambda x, p: CertifiedValue.from_fraction(value(x), p + 2),
        label=f"counting-{nv}",
        eval_exact=value,
        linear_segments=2 * cells,
    )
    fn.verifier_calls = lambda: calls[0]
    return fn


def exact_integral(inst: CountingInstance) -> Fraction:
    return brute_force_count(inst) * Fraction(1, 4 ** inst.n_vars)


def recover_count(v: CertifiedValue, inst: CountingInstance) -> int:
    """Nearest integer to value * 4^{n_vars}; demands error below half a bump."""
    nv = inst.n_vars
    if v.err_fraction() >= Fraction(1, 2 * 4 ** nv):
        raise InsufficientPrecision(
            f"error {v.err_fraction()} too large to separate counts at {nv} items")
    scaled = v.value_fraction() * 4 ** nv + Fraction(1, 2)
    return scaled.numerator // scaled.denominator


def precision_for(inst: CountingInstance) -> int:
    """Bits requested from the pipelines: recovery threshold plus margin."""
    return 2 * inst.n_vars + 6


# ---------------------------------------------------------------------------
# solver pipelines
#
# Each pipeline routes the counting integrand through one PDE reduction and
# returns a certified value equal to count * 4^{-n_vars} within budget.


def pipeline_neumann(inst: CountingInstance, n: int) -> CertifiedValue:
    """Space-independent force: the solution at t=1 is the plain integral."""
    return solve_neumann_constant_force(counting_integrand(inst), Fraction(1), n)


_DISK_R0 = Fraction(1, 2)
_DISK_THETA0 = Fraction(1, 2)


def pipeline_disk(inst: CountingInstance, n: int) -> CertifiedValue:
    """Reweighted disk boundary data; twice the marked point value."""
    g = hardness_boundary_disk(_DISK_R0, _DISK_THETA0, counting_integrand(inst))
    return g.hardness.certified_point_value(n).mul_exact(2)


_IVL_T0 = Fraction(1, 4)
_IVL_X0 = Fraction(1, 2)


def pipeline_interval(inst: CountingInstance, n: int) -> CertifiedValue:
    """Reweighted interval initial data; point value times sqrt(4 pi alpha t0)."""
    gstar = hardness_initial_interval(_IVL_T0, _IVL_X0, counting_integrand(inst))
    u = gstar.hardness.certified_point_value(n + 4)
    back = sqrt_cv(pi_cv(n + 12).mul_fraction(4 * _IVL_T0, n + 10), n + 6)
    return (u * back).rounded(n + 2)


PIPELINES: dict[str, Callable[[CountingInstance, int], CertifiedValue]] = {
    "neumann": pipeline_neumann,
    "disk": pipeline_disk,
    "interval": pipeline_interval,
}


# ---------------------------------------------------------------------------
# benchmark harness


@dataclass
class BlowupRecord:
    pipeline: str
    n_vars: int
    precision_bits: int
    wall_ms: float
    value: Optional[Fraction]
    count: Optional[int]
    ok: bool
    error: str = field(default="", repr=False)


CSV_HEADER = "pipeline,n_vars,precision_bits,wall_ms,value,count,ok"


def measure_blowup(family: list[CountingInstance], pipeline: str,
                   repeats: int = 5) -> list[BlowupRecord]:
    """Run one pipeline over a family; median wall time of `repeats` runs.

    Per-record failures (size cap, precision shortfall) are recorded with
    ok=False and the run continues.
    """
    if pipeline not in PIPELINES:
        raise ConfigError(f"unknown pipeline {pipeline!r}, have {sorted(PIPELINES)}")
    solver = PIPELINES[pipeline]
    records = []
    for inst in family:
        bits = precision_for(inst)
        try:
            times = []
            for _ in range(max(1, repeats)):
                t0 = time.perf_counter_ns()
                v = solver(inst, bits)
                times.append((time.perf_counter_ns() - t0) / 1e6)
            count = recover_count(v, inst)
            ok = 0 <= count <= 1 << inst.n_vars
            records.append(BlowupRecord(pipeline, inst.n_vars, bits,
                                        statistics.median(times),
                                        v.value_fraction(), count, ok))
        except CertHeatError as exc:
            records.append(BlowupRecord(pipeline, inst.n_vars, bits, 0.0,
                                        None, None, False, error=str(exc)))
    return records


def render_csv(records: list[BlowupRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        value = "" if r.value is None else str(r.value)
        count = "" if r.count is None else str(r.count)
        lines.append(f"{r.pipeline},{r.n_vars},{r.precision_bits},"
                     f"{r.wall_ms:.3f},{value},{count},{'true' if r.ok else 'false'}")
    return "\n".join(lines) + "\n"


def write_csv(records: list[BlowupRecord], path: str) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write(render_csv(records))


def random_instance(rng, n_vars: int, max_weight: int = 50) -> CountingInstance:
    """Random weights with a target realized by a random nonempty subset."""
    weights = tuple(rng.randint(1, max_weight) for _ in range(n_vars))
    mask = rng.randrange(1, 1 << n_vars)
    target = sum(w for i, w in enumerate(weights) if mask >> i & 1)
    return CountingInstance(weights, target)
