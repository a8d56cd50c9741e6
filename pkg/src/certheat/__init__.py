"""Certified-precision PDE solvers with exact error accounting.

Solvers for the Laplace equation (disk, d-ball) and the 1-D diffusion
equation (interval, half-line) that return values guaranteed within 2^-n of
the truth, every bound carried as an exact rational and re-auditable after
the fact.  A benchmark harness embeds subset-sum counting into cheap
pointwise integrands and measures how solve time grows with instance size.
"""

__version__ = "0.1.0"
