"""Exception types shared across the package."""


class CertHeatError(Exception):
    """Base class for all package-specific failures."""


class PreconditionError(CertHeatError):
    """An operation was called outside its stated domain."""


class QuadratureBudgetError(CertHeatError):
    """The declared modulus cannot meet the error budget within the
    configured maximum number of subdivisions."""


class InsufficientPrecision(CertHeatError):
    """A certified value is too loose to determine the requested discrete
    answer (e.g. an integer count)."""


class ConfigError(CertHeatError):
    """Malformed or contradictory run configuration."""
