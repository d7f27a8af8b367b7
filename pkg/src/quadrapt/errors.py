"""Exception hierarchy.

Two broad categories drive CLI exit codes: ``usage`` errors are violated
preconditions or bad input (exit 2), ``numerical`` errors are failures of the
numerics themselves (exit 1).
"""


class QuadraptError(Exception):
    category = "numerical"


class UsageError(QuadraptError):
    category = "usage"


class ChartDomainError(UsageError):
    """Point outside a chart's declared domain."""


class DegenerateChartError(QuadraptError):
    """Implicit-surface gradient below threshold; no Monge chart here."""


class OffSurfaceError(UsageError):
    """Base point does not satisfy F=0 within tolerance."""


class SingularCubicError(UsageError):
    """All cubic-form components below the zero tolerance (a quadratic point)."""


class NormalizationRequiredError(UsageError):
    """The 2-jet is not in the expected normal form."""


class NotQuadraticPointError(UsageError):
    """A nonvanishing cubic-form 3-jet where a quadratic point was required."""


class NonSimpleError(UsageError):
    """delta = ad - bc vanishes within tolerance."""


class BoundaryCaseError(UsageError):
    """Discriminant within tolerance of zero; classification undefined."""


class NearSingularError(QuadraptError):
    """Winding refinement hit the depth limit near a suspected zero."""


class NotSemiHomogeneousError(UsageError):
    """(A_n, B_n) share a real projective root."""


class UnsupportedPortraitError(UsageError):
    """Portrait contains non-hyperbolic blow-up singularities."""
