"""Exception types shared across the package."""


class MassartForgeError(Exception):
    """Base class for all package errors."""


class ConfigValidationError(MassartForgeError, ValueError):
    """A construction parameter violates its feasibility constraint.

    ``constraint`` names the violated condition so callers (and the CLI)
    can report exactly which precondition failed.
    """

    def __init__(self, constraint: str, message: str):
        self.constraint = constraint
        super().__init__(f"{constraint}: {message}")


class EpsilonBoundError(ConfigValidationError):
    """epsilon >= delta/8."""

    def __init__(self, message: str):
        super().__init__("epsilon < delta/8", message)


class DeltaBoundError(ConfigValidationError):
    """delta >= 1."""

    def __init__(self, message: str):
        super().__init__("delta < 1", message)


class DimensionBoundError(ConfigValidationError):
    """d < 2."""

    def __init__(self, message: str):
        super().__init__("d >= 2", message)


class InfeasiblePlanError(ConfigValidationError):
    """A parameter-schedule constraint cannot be met; names the constraint."""


class RangeError(MassartForgeError, ValueError):
    """A scalar argument lies outside its documented range."""


class MomentRangeError(RangeError):
    """Requested moment order would overflow the double range."""


class DensityGapError(MassartForgeError, ValueError):
    """Conditional quantity requested at a point of zero marginal density."""


class BasisSizeError(MassartForgeError, ValueError):
    """Monomial basis would exceed the entry cap."""


class QueryBudgetError(MassartForgeError, RuntimeError):
    """The statistical-query budget is exhausted."""


class DirectionSetError(MassartForgeError, RuntimeError):
    """Rejection sampling of a near-orthogonal set ran out of tries."""
