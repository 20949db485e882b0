"""Exception hierarchy shared by every module."""


class CondwalkError(Exception):
    """Base class for all errors raised by condwalk."""


class ConfigError(CondwalkError, ValueError):
    """Bad user configuration (unknown law, malformed file, bad flag)."""


class InvariantError(ConfigError):
    """A StepLaw or table invariant does not hold.

    ``invariant`` names the violated property so callers can report it.
    """

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        msg = f"invariant violated: {invariant}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DomainError(CondwalkError, ValueError):
    """Argument outside the domain of the operation."""


class DegenerateLawError(CondwalkError, ValueError):
    """The step law has zero variance."""


class UnreachableError(CondwalkError, ValueError):
    """The requested lattice point / endpoint carries zero probability."""


class TruncationError(CondwalkError, RuntimeError):
    """A truncated computation exceeded its error budget."""

    def __init__(self, message: str, bound: float):
        self.bound = bound
        super().__init__(f"{message} (achieved bound {bound:.3e})")


class BudgetError(CondwalkError, RuntimeError):
    """A table is too small (or would be too large) for the request."""


class TableInconsistencyError(CondwalkError, RuntimeError):
    """A renewal table fails its harmonicity check."""


class NumericError(CondwalkError, RuntimeError):
    """Quadrature or root finding did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        self.achieved = achieved
        super().__init__(f"{message} (achieved {achieved:.3e})")
