"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class LabError(Exception):
    """Base class for every error raised by ucondlab."""


class NotLocal(LabError, ValueError):
    """A point set is not a member of the local family."""


class ShapeMismatch(LabError, ValueError):
    pass


class NotScalar(LabError, ValueError):
    pass


class UnboundedMultiplier(LabError, ValueError):
    pass


class NoOracle(LabError):
    """No tail oracle of the requested kind can produce a witness set."""


class CauchyFailure(LabError):
    """A disjoint local set violates the Cauchy condition.

    Attributes
    ----------
    violating_set : the local set D with ``||int_D f|| >= eps``
    norm : the measured norm of the partial integral over D
    eps : the tolerance that was violated
    candidate : the local set D was required to avoid
    """

    def __init__(self, violating_set, norm: float, eps: float, candidate=None, message: str = ""):
        self.violating_set = violating_set
        self.norm = float(norm)
        self.eps = float(eps)
        self.candidate = candidate
        super().__init__(message or f"Cauchy condition violated: ||int_D f|| = {self.norm:.6g} >= eps = {self.eps:.6g}")


class FactorMismatch(LabError, ValueError):
    pass


class NotPositiveType(LabError, ValueError):
    pass


class RepNotUnitary(LabError):
    pass


class RepNotHomomorphism(LabError):
    pass


class GradingViolation(LabError):
    def __init__(self, message: str, where=None, residual: float = float("nan")):
        self.where = where
        self.residual = residual
        super().__init__(message)


class BundleMismatch(LabError, ValueError):
    pass


class FiberViolation(LabError, ValueError):
    pass


class NotUnitary(LabError, ValueError):
    pass


class NotHomomorphism(LabError, ValueError):
    pass


class WorldMismatch(LabError, TypeError):
    pass


class NotPositive(LabError, ValueError):
    pass


class NotDominated(LabError, ValueError):
    pass


class ValidationError(LabError, ValueError):
    """Scenario parameters or a fixture file failed schema validation."""
