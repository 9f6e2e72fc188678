"""Exception hierarchy shared by all solver modules."""


class MagbeamError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(MagbeamError, ValueError):
    pass


class DimensionMismatch(MagbeamError, ValueError):
    pass


class ZeroCoupling(MagbeamError):
    """The RX is decoupled from the TX array, so no positive load power is reachable."""


class NumericalFailure(MagbeamError):
    pass


class NotIdenticalResistances(MagbeamError, ValueError):
    pass


class InfeasibleProblem(MagbeamError):
    """Raised when the relaxation is proven infeasible.

    ``certificate`` holds the normalized dual ray (a dict) that proves it.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class MaxIterationsReached(MagbeamError):
    pass


class RankDeficiencyUnexpected(MagbeamError):
    """The relaxed solution is not numerically rank one."""

    def __init__(self, message, rank_ratio=None):
        super().__init__(message)
        self.rank_ratio = rank_ratio


class Unbounded(MagbeamError):
    """No finite voltage or current limit caps the deliverable power."""


class NoFeasiblePointFound(MagbeamError):
    pass


class InvalidGeometry(MagbeamError, ValueError):
    pass


class DegenerateGeometry(InvalidGeometry):
    pass


class LoopsIntersect(InvalidGeometry):
    pass


class QuadratureTooCoarse(MagbeamError):
    pass


class ScenarioError(MagbeamError):
    pass


class ParseError(ScenarioError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(ScenarioError):
    def __init__(self, message, path=""):
        super().__init__(message)
        self.path = path


class UnitError(ScenarioError):
    pass
