"""Exception hierarchy shared by the estimators, bounds and harness."""


class NcEspritError(ValueError):
    """Base class for all errors raised by this package."""


class ModelError(NcEspritError):
    """Invalid model description (grid, sources, noise, scenario)."""


class NumericalError(NcEspritError):
    """A computation hit a rank deficiency or singularity."""


class RankDeficiencyError(NumericalError):
    pass


class SingularInvarianceError(NumericalError):
    pass


class ResolvabilityError(NcEspritError):
    """Requested more sources than the estimator can resolve."""


class UnsupportedGeometryError(NcEspritError):
    pass
