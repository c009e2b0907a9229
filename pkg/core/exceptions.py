# core/exceptions.py: one hierarchy for every failure the services raise


class NsnrError(Exception):
    """Base class; management commands turn these into CommandError."""


class NotSymmetric(NsnrError, ValueError):
    pass


class NotPositiveDefinite(NsnrError, ValueError):
    pass


class DimensionMismatch(NsnrError, ValueError):
    pass


class ConvergenceFailure(NsnrError, ArithmeticError):
    pass


class DegenerateInput(NsnrError, ValueError):
    """Constant or too-short series handed to a statistic."""


class ConfigInvalid(NsnrError, ValueError):
    pass


class EstimatorSingular(NsnrError, RuntimeError):
    """Redraw cap exceeded while trying to get an invertible estimate."""


class BoundViolation(NsnrError, RuntimeError):
    """A trial produced d_nsnr > d_kl, which the KL bound forbids."""


class ExportError(NsnrError, OSError):
    pass
