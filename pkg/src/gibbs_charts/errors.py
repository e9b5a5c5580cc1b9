"""Exception hierarchy for gibbs_charts."""


class GibbsChartsError(Exception):
    """Base class for all errors raised by this package."""


class NotMixing(GibbsChartsError, ValueError):
    pass


class ZeroRowOrColumn(GibbsChartsError, ValueError):
    pass


class DepthTooLarge(GibbsChartsError, ValueError):
    pass


class InsufficientDepth(GibbsChartsError, ValueError):
    pass


class NonSummableVariation(GibbsChartsError, ValueError):
    pass


class NotStableRelated(GibbsChartsError, ValueError):
    pass


class BackendMismatch(GibbsChartsError, TypeError):
    pass


class PositivityFailure(GibbsChartsError, ArithmeticError):
    pass


class ConvergenceError(GibbsChartsError, ArithmeticError):
    pass


class NotUnimodular(GibbsChartsError, ValueError):
    pass


class NotHyperbolic(GibbsChartsError, ValueError):
    pass


class UnsupportedMatrix(GibbsChartsError, ValueError):
    pass


class MarkovPropertyViolation(GibbsChartsError, ValueError):
    pass


class InadmissibleWord(GibbsChartsError, ValueError):
    pass


class OrderingFailure(GibbsChartsError, ValueError):
    pass


class NotHolonomyRelated(GibbsChartsError, ValueError):
    pass
