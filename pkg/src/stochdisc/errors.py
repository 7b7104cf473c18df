"""Exception and warning types shared across the package."""


class StochdiscError(Exception):
    """Base class for all package errors."""


class DomainError(StochdiscError, ValueError):
    """A parameter or input violates a model/type invariant."""


class AlignmentError(StochdiscError, ValueError):
    """Two time series cannot be combined (grid mismatch or short overlap)."""


class InsufficientData(StochdiscError, ValueError):
    """A series is too short for the requested estimate."""


class InsufficientSpan(InsufficientData):
    """A series does not span enough calendar time (e.g. after the CPI lookahead)."""


class FitError(StochdiscError, RuntimeError):
    """The autocovariance fit cannot be set up (degenerate or sign-broken data)."""


class NonConvergence(FitError):
    """The nonlinear least-squares iteration did not converge."""


class BudgetError(StochdiscError, RuntimeError):
    """A Monte Carlo request exceeds the configured total step budget."""


class CoarseStepWarning(UserWarning):
    """The requested step size is too coarse for a low-bias square-root-diffusion step."""


class ShortCorrelationWarning(UserWarning):
    """Fitted correlation time is at or below one sample interval (white-noise-like data)."""


class SeriesGapWarning(UserWarning):
    """An input series contained gaps; only the longest contiguous segment was kept."""


class InconclusiveSignal(UserWarning):
    """An empirical classification fell below its noise threshold (reported, not fatal)."""
