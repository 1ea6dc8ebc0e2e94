"""Exception hierarchy shared by every module in the package."""


class MitbenchError(Exception):
    """Base class for all errors raised by mitbench."""


class InvalidInputError(MitbenchError, ValueError):
    """An argument violates a documented precondition."""


class ResourceError(MitbenchError):
    """A request exceeds what the simulator can hold in memory."""


class FitFailureError(MitbenchError):
    """A nonlinear extrapolation did not converge.

    Attributes:
        diagnostics: free-form details about the failed fit (iterations,
            last parameters, residual, and any partial data the caller attached).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class DegenerateTrainingError(MitbenchError):
    """CDR training data stayed ill-conditioned after every regeneration attempt."""


class SingularFitError(MitbenchError):
    """A regression slope vanished, so the fitted map cannot be inverted."""


class SingularVarianceError(MitbenchError):
    """Variance propagation needs a non-zero spread in the regressors."""


class DivisionDegenerateError(MitbenchError):
    """The noisy mean coincides with the ideal value, so the ratio is undefined."""


class SamplingExhaustedError(MitbenchError):
    """Rejection sampling ran out of attempts before collecting enough circuits."""

    def __init__(self, message, attempts=0, accepted=0):
        super().__init__(message)
        self.attempts = attempts
        self.accepted = accepted

    @property
    def acceptance_rate(self):
        return self.accepted / self.attempts if self.attempts else 0.0


class InvalidGraphError(MitbenchError):
    """A task graph contains a cycle or refers to unknown nodes."""


class WiringError(MitbenchError):
    """A task graph port is unwired, wired twice, or out of range."""


class ConfigError(MitbenchError):
    """A benchmark configuration file failed to parse or validate."""

    def __init__(self, message, key=None, line=None, column=None):
        super().__init__(message)
        self.key = key
        self.line = line
        self.column = column


class NothingToRenderError(MitbenchError):
    """Every cell of a grid is empty, so no heatmap can be drawn."""
