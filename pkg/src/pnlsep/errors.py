"""Exception hierarchy shared across the toolkit.

Two broad families map onto the CLI exit codes: DataError (bad files,
shapes, or configuration, exit 3) and NumericalError (runtime numerical
failure on otherwise valid input, exit 4).
"""


class PnlsepError(Exception):
    """Base class for all toolkit errors."""


class DataError(PnlsepError):
    """User-supplied data or configuration is invalid."""


class NumericalError(PnlsepError):
    """A computation failed numerically."""


class DomainError(NumericalError):
    """A logarithm argument left the positive domain."""


class ExponentOverflowError(NumericalError):
    """A decadic exponent exceeded the overflow guard."""


class DegenerateChannelError(NumericalError):
    """A channel carries no usable signal (zero power)."""


class DegenerateDataError(NumericalError):
    """Rank-deficient covariance; whitening is impossible."""


class EvaluationError(NumericalError):
    """A candidate evaluation failed inside an optimizer run."""

    def __init__(self, message, generation=None, genotype=None):
        super().__init__(message)
        self.generation = generation
        self.genotype = genotype
