"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes; the library raises them directly.
"""


class VolmixError(Exception):
    """Base class for all errors raised by volmix."""


class DataQualityError(VolmixError, ValueError):
    """Input data is present but unusable: too many malformed records,
    degenerate samples (all values equal), or invariant violations."""


class InsufficientDataError(VolmixError, ValueError):
    """Not enough observations to run an estimator at its stated accuracy."""


class ConvergenceError(VolmixError, RuntimeError):
    """An iterative numerical routine failed to reach its tolerance."""


class NotFittedError(VolmixError, ValueError, AttributeError):
    """An estimator method requiring a fit was called before fit().

    Inherits ValueError and AttributeError so scikit-learn's fitted-state
    probing treats it the same way as sklearn's own NotFittedError.
    """
