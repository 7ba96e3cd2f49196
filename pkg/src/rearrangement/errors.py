"""Exception hierarchy.

Plain argument problems raise ``ValueError``. The classes below mark
failures callers usually want to tell apart (the CLI maps them to exit
codes).
"""


class RearrangementError(Exception):
    """Base class for package-specific failures."""


class InputError(RearrangementError, ValueError):
    """Malformed or inconsistent input data."""


class GridMismatchError(InputError):
    """Two curves that must share an index grid do not."""


class RangeError(InputError):
    """A level grid does not cover the range of a curve."""


class NumericalError(RearrangementError):
    """A computation is undefined or unreliable for the given input."""


class CriticalValueError(NumericalError, ValueError):
    """Evaluation requested at (or numerically at) a critical value."""


class DegenerateCurveError(NumericalError, ValueError):
    """Curve has no mass where a normalisation needs it."""


class SingularDesignError(NumericalError, ValueError):
    """Regression design matrix is rank deficient."""


class WeakInstrumentError(NumericalError, ValueError):
    """First stage too weak for a Wald-type ratio."""


class GridBoundaryError(NumericalError):
    """Grid-search optimum lies on the boundary of the search grid."""


class BootstrapError(NumericalError):
    """Too many bootstrap replicates failed."""


class InsufficientReplicatesError(NumericalError, ValueError):
    """Not enough replicates for the requested band level."""


class InfeasibleBandError(RearrangementError):
    """Monotone intersection of a band is empty."""
