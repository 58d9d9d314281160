"""Exception types shared across the package."""


class GraphFormsError(Exception):
    """Base class for all graphforms errors."""


class NegativeWeightError(GraphFormsError):
    """An edge weight was zero or negative."""


class SelfLoopError(GraphFormsError):
    """An edge connected a vertex to itself."""


class IndexOutOfRangeError(GraphFormsError):
    """A vertex index fell outside 0..n-1."""


class EmptySubsetError(GraphFormsError):
    """A truncation was requested on an empty vertex subset."""


class SizeOverflowError(GraphFormsError):
    """A generator would exceed the configured vertex cap."""


class IsolatedVertexError(GraphFormsError):
    """A vertex with zero weighted degree where positive degree is required."""


class NonIncreasingSequenceError(GraphFormsError):
    """A sequence that must increase strictly had a tie or decrease."""


class SizeMismatchError(GraphFormsError):
    """Two objects that must share a vertex count did not."""


class ConvergenceError(GraphFormsError):
    """The eigensolver failed to reach the requested residual."""

    def __init__(self, message: str, achieved_residual: float | None = None):
        super().__init__(message)
        self.achieved_residual = achieved_residual


class IncompleteSpectrumError(GraphFormsError):
    """An operation needed the full spectrum but got a partial one."""


class SingularFormError(GraphFormsError):
    """The (possibly anchored) form matrix is not positive definite."""


class WrongKindError(GraphFormsError):
    """A Sobolev estimate of the wrong kind/parameters was supplied."""


class BadEnumerationError(GraphFormsError):
    """A vertex enumeration was not a permutation or had the wrong start."""


class MissingEstimateError(GraphFormsError):
    """A bound check required a Sobolev estimate that was not provided."""


class ConfigError(GraphFormsError):
    """A CLI config file failed validation; message carries the field path."""
