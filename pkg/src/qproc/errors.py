"""Exception hierarchy shared by all qproc modules."""


class QprocError(Exception):
    """Base class for every error raised by qproc."""


class ShapeError(QprocError, ValueError):
    """Array shapes or dimensions do not fit together."""


class InvalidDistributionError(QprocError, ValueError):
    """A probability vector or joint law has negative mass or bad normalization."""


class IncompatibilityError(QprocError, ValueError):
    """Two objects that must agree on a shared part do not.

    ``deviation`` carries the largest entrywise mismatch that was found.
    """

    def __init__(self, message, deviation=None):
        super().__init__(message)
        self.deviation = deviation


class AmbiguityError(QprocError, ValueError):
    """A quantity is not uniquely determined (e.g. non-ergodic chain)."""


class StationarityError(QprocError, ValueError):
    """A measure is not invariant under the transition it is paired with."""


class ContractError(QprocError, ValueError):
    """An input violates a documented precondition of the operation."""


class RegionError(ContractError):
    """Parameters fall outside the complete-positivity region.

    ``failed`` lists the names of the violated inequalities.
    """

    def __init__(self, message, failed=()):
        super().__init__(message)
        self.failed = tuple(failed)


class SizeError(QprocError, ValueError):
    """An exact enumeration or dense construction would be too large."""


class SpectralError(QprocError, ArithmeticError):
    """A resolvent or spectral quantity is singular."""


class NonContractiveError(SpectralError):
    """Spectral radius of a mode map is not strictly below one."""


class AbsorbingStateError(QprocError, RuntimeError):
    """The hidden Markov filter reached a state that emits nothing."""


class OptimizationError(QprocError, RuntimeError):
    """A constrained optimizer found no feasible point."""
