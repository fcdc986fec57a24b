"""Exception and warning types shared across the solver modules."""

from __future__ import annotations


class SolverError(Exception):
    """Base class for all indefbvp errors."""


class NoSignChange(SolverError):
    """The weight has constant sign on the interval; no sign structure exists.

    ``sign`` is +1 for a non-negative weight, -1 for a non-positive one and
    0 for a weight below the detection tolerance everywhere.
    """

    def __init__(self, message: str, sign: int = 0):
        super().__init__(message)
        self.sign = sign


class AmbiguousStructure(SolverError):
    """Sampled sign pattern cannot be resolved into interleaved intervals."""


class InvalidExponent(SolverError, ValueError):
    """Power nonlinearity requires an exponent p > 1."""


class StepSizeUnderflow(SolverError):
    """The adaptive integrator could not advance past ``t_last``."""

    def __init__(self, message: str, t_last: float):
        super().__init__(message)
        self.t_last = t_last


class NonFiniteState(SolverError):
    """Integration produced NaN or infinite state components."""


class ScanTooCoarse(UserWarning):
    """Adjacent scan brackets collapsed onto the same root after refinement."""


class AmbiguousClassification(SolverError):
    """An interval maximum falls inside the classification margin around r."""


class HypothesesNotVerified(SolverError):
    """A certificate was requested for a weight that fails its hypotheses."""


class NoSolution(SolverError):
    """No positive solution was found where one was required."""


class MultipleSolutions(SolverError):
    """An interval admits several positive solutions; carries all of them."""

    def __init__(self, message: str, pieces):
        super().__init__(message)
        self.pieces = list(pieces)


class NewtonDiverged(SolverError):
    """No damping factor reduced the Newton residual."""


class SingularJacobian(SolverError):
    """The collocation Jacobian (or its bordered extension) is singular."""


class StepUnderflow(SolverError):
    """Arclength step fell below the minimum; carries the partial branch."""

    def __init__(self, message: str, branch=None):
        super().__init__(message)
        self.branch = branch
