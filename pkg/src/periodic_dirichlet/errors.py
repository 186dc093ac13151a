"""Exception types raised across the package."""

from __future__ import annotations


class PeriodicDirichletError(Exception):
    """Base class for all errors raised by this package."""


class PoleError(PeriodicDirichletError, ValueError):
    """Evaluation requested at (or too close to) the pole s = 1."""


class PrecisionError(PeriodicDirichletError, ArithmeticError):
    """A requested accuracy cannot be met within the work budget."""


class BoundaryZero(PeriodicDirichletError):
    """The function (nearly) vanishes on a counting contour."""

    def __init__(self, message: str, location: complex | None = None, modulus: float | None = None):
        super().__init__(message)
        self.location = location
        self.modulus = modulus


class FactorSingular(PeriodicDirichletError, ZeroDivisionError):
    """An Euler factor 1 - chi(p) p^(-s) is numerically zero."""


class DegenerateInput(PeriodicDirichletError, ValueError):
    """The input sequence is identically zero where a non-zero one is required."""


class ParseError(PeriodicDirichletError, ValueError):
    """Malformed input file."""


class InfeasibleRadius(PeriodicDirichletError):
    """Class sums too small for the requested target radius."""

    def __init__(self, message: str, max_feasible_R: float):
        super().__init__(message)
        self.max_feasible_R = max_feasible_R


class SplitUnattainable(PeriodicDirichletError):
    """No three-block split of a residue class reaches the requested delta."""

    def __init__(self, message: str, best_delta: float):
        super().__init__(message)
        self.best_delta = best_delta


class NoSolution(PeriodicDirichletError):
    """The two-angle equation has no solution for the given data."""


class ResidualTooLarge(PeriodicDirichletError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NonConvergence(PeriodicDirichletError):
    def __init__(self, message: str, discrepancy: float):
        super().__init__(message)
        self.discrepancy = discrepancy


class NoPositiveGamma(PeriodicDirichletError):
    """Every tried circle radius has a (near) zero of the comparison function on it."""


class NotFound(PeriodicDirichletError):
    """No shift t in the searched window aligns the prime phases."""


class CertificationFailed(PeriodicDirichletError):
    """Rouche comparison could not be established.

    ``report`` carries a JSON-serializable description of where the
    pipeline stopped and why.
    """

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}
