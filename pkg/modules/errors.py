"""Exception hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI reports for it.
"""
from typing import Optional, Dict


class TrichainError(Exception):
    exit_code = 1

    def __init__(self, message: str = "", details: Optional[Dict] = None):
        super().__init__(message)
        self.details = details or {}


class InvalidInput(TrichainError):
    exit_code = 2


class NonGraphical(TrichainError):
    """Degree sequence has no simple realization"""
    exit_code = 2


class InvalidSwitch(TrichainError):
    exit_code = 2


class NoValidPair(TrichainError):
    """No pair of vertex-disjoint edges exists"""
    exit_code = 3


class SpaceTooLarge(TrichainError):
    exit_code = 4


class NotIrreducible(TrichainError):
    exit_code = 5


class ConvergenceFailure(TrichainError):
    exit_code = 5


class MinDegreeTooSmall(TrichainError):
    exit_code = 6


class PlantImpossible(TrichainError):
    """Forced planting hit the 5-cycle-without-4-cycle exception"""
    exit_code = 70


class InternalContradiction(TrichainError):
    exit_code = 70
