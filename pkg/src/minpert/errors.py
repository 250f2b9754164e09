"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations

import numpy as np


class MinPertError(Exception):
    """Base class for all package errors."""


class ParseError(MinPertError, ValueError):
    """Problem text does not follow the grammar.

    ``line`` and ``column`` are 1-based and point at the offending character.
    """

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


class DimensionMismatch(MinPertError, ValueError):
    pass


class RankDeficient(MinPertError, np.linalg.LinAlgError):
    pass


class ZeroMatrix(MinPertError, ValueError):
    pass


class UnknownBuiltin(MinPertError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown builtin"


class HypothesisFailure(MinPertError):
    """The anchor violates the root or onto condition; ``report`` holds details."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class NoConvergence(MinPertError, ArithmeticError):
    def __init__(self, message: str, trace=None):
        self.trace = trace
        super().__init__(message)


class NoFeasiblePoint(MinPertError):
    pass


class InsufficientData(MinPertError):
    pass
