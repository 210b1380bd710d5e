"""Exception types raised by the engine."""

from __future__ import annotations


class MeanperError(Exception):
    """Base class for all engine errors."""


class InvalidArgument(MeanperError, ValueError):
    pass


class RangeError(MeanperError, OverflowError):
    pass


class NoConvergence(MeanperError):
    """Newton refinement ran out of iterations.

    Carries the last iterate and its residual so callers can decide what to do.
    """

    def __init__(self, message: str, last: complex, residual: float, seed: complex | None = None):
        super().__init__(message)
        self.last = last
        self.residual = residual
        self.seed = seed


class AmbiguousCount(MeanperError):
    """Argument-principle count did not round cleanly to an integer."""

    def __init__(self, message: str, count: complex, seed: complex | None = None):
        super().__init__(message)
        self.count = count
        self.seed = seed


class DegenerateZero(MeanperError):
    pass


class UnsupportedMultiplicity(MeanperError):
    pass


class InconsistentProbe(MeanperError):
    """Per-probe coefficient estimates disagree: f is not mean-periodic for T."""

    def __init__(self, message: str, spread: float, index: int | None = None):
        super().__init__(message)
        self.spread = spread
        self.index = index


class DomainError(MeanperError):
    pass


class InsufficientData(MeanperError):
    pass


class ParseError(MeanperError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key
