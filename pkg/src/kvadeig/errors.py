"""Exception types raised by the solver."""

from __future__ import annotations


class KvadeigError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(KvadeigError, ValueError):
    """Coefficient or vector shapes are inconsistent."""


class NonSquare(DimensionMismatch):
    """A matrix that must be square is not."""


class ZeroCoefficientNorm(KvadeigError, ValueError):
    """A scaling formula needs a coefficient with nonzero norm."""


class EmptyPattern(KvadeigError, ValueError):
    """All coefficients are zero, so balancing has nothing to work on."""


class RankNotDeficient(KvadeigError, ValueError):
    """A deflation step was requested on a full-rank block."""


class SingularPencil(KvadeigError):
    """The quadratic pencil is (numerically) singular.

    Attributes
    ----------
    stage : str
        Reduction step at which singularity was detected.
    shape : tuple of int
        Shape of the block whose rank fell short.
    rank : int
        Numerical rank found for that block.
    expected : int
        Rank that a regular pencil would have produced.
    """

    def __init__(self, stage: str, shape: tuple[int, int], rank: int, expected: int):
        self.stage = stage
        self.shape = tuple(shape)
        self.rank = rank
        self.expected = expected
        super().__init__(
            f"singular pencil detected at {stage}: block {shape[0]}x{shape[1]} "
            f"has numerical rank {rank}, expected {expected}"
        )


class BackendFailure(KvadeigError, RuntimeError):
    """The generalized eigensolver did not converge."""


class ZeroVector(KvadeigError, ValueError):
    """A backward error was requested for the zero vector."""


class ZeroDenominator(KvadeigError, ValueError):
    """A backward error denominator vanished."""


class InfiniteValueUnsupported(KvadeigError, ValueError):
    """The componentwise backward error is not defined at infinity."""


class ParseError(KvadeigError, ValueError):
    """Malformed input file.

    Attributes
    ----------
    path : str
    line : int or None
    column : int or None
    """

    def __init__(self, message: str, path: str = "<input>", line: int | None = None,
                 column: int | None = None):
        self.path = path
        self.line = line
        self.column = column
        where = path
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}")


Misdimension = DimensionMismatch
