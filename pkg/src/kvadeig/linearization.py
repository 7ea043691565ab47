"""Quadratic pencils, the second companion linearization and reversal."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .dense import as_matrix
from .errors import DimensionMismatch, NonSquare


@dataclass(frozen=True, eq=False)
class QuadPencil:
    """Coefficients of Q(lambda) = lambda^2 M + lambda C + K."""

    m: NDArray[np.complex128]
    c: NDArray[np.complex128]
    k: NDArray[np.complex128]

    def __post_init__(self):
        mats = []
        for name in ("m", "c", "k"):
            a = as_matrix(getattr(self, name), name.upper())
            if a.shape[0] != a.shape[1]:
                raise NonSquare(f"{name.upper()} is {a.shape[0]}x{a.shape[1]}, not square")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
            mats.append(a)
        if len({a.shape for a in mats}) != 1:
            raise DimensionMismatch(f"coefficient shapes differ: {[a.shape for a in mats]}")
        if mats[0].shape[0] == 0:
            raise DimensionMismatch("empty coefficients")
        if not any(np.any(a != 0) for a in mats):
            raise ValueError("M, C and K are all zero")

    @classmethod
    def from_arrays(cls, m: ArrayLike, c: ArrayLike, k: ArrayLike) -> "QuadPencil":
        return cls(m, c, k)

    @property
    def n(self) -> int:
        return self.m.shape[0]

    def triple(self) -> tuple[NDArray, NDArray, NDArray]:
        return self.m, self.c, self.k

    def evaluate(self, lam: complex) -> NDArray[np.complex128]:
        return lam * lam * self.m + lam * self.c + self.k

    def fro_norms(self) -> tuple[float, float, float]:
        return tuple(float(np.linalg.norm(a)) for a in self.triple())


@dataclass(frozen=True, eq=False)
class LinearPencil:
    """A - lambda B together with the transformations applied so far.

    ``left_accum @ A0 @ right_accum == a`` (same for b) where (A0, B0) is
    the pencil the accumulators started from. Deflated blocks live in
    the trailing part of the matrices; ``active`` is the size of the
    leading block still to be processed.
    """

    a: NDArray[np.complex128]
    b: NDArray[np.complex128]
    left_accum: NDArray[np.complex128]
    right_accum: NDArray[np.complex128]
    deflated_zero: int = 0
    deflated_inf: int = 0

    def __post_init__(self):
        a, b = np.asarray(self.a), np.asarray(self.b)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
            raise DimensionMismatch("a and b must be square of equal size")
        for name in ("a", "b", "left_accum", "right_accum"):
            arr = np.array(getattr(self, name), dtype=np.complex128)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.a.shape[0]

    @property
    def active(self) -> int:
        return self.size - self.deflated_zero - self.deflated_inf

    def core(self) -> tuple[NDArray, NDArray]:
        d = self.active
        return self.a[:d, :d], self.b[:d, :d]


def build_c2(p: QuadPencil) -> LinearPencil:
    """Second companion form a = [[C, -I], [K, 0]], b = [[-M, 0], [0, -I]]."""
    n = p.n
    eye = np.eye(n)
    zero = np.zeros((n, n))
    a = np.block([[p.c, -eye], [p.k, zero]])
    b = np.block([[-p.m, zero], [zero, -eye]])
    i2 = np.eye(2 * n, dtype=np.complex128)
    return LinearPencil(a, b, i2, i2.copy())


def reverse(p: QuadPencil) -> QuadPencil:
    """The reversed polynomial mu^2 K + mu C + M, with lambda = 1/mu."""
    return QuadPencil(p.k, p.c, p.m)
