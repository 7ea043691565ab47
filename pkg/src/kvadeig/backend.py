"""Generalized eigensolvers for the deflated regular pencil A - lambda B."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla
from numpy.typing import NDArray

from .errors import BackendFailure, NonSquare

COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class GeneralizedEigenPairs:
    """Projective eigenpairs: alpha B v = beta A v, lambda = alpha / beta.

    Vectors are stored as unit-norm columns.
    """

    alphas: NDArray[np.complex128]
    betas: NDArray[np.complex128]
    right_vecs: NDArray[np.complex128]
    left_vecs: NDArray[np.complex128] | None

    def __len__(self) -> int:
        return self.alphas.size

    @property
    def values(self) -> NDArray[np.complex128]:
        """alpha / beta with complex infinity where beta == 0."""
        out = np.full(self.alphas.shape, complex(np.inf, 0.0), dtype=np.complex128)
        fin = self.betas != 0
        out[fin] = self.alphas[fin] / self.betas[fin]
        return out


def _unit_columns(v: NDArray) -> NDArray:
    norms = np.linalg.norm(v, axis=0)
    norms[norms == 0] = 1.0
    return v / norms


def _check(a, b):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise NonSquare("backend needs square a and b of equal size")
    return a, b


def _empty(want_left: bool) -> GeneralizedEigenPairs:
    e = np.zeros((0, 0), dtype=np.complex128)
    return GeneralizedEigenPairs(np.zeros(0, complex), np.zeros(0, complex), e,
                                 e.copy() if want_left else None)


def qz_backend(a, b, want_left: bool = True, seed: int | None = None) -> GeneralizedEigenPairs:
    """LAPACK QZ (zggev) through scipy."""
    a, b = _check(a, b)
    if a.shape[0] == 0:
        return _empty(want_left)
    try:
        res = sla.eig(a, b, left=want_left, right=True, homogeneous_eigvals=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise BackendFailure(f"QZ failed on a {a.shape[0]}x{a.shape[0]} pencil: {exc}") from exc
    if want_left:
        w, vl, vr = res
    else:
        w, vr = res
        vl = None
    alphas, betas = np.asarray(w[0], complex), np.asarray(w[1], complex)
    # zggev returns (alpha, beta) with beta A v = alpha B v
    return GeneralizedEigenPairs(alphas, betas, _unit_columns(vr),
                                 None if vl is None else _unit_columns(vl))


def reference_backend(a, b, want_left: bool = True, seed: int | None = 0) -> GeneralizedEigenPairs:
    """Eigenvalues of (A - sigma B)^{-1} B with a standard dense eigensolver.

    sigma = 0 unless A is ill-conditioned, in which case a random
    unit-modulus shift drawn from ``seed`` is used.
    """
    a, b = _check(a, b)
    m = a.shape[0]
    if m == 0:
        return _empty(want_left)
    sigma = 0.0
    if np.linalg.cond(a) > COND_LIMIT:
        rng = np.random.default_rng(seed)
        sigma = np.exp(2j * np.pi * rng.random())
    shifted = a - sigma * b
    try:
        lu = sla.lu_factor(shifted)
        op = sla.lu_solve(lu, b)
        res = sla.eig(op, left=want_left, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise BackendFailure(f"reference backend failed: {exc}") from exc
    if want_left:
        nu, ul, vr = res
        # u^* (A - sigma B)^{-1} B = nu u^*  gives  y = (A - sigma B)^{-*} u
        vl = sla.lu_solve(lu, ul, trans=2)
    else:
        nu, vr = res
        vl = None
    # B v = nu (A - sigma B) v  so  (1 + nu sigma) B v = nu A v
    alphas = (1.0 + nu * sigma).astype(complex)
    betas = nu.astype(complex)
    scale = np.maximum(np.abs(alphas), np.abs(betas))
    scale[scale == 0] = 1.0
    return GeneralizedEigenPairs(alphas / scale, betas / scale, _unit_columns(vr),
                                 None if vl is None else _unit_columns(vl))


BACKENDS: dict[str, Callable[..., GeneralizedEigenPairs]] = {
    "qz": qz_backend,
    "reference": reference_backend,
}


def solve_generalized(a, b, want_left: bool = True, backend: str = "qz",
                      seed: int | None = 0) -> GeneralizedEigenPairs:
    """Projective eigenpairs of the regular pencil a - lambda b."""
    try:
        fn = BACKENDS[backend]
    except KeyError:
        raise ValueError(f"unknown backend {backend!r}; choose from {sorted(BACKENDS)}") from None
    return fn(a, b, want_left=want_left, seed=seed)
