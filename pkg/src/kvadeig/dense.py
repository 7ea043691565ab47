"""Rank-revealing factorizations of dense complex matrices.

Householder QR with column pivoting (optionally preceded by a row sort,
which makes it a complete pivoting scheme), numerical rank decisions and
the complete orthogonal decomposition built from two pivoted QR passes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

EPS = float(np.finfo(float).eps)

# Recompute a partial column norm from scratch once its downdated square
# drops below this fraction of the last exactly computed value.
_NORM_RECOMPUTE_RATIO = 0.5


def as_matrix(a: ArrayLike, name: str = "matrix") -> NDArray[np.complex128]:
    """Return `a` as a finite 2-D complex128 array (a copy)."""
    out = np.array(a, dtype=np.complex128, copy=True)
    if out.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got ndim={out.ndim}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} has non-finite entries")
    return out


class RankStrategy(str, enum.Enum):
    REL_DIAG = "rel-diag"
    ABS_MATRIX_NORM = "abs-matrix-norm"
    GLOBAL_TRIPLE_NORM = "global-triple-norm"


@dataclass(frozen=True)
class RankOptions:
    """Numerical rank policy.

    Parameters
    ----------
    strategy : RankStrategy
        RelDiag stops at |R_{k+1,k+1}| <= tau |R_kk|, AbsMatrixNorm at
        |R_{k+1,k+1}| <= tau ||A||_F and GlobalTripleNorm at
        |R_{k+1,k+1}| <= tau * global_norm.
    tau : float or None
        Threshold. ``None`` means ``max(m, n) * eps`` of the factored
        matrix (pencil-level callers substitute the problem size).
    presort_rows : bool
        Sort rows by decreasing infinity norm before pivoting.
    global_norm : float or None
        max(||M||_F, ||C||_F, ||K||_F), required by GlobalTripleNorm.
    """

    strategy: RankStrategy = RankStrategy.GLOBAL_TRIPLE_NORM
    tau: float | None = None
    presort_rows: bool = True
    global_norm: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "strategy", RankStrategy(self.strategy))
        if self.tau is not None and not self.tau >= 0:
            raise ValueError("tau must be nonnegative")
        if self.global_norm is not None and not self.global_norm >= 0:
            raise ValueError("global_norm must be nonnegative")

    def with_global_norm(self, value: float) -> "RankOptions":
        return RankOptions(self.strategy, self.tau, self.presort_rows, value)

    def with_tau(self, value: float) -> "RankOptions":
        return RankOptions(self.strategy, value, self.presort_rows, self.global_norm)


@dataclass(frozen=True, eq=False)
class PivotedQR:
    """Factors of ``a[row_perm][:, col_perm] = q @ r``.

    Attributes
    ----------
    q : ndarray, (m, m)
        Unitary factor in presorted row order.
    r : ndarray, (m, n)
        Upper trapezoidal factor.
    col_perm, row_perm : ndarray of int
    diag_abs : ndarray
        |R_ii| for i < min(m, n).
    fro_norm : float
        Frobenius norm of the input.
    """

    q: NDArray[np.complex128]
    r: NDArray[np.complex128]
    col_perm: NDArray[np.intp]
    row_perm: NDArray[np.intp]
    diag_abs: NDArray[np.float64]
    fro_norm: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.r.shape

    @property
    def q_orig(self) -> NDArray[np.complex128]:
        """Unitary factor with the row sort absorbed: ``a[:, col_perm] = q_orig @ r``."""
        out = np.empty_like(self.q)
        out[self.row_perm] = self.q
        return out

    def perm_matrix(self) -> NDArray[np.float64]:
        """Column permutation as a matrix P with ``a @ P = a[:, col_perm]``."""
        n = self.r.shape[1]
        p = np.zeros((n, n))
        p[self.col_perm, np.arange(n)] = 1.0
        return p


def row_presort(a: ArrayLike) -> NDArray[np.intp]:
    """Stable permutation ordering rows by decreasing infinity norm."""
    a = np.asarray(a)
    if a.size == 0 and a.shape[0] == 0:
        raise ValueError("row_presort needs a nonempty matrix")
    norms = np.max(np.abs(a), axis=1) if a.shape[1] else np.zeros(a.shape[0])
    return np.argsort(-norms, kind="stable")


def qr_col_pivoted(a: ArrayLike, opts: RankOptions | None = None, *,
                   pivoting: bool = True) -> PivotedQR:
    """Householder QR with column pivoting.

    Parameters
    ----------
    a : array_like, (m, n)
    opts : RankOptions, optional
        Only ``presort_rows`` is used here. Defaults to no presort.
    pivoting : bool
        Disable to get a plain Householder QR.

    Returns
    -------
    PivotedQR
    """
    a = as_matrix(a, "a")
    m, n = a.shape
    if m == 0 or n == 0:
        raise ValueError("qr_col_pivoted needs a nonempty matrix")
    fro = float(np.linalg.norm(a))
    row_perm = row_presort(a) if (opts is not None and opts.presort_rows) else np.arange(m)
    r = a[row_perm]
    q = np.eye(m, dtype=np.complex128)
    col_perm = np.arange(n)
    norms = np.linalg.norm(r, axis=0)
    ref = norms.copy()

    for k in range(min(m, n)):
        if pivoting:
            j = k + int(np.argmax(norms[k:]))
            if j != k:
                r[:, [k, j]] = r[:, [j, k]]
                col_perm[[k, j]] = col_perm[[j, k]]
                norms[[k, j]] = norms[[j, k]]
                ref[[k, j]] = ref[[j, k]]
        x = r[k:, k]
        sigma = float(np.linalg.norm(x[1:]))
        if sigma != 0.0:
            alpha = x[0]
            xnorm = float(np.hypot(abs(alpha), sigma))
            phase = alpha / abs(alpha) if alpha != 0 else 1.0
            beta = -phase * xnorm
            v = x.copy()
            v[0] = alpha - beta
            scale = 2.0 / (abs(v[0]) ** 2 + sigma ** 2)
            r[k:, k + 1:] -= scale * np.outer(v, v.conj() @ r[k:, k + 1:])
            q[:, k:] -= scale * np.outer(q[:, k:] @ v, v.conj())
            r[k, k] = beta
            r[k + 1:, k] = 0.0
        if pivoting and k + 1 < n:
            rest = slice(k + 1, n)
            nz = norms[rest] != 0
            ratio = np.zeros(n - k - 1)
            ratio[nz] = np.abs(r[k, rest][nz]) / norms[rest][nz]
            new = norms[rest] * np.sqrt(np.maximum(0.0, 1.0 - ratio ** 2))
            stale = new ** 2 <= _NORM_RECOMPUTE_RATIO * ref[rest] ** 2
            if np.any(stale):
                idx = np.nonzero(stale)[0] + k + 1
                exact = np.linalg.norm(r[k + 1:, idx], axis=0)
                new[stale] = exact
                ref[idx] = exact
            norms[rest] = new

    diag_abs = np.abs(np.diagonal(r)).copy()
    return PivotedQR(q, r, col_perm, row_perm, diag_abs, fro)


def _resolved_tau(opts: RankOptions, shape: tuple[int, int]) -> float:
    return opts.tau if opts.tau is not None else max(shape) * EPS


def numerical_rank(f: PivotedQR, opts: RankOptions | None = None) -> int:
    """Numerical rank read off the diagonal of a pivoted R.

    Returns the smallest k whose successor diagonal entry triggers the
    strategy, or min(m, n) when nothing triggers.
    """
    opts = opts or RankOptions(RankStrategy.ABS_MATRIX_NORM)
    tau = _resolved_tau(opts, f.shape)
    d = f.diag_abs
    if opts.strategy is RankStrategy.GLOBAL_TRIPLE_NORM:
        if not opts.global_norm:
            raise ValueError("GlobalTripleNorm needs a positive global_norm")
        hits = np.nonzero(d <= tau * opts.global_norm)[0]
    elif opts.strategy is RankStrategy.ABS_MATRIX_NORM:
        hits = np.nonzero(d <= tau * f.fro_norm)[0]
    else:
        if d.size == 0 or d[0] == 0:
            return 0
        hits = np.nonzero(d[1:] <= tau * d[:-1])[0] + 1
        zero = np.nonzero(d == 0)[0]
        hits = np.union1d(hits, zero)
    return int(hits[0]) if hits.size else int(d.size)


def truncation_bound(f: PivotedQR, k: int) -> float:
    """sqrt(n - k) |R_{k+1,k+1}|, the error bound for dropping R22 after k."""
    n = f.shape[1]
    if k >= f.diag_abs.size:
        return 0.0
    return float(np.sqrt(n - k) * f.diag_abs[k])


@dataclass(frozen=True, eq=False)
class CompleteOrthogonalDecomp:
    """``a = q @ [[t11, 0], [0, 0]] @ z^*`` with t11 lower triangular.

    Attributes
    ----------
    q : ndarray, (m, m)
    t11 : ndarray, (rank, rank)
    z : ndarray, (n, n)
    rank : int
    """

    q: NDArray[np.complex128]
    t11: NDArray[np.complex128]
    z: NDArray[np.complex128]
    rank: int
    first: PivotedQR = field(repr=False)

    def middle(self) -> NDArray[np.complex128]:
        m, n = self.q.shape[0], self.z.shape[0]
        t = np.zeros((m, n), dtype=np.complex128)
        k = self.rank
        t[:k, :k] = self.t11
        return t

    def reconstruct(self) -> NDArray[np.complex128]:
        return self.q @ self.middle() @ self.z.conj().T


def cod(a: ArrayLike, opts: RankOptions | None = None) -> CompleteOrthogonalDecomp:
    """Complete orthogonal decomposition via two pivoted QR factorizations.

    The first pass reveals the rank k and R1 = R[:k, :]. The second pass
    factors R1^* with the same pivoting, which yields a k-by-k lower
    triangular core.
    """
    a = as_matrix(a, "a")
    opts = opts or RankOptions(RankStrategy.ABS_MATRIX_NORM)
    m, n = a.shape
    f1 = qr_col_pivoted(a, opts)
    k = numerical_rank(f1, opts)
    q1 = f1.q_orig
    p = f1.perm_matrix()
    if k == 0:
        return CompleteOrthogonalDecomp(q1, np.zeros((0, 0), complex), p.astype(complex), 0, f1)
    r1 = f1.r[:k, :]
    f2 = qr_col_pivoted(r1.conj().T, RankOptions(presort_rows=opts.presort_rows,
                                                 strategy=RankStrategy.ABS_MATRIX_NORM))
    # f2: Pi2 R1^* Pi1 = Z_R [S; 0] with row sort Pi2 and column permutation Pi1.
    s = f2.r[:k, :]
    pi1 = np.zeros((k, k))
    pi1[f2.col_perm, np.arange(k)] = 1.0
    qq = q1.copy()
    qq[:, :k] = q1[:, :k] @ pi1
    z = p @ f2.q_orig
    return CompleteOrthogonalDecomp(qq, s.conj().T, z, k, f1)
