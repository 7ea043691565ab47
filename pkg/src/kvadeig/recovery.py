"""Backward errors and eigenvector recovery for the quadratic problem."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
from numpy.typing import NDArray

from .dense import PivotedQR, qr_col_pivoted
from .errors import InfiniteValueUnsupported, ZeroDenominator, ZeroVector
from .linearization import QuadPencil


class Tag(str, enum.Enum):
    FINITE = "finite"
    ZERO = "zero"
    INFINITE = "infinite"


def is_infinite(lam) -> bool:
    return bool(np.isinf(abs(lam)))


def _residual(p: QuadPencil, lam: complex, v: NDArray, side: str) -> NDArray:
    q = p.evaluate(lam)
    return q @ v if side == "right" else q.conj().T @ v


def eta(p: QuadPencil, lam: complex, x, side: str = "right") -> float:
    """Normwise backward error of an approximate eigenpair.

    Parameters
    ----------
    p : QuadPencil
    lam : complex
        Eigenvalue; any value with infinite modulus means lambda = inf.
    x : array_like
        Right eigenvector, or left eigenvector y when ``side="left"``
        (the residual is then y^* Q(lambda)).
    """
    x = np.asarray(x, dtype=np.complex128)
    nx = float(np.linalg.norm(x))
    if nx == 0:
        raise ZeroVector("backward error of the zero vector")
    nm, nc, nk = (float(np.linalg.norm(a, 2)) for a in p.triple())
    if is_infinite(lam):
        res = p.m @ x if side == "right" else p.m.conj().T @ x
        den = nm * nx
    else:
        a = abs(lam)
        res = _residual(p, lam, x, side)
        den = (a * a * nm + a * nc + nk) * nx
    if den == 0:
        raise ZeroDenominator("normwise backward error denominator vanished")
    return float(np.linalg.norm(res) / den)


def _ratio_max(num: NDArray, den: NDArray) -> float:
    out = np.zeros(num.shape)
    pos = den > 0
    out[pos] = num[pos] / den[pos]
    out[(~pos) & (num > 0)] = np.inf
    return float(out.max()) if out.size else 0.0


def omega(p: QuadPencil, lam: complex, x, side: str = "right") -> float:
    """Componentwise backward error; 0/0 counts as 0 and c/0 as +inf."""
    if is_infinite(lam):
        raise InfiniteValueUnsupported("componentwise backward error needs a finite value")
    x = np.asarray(x, dtype=np.complex128)
    if not np.any(x != 0):
        raise ZeroVector("backward error of the zero vector")
    a = abs(lam)
    absq = a * a * np.abs(p.m) + a * np.abs(p.c) + np.abs(p.k)
    num = np.abs(_residual(p, lam, x, side))
    den = absq @ np.abs(x) if side == "right" else absq.T @ np.abs(x)
    return _ratio_max(num, den)


def omega_at_infinity(p: QuadPencil, x, side: str = "right") -> float:
    """Componentwise backward error at infinity, i.e. at zero of the reversed polynomial."""
    x = np.asarray(x, dtype=np.complex128)
    if not np.any(x != 0):
        raise ZeroVector("backward error of the zero vector")
    m = p.m if side == "right" else p.m.conj().T
    return _ratio_max(np.abs(m @ x), np.abs(m) @ np.abs(x))


def safe_errors(p: QuadPencil, lam: complex, v, side: str) -> tuple[float, float]:
    """(eta, omega), with 0/0 read as an exact pair."""
    try:
        e = eta(p, lam, v, side)
    except ZeroDenominator:
        e = 0.0
    w = omega_at_infinity(p, v, side) if is_infinite(lam) else omega(p, lam, v, side)
    return e, w


def normalize(v: NDArray) -> NDArray[np.complex128]:
    """Unit 2-norm with the first significant component real and positive.

    Components below 1e-12 of the largest magnitude are skipped when
    choosing the phase so that rounding noise does not decide it.
    """
    v = np.asarray(v, dtype=np.complex128)
    nv = np.linalg.norm(v)
    if nv == 0:
        raise ZeroVector("cannot normalize the zero vector")
    v = v / nv
    mags = np.abs(v)
    i = int(np.nonzero(mags > 1e-12 * mags.max())[0][0])
    return v * (abs(v[i]) / v[i])


def null_basis_right(f: PivotedQR, r: int) -> NDArray[np.complex128]:
    """Orthonormal basis of the numerical null space of the factored matrix."""
    n = f.shape[1]
    if r == 0:
        return np.eye(n, dtype=np.complex128)
    rhat = f.r[:r, :]
    g = qr_col_pivoted(rhat.conj().T, pivoting=False)
    basis = g.q[:, r:]
    return f.perm_matrix() @ basis


def null_basis_left(f: PivotedQR, r: int) -> NDArray[np.complex128]:
    """Orthonormal basis of the numerical null space of the conjugate transpose."""
    return f.q_orig[:, r:]


@dataclass(frozen=True)
class Candidate:
    name: str
    eta: float
    omega: float


@dataclass(frozen=True, eq=False)
class Recovered:
    """Winning vector (original coordinates, normalized) with its errors."""

    vec: NDArray[np.complex128]
    provenance: str
    eta: float
    omega: float
    candidates: tuple[Candidate, ...] = field(default=())


def select(p: QuadPencil, lam: complex, candidates: Sequence[tuple[str, NDArray]], side: str,
           to_original: Callable[[NDArray], NDArray] | None = None) -> Recovered:
    """Map candidates to the original problem and keep the one with least eta.

    omega breaks ties. Zero candidates are skipped.
    """
    best = None
    table = []
    for name, v in candidates:
        if v is None or not np.all(np.isfinite(v)) or not np.any(v != 0):
            continue
        u = to_original(v) if to_original is not None else v
        if not np.any(u != 0):
            continue
        u = normalize(u)
        e, w = safe_errors(p, lam, u, side)
        table.append(Candidate(name, e, w))
        key = (e, w)
        if best is None or key < best[0]:
            best = (key, name, u)
    if best is None:
        raise ZeroVector(f"no usable {side} eigenvector candidate")
    (e, w), name, u = best
    return Recovered(u, name, e, w, tuple(table))


def right_candidates(red, alpha: complex, beta: complex, z_core: NDArray) -> list[tuple[str, NDArray]]:
    """Candidate right eigenvectors of the working quadratic problem.

    z = Q_total (z_core; 0) is a right eigenvector of the companion pencil;
    x is its top half, or K^{-1} times its bottom half when K is invertible.
    """
    n = red.working.n
    d = red.core_size
    z = red.q_total[:, :d] @ z_core
    cands = [("z1", z[:n])]
    kf = red.k_factor
    if kf is not None and beta != 0 and alpha != 0 and red.ranks_working()[1] == n:
        rdiag = np.diagonal(kf.r)
        if np.all(rdiag != 0):
            y = sla.solve_triangular(kf.r, kf.q_orig.conj().T @ z[n:], lower=False)
            x = np.empty_like(y)
            x[kf.col_perm] = y
            cands.append(("K^-1 z2", x))
    return cands


def left_candidates(red, alpha: complex, beta: complex, w_core: NDArray) -> list[tuple[str, NDArray]]:
    """Candidate left eigenvectors of the working quadratic problem.

    The core left vector is extended through the triangular tail,
    w2^* = -w1^* X Y^{-1} with X, Y the off-diagonal and tail blocks of
    beta A - alpha B, and mapped back with P_total^*.
    """
    n = red.working.n
    lp = red.pencil
    d = lp.active
    size = lp.size
    w = np.zeros(size, dtype=np.complex128)
    w[:d] = w_core
    if d < size:
        x = beta * lp.a[:d, d:] - alpha * lp.b[:d, d:]
        y = beta * lp.a[d:, d:] - alpha * lp.b[d:, d:]
        try:
            w[d:] = np.linalg.solve(y.conj().T, -(x.conj().T @ w_core))
        except np.linalg.LinAlgError:
            w[d:] = np.linalg.lstsq(y.conj().T, -(x.conj().T @ w_core), rcond=None)[0]
    full = red.p_total.conj().T @ w
    return [("w2", full[n:]), ("w1", full[:n])]


def deflated_vectors(red, target: str) -> tuple[NDArray, NDArray]:
    """Right and left null bases of K (target 'zero') or M ('inf') in working coordinates."""
    f = red.k_factor if target == "zero" else red.m_factor
    r = red.ranks_working()[1 if target == "zero" else 0]
    return null_basis_right(f, r), null_basis_left(f, r)


def recover_right(red, alpha, beta, z_core, p: QuadPencil, lam, to_original=None) -> Recovered:
    """Best right eigenvector of p for a core eigenpair of the reduced pencil."""
    return select(p, lam, right_candidates(red, alpha, beta, z_core), "right", to_original)


def recover_left(red, alpha, beta, w_core, p: QuadPencil, lam, to_original=None) -> Recovered:
    """Best left eigenvector of p for a core eigenpair of the reduced pencil."""
    return select(p, lam, left_candidates(red, alpha, beta, w_core), "left", to_original)


@dataclass(frozen=True, eq=False)
class QepEigenpair:
    """One of the 2n eigenpairs, with vectors and errors on the input problem."""

    tag: Tag
    value: complex
    right_vec: NDArray[np.complex128]
    left_vec: NDArray[np.complex128]
    eta_right: float
    eta_left: float
    omega_right: float
    omega_left: float
    provenance_right: str
    provenance_left: str
    candidates_right: tuple[Candidate, ...] = ()
    candidates_left: tuple[Candidate, ...] = ()

    @property
    def abs_value(self) -> float:
        return float("inf") if self.tag is Tag.INFINITE else float(abs(self.value))
