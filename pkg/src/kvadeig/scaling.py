"""Eigenvalue parameter scaling and diagonal balancing of a quadratic pencil."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionMismatch, EmptyPattern, ZeroCoefficientNorm
from .linearization import QuadPencil

MAX_EXPONENT = 64


class ScalingKind(str, enum.Enum):
    NONE = "none"
    FLV = "flv"
    TROPICAL_PLUS = "tropical-plus"
    TROPICAL_MINUS = "tropical-minus"


@dataclass(frozen=True)
class ScalingParams:
    """lambda = gamma * mu, scaled triple (gamma^2 delta M, gamma delta C, delta K)."""

    gamma: float = 1.0
    delta: float = 1.0
    kind: ScalingKind = ScalingKind.NONE
    tau_q: float = float("nan")

    def __post_init__(self):
        if not (self.gamma > 0 and self.delta > 0):
            raise ValueError("gamma and delta must be positive")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "gamma": self.gamma, "delta": self.delta,
                "tau_q": self.tau_q}


def two_norms(p: QuadPencil) -> tuple[float, float, float]:
    """Spectral norms of M, C and K."""
    return tuple(float(np.linalg.norm(a, 2)) for a in p.triple())


def _scaled(p: QuadPencil, gamma: float, delta: float) -> QuadPencil:
    return QuadPencil(gamma * gamma * delta * p.m, gamma * delta * p.c, delta * p.k)


def flv_scale(p: QuadPencil) -> tuple[ScalingParams, QuadPencil]:
    """Scaling that brings the three coefficient norms close to one."""
    nm, nc, nk = two_norms(p)
    if nm == 0 or nk == 0:
        raise ZeroCoefficientNorm("FLV scaling needs ||M|| > 0 and ||K|| > 0")
    gamma = np.sqrt(nk / nm)
    delta = 2.0 / (nk + nc * gamma)
    tau_q = nc / np.sqrt(nm * nk)
    params = ScalingParams(float(gamma), float(delta), ScalingKind.FLV, float(tau_q))
    return params, _scaled(p, params.gamma, params.delta)


def tropical_scale(p: QuadPencil, branch: str = "plus") -> tuple[ScalingParams, QuadPencil]:
    """Scaling by a tropical root of max(||M|| x^2, ||C|| x, ||K||).

    Parameters
    ----------
    branch : {"plus", "minus"}
        Largest or smallest tropical root when the two roots differ.
    """
    branch = branch.lower().removeprefix("tropical-")
    if branch not in ("plus", "minus"):
        raise ValueError(f"unknown tropical branch {branch!r}")
    nm, nc, nk = two_norms(p)
    if nm == 0 or nk == 0:
        raise ZeroCoefficientNorm("tropical scaling needs ||M|| > 0 and ||K|| > 0")
    tau_q = nc / np.sqrt(nm * nk)
    if tau_q <= 1:
        gamma = np.sqrt(nk / nm)
    elif branch == "plus":
        gamma = nc / nm
    else:
        gamma = nk / nc
    delta = 1.0 / max(nm * gamma * gamma, nc * gamma, nk)
    kind = ScalingKind.TROPICAL_PLUS if branch == "plus" else ScalingKind.TROPICAL_MINUS
    params = ScalingParams(float(gamma), float(delta), kind, float(tau_q))
    return params, _scaled(p, params.gamma, params.delta)


def scale(p: QuadPencil, kind: ScalingKind | str) -> tuple[ScalingParams, QuadPencil]:
    """Dispatch on the scaling kind; ``none`` returns the pencil unchanged."""
    kind = ScalingKind(kind)
    if kind is ScalingKind.NONE:
        return ScalingParams(), p
    if kind is ScalingKind.FLV:
        return flv_scale(p)
    return tropical_scale(p, "plus" if kind is ScalingKind.TROPICAL_PLUS else "minus")


@dataclass(frozen=True, eq=False)
class BalancingDiagonals:
    """Integer exponents of D_l = diag(10^l) and D_r = diag(10^r)."""

    left_exponents: NDArray[np.int64]
    right_exponents: NDArray[np.int64]
    weights: tuple[float, float, float]
    objective_before: float
    objective_after: float
    real_solution: NDArray[np.float64] | None = None
    normal_residual: float = 0.0

    @classmethod
    def identity(cls, n: int, weights=(1.0, 1.0, 1.0)) -> "BalancingDiagonals":
        z = np.zeros(n, dtype=np.int64)
        return cls(z, z.copy(), tuple(weights), 0.0, 0.0)

    @property
    def d_left(self) -> NDArray[np.float64]:
        return 10.0 ** self.left_exponents.astype(float)

    @property
    def d_right(self) -> NDArray[np.float64]:
        return 10.0 ** self.right_exponents.astype(float)

    def to_dict(self) -> dict:
        return {"left_exponents": [int(v) for v in self.left_exponents],
                "right_exponents": [int(v) for v in self.right_exponents],
                "weights": list(self.weights),
                "objective_before": self.objective_before,
                "objective_after": self.objective_after}


def _log_patterns(p: QuadPencil):
    for a in p.triple():
        nz = a != 0
        lg = np.zeros(a.shape)
        lg[nz] = np.log10(np.abs(a[nz]))
        yield nz.astype(float), lg


def balancing_objective(p: QuadPencil, left, right, weights=(1.0, 1.0, 1.0)) -> float:
    """phi(l, r) = sum of alpha * (l_i + r_j + log10|entry|)^2 over nonzero entries."""
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    total = 0.0
    shift = left[:, None] + right[None, :]
    for w, (pat, lg) in zip(weights, _log_patterns(p)):
        if w:
            total += w * float(np.sum(pat * (shift + lg) ** 2))
    return total


def normal_equations(p: QuadPencil, weights=(1.0, 1.0, 1.0)):
    """Matrix L and right-hand side of the balancing normal equations."""
    n = p.n
    f1 = np.zeros(n)
    f2 = np.zeros(n)
    g = np.zeros((n, n))
    c = np.zeros(n)
    d = np.zeros(n)
    for w, (pat, lg) in zip(weights, _log_patterns(p)):
        if not w:
            continue
        f1 += w * pat.sum(axis=1)
        f2 += w * pat.sum(axis=0)
        g += w * pat
        c += w * lg.sum(axis=1)
        d += w * lg.sum(axis=0)
    lmat = np.block([[np.diag(f1), g], [g.T, np.diag(f2)]])
    return lmat, -np.concatenate([c, d])


def balance(p: QuadPencil, weights=(1.0, 1.0, 1.0)) -> BalancingDiagonals:
    """Integer power-of-ten row and column scalings that even out entry magnitudes.

    Solves the normal equations for the minimum-norm real minimizer of
    phi, rounds to integers and keeps the result only if phi did not grow.
    """
    weights = tuple(float(w) for w in weights)
    if len(weights) != 3 or min(weights) < 0 or max(weights) <= 0:
        raise ValueError("weights must be three nonnegative numbers, one positive")
    if not any(np.any(a != 0) for a in p.triple()):
        raise EmptyPattern("M, C and K are all zero")
    n = p.n
    lmat, rhs = normal_equations(p, weights)
    x = np.linalg.lstsq(lmat, rhs, rcond=None)[0]
    scale_rhs = np.linalg.norm(rhs)
    resid = float(np.linalg.norm(lmat @ x - rhs) / scale_rhs) if scale_rhs else 0.0
    left = np.clip(np.rint(x[:n]), -MAX_EXPONENT, MAX_EXPONENT).astype(np.int64)
    right = np.clip(np.rint(x[n:]), -MAX_EXPONENT, MAX_EXPONENT).astype(np.int64)
    before = balancing_objective(p, np.zeros(n), np.zeros(n), weights)
    after = balancing_objective(p, left, right, weights)
    if after > before:
        left = np.zeros(n, dtype=np.int64)
        right = np.zeros(n, dtype=np.int64)
        after = before
    return BalancingDiagonals(left, right, weights, before, after, x, resid)


def apply_balancing(p: QuadPencil, d: BalancingDiagonals) -> QuadPencil:
    """The triple (D_l M D_r, D_l C D_r, D_l K D_r)."""
    if d.left_exponents.shape != (p.n,) or d.right_exponents.shape != (p.n,):
        raise DimensionMismatch("balancing exponents do not match the pencil size")
    dl = d.d_left[:, None]
    dr = d.d_right[None, :]
    return QuadPencil(dl * p.m * dr, dl * p.c * dr, dl * p.k * dr)
