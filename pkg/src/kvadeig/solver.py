"""End-to-end solution of the quadratic eigenvalue problem."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .backend import solve_generalized
from .deflation import Depth, ReducedPencil, global_reduce
from .dense import RankOptions, RankStrategy
from .errors import ZeroCoefficientNorm
from .linearization import QuadPencil
from .recovery import (QepEigenpair, Recovered, Tag, deflated_vectors, recover_left,
                       recover_right, select)
from .scaling import (BalancingDiagonals, ScalingKind, ScalingParams, apply_balancing, balance,
                      scale)

INF = complex(np.inf, 0.0)


@dataclass(frozen=True)
class SolveOptions:
    """Pipeline configuration.

    Balancing runs first, then parameter scaling, then the reduction.
    """

    scale: ScalingKind = ScalingKind.FLV
    balance: bool = True
    balance_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    rank_strategy: RankStrategy = RankStrategy.GLOBAL_TRIPLE_NORM
    tau: float | None = None
    presort_rows: bool = True
    backend: str = "qz"
    seed: int = 0
    depth: Depth = Depth.FULL

    def __post_init__(self):
        object.__setattr__(self, "scale", ScalingKind(self.scale))
        object.__setattr__(self, "rank_strategy", RankStrategy(self.rank_strategy))
        object.__setattr__(self, "depth", Depth(self.depth))
        w = tuple(float(v) for v in self.balance_weights)
        if len(w) != 3 or min(w) < 0:
            raise ValueError("balance weights must be three nonnegative numbers")
        object.__setattr__(self, "balance_weights", w)
        if self.tau is not None and self.tau < 0:
            raise ValueError("tau must be nonnegative")

    def rank_options(self) -> RankOptions:
        return RankOptions(self.rank_strategy, self.tau, self.presort_rows)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("scale", "rank_strategy", "depth"):
            d[key] = d[key].value
        d["balance_weights"] = list(self.balance_weights)
        return d


@dataclass(frozen=True, eq=False)
class QepSolution:
    """All 2n eigenpairs plus the deflation ledger and preprocessing data."""

    pencil: QuadPencil
    pairs: tuple[QepEigenpair, ...]
    reduced: ReducedPencil
    scaling: ScalingParams
    balancing: BalancingDiagonals
    options: SolveOptions
    timings: dict = field(default_factory=dict)

    def count(self, tag: Tag) -> int:
        return sum(1 for pr in self.pairs if pr.tag is tag)

    @property
    def values(self) -> np.ndarray:
        return np.array([pr.value for pr in self.pairs], dtype=np.complex128)

    def finite_values(self) -> np.ndarray:
        return np.array([pr.value for pr in self.pairs if pr.tag is not Tag.INFINITE],
                        dtype=np.complex128)

    def ledger(self) -> dict:
        red = self.reduced
        out = {"case": red.case, "reversed": red.reversed}
        out.update(red.ranks.to_dict())
        out.update({"deflated_zero": red.deflated_zero, "deflated_inf": red.deflated_inf,
                    "core_size": red.core_size,
                    "zero_profile": list(red.zero_profile.s),
                    "inf_profile": list(red.inf_profile.s)})
        return out


def _sort_key(pr: QepEigenpair):
    order = {Tag.FINITE: 0, Tag.ZERO: 1, Tag.INFINITE: 2}[pr.tag]
    v = pr.value if pr.tag is Tag.FINITE else 0
    return (order, round(abs(v), 12), round(v.real, 12), round(v.imag, 12))


def preprocess(p: QuadPencil, options: SolveOptions):
    """Balance then scale; returns (balancing, scaling, transformed pencil)."""
    n = p.n
    if options.balance:
        bal = balance(p, options.balance_weights)
        pb = apply_balancing(p, bal)
    else:
        bal = BalancingDiagonals.identity(n, options.balance_weights)
        pb = p
    try:
        params, ps = scale(pb, options.scale)
    except ZeroCoefficientNorm:
        params, ps = ScalingParams(), pb
    return bal, params, ps


def _pair(tag, value, right: Recovered, left: Recovered) -> QepEigenpair:
    return QepEigenpair(tag, complex(value), right.vec, left.vec, right.eta, left.eta,
                        right.omega, left.omega, right.provenance, left.provenance,
                        right.candidates, left.candidates)


def solve_qep(p: QuadPencil, options: SolveOptions | None = None) -> QepSolution:
    """Compute all 2n eigenvalues of p with right and left eigenvectors."""
    options = options or SolveOptions()
    timings = {}
    t0 = time.perf_counter()
    bal, params, ps = preprocess(p, options)
    t1 = time.perf_counter()
    red = global_reduce(ps, options.rank_options(), options.depth)
    t2 = time.perf_counter()
    a, b = red.core()
    gen = solve_generalized(a, b, want_left=True, backend=options.backend, seed=options.seed)
    t3 = time.perf_counter()

    dr = bal.d_right
    dl = bal.d_left
    to_right = lambda v: dr * v  # noqa: E731
    to_left = lambda v: dl * v  # noqa: E731
    pairs = []
    for j in range(len(gen)):
        aw, bw = gen.alphas[j], gen.betas[j]
        al, be = (bw, aw) if red.reversed else (aw, bw)
        if be == 0:
            tag, lam = Tag.INFINITE, INF
        else:
            tag, lam = Tag.FINITE, params.gamma * (al / be)
        right = recover_right(red, aw, bw, gen.right_vecs[:, j], p, lam, to_right)
        left = recover_left(red, aw, bw, gen.left_vecs[:, j], p, lam, to_left)
        pairs.append(_pair(tag, lam, right, left))

    lp = red.pencil
    for target, count in (("zero", lp.deflated_zero), ("inf", lp.deflated_inf)):
        if count == 0:
            continue
        is_zero = (target == "zero") != red.reversed
        tag, lam = (Tag.ZERO, 0j) if is_zero else (Tag.INFINITE, INF)
        xr, yl = deflated_vectors(red, target)
        for i in range(count):
            right = select(p, lam, [("null", xr[:, i % xr.shape[1]])], "right", to_right)
            left = select(p, lam, [("null", yl[:, i % yl.shape[1]])], "left", to_left)
            pairs.append(_pair(tag, lam, right, left))
    t4 = time.perf_counter()
    pairs.sort(key=_sort_key)
    timings.update(preprocess=t1 - t0, reduce=t2 - t1, backend=t3 - t2, recover=t4 - t3,
                   total=t4 - t0)
    return QepSolution(p, tuple(pairs), red, params, bal, options, timings)
