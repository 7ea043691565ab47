"""Deflation of zero and infinite eigenvalues from the companion pencil.

All routines work on a :class:`LinearPencil` holding the full 2n-by-2n
transformed pencil. The leading ``active`` block is the part still to be
reduced; deflated blocks are moved to the trailing end of that window,
so the final matrices are block upper triangular with the regular core
in front.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .dense import (EPS, PivotedQR, RankOptions, RankStrategy, cod, numerical_rank,
                    qr_col_pivoted)
from .errors import NonSquare, RankNotDeficient, SingularPencil
from .linearization import LinearPencil, QuadPencil, build_c2, reverse


class Target(str, enum.Enum):
    ZERO = "zero"
    INF = "inf"


@dataclass(frozen=True)
class StaircaseProfile:
    """Deflated block sizes s_1, ..., s_l and residual sizes n_1, ..., n_{l+1}.

    The pencil has s_j - s_{j+1} Jordan blocks of size j at the target
    eigenvalue.
    """

    s: tuple[int, ...] = ()
    n_seq: tuple[int, ...] = ()
    target: Target = Target.ZERO

    @classmethod
    def from_sizes(cls, start: int, s: Sequence[int], target: Target) -> "StaircaseProfile":
        n_seq = [start]
        for sj in s:
            n_seq.append(n_seq[-1] - sj)
        return cls(tuple(int(v) for v in s), tuple(n_seq), Target(target))

    @property
    def total(self) -> int:
        return sum(self.s)

    def jordan_blocks(self) -> dict[int, int]:
        """Number of Jordan blocks of each size."""
        s = list(self.s) + [0]
        return {j + 1: s[j] - s[j + 1] for j in range(len(self.s)) if s[j] > s[j + 1]}

    def to_dict(self) -> dict:
        return {"s": list(self.s), "n_seq": list(self.n_seq), "target": self.target.value}


@dataclass(frozen=True)
class RankReport:
    """Ranks of M, K and of the stacked second-stage blocks (original orientation)."""

    r_m: int
    r_k: int
    r_22: int | None = None
    r_22_inf: int | None = None

    def to_dict(self) -> dict:
        return {"r_M": self.r_m, "r_K": self.r_k, "r_22": self.r_22, "r_22_inf": self.r_22_inf}


@dataclass(frozen=True, eq=False)
class ReducedPencil:
    """Outcome of :func:`global_reduce`.

    ``pencil`` is the full transformed companion pencil of the working
    (possibly reversed) problem; its leading ``pencil.active`` block is
    the regular core. Profiles and ranks refer to the original problem.
    """

    pencil: LinearPencil
    zero_profile: StaircaseProfile
    inf_profile: StaircaseProfile
    ranks: RankReport
    case: str
    reversed: bool
    working: QuadPencil
    m_factor: PivotedQR | None = field(default=None, repr=False)
    k_factor: PivotedQR | None = field(default=None, repr=False)
    rank_opts: RankOptions | None = field(default=None, repr=False)

    @property
    def q_total(self) -> NDArray[np.complex128]:
        return self.pencil.right_accum

    @property
    def p_total(self) -> NDArray[np.complex128]:
        return self.pencil.left_accum

    @property
    def core_size(self) -> int:
        return self.pencil.active

    def core(self):
        return self.pencil.core()

    def ranks_working(self) -> tuple[int, int]:
        """(rank M, rank K) of the working, possibly reversed, triple."""
        if self.reversed:
            return self.ranks.r_k, self.ranks.r_m
        return self.ranks.r_m, self.ranks.r_k

    @property
    def deflated_zero(self) -> int:
        return self.zero_profile.total

    @property
    def deflated_inf(self) -> int:
        return self.inf_profile.total


class _Work:
    """Mutable copy of a LinearPencil used while a reduction runs."""

    def __init__(self, lp: LinearPencil):
        self.a = np.array(lp.a)
        self.b = np.array(lp.b)
        self.p = np.array(lp.left_accum)
        self.q = np.array(lp.right_accum)
        self.dz = lp.deflated_zero
        self.di = lp.deflated_inf

    @property
    def size(self) -> int:
        return self.a.shape[0]

    @property
    def active(self) -> int:
        return self.size - self.dz - self.di

    def left(self, u: NDArray, lo: int, hi: int) -> None:
        for x in (self.a, self.b, self.p):
            x[lo:hi, :] = u @ x[lo:hi, :]

    def right(self, z: NDArray, lo: int, hi: int) -> None:
        for x in (self.a, self.b, self.q):
            x[:, lo:hi] = x[:, lo:hi] @ z

    def freeze(self) -> LinearPencil:
        return LinearPencil(self.a, self.b, self.p, self.q, self.dz, self.di)


def _pencil_opts(opts: RankOptions | None, size: int, global_norm: float) -> RankOptions:
    opts = opts or RankOptions()
    if opts.tau is None:
        opts = opts.with_tau(size * EPS)
    if opts.strategy is RankStrategy.GLOBAL_TRIPLE_NORM and opts.global_norm is None:
        opts = opts.with_global_norm(global_norm if global_norm > 0 else 1.0)
    return opts


def _compress_strip(w: _Work, s: int, target: Target, opts: RankOptions, stage: str) -> None:
    """Deflate the bottom s rows of the active window.

    For the zero target those rows have A = 0 and their B strip is
    compressed into a trailing s-by-s triangular block; the infinite
    target swaps the roles of A and B.
    """
    d = w.active
    x, y = (w.a, w.b) if target is Target.ZERO else (w.b, w.a)
    strip = y[d - s:d, :d]
    dec = cod(strip, opts)
    if dec.rank < s:
        raise SingularPencil(stage, strip.shape, dec.rank, s)
    z = dec.z
    w.right(np.concatenate([z[:, s:], z[:, :s]], axis=1), 0, d)
    w.left(dec.q.conj().T, d - s, d)
    x[d - s:d, :d] = 0.0
    y[d - s:d, :d - s] = 0.0
    y[d - s:d, d - s:d] = dec.t11
    if target is Target.ZERO:
        w.dz += s
    else:
        w.di += s


def _rank_step(w: _Work, target: Target, opts: RankOptions, hint: int | None,
               stage: str) -> int:
    """One staircase step; returns the number of deflated eigenvalues."""
    d = w.active
    if d == 0:
        return 0
    x = w.a if target is Target.ZERO else w.b
    f = qr_col_pivoted(x[:d, :d], opts)
    r = d - hint if hint is not None else numerical_rank(f, opts)
    s = d - r
    if s <= 0:
        return 0
    w.left(f.q_orig.conj().T, 0, d)
    x[d - s:d, :d] = 0.0
    _compress_strip(w, s, target, opts, stage)
    return s


def _run_staircase(w: _Work, target: Target, opts: RankOptions,
                   hints: Sequence[int] = (), label: str = "staircase") -> list[int]:
    sizes = []
    j = 0
    while w.active > 0:
        hint = hints[j] if j < len(hints) else None
        s = _rank_step(w, target, opts, hint, f"{label} step {j + 1}")
        if s == 0:
            break
        sizes.append(s)
        j += 1
    return sizes


@dataclass(frozen=True, eq=False)
class StaircaseResult:
    """Profile, regular core and unitaries with ``p @ (a - lam b) @ q`` triangularized."""

    profile: StaircaseProfile
    a_core: NDArray[np.complex128]
    b_core: NDArray[np.complex128]
    p: NDArray[np.complex128]
    q: NDArray[np.complex128]
    a_full: NDArray[np.complex128]
    b_full: NDArray[np.complex128]


def staircase(a, b, hints: Sequence[int] = (), opts: RankOptions | None = None,
              target: Target | str = Target.ZERO) -> StaircaseResult:
    """Upper triangular staircase reduction at zero (or infinity).

    Parameters
    ----------
    a, b : array_like, square
    hints : sequence of int
        Known leading block sizes; those steps skip the rank decision.
    opts : RankOptions, optional
        Defaults to GlobalTripleNorm with max(||a||_F, ||b||_F) and
        tau = size * eps.
    target : {"zero", "inf"}
    """
    a = np.array(a, dtype=np.complex128)
    b = np.array(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise NonSquare("staircase needs square a and b of equal size")
    size = a.shape[0]
    target = Target(target)
    opts = _pencil_opts(opts, size, max(np.linalg.norm(a), np.linalg.norm(b)))
    eye = np.eye(size, dtype=np.complex128)
    w = _Work(LinearPencil(a, b, eye, eye.copy()))
    sizes = _run_staircase(w, target, opts, hints)
    d = w.active
    prof = StaircaseProfile.from_sizes(size, sizes, target)
    return StaircaseResult(prof, w.a[:d, :d].copy(), w.b[:d, :d].copy(), w.p, w.q, w.a, w.b)


def _step1(w: _Work, n: int, kf: PivotedQR, r_k: int,
           first_left: NDArray | None = None, first_right: NDArray | None = None) -> None:
    """Left Q1^* (+) Q_K^*, right R1 (+) Q_K, then drop the n - r_K trailing zeros."""
    qk = kf.q_orig
    l1 = qk if first_left is None else first_left
    w.left(l1.conj().T, 0, n)
    w.left(qk.conj().T, n, 2 * n)
    if first_right is not None:
        w.right(first_right, 0, n)
    w.right(qk, n, 2 * n)
    # exact structure of the transformed companion blocks
    w.a[:n, n:] = -(l1.conj().T @ qk)
    if first_left is None:
        w.a[:n, n:] = -np.eye(n)
    kblock = np.zeros((n, n), dtype=np.complex128)
    kblock[:r_k, kf.col_perm] = kf.r[:r_k, :]
    if first_right is not None:
        kblock = kblock @ first_right
    w.a[n:, :n] = kblock
    w.a[n:, n:] = 0.0
    w.b[n:, :n] = 0.0
    w.b[:n, n:] = 0.0
    w.b[n:, n:] = -np.eye(n)
    w.dz += n - r_k


def _stacked_block(c: NDArray, f: PivotedQR, r: int) -> NDArray:
    """[Q_2^* C; R_1 P^T] for the pivoted QR f of K (or M) with rank r."""
    n = c.shape[0]
    top = f.q_orig[:, r:].conj().T @ c
    bottom = np.zeros((r, n), dtype=np.complex128)
    bottom[:, f.col_perm] = f.r[:r, :]
    return np.vstack([top, bottom])


def _step2(w: _Work, n: int, r_k: int, opts: RankOptions,
           sf: PivotedQR | None = None, r22: int | None = None) -> int:
    """Second structured step; returns n - r_22 (zero if the block has full rank)."""
    lo, hi = r_k, n + r_k
    stacked = w.a[lo:hi, :n]
    if sf is None:
        sf = qr_col_pivoted(stacked, opts)
    if r22 is None:
        r22 = numerical_rank(sf, opts)
    s = n - r22
    if s == 0:
        return 0
    w.left(sf.q_orig.conj().T, lo, hi)
    block = np.zeros((n, n), dtype=np.complex128)
    block[:r22, sf.col_perm] = sf.r[:r22, :]
    w.a[lo:hi, :n] = block
    w.a[lo + r22:hi, :hi] = 0.0
    _compress_strip(w, s, Target.ZERO, opts, "second structured step")
    return s


def deflate_zero_step1(lp: LinearPencil, kf: PivotedQR, r_k: int) -> tuple[LinearPencil, int]:
    """First structured deflation of n - r_K zero eigenvalues.

    ``lp`` must be an untouched companion pencil of size 2n and ``kf``
    the pivoted QR of its K block.
    """
    n = lp.size // 2
    if r_k >= n:
        raise RankNotDeficient(f"K has full rank {r_k}")
    w = _Work(lp)
    _step1(w, n, kf, r_k)
    return w.freeze(), n - r_k


def deflate_zero_step2(lp: LinearPencil, ranks: RankReport,
                       opts: RankOptions | None = None) -> tuple[LinearPencil, StaircaseProfile]:
    """Second structured step applied to the output of :func:`deflate_zero_step1`."""
    n = lp.size // 2
    r_k = ranks.r_k
    opts = _pencil_opts(opts, n, float(np.max(np.abs(lp.a))) or 1.0)
    w = _Work(lp)
    s2 = _step2(w, n, r_k, opts)
    sizes = [n - r_k] + ([s2] if s2 else [])
    return w.freeze(), StaircaseProfile.from_sizes(2 * n, sizes, Target.ZERO)


class Depth(str, enum.Enum):
    NONE = "none"
    ONE_STEP = "one-step"
    FULL = "full"


def global_reduce(p: QuadPencil, opts: RankOptions | None = None,
                  depth: Depth | str = Depth.FULL) -> ReducedPencil:
    """Deflate all zero and infinite eigenvalues of the companion pencil of p.

    Parameters
    ----------
    p : QuadPencil
        Already scaled and balanced triple.
    opts : RankOptions, optional
        Defaults to GlobalTripleNorm with tau = n * eps.
    depth : {"full", "one-step", "none"}
        ``one-step`` stops after the first structured deflation on each
        side; ``none`` skips deflation altogether.
    """
    depth = Depth(depth)
    n = p.n
    user_tau = opts is not None and opts.tau is not None
    opts = _pencil_opts(opts, n, max(p.fro_norms()))
    # steps on the 2n-by-2n companion pencil use the tolerance of that size
    lin_opts = opts if user_tau else opts.with_tau(2 * n * EPS)
    mf = qr_col_pivoted(p.m, opts)
    kf = qr_col_pivoted(p.k, opts)
    r_m = numerical_rank(mf, opts)
    r_k = numerical_rank(kf, opts)

    if depth is Depth.NONE:
        ranks = RankReport(r_m, r_k)
        return ReducedPencil(build_c2(p), StaircaseProfile(), StaircaseProfile(target=Target.INF),
                             ranks, "none", False, p, mf, kf, opts)

    if r_m == n and r_k == n:
        w = _Work(build_c2(p))
        pm = mf.perm_matrix().astype(complex)
        w.left(mf.q_orig.conj().T, 0, n)
        w.right(pm, 0, n)
        w.b[:n, :n] = -mf.r
        return ReducedPencil(w.freeze(), StaircaseProfile(), StaircaseProfile(target=Target.INF),
                             RankReport(r_m, r_k, n, n), "1", False, p, mf, kf, opts)

    if r_m == n or r_k == n:
        # one singular coefficient: work with K singular
        rev = r_k == n
        wp = reverse(p) if rev else p
        wm, wk = (kf, mf) if rev else (mf, kf)
        wrm, wrk = (r_k, r_m) if rev else (r_m, r_k)
        sf = qr_col_pivoted(_stacked_block(wp.c, wk, wrk), opts)
        r22 = numerical_rank(sf, opts)
        w = _Work(build_c2(wp))
        zsizes = [n - wrk]
        if r22 == n or depth is Depth.ONE_STEP:
            case = "2.1" if r22 == n else "2.2"
            _step1(w, n, wk, wrk, wm.q_orig, wm.perm_matrix().astype(complex))
            w.b[:n, :n] = -wm.r
        else:
            case = "2.2"
            _step1(w, n, wk, wrk)
            s2 = _step2(w, n, wrk, lin_opts, sf, r22)
            zsizes.append(s2)
            zsizes += _run_staircase(w, Target.ZERO, lin_opts, label="zero staircase")
        r22k, r22m = (None, r22) if rev else (r22, None)
        return _finish(p, w, zsizes, [], r_m, r_k, r22k, r22m, case, rev, wp, wm, wk, opts)

    # both singular
    sfk = qr_col_pivoted(_stacked_block(p.c, kf, r_k), opts)
    sfm = qr_col_pivoted(_stacked_block(p.c, mf, r_m), opts)
    r22k = numerical_rank(sfk, opts)
    r22m = numerical_rank(sfm, opts)
    if (r22k == n and r22m == n) or depth is Depth.ONE_STEP:
        case = "3.1" if (r22k == n and r22m == n) else ("3.2" if max(r22k, r22m) == n else "3.3")
        w = _Work(build_c2(p))
        _step1(w, n, kf, r_k, mf.q_orig, None)
        w.b[:n, :n] = 0.0
        w.b[:r_m, mf.col_perm] = -mf.r[:r_m, :]
        _case31_inf(w, n, r_m, r_k, lin_opts)
        _check_normal_rank(p, opts)
        return _finish(p, w, [n - r_k], [n - r_m], r_m, r_k, r22k, r22m, case, False,
                       p, mf, kf, opts)

    if max(r22k, r22m) == n:
        case = "3.2"
        rev = r22k == n
    else:
        case = "3.3"
        rev = (n - r_m) + (n - r22m) > (n - r_k) + (n - r22k)
    wp = reverse(p) if rev else p
    wm, wk = (kf, mf) if rev else (mf, kf)
    wrm, wrk = (r_k, r_m) if rev else (r_m, r_k)
    wr22k, wr22m = (r22m, r22k) if rev else (r22k, r22m)
    wsf = sfm if rev else sfk
    w = _Work(build_c2(wp))
    _step1(w, n, wk, wrk)
    zsizes = [n - wrk]
    s2 = _step2(w, n, wrk, lin_opts, wsf, wr22k)
    if s2:
        zsizes.append(s2)
        zsizes += _run_staircase(w, Target.ZERO, lin_opts, label="zero staircase")
    hints = [n - wrm] + ([n - wr22m] if wr22m < n else [])
    isizes = _run_staircase(w, Target.INF, lin_opts, hints, label="infinite staircase")
    _check_normal_rank(p, opts)
    return _finish(p, w, zsizes, isizes, r_m, r_k, r22k, r22m, case, rev, wp, wm, wk, opts)


_PROBE_ANGLES = (0.7, 2.9, 4.6)


def _check_normal_rank(p: QuadPencil, opts: RankOptions) -> None:
    """Raise SingularPencil if Q(lambda) is rank deficient at every probe point.

    A singular quadratic pencil has det Q identically zero. This runs
    after the reduction as a safeguard for strip rank decisions that
    landed just above the threshold.
    """
    n = p.n
    probe = RankOptions(RankStrategy.ABS_MATRIX_NORM, opts.tau, opts.presort_rows)
    ranks = []
    for theta in _PROBE_ANGLES:
        f = qr_col_pivoted(p.evaluate(np.exp(1j * theta)), probe)
        ranks.append(numerical_rank(f, probe))
        if ranks[-1] == n:
            return
    raise SingularPencil("normal rank check", (n, n), max(ranks), n)


def _case31_inf(w: _Work, n: int, r_m: int, r_k: int, opts: RankOptions) -> None:
    """Move the rows where B vanishes to the window bottom and deflate them as infinities."""
    d = w.active
    s = n - r_m
    if s == 0:
        return
    order = np.r_[np.arange(r_m), np.arange(n, d), np.arange(r_m, n)]
    perm = np.eye(d)[order]
    w.left(perm, 0, d)
    w.b[d - s:d, :] = 0.0
    _compress_strip(w, s, Target.INF, opts, "infinite deflation")


def _finish(p, w, zsizes, isizes, r_m, r_k, r22k, r22m, case, rev, wp, wm, wk, opts):
    zsizes = [s for s in zsizes if s]
    isizes = [s for s in isizes if s]
    size = w.size
    zprof = StaircaseProfile.from_sizes(size, zsizes, Target.ZERO)
    iprof = StaircaseProfile.from_sizes(size - sum(zsizes), isizes, Target.INF)
    if rev:
        # zeros of the working problem are infinities of the original
        zprof, iprof = (StaircaseProfile.from_sizes(size, iprof.s, Target.ZERO),
                        StaircaseProfile.from_sizes(size - iprof.total, zprof.s, Target.INF))
    ranks = RankReport(r_m, r_k, r22k, r22m)
    return ReducedPencil(w.freeze(), zprof, iprof, ranks, case, rev, wp, wm, wk, opts)
