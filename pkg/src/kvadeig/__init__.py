"""Complete solution of dense quadratic eigenvalue problems with deflation of zero and infinite eigenvalues."""

from .backend import GeneralizedEigenPairs, solve_generalized
from .deflation import (RankReport, ReducedPencil, StaircaseProfile, deflate_zero_step1,
                        deflate_zero_step2, global_reduce, staircase)
from .dense import (CompleteOrthogonalDecomp, PivotedQR, RankOptions, RankStrategy, cod,
                    numerical_rank, qr_col_pivoted, row_presort)
from .errors import SingularPencil
from .linearization import LinearPencil, QuadPencil, build_c2, reverse
from .recovery import QepEigenpair, Tag, eta, omega
from .scaling import (BalancingDiagonals, ScalingParams, apply_balancing, balance, flv_scale,
                      tropical_scale)
from .solver import QepSolution, SolveOptions, solve_qep

__all__ = [
    "BalancingDiagonals", "CompleteOrthogonalDecomp", "GeneralizedEigenPairs", "LinearPencil",
    "PivotedQR", "QepEigenpair", "QepSolution", "QuadPencil", "RankOptions", "RankReport",
    "RankStrategy", "ReducedPencil", "ScalingParams", "SingularPencil", "SolveOptions",
    "StaircaseProfile", "Tag", "apply_balancing", "balance", "build_c2", "cod",
    "deflate_zero_step1", "deflate_zero_step2", "eta", "flv_scale", "global_reduce",
    "numerical_rank", "omega", "qr_col_pivoted", "reverse", "row_presort", "solve_generalized",
    "solve_qep", "staircase", "tropical_scale",
]
