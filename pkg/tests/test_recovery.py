import numpy as np
import pytest

from oracles import EPS, crandn, low_rank, random_unitary

from kvadeig import QuadPencil, SolveOptions, Tag, eta, omega, solve_qep
from kvadeig.errors import InfiniteValueUnsupported, ZeroDenominator, ZeroVector
from kvadeig.fixtures import mobile_manipulator
from kvadeig.recovery import normalize, omega_at_infinity

I2 = np.eye(2)


def _diag(m, c, k):
    return QuadPencil(np.diag(m), np.diag(c), np.diag(k))


def test_eta_exact_diagonal_pair():
    p = _diag([1.0, 1.0], [-3.0, 1.0], [2.0, 5.0])
    assert eta(p, 2.0, [1.0, 0.0]) <= 10 * EPS
    assert eta(p, 1.0, [1.0, 0.0], side="left") <= 10 * EPS


def test_eta_at_infinity():
    p = QuadPencil(I2, I2, I2)
    assert eta(p, complex(np.inf), [1.0, 0.0]) == pytest.approx(1.0)


def test_eta_at_zero_uses_k():
    p = _diag([1.0, 1.0], [1.0, 1.0], [0.0, 2.0])
    assert eta(p, 0.0, [0.0, 1.0]) == pytest.approx(1.0)
    assert eta(p, 0.0, [1.0, 0.0]) == 0.0


def test_eta_errors():
    p = _diag([1.0, 1.0], [1.0, 1.0], [0.0, 0.0])
    with pytest.raises(ZeroVector):
        eta(p, 1.0, [0.0, 0.0])
    with pytest.raises(ZeroDenominator):
        eta(p, 0.0, [1.0, 0.0])


def test_omega_exact_pair_is_zero():
    p = _diag([1.0, 1.0], [-3.0, 1.0], [2.0, 5.0])
    assert omega(p, 1.0, [1.0, 0.0]) == 0.0


def test_omega_zero_numerator_ignores_denominator():
    p = _diag([1.0, 0.0], [-3.0, 0.0], [2.0, 0.0])
    assert omega(p, 2.0, [1.0, 0.0]) == 0.0


def test_omega_worst_case_is_one():
    # |Q x| <= (|M| |l|^2 + |C| |l| + |K|) |x| componentwise, so omega <= 1
    p = QuadPencil(np.zeros((2, 2)), np.zeros((2, 2)), np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert omega(p, 1.0, [1.0, 0.0]) == 1.0


def test_omega_rejects_infinity():
    with pytest.raises(InfiniteValueUnsupported):
        omega(QuadPencil(I2, I2, I2), complex(np.inf), [1.0, 0.0])


def test_omega_at_infinity_null_vector():
    p = QuadPencil(np.diag([1.0, 0.0]), I2, I2)
    assert omega_at_infinity(p, [0.0, 1.0]) == 0.0


def test_normalize_phase():
    v = normalize(np.array([1e-20j, 2j, 1.0]))
    assert np.linalg.norm(v) == pytest.approx(1.0)
    assert v[1].imag == 0 and v[1].real > 0
    with pytest.raises(ZeroVector):
        normalize(np.zeros(3))


def test_mobile_manipulator_backward_errors():
    sol = solve_qep(mobile_manipulator())
    assert all(pr.eta_right <= 1e-13 for pr in sol.pairs)
    assert max(pr.omega_right for pr in sol.pairs if pr.tag is Tag.FINITE) <= 1e-12


def test_case1_diagonal_candidates():
    p = _diag([1.0, 2.0], [3.0, 1.0], [1.0, 4.0])
    sol = solve_qep(p, SolveOptions(balance=False))
    assert sol.reduced.case == "1"
    for pr in sol.pairs:
        names = {c.name for c in pr.candidates_right}
        assert names == {"z1", "K^-1 z2"}
        assert pr.eta_right <= 10 * EPS
        assert pr.eta_left <= 10 * EPS
        # normal problem: left and right coincide up to phase
        assert abs(abs(np.vdot(pr.left_vec, pr.right_vec)) - 1) <= 1e-12


def test_case21_zero_eigenvector():
    sol = solve_qep(QuadPencil(I2, I2, np.diag([1.0, 0.0])))
    assert sol.reduced.case == "2.1"
    zero = [pr for pr in sol.pairs if pr.tag is Tag.ZERO]
    assert len(zero) == 1
    assert np.allclose(np.abs(zero[0].right_vec), [0, 1], atol=1e-14)


def test_case21_left_vectors_match_construction():
    rng = np.random.default_rng(60)
    u, v = random_unitary(rng, 3), random_unitary(rng, 3)
    m, c, k = [1.0, 1.0, 1.0], [1.0, 2.5, 4.0], [0.5, 1.0, 0.0]
    p = QuadPencil(*(u @ np.diag(x) @ v for x in (m, c, k)))
    sol = solve_qep(p)
    assert sol.reduced.case == "2.1"
    for pr in sol.pairs:
        if pr.tag is not Tag.FINITE:
            continue
        i = int(np.argmin([abs(np.polyval([m[j], c[j], k[j]], pr.value)) for j in range(3)]))
        assert abs(abs(np.vdot(u[:, i], pr.left_vec)) - 1) <= 1e-8
        assert abs(abs(np.vdot(v.conj().T[:, i], pr.right_vec)) - 1) <= 1e-8


def test_case31_residuals():
    rng = np.random.default_rng(61)
    for _ in range(10):
        n = 6
        p = QuadPencil(low_rank(rng, n, 4), crandn(rng, n, n), low_rank(rng, n, 3))
        sol = solve_qep(p)
        assert sol.reduced.case == "3.1"
        assert all(pr.eta_right <= 1e-8 and pr.eta_left <= 1e-8 for pr in sol.pairs)


@pytest.mark.parametrize("kind", range(4))
def test_pair_invariants_random(kind):
    rng = np.random.default_rng(62 + kind)
    for _ in range(15):
        n = int(rng.integers(2, 11))
        mats = [crandn(rng, n, n) for _ in range(3)]
        if kind in (1, 3):
            mats[0] = low_rank(rng, n, int(rng.integers(1, n)))
        if kind in (2, 3):
            mats[2] = low_rank(rng, n, int(rng.integers(1, n)))
        p = QuadPencil(*mats)
        sol = solve_qep(p)
        assert len(sol.pairs) == 2 * n
        assert sol.count(Tag.ZERO) == sol.reduced.deflated_zero
        assert sol.count(Tag.INFINITE) >= sol.reduced.deflated_inf
        nm, nk = np.linalg.norm(p.m, 2), np.linalg.norm(p.k, 2)
        for pr in sol.pairs:
            assert np.linalg.norm(pr.right_vec) == pytest.approx(1.0)
            assert np.linalg.norm(pr.left_vec) == pytest.approx(1.0)
            assert pr.eta_right <= 1e-10 and pr.eta_left <= 1e-10
            assert pr.eta_right == min(c.eta for c in pr.candidates_right)
            assert pr.eta_left == min(c.eta for c in pr.candidates_left)
            if pr.tag is Tag.ZERO:
                assert np.linalg.norm(p.k @ pr.right_vec) <= 1e-10 * nk
            if pr.tag is Tag.INFINITE:
                assert np.linalg.norm(p.m @ pr.right_vec) <= 1e-10 * nm


def _diag_scrambled(rng, m, c, k):
    u, v = random_unitary(rng, len(m)), random_unitary(rng, len(m))
    return QuadPencil(*(u @ np.diag(np.asarray(x, complex)) @ v for x in (m, c, k)))


@pytest.mark.parametrize("coeffs,case", [
    (([1, 1, 1, 1], [0, 1.2, 1.3, 0.7], [0, 0, 0.8, 1.2]), "2.2"),
    (([0, 1, 1, 1], [1.4, 0, 1.3, 0.7], [1.1, 0, 0.8, 1.2]), "3.2"),
    (([0, 1, 1.2, 0.9], [0, 0, 1.3, 0.7], [1.1, 0, 0.8, 1.2]), "3.3"),
])
def test_staircase_cases_recover_vectors(coeffs, case):
    rng = np.random.default_rng(63)
    p = _diag_scrambled(rng, *coeffs)
    sol = solve_qep(p)
    assert sol.reduced.case == case
    assert len(sol.pairs) == 8
    assert all(pr.eta_right <= 1e-10 and pr.eta_left <= 1e-10 for pr in sol.pairs)
