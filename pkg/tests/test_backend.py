import numpy as np
import pytest

from oracles import crandn, match_error, random_unitary

from kvadeig.backend import BACKENDS, qz_backend, reference_backend, solve_generalized
from kvadeig.errors import NonSquare

NAMES = sorted(BACKENDS)


def _residuals_ok(a, b, res, tol=1e-8):
    na, nb = np.linalg.norm(a, 2), np.linalg.norm(b, 2)
    for j in range(len(res)):
        al, be = res.alphas[j], res.betas[j]
        v = res.right_vecs[:, j]
        assert np.linalg.norm(v) == pytest.approx(1.0)
        r = np.linalg.norm(al * b @ v - be * a @ v)
        assert r <= tol * (abs(al) * nb + abs(be) * na)
        if res.left_vecs is not None:
            y = res.left_vecs[:, j]
            r = np.linalg.norm(y.conj() @ (al * b - be * a))
            assert r <= tol * (abs(al) * nb + abs(be) * na)


@pytest.mark.parametrize("name", NAMES)
def test_diagonal_pencil(name):
    res = solve_generalized(np.diag([1.0, 2.0]), np.eye(2), backend=name)
    assert match_error(res.values, [1, 2]) <= 1e-14
    v = np.abs(res.right_vecs)
    assert np.allclose(np.sort(v, axis=0), [[0, 0], [1, 1]], atol=1e-12)


@pytest.mark.parametrize("name", NAMES)
def test_infinite_eigenvalue_convention(name):
    res = solve_generalized(np.eye(2), np.diag([1.0, 0.0]), backend=name)
    vals = res.values
    assert np.sum(np.isinf(vals)) == 1
    assert vals[np.isfinite(vals)][0] == pytest.approx(1.0)
    assert np.sum(np.abs(res.betas) == 0) == 1


@pytest.mark.parametrize("name", NAMES)
def test_similarity_construction(name):
    rng = np.random.default_rng(50)
    d = crandn(rng, 8)
    s = crandn(rng, 8, 8)
    a = s @ np.diag(d) @ np.linalg.inv(s)
    res = solve_generalized(a, np.eye(8), backend=name)
    assert match_error(res.values, d) <= 1e-8


@pytest.mark.parametrize("name", NAMES)
def test_empty_pencil(name):
    res = solve_generalized(np.zeros((0, 0)), np.zeros((0, 0)), backend=name)
    assert len(res) == 0


@pytest.mark.parametrize("name", NAMES)
def test_residual_contract_random(name):
    rng = np.random.default_rng(51)
    for trial in range(100):
        m = int(rng.integers(1, 21))
        ta = np.triu(crandn(rng, m, m))
        tb = np.triu(crandn(rng, m, m))
        np.fill_diagonal(ta, rng.uniform(0.5, 2, m) * np.exp(2j * np.pi * rng.random(m)))
        if trial % 2:
            # one infinite eigenvalue: zero a row of the triangular b
            tb[int(rng.integers(m)), :] = 0
        u, v = random_unitary(rng, m), random_unitary(rng, m)
        a, b = u @ ta @ v, u @ tb @ v
        res = solve_generalized(a, b, backend=name, seed=trial)
        _residuals_ok(a, b, res)
        if trial % 2:
            # the reference path only approximates beta = 0
            assert np.sum(np.abs(res.values) > 1e6) == 1


def test_reference_shift_fallback_is_seeded():
    a = np.diag([1.0, 1e-14, 2.0]).astype(complex)
    b = np.eye(3)
    r1 = reference_backend(a, b, seed=3)
    r2 = reference_backend(a, b, seed=3)
    assert np.array_equal(r1.alphas, r2.alphas)
    vals = np.sort_complex(r1.values)
    assert np.allclose(vals, [1e-14, 1, 2], rtol=0, atol=1e-8)
    _residuals_ok(a, b, r1)


def test_qz_matches_reference():
    rng = np.random.default_rng(52)
    a, b = crandn(rng, 6, 6), crandn(rng, 6, 6)
    assert match_error(qz_backend(a, b).values, reference_backend(a, b).values) <= 1e-10


def test_unknown_backend_and_shape():
    with pytest.raises(ValueError):
        solve_generalized(np.eye(2), np.eye(2), backend="nope")
    with pytest.raises(NonSquare):
        solve_generalized(np.eye(2), np.eye(3))
