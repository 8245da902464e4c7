import math

import numpy as np
import pytest

from qthermo import linalg
from qthermo.errors import DimensionMismatch, DomainError, NoConvergence, NotHermitian

from conftest import random_density, random_hermitian

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def test_eig_identity():
    es = linalg.eig_hermitian(np.eye(2))
    assert np.array_equal(es.eigenvalues, [1.0, 1.0])


def test_eig_pauli_z():
    es = linalg.eig_hermitian(SZ)
    np.testing.assert_allclose(es.eigenvalues, [-1.0, 1.0], atol=1e-15)


def test_eig_random_4x4_reconstruction():
    a = random_hermitian(np.random.default_rng(7), 4)
    es = linalg.eig_hermitian(a)
    v = es.eigenvectors
    assert linalg.max_abs(v @ np.diag(es.eigenvalues) @ v.conj().T - a) <= 1e-10


@pytest.mark.parametrize("seed", range(120))
def test_eig_invariants_random(seed):
    rng = np.random.default_rng(seed)
    d = 2 + seed % 7
    a = random_hermitian(rng, d)
    es = linalg.eig_hermitian(a)
    v = es.eigenvectors
    assert np.all(np.diff(es.eigenvalues) >= 0)
    assert linalg.max_abs(v @ np.diag(es.eigenvalues) @ v.conj().T - a) <= 1e-10
    assert linalg.max_abs(v.conj().T @ v - np.eye(d)) <= 1e-12


def test_eig_degenerate_and_zero():
    es = linalg.eig_hermitian(np.zeros((3, 3)))
    assert np.array_equal(es.eigenvalues, np.zeros(3))
    a = np.diag([2.0, 2.0, -1.0]).astype(complex)
    u = linalg.eig_hermitian(random_hermitian(np.random.default_rng(3), 3)).eigenvectors
    b = u @ a @ u.conj().T
    es = linalg.eig_hermitian(b)
    np.testing.assert_allclose(es.eigenvalues, [-1.0, 2.0, 2.0], atol=1e-13)


def test_eig_dimension_64():
    a = random_hermitian(np.random.default_rng(11), 64)
    es = linalg.eig_hermitian(a)
    v = es.eigenvectors
    assert linalg.max_abs(v @ np.diag(es.eigenvalues) @ v.conj().T - a) <= 1e-10
    assert linalg.max_abs(v.conj().T @ v - np.eye(64)) <= 1e-12


def test_eig_not_hermitian():
    with pytest.raises(NotHermitian):
        linalg.eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


def test_eig_sweep_budget():
    a = random_hermitian(np.random.default_rng(5), 6)
    with pytest.raises(NoConvergence):
        linalg.eig_hermitian(a, max_sweeps=1)


def test_eig_rejects_nonfinite():
    with pytest.raises(ValueError):
        linalg.eig_hermitian(np.array([[np.nan, 0], [0, 1]]))


def test_exp_of_zero_is_identity():
    np.testing.assert_array_equal(linalg.hermitian_matrix_function(np.zeros((3, 3)), np.exp), np.eye(3))


def test_log_of_half_identity():
    out = linalg.hermitian_matrix_function(np.diag([0.5, 0.5]), np.log)
    np.testing.assert_allclose(out, np.diag([-math.log(2)] * 2), atol=1e-15)


def test_log_of_projector_gives_zero_entropy_term():
    psi = np.array([1, 1j, 0]) / math.sqrt(2)
    p = np.outer(psi, psi.conj())
    log_p = linalg.hermitian_matrix_function(p, "log")
    assert abs(np.trace(p @ log_p)) <= 1e-12


def test_log_domain_error():
    with pytest.raises(DomainError):
        linalg.hermitian_matrix_function(np.diag([1.1, -0.1]), np.log)


def test_log_accepts_clamped_negative_noise():
    out = linalg.hermitian_matrix_function(np.diag([1.0, -1e-16]), "log")
    assert out[1, 1].real == pytest.approx(math.log(1e-14))


def _taylor_exp(a, terms=40):
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


@pytest.mark.parametrize("seed", range(10))
def test_exp_matches_taylor_series(seed):
    rng = np.random.default_rng(100 + seed)
    a = random_hermitian(rng, 2 + seed % 5)
    a = a / np.linalg.norm(a, 2)
    assert linalg.max_abs(linalg.hermitian_matrix_function(a, "exp") - _taylor_exp(a)) <= 1e-10


def test_tensor_identity_and_shape():
    np.testing.assert_array_equal(linalg.tensor_product(np.eye(2), np.eye(2)), np.eye(4))
    assert linalg.tensor_product(np.ones((2, 2)), np.ones((3, 3))).shape == (6, 6)


def test_tensor_index_oracle(rng):
    a = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    b = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    out = linalg.tensor_product(a, b)
    for i in range(2):
        for j in range(3):
            for k in range(3):
                for l in range(2):
                    assert abs(out[i * 3 + k, j * 2 + l] - a[i, j] * b[k, l]) <= 1e-15


def test_partial_trace_product_state(rng):
    ra, rb = random_density(rng, 2), random_density(rng, 3)
    rho = linalg.tensor_product(ra, rb)
    assert linalg.max_abs(linalg.partial_trace(rho, [2, 3], [0]) - ra) <= 1e-14
    assert linalg.max_abs(linalg.partial_trace(rho, [2, 3], [1]) - rb) <= 1e-14


def test_partial_trace_bell_state():
    phi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    rho = np.outer(phi, phi)
    for keep in ([0], [1]):
        assert linalg.max_abs(linalg.partial_trace(rho, [2, 2], keep) - np.eye(2) / 2) <= 1e-15


def test_partial_trace_summation_oracle(rng):
    rho = random_density(rng, 4)
    ra = np.zeros((2, 2), dtype=complex)
    rb = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                ra[i, j] += rho[2 * i + k, 2 * j + k]
                rb[i, j] += rho[2 * k + i, 2 * k + j]
    assert linalg.max_abs(linalg.partial_trace(rho, [2, 2], [0]) - ra) <= 1e-14
    assert linalg.max_abs(linalg.partial_trace(rho, [2, 2], [1]) - rb) <= 1e-14


def test_partial_trace_three_parties_preserves_trace(rng):
    rho = random_density(rng, 12)
    for keep in ([0], [1], [2], [0, 2], [1, 2]):
        red = linalg.partial_trace(rho, [2, 3, 2], keep)
        assert abs(np.trace(red) - 1) <= 1e-13


def test_partial_trace_errors(rng):
    rho = random_density(rng, 4)
    with pytest.raises(DimensionMismatch):
        linalg.partial_trace(rho, [2, 3], [0])
    with pytest.raises(DimensionMismatch):
        linalg.partial_trace(rho, [2, 2], [])


@pytest.mark.parametrize("seed", range(20))
def test_tensor_partial_trace_consistency(seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, 3)
    b = random_hermitian(rng, 2)
    out = linalg.partial_trace(linalg.tensor_product(a, b), [3, 2], [0])
    assert linalg.max_abs(out - a * np.trace(b)) <= 1e-13


def test_embed_matches_kron(rng):
    a = random_hermitian(rng, 2)
    np.testing.assert_allclose(linalg.embed(a, [2, 3, 2], [2]), np.kron(np.eye(6), a))
    np.testing.assert_allclose(linalg.embed(a, [2, 3, 2], [0]), np.kron(a, np.eye(6)))


def test_commutator_examples(rng):
    a = random_hermitian(rng, 3)
    assert linalg.max_abs(linalg.commutator(a, a)) == 0
    np.testing.assert_allclose(linalg.commutator(SX, SY), 2j * SZ)
    b = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    c = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    assert abs(np.trace(linalg.commutator(b, c))) <= 1e-13
    with pytest.raises(DimensionMismatch):
        linalg.commutator(np.eye(2), np.eye(3))


@pytest.mark.parametrize("seed", range(20))
def test_cyclic_trace_of_commutator(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_hermitian(rng, 4) for _ in range(3))
    lhs = np.trace(linalg.commutator(a, b) @ c)
    assert abs(lhs - np.trace(a @ linalg.commutator(b, c))) <= 1e-12
    assert abs(lhs - np.trace(linalg.commutator(c, a) @ b)) <= 1e-12
