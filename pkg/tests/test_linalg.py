import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import two_level_matrices
from ptdyn import linalg
from ptdyn.linalg import (
    AntilinearOperator,
    OperatorFamily,
    eigenpairs,
    family_derivative,
    hermitian_sqrt,
    matrix_exp,
    operator_norm,
)

SQRT3 = math.sqrt(3.0)


# ---------------------------------------------------------------- eigenpairs

def test_eigenpairs_identity():
    pairs = eigenpairs(np.eye(2))
    assert [lam for lam, _ in pairs] == [1.0, 1.0]
    vecs = np.array([v for _, v in pairs])
    assert np.allclose(vecs, np.eye(2))


def test_eigenpairs_two_level_hamiltonian():
    # s = 1, alpha = pi/3: eigenvalues 0 and 2 s cos(alpha) = 1
    H, _, _ = two_level_matrices(1.0, math.pi / 3)
    lams = [lam for lam, _ in eigenpairs(H)]
    assert abs(lams[0]) < 1e-12
    assert abs(lams[1] - 1.0) < 1e-12


def test_eigenpairs_two_level_metric():
    # eigenvalues of PC are (1 -+ sin a)/cos a = 2 -+ sqrt(3) at a = pi/3
    _, C, P = two_level_matrices(1.0, math.pi / 3)
    lams = [lam for lam, _ in eigenpairs(P @ C)]
    assert abs(lams[0] - (2.0 - SQRT3)) < 1e-12
    assert abs(lams[1] - (2.0 + SQRT3)) < 1e-12


def test_eigenpairs_sorted_and_gauged(rng):
    M = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    pairs = eigenpairs(M)
    lams = [lam for lam, _ in pairs]
    assert lams == sorted(lams, key=lambda z: (z.real, z.imag))
    for _, v in pairs:
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12
        pivot = v[np.argmax(np.abs(v))]
        assert pivot.real > 0 and abs(pivot.imag) < 1e-12


@settings(max_examples=60, deadline=None)
@given(dim=st.integers(2, 8), seed=st.integers(0, 2**32 - 1))
def test_eigenpairs_residual_property(dim, seed):
    gen = np.random.default_rng(seed)
    M = gen.normal(size=(dim, dim)) + 1j * gen.normal(size=(dim, dim))
    tol = 1e-10
    for lam, v in eigenpairs(M, tol=tol):
        assert np.linalg.norm(M @ v - lam * v) <= tol * operator_norm(M)


def test_eigenpairs_rejects_bad_input():
    with pytest.raises(ValueError):
        eigenpairs(np.ones((2, 3)))
    with pytest.raises(ValueError):
        eigenpairs(np.array([[np.nan, 0], [0, 1]]))
    with pytest.raises(ValueError):
        eigenpairs(np.eye(2), tol=0.0)


def test_non_contiguous_input_accepted(rng):
    # transposed views must go through validation like any other carrier
    M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert operator_norm(M.T) == pytest.approx(operator_norm(M.T.copy()))
    pairs = eigenpairs(M.T)
    assert len(pairs) == 3


# ------------------------------------------------------------ hermitian_sqrt

def test_hermitian_sqrt_identity_and_diagonal():
    assert np.allclose(hermitian_sqrt(np.eye(3)), np.eye(3))
    S = hermitian_sqrt(np.diag([4.0, 9.0]))
    assert np.allclose(S, np.diag([2.0, 3.0]))


def test_hermitian_sqrt_two_level_metric():
    _, C, P = two_level_matrices(1.0, math.pi / 3)
    PC = P @ C
    S = hermitian_sqrt(PC)
    assert abs(operator_norm(S) - math.sqrt(2.0 + SQRT3)) < 1e-12
    assert np.allclose(S @ S, PC, atol=1e-12)
    assert np.allclose(S, S.conj().T)


def test_hermitian_sqrt_property(rng):
    for dim in (2, 3, 5):
        X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        M = X @ X.conj().T + 0.1 * np.eye(dim)
        tol = 1e-11
        S = hermitian_sqrt(M, tol=tol)
        assert operator_norm(S @ S - M) <= 10 * tol * operator_norm(M)
        assert operator_norm(S - S.conj().T) <= tol


def test_hermitian_sqrt_rejects_non_hermitian():
    with pytest.raises(ValueError, match="not Hermitian"):
        hermitian_sqrt(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_hermitian_sqrt_rejects_indefinite():
    with pytest.raises(ValueError, match="not a valid metric"):
        hermitian_sqrt(np.diag([1.0, -1.0]))


# -------------------------------------------------------------- operator_norm

def test_operator_norm_examples():
    assert operator_norm(np.eye(4)) == pytest.approx(1.0)
    assert operator_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0)
    _, C, P = two_level_matrices(1.0, math.pi / 3)
    assert operator_norm(P @ C) == pytest.approx(2.0 + SQRT3, abs=1e-12)


# ----------------------------------------------------------------- matrix_exp

def test_matrix_exp_zero_and_diagonal():
    assert np.allclose(matrix_exp(np.zeros((3, 3))), np.eye(3))
    E = matrix_exp(np.diag([1j * math.pi, 0.0]))
    assert np.allclose(E, np.diag([-1.0, 1.0]), atol=1e-15)


def _eig_exp_hermitian(H):
    """Independent oracle: exponential through the eigendecomposition."""
    w, V = np.linalg.eigh(H)
    return (V * np.exp(w)) @ V.conj().T


def test_matrix_exp_matches_eigendecomposition(rng):
    for dim in (2, 4, 6):
        X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        H = 0.5 * (X + X.conj().T)
        expected = _eig_exp_hermitian(H)
        got = matrix_exp(H)
        assert operator_norm(got - expected) <= 1e-12 * operator_norm(expected)
        # anti-Hermitian: e^{iH} from the same eigenbasis
        w, V = np.linalg.eigh(H)
        expected_u = (V * np.exp(1j * w)) @ V.conj().T
        got_u = matrix_exp(1j * H)
        assert operator_norm(got_u - expected_u) <= 1e-12 * operator_norm(expected_u)


def test_matrix_exp_anti_hermitian_is_unitary(rng):
    X = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    M = X - X.conj().T
    U = matrix_exp(M)
    assert operator_norm(U.conj().T @ U - np.eye(3)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(0.1, 10.0))
def test_matrix_exp_inverse_and_determinant(seed, scale):
    gen = np.random.default_rng(seed)
    M = gen.normal(size=(3, 3)) + 1j * gen.normal(size=(3, 3))
    M *= scale / max(operator_norm(M), 1e-12)
    E = matrix_exp(M)
    assert operator_norm(E @ matrix_exp(-M) - np.eye(3)) <= 1e-10
    assert abs(np.linalg.det(E) - np.exp(np.trace(M))) <= 1e-10 * abs(np.exp(np.trace(M)))


def test_matrix_exp_overflow():
    with pytest.raises(OverflowError, match="norm"):
        matrix_exp(np.diag([2000.0, 0.0]))


# ---------------------------------------------------------- family_derivative

def test_family_derivative_constant_and_linear():
    M = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
    const = OperatorFamily(0.0, 10.0, lambda t: M)
    assert np.allclose(family_derivative(const, 5.0), 0.0)
    linear = OperatorFamily(0.0, 10.0, lambda t: t * M)
    assert np.allclose(family_derivative(linear, 5.0), M, atol=1e-10)


def test_family_derivative_analytic_wins():
    M = np.eye(2, dtype=complex)
    fam = OperatorFamily(0.0, 1.0, lambda t: t * M, lambda t: 7.0 * M)
    assert np.allclose(family_derivative(fam, 0.5), 7.0 * M)


def test_family_derivative_two_level_metric_operator():
    # central difference of C(alpha(t)) against alpha' * (tan(a) C + i diag(1,-1))
    omega = 0.8

    def C_of_t(t):
        return two_level_matrices(1.0, omega * t)[1]

    fam = OperatorFamily(-10.0, 10.0, C_of_t)
    t = 0.45
    a = omega * t
    C = C_of_t(t)
    expected = omega * (math.tan(a) * C + 1j * np.diag([1.0, -1.0]))
    got = family_derivative(fam, t)
    assert operator_norm(got - expected) < 1e-8


def test_family_derivative_quadratic_convergence():
    fam = OperatorFamily(-10.0, 10.0, lambda t: np.array([[np.sin(t), 0], [0, np.cos(2 * t)]], dtype=complex))
    t = 0.7
    exact = np.array([[np.cos(t), 0], [0, -2 * np.sin(2 * t)]], dtype=complex)
    err_h = operator_norm(family_derivative(fam, t, h=1e-3) - exact)
    err_h2 = operator_norm(family_derivative(fam, t, h=5e-4) - exact)
    ratio = err_h / err_h2
    assert 4.0 * 0.8 <= ratio <= 4.0 * 1.2


def test_family_derivative_one_sided_at_edge(caplog):
    fam = OperatorFamily(0.0, 1.0, lambda t: np.array([[np.sin(t)]], dtype=complex))
    with caplog.at_level(logging.WARNING, logger="ptdyn.linalg"):
        got = family_derivative(fam, 0.0, h=1e-4)
    assert any("one-sided" in rec.message for rec in caplog.records)
    assert abs(got[0, 0] - 1.0) < 1e-6


# ---------------------------------------------------------- AntilinearOperator

def test_antilinear_operator_apply():
    K = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    T = AntilinearOperator(K)
    x = np.array([1.0 + 2.0j, 3.0])
    assert np.allclose(T.apply(x), np.array([3.0, 1.0 - 2.0j]))
    assert np.allclose(T.squared(), np.eye(2))


def test_antilinear_conjugation():
    T = AntilinearOperator.conjugation(3)
    x = np.array([1j, 2.0, 1.0 - 1j])
    assert np.allclose(T.apply(x), np.conj(x))
