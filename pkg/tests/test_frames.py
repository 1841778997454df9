import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_frame_matrices, two_level_matrices
from ptdyn.frames import (
    FrameAxiomError,
    FrameFamily,
    cpt_adjoint,
    cpt_inner,
    cpt_norm,
    norm_equivalence_bounds,
    symmetry_report,
    validate_frames,
)
from ptdyn.linalg import AntilinearOperator, OperatorFamily, operator_norm

SQRT3 = math.sqrt(3.0)
SWAP = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def conjugation(dim=2):
    return AntilinearOperator.conjugation(dim)


def two_level_frame(alpha, s=1.0):
    _, C, P = two_level_matrices(s, alpha)
    return validate_frames(C, P, conjugation())


def euclidean_eigvecs(alpha):
    """Unit-2-norm eigenvectors of the two-level Hamiltonian."""
    u, w = np.exp(-0.5j * alpha), np.exp(0.5j * alpha)
    psi1 = np.array([u, -w]) / math.sqrt(2.0)
    psi2 = np.array([w, u]) / math.sqrt(2.0)
    return psi1, psi2


# ------------------------------------------------------------ validate_frames

def test_validate_swap_frame_gives_identity_metric():
    frame = validate_frames(SWAP, SWAP, conjugation())
    assert np.allclose(frame.metric, np.eye(2))
    x = np.array([1.0 + 1j, 2.0])
    y = np.array([0.5, -1j])
    assert cpt_inner(frame, x, y) == pytest.approx(np.vdot(x, y))


def test_validate_two_level_frame():
    frame = two_level_frame(math.pi / 3)
    assert frame.metric_eigenvalues[0] == pytest.approx(2.0 - SQRT3, abs=1e-12)
    assert frame.metric_eigenvalues[1] == pytest.approx(2.0 + SQRT3, abs=1e-12)
    assert np.allclose(frame.metric_sqrt @ frame.metric_sqrt, frame.metric, atol=1e-12)
    assert np.allclose(frame.metric_inv @ frame.metric, np.eye(2), atol=1e-12)


def test_validate_rejects_indefinite_metric():
    # C = I, P = swap: the metric is the swap matrix with eigenvalue -1
    with pytest.raises(FrameAxiomError, match="positive"):
        validate_frames(np.eye(2), SWAP, conjugation())


def test_validate_rejects_each_axiom_distinctly():
    with pytest.raises(FrameAxiomError, match="C\\^2 = I"):
        validate_frames(2.0 * np.eye(2), SWAP, conjugation())
    with pytest.raises(FrameAxiomError, match="P\\^2 = I"):
        validate_frames(SWAP, np.array([[1.0, 1.0], [0.0, 1.0]]), conjugation())
    with pytest.raises(FrameAxiomError, match="T\\^2 = I"):
        validate_frames(SWAP, SWAP, AntilinearOperator(np.array([[1.0, 1.0], [0.0, 1.0]])))
    with pytest.raises(FrameAxiomError, match="PT = TP"):
        validate_frames(SWAP, SWAP, AntilinearOperator(np.diag([1.0, -1.0])))
    with pytest.raises(FrameAxiomError, match="CPT = TPC"):
        validate_frames(np.diag([1.0, -1.0]), SWAP, conjugation())
    # commuting real involutions with a non-symmetric product
    C = np.array([[1.0, 2.0], [0.0, -1.0]])
    with pytest.raises(FrameAxiomError, match="metric Hermitian"):
        validate_frames(C, np.eye(2), conjugation())


def test_validation_error_reports_residual():
    with pytest.raises(FrameAxiomError, match="residual"):
        validate_frames(2.0 * np.eye(2), SWAP, conjugation())


def test_residuals_recorded_on_frame():
    frame = two_level_frame(math.pi / 4)
    assert set(frame.residuals) >= {"C^2 = I", "CPT = TPC", "metric Hermitian"}
    assert frame.residuals["C^2 = I"] <= 1e-12


def test_phase_twisted_conjugation_is_valid():
    # T = e^{i theta} * conjugation commutes with the swap P and squares to I
    _, C, P = two_level_matrices(1.0, 0.5)
    K = np.exp(0.3j) * np.eye(2)
    frame = validate_frames(C, P, AntilinearOperator(K))
    assert np.allclose(frame.metric, P @ C)


def test_validate_rejects_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        validate_frames(np.eye(3), SWAP, conjugation())


# -------------------------------------------------------------- inner product

def test_cpt_inner_two_level_orthogonality():
    for alpha in (0.0, 0.3, math.pi / 4, math.pi / 3):
        frame = two_level_frame(alpha)
        psi1, psi2 = euclidean_eigvecs(alpha)
        assert abs(cpt_inner(frame, psi1, psi2)) < 1e-12
        # unit-2-norm vectors carry squared frame norm cos(alpha)
        assert cpt_inner(frame, psi1, psi1).real == pytest.approx(math.cos(alpha), abs=1e-12)
        assert cpt_inner(frame, psi2, psi2).real == pytest.approx(math.cos(alpha), abs=1e-12)


def test_cpt_inner_conjugate_symmetric_and_positive(rng):
    for dim in (2, 3, 4, 5):
        C, P, K = random_frame_matrices(rng, dim)
        frame = validate_frames(C, P, AntilinearOperator(K))
        for _ in range(20):
            x = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            y = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            ip = cpt_inner(frame, x, y)
            assert abs(ip - np.conj(cpt_inner(frame, y, x))) <= 1e-12 * max(1.0, abs(ip))
            assert cpt_inner(frame, x, x).real > 0.0
        assert cpt_norm(frame, np.zeros(dim)) == 0.0


def test_cpt_inner_dim_mismatch():
    frame = two_level_frame(0.4)
    with pytest.raises(ValueError):
        cpt_inner(frame, np.ones(3), np.ones(2))


# ------------------------------------------------------------------- adjoint

def test_cpt_adjoint_of_metric_is_metric():
    frame = two_level_frame(math.pi / 3)
    assert np.allclose(cpt_adjoint(frame, frame.metric), frame.metric, atol=1e-12)


def test_cpt_adjoint_reduces_to_dagger_for_identity_metric(rng):
    frame = validate_frames(SWAP, SWAP, conjugation())
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.allclose(cpt_adjoint(frame, A), A.conj().T)


def test_two_level_hamiltonian_is_metric_hermitian():
    for s in (0.5, 1.0, 2.5):
        for alpha in (0.0, 0.4, math.pi / 3):
            H, C, P = two_level_matrices(s, alpha)
            frame = validate_frames(C, P, conjugation())
            assert np.allclose(cpt_adjoint(frame, H), H, atol=1e-12)
            assert operator_norm(H.conj().T @ frame.metric - frame.metric @ H) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(dim=st.integers(2, 6), seed=st.integers(0, 2**32 - 1))
def test_cpt_adjoint_involution_and_defining_property(dim, seed):
    gen = np.random.default_rng(seed)
    C, P, K = random_frame_matrices(gen, dim)
    frame = validate_frames(C, P, AntilinearOperator(K))
    A = gen.normal(size=(dim, dim)) + 1j * gen.normal(size=(dim, dim))
    Astar = cpt_adjoint(frame, A)
    assert operator_norm(cpt_adjoint(frame, Astar) - A) <= 1e-10 * max(1.0, operator_norm(A))
    for _ in range(5):
        x = gen.normal(size=dim) + 1j * gen.normal(size=dim)
        y = gen.normal(size=dim) + 1j * gen.normal(size=dim)
        lhs = cpt_inner(frame, A @ x, y)
        rhs = cpt_inner(frame, x, Astar @ y)
        bound = 1e-10 * operator_norm(A) * np.linalg.norm(x) * np.linalg.norm(y)
        assert abs(lhs - rhs) <= max(bound, 1e-12)


# ------------------------------------------------------------ symmetry report

def test_symmetry_report_metric_commuting_hamiltonian():
    # H = a I + b C commutes with C and is PT-symmetric for real a, b
    frame = two_level_frame(math.pi / 3)
    for a, b in ((0.0, 1.0), (2.0, -0.7), (1.5, 0.25)):
        H = a * np.eye(2) + b * frame.c
        rep = symmetry_report(frame, H)
        assert rep.pt_symmetric and rep.cpt_hermitian and rep.unbroken
        assert rep.eigen_realness <= 1e-10


def test_symmetry_report_two_level_hamiltonian():
    H, C, P = two_level_matrices(1.3, 0.9)
    frame = validate_frames(C, P, conjugation())
    rep = symmetry_report(frame, H)
    assert rep.pt_symmetric and rep.cpt_hermitian and rep.unbroken
    assert rep.eigen_realness <= 1e-12


def test_symmetry_report_broken_pair():
    # H = diag(i, -i) commutes with PT but its eigenvectors swap under PT
    frame = validate_frames(SWAP, SWAP, conjugation())
    H = np.diag([1j, -1j])
    rep = symmetry_report(frame, H)
    assert rep.pt_symmetric
    assert not rep.unbroken
    assert rep.eigen_realness == pytest.approx(1.0)


def test_symmetry_report_degenerate_identity(caplog):
    import logging

    frame = validate_frames(SWAP, SWAP, conjugation())
    with caplog.at_level(logging.INFO, logger="ptdyn.frames"):
        rep = symmetry_report(frame, np.eye(2))
    assert rep.pt_symmetric and rep.unbroken
    assert any("degenerate" in rec.message for rec in caplog.records)


def test_symmetry_report_generic_matrix_fails():
    frame = validate_frames(SWAP, SWAP, conjugation())
    H = np.array([[1.0, 2.0j], [0.0, 3.0]])
    rep = symmetry_report(frame, H)
    assert not rep.pt_symmetric


# ----------------------------------------------------- norm equivalence bounds

def test_norm_equivalence_identity():
    frame = validate_frames(SWAP, SWAP, conjugation())
    assert norm_equivalence_bounds(frame) == pytest.approx((1.0, 1.0))


def test_norm_equivalence_two_level():
    frame = two_level_frame(math.pi / 3)
    lower, upper = norm_equivalence_bounds(frame)
    assert lower == pytest.approx((2.0 + SQRT3) ** -0.5, abs=1e-12)
    assert upper == pytest.approx((2.0 + SQRT3) ** 0.5, abs=1e-12)


def test_norm_equivalence_sandwich_property(rng):
    for dim in (2, 3, 5):
        C, P, K = random_frame_matrices(rng, dim)
        frame = validate_frames(C, P, AntilinearOperator(K))
        lower, upper = norm_equivalence_bounds(frame)
        for _ in range(200):
            x = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            n2 = np.linalg.norm(x)
            nf = cpt_norm(frame, x)
            assert lower * n2 <= nf + 1e-12
            assert nf <= upper * n2 + 1e-12


# ----------------------------------------------------------------- FrameFamily

def test_frame_family_validates_pointwise():
    def C_of_t(t):
        return two_level_matrices(1.0, 0.2 + 0.1 * t)[1]

    fam = FrameFamily(OperatorFamily(0.0, 1.0, C_of_t), SWAP, conjugation())
    frame = fam.frame_at(0.5)
    assert np.allclose(frame.metric, fam.metric_at(0.5))
    # a frame family whose C stops being an involution must fail loudly
    bad = FrameFamily(OperatorFamily(0.0, 1.0, lambda t: (1 + t) * SWAP), SWAP, conjugation())
    with pytest.raises(FrameAxiomError):
        bad.frame_at(0.5)


def test_two_level_c_eigenvectors():
    # C psi1 = -psi1 and C psi2 = +psi2 pointwise
    for alpha in (0.1, 0.7, math.pi / 3):
        frame = two_level_frame(alpha)
        psi1, psi2 = euclidean_eigvecs(alpha)
        assert np.linalg.norm(frame.c @ psi1 + psi1) <= 1e-12
        assert np.linalg.norm(frame.c @ psi2 - psi2) <= 1e-12
