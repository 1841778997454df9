"""CPT frames: validated (C, P, T) triples and the inner product they induce.

A PT pair needs P^2 = T^2 = I and PT = TP, with T antilinear. Adding C with
C^2 = I, CPT = TPC and a positive-definite PC turns the triple into a frame
whose metric PC defines the physical inner product (x|y) = <x|PC y>.
Operators are then classified against that structure: PT-symmetric,
Hermitian with respect to the metric, and unbroken (real spectrum with
PT-invariant eigenspaces).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import linalg
from .linalg import AntilinearOperator, OperatorFamily, as_operator, as_state

__all__ = [
    "FrameAxiomError",
    "CPTFrame",
    "FrameFamily",
    "validate_frames",
    "cpt_inner",
    "cpt_norm",
    "cpt_adjoint",
    "SymmetryReport",
    "symmetry_report",
    "norm_equivalence_bounds",
]

logger = logging.getLogger(__name__)

DEFAULT_FRAME_TOL = 1e-10


class FrameAxiomError(ValueError):
    """A frame axiom failed validation; names the axiom and its residual."""

    def __init__(self, axiom: str, detail: str):
        self.axiom = axiom
        super().__init__(f"frame axiom '{axiom}' violated: {detail}")


@dataclass(frozen=True)
class CPTFrame:
    """Validated (C, P, T) triple with cached metric data.

    Construct via :func:`validate_frames`; the caches (metric PC, its
    Hermitian square root and inverse, its spectrum) are filled there.
    ``residuals`` records the per-axiom validation residual norms.
    """

    c: np.ndarray
    p: np.ndarray
    t: AntilinearOperator
    metric: np.ndarray
    metric_sqrt: np.ndarray
    metric_inv: np.ndarray
    metric_eigenvalues: np.ndarray
    residuals: dict = field(repr=False)
    tol: float = DEFAULT_FRAME_TOL

    @property
    def dim(self) -> int:
        return self.p.shape[0]


def _check(residuals: dict, axiom: str, resid: float, scale: float, tol: float):
    residuals[axiom] = resid
    if resid > tol * max(scale, 1.0):
        raise FrameAxiomError(axiom, f"residual {resid:.3e} (tolerance {tol:.1e}, scale {scale:.3g})")


def validate_frames(C, P, T: AntilinearOperator, tol: float = DEFAULT_FRAME_TOL) -> CPTFrame:
    """Check every frame axiom and return the frame with caches populated.

    Axioms checked, each with its own named :class:`FrameAxiomError`:
    P^2 = I, T^2 = I, PT = TP, C^2 = I, CPT = TPC, metric Hermitian,
    metric positive definite. Residuals are kept on the returned frame.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    C = as_operator(C, "C")
    P = as_operator(P, "P")
    K = T.conj_matrix
    n = P.shape[0]
    if C.shape[0] != n or K.shape[0] != n:
        raise ValueError(f"dimension mismatch: C {C.shape}, P {P.shape}, T {K.shape}")
    eye = np.eye(n)
    residuals: dict = {}
    norm = linalg.operator_norm
    nC, nP, nK = norm(C), norm(P), norm(K)

    _check(residuals, "P^2 = I", norm(P @ P - eye), nP * nP, tol)
    _check(residuals, "T^2 = I", norm(T.squared() - eye), nK * nK, tol)
    _check(residuals, "PT = TP", norm(P @ K - K @ np.conj(P)), nP * nK, tol)
    _check(residuals, "C^2 = I", norm(C @ C - eye), nC * nC, tol)
    _check(residuals, "CPT = TPC", norm(C @ P @ K - K @ np.conj(P) @ np.conj(C)), nC * nP * nK, tol)

    metric = P @ C
    nM = norm(metric)
    _check(residuals, "metric Hermitian", norm(metric - metric.conj().T), nM, tol)

    herm = 0.5 * (metric + metric.conj().T)
    eigs = np.linalg.eigvalsh(herm)
    residuals["metric min eigenvalue"] = float(eigs[0])
    if eigs[0] <= tol * nM:
        raise FrameAxiomError(
            "metric positive definite",
            f"minimum eigenvalue of PC is {eigs[0]:.3e} (metric norm {nM:.3g})",
        )

    metric_sqrt = linalg.hermitian_sqrt(herm, tol=tol)
    metric_inv = np.linalg.inv(metric)
    return CPTFrame(
        c=C, p=P, t=T,
        metric=metric,
        metric_sqrt=metric_sqrt,
        metric_inv=metric_inv,
        metric_eigenvalues=eigs,
        residuals=residuals,
        tol=tol,
    )


def cpt_inner(frame: CPTFrame, x, y) -> complex:
    """Frame inner product (x|y) = <x|PC y>, conjugate-linear in x."""
    x = as_state(x)
    y = as_state(y)
    if x.shape[0] != frame.dim or y.shape[0] != frame.dim:
        raise ValueError(f"vector dims {x.shape[0]}, {y.shape[0]} do not match frame dim {frame.dim}")
    return complex(np.vdot(x, frame.metric @ y))


def cpt_norm(frame: CPTFrame, x) -> float:
    """Norm induced by the frame inner product."""
    val = cpt_inner(frame, x, x).real
    return math.sqrt(max(val, 0.0))


def cpt_adjoint(frame: CPTFrame, A) -> np.ndarray:
    """Adjoint with respect to the frame inner product: (PC)^-1 A^dag (PC)."""
    A = as_operator(A)
    if A.shape[0] != frame.dim:
        raise ValueError(f"operator dim {A.shape[0]} does not match frame dim {frame.dim}")
    return frame.metric_inv @ A.conj().T @ frame.metric


@dataclass(frozen=True)
class SymmetryReport:
    """Symmetry classification of an operator against a frame.

    ``unbroken`` means PT-symmetric with every eigenspace invariant under
    the PT map, which forces a real spectrum; ``eigen_realness`` is the
    largest |Im| over the eigenvalues.
    """

    pt_symmetric: bool
    cpt_hermitian: bool
    unbroken: bool
    eigen_realness: float
    pt_residual: float
    cpt_residual: float


def _group_eigenpairs(pairs, tol, scale):
    """Partition eigenpairs into clusters of eigenvalues within tol*scale."""
    groups = []
    for lam, v in pairs:
        if groups and abs(lam - groups[-1][0][-1]) <= tol * max(scale, 1.0):
            groups[-1][0].append(lam)
            groups[-1][1].append(v)
        else:
            groups.append(([lam], [v]))
    return groups


def symmetry_report(frame: CPTFrame, H, tol: float = DEFAULT_FRAME_TOL) -> SymmetryReport:
    """Classify H: PT-symmetric, metric-Hermitian, unbroken.

    PT symmetry is commutation with the antilinear PT map; metric
    Hermiticity is H^dag PC = PC H. The unbroken test asks each eigenvector
    to be mapped to a unit-modulus multiple of itself by PT; eigenvalues
    clustered within tol are treated as one eigenspace, tested for
    PT-invariance as a subspace (individual vectors are gauge-ambiguous
    there), and the fallback is logged.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    H = as_operator(H, "H")
    if H.shape[0] != frame.dim:
        raise ValueError(f"operator dim {H.shape[0]} does not match frame dim {frame.dim}")
    norm = linalg.operator_norm
    nH = norm(H)
    pt_map = frame.p @ frame.t.conj_matrix  # x -> pt_map conj(x)

    pt_residual = norm(H @ pt_map - pt_map @ np.conj(H))
    pt_symmetric = pt_residual <= tol * max(nH, 1e-300)

    cpt_residual = norm(H.conj().T @ frame.metric - frame.metric @ H)
    cpt_hermitian = cpt_residual <= tol * max(nH * norm(frame.metric), 1e-300)

    pairs = linalg.eigenpairs(H, tol=max(tol, linalg.DEFAULT_EIGEN_TOL))
    eigen_realness = max(abs(lam.imag) for lam, _ in pairs)

    unbroken = pt_symmetric
    if pt_symmetric:
        for lams, vecs in _group_eigenpairs(pairs, tol, nH):
            if len(lams) == 1:
                v = vecs[0]
                w = pt_map @ np.conj(v)
                mu = np.vdot(v, w)  # v is unit norm
                if np.linalg.norm(w - mu * v) > tol * max(1.0, norm(pt_map)) or abs(abs(mu) - 1.0) > tol * 10:
                    unbroken = False
            else:
                logger.info(
                    "degenerate eigenvalue cluster at %s: testing PT-invariance of the eigenspace",
                    lams[0],
                )
                Q, _ = np.linalg.qr(np.column_stack(vecs))
                proj = Q @ Q.conj().T
                for q in Q.T:
                    w = pt_map @ np.conj(q)
                    if np.linalg.norm(w - proj @ w) > tol * max(1.0, norm(pt_map)):
                        unbroken = False
    return SymmetryReport(
        pt_symmetric=pt_symmetric,
        cpt_hermitian=cpt_hermitian,
        unbroken=unbroken,
        eigen_realness=float(eigen_realness),
        pt_residual=float(pt_residual),
        cpt_residual=float(cpt_residual),
    )


def norm_equivalence_bounds(frame: CPTFrame) -> tuple[float, float]:
    """Constants (lower, upper) sandwiching the frame norm by the 2-norm.

    lower = ||CP||^(-1/2) and upper = ||PC||^(1/2); for every x,
    lower*||x|| <= ||x||_frame <= upper*||x||.
    """
    upper = math.sqrt(linalg.operator_norm(frame.metric))
    lower = 1.0 / math.sqrt(linalg.operator_norm(frame.c @ frame.p))
    return lower, upper


@dataclass(frozen=True)
class FrameFamily:
    """Frame-valued function of time: fixed P and T, time-varying C(t)."""

    c_family: OperatorFamily
    p: np.ndarray
    t: AntilinearOperator
    tol: float = DEFAULT_FRAME_TOL

    def __post_init__(self):
        object.__setattr__(self, "p", as_operator(self.p, "P"))

    @property
    def dim(self) -> int:
        return self.p.shape[0]

    def c_at(self, t: float) -> np.ndarray:
        return self.c_family(t)

    def cdot_at(self, t: float, h: Optional[float] = None) -> np.ndarray:
        return linalg.family_derivative(self.c_family, t, h)

    def metric_at(self, t: float) -> np.ndarray:
        """PC(t) without running full frame validation."""
        return self.p @ self.c_family(t)

    def frame_at(self, t: float) -> CPTFrame:
        """Validated frame at time t (axioms re-checked, fresh caches)."""
        return validate_frames(self.c_family(t), self.p, self.t, tol=self.tol)

    @classmethod
    def constant(cls, frame: CPTFrame) -> "FrameFamily":
        return cls(OperatorFamily.constant(frame.c), frame.p, frame.t, tol=frame.tol)
