"""Instantaneous eigenframes and the adiabatic approximation bound.

An eigenframe tracks the spectral data of H(t) over a time grid: real
eigenvalues, eigenvectors normalized to unit frame norm, labels matched
between adjacent grid points by maximum overlap, and phases chosen for
continuity. On top of it sit the dynamical phase of a level, the
cross-level coupling residual that controls exact solvability, the
operator-valued phase with its commutator diagnostic, the adiabatic bound

    V(T) = int_0^T ||(PC)^(1/2)|| (||dpsi_m/dt|| + 1/2 ||C Cdot psi_m||) dt,

and the fidelity loss 1 - |(psi_m(t)|phi(t))_t| of an integrated state
against the tracked level. When V(T) < eps the loss stays below eps.

All time integrals are composite trapezoid on the grid; eigenvector time
derivatives are second-order finite differences on the same grid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import linear_sum_assignment

from . import linalg
from .dynamics import Trajectory
from .frames import FrameFamily
from .linalg import OperatorFamily

__all__ = [
    "BrokenSymmetryError",
    "LevelTrackingError",
    "EigenFrame",
    "AdiabaticReport",
    "build_eigenframe",
    "dynamical_phase",
    "level_coupling_residual",
    "operator_phase",
    "adiabatic_bound",
    "adiabatic_bound_profile",
    "fidelity_loss",
    "gauge_fix",
    "build_report",
]

logger = logging.getLogger(__name__)

DEFAULT_REALNESS_TOL = 1e-10
DEFAULT_ORTHO_TOL = 1e-10
OVERLAP_THRESHOLD = 0.9


class BrokenSymmetryError(ValueError):
    """An eigenvalue acquired an imaginary part beyond tolerance."""


class LevelTrackingError(RuntimeError):
    """Level labels could not be continued between adjacent grid points."""


@dataclass(frozen=True)
class EigenFrame:
    """Tracked spectral data of an operator family on a time grid.

    ``states[k, n]`` is the n-th eigenvector at ``times[k]``, unit-normalized
    and orthogonal in the frame inner product at that time, with phases
    continuous along the grid. ``metrics[k]`` caches PC(t_k).
    """

    times: np.ndarray     # (n_t,)
    energies: np.ndarray  # (n_t, dim) real
    states: np.ndarray    # (n_t, dim, dim) complex
    metrics: np.ndarray   # (n_t, dim, dim) complex
    diagnostics: dict = field(repr=False, default_factory=dict)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def state_derivatives(self, level: int) -> np.ndarray:
        """d/dt of the tracked level's eigenvector, second-order differences."""
        order = 2 if self.times.size >= 3 else 1
        return np.gradient(self.states[:, level, :], self.times, axis=0, edge_order=order)


def build_eigenframe(
    hamiltonian: OperatorFamily,
    frame_family: FrameFamily,
    grid,
    realness_tol: float = DEFAULT_REALNESS_TOL,
    ortho_tol: float = DEFAULT_ORTHO_TOL,
    overlap_threshold: float = OVERLAP_THRESHOLD,
) -> EigenFrame:
    """Track the instantaneous eigenframe of H(t) along the grid.

    At each point the eigenpairs are computed, checked for real eigenvalues
    (a complex one beyond ``realness_tol`` means broken PT symmetry at that
    time), rescaled to unit frame norm, matched to the previous point's
    labels by maximum-overlap assignment, and rephased so the overlap with
    the predecessor is real positive. An assignment whose winning overlap
    falls below ``overlap_threshold`` aborts, naming the colliding levels
    (level crossings are out of scope and must fail loudly). Orthonormality
    of the resulting basis in the frame inner product is verified to
    ``ortho_tol`` at every point.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be a strictly increasing array of at least two times")

    n_t = grid.size
    dim = frame_family.dim
    energies = np.empty((n_t, dim))
    states = np.empty((n_t, dim, dim), dtype=complex)
    metrics = np.empty((n_t, dim, dim), dtype=complex)
    min_overlap = 1.0

    for k, t in enumerate(grid):
        H = hamiltonian(t)
        frame = frame_family.frame_at(t)
        metric = frame.metric
        metrics[k] = metric
        pairs = linalg.eigenpairs(H)
        scale = max(1.0, linalg.operator_norm(H))
        lams = np.array([lam for lam, _ in pairs])
        if np.max(np.abs(lams.imag)) > realness_tol * scale:
            raise BrokenSymmetryError(
                f"broken PT symmetry at t={t}: eigenvalue {lams[np.argmax(np.abs(lams.imag))]} "
                f"has |Im| > {realness_tol:.1e}*scale"
            )
        vecs = np.array([v for _, v in pairs])  # rows are eigenvectors
        # unit frame norm (the metric is positive definite, so this is always defined)
        for n in range(dim):
            nrm2 = np.vdot(vecs[n], metric @ vecs[n]).real
            vecs[n] = vecs[n] / np.sqrt(nrm2)

        if k == 0:
            energies[0] = lams.real
            states[0] = vecs
        else:
            prev = states[k - 1]
            # overlap[i, j] = (new_i | prev_j) at the current time
            overlap = vecs.conj() @ metric @ prev.T
            rows, cols = linear_sum_assignment(-np.abs(overlap))
            perm = np.empty(dim, dtype=int)   # perm[label] = index into new pairs
            for i, j in zip(rows, cols):
                perm[j] = i
            chosen = np.abs(overlap[perm, np.arange(dim)])
            min_overlap = min(min_overlap, float(chosen.min()))
            if np.any(chosen < overlap_threshold):
                bad = np.nonzero(chosen < overlap_threshold)[0].tolist()
                raise LevelTrackingError(
                    f"level continuity lost between t={grid[k-1]} and t={t}: "
                    f"levels {bad} have overlap {chosen[bad]} < {overlap_threshold}"
                )
            for label in range(dim):
                v = vecs[perm[label]]
                g = complex(np.vdot(v, metric @ prev[label]))
                if abs(g) > 0:
                    v = v * (g / abs(g))
                states[k, label] = v
                energies[k, label] = lams.real[perm[label]]

        gram = states[k].conj() @ metric @ states[k].T
        ortho_resid = float(np.max(np.abs(gram - np.eye(dim))))
        if ortho_resid > ortho_tol:
            raise LevelTrackingError(
                f"eigenvectors at t={t} are not orthonormal in the frame inner product "
                f"(residual {ortho_resid:.3e}); levels may be colliding"
            )

    return EigenFrame(
        times=grid,
        energies=energies,
        states=states,
        metrics=metrics,
        diagnostics={"min_overlap": min_overlap},
    )


def _connection(eframe: EigenFrame, bra_level: int, ket_level: int) -> np.ndarray:
    """Series <psi_bra(t)| PC(t) dpsi_ket/dt (t)> over the grid."""
    dket = eframe.state_derivatives(ket_level)
    bra = eframe.states[:, bra_level, :]
    return np.einsum("ki,kij,kj->k", bra.conj(), eframe.metrics, dket)


def dynamical_phase(eframe: EigenFrame, level: int, hbar: float = 1.0) -> np.ndarray:
    """Phase theta(t) accumulated by a tracked level.

    theta(t) = -int_0^t (E_m(s)/hbar + Im <psi_m|PC dpsi_m/ds>) ds, by
    composite trapezoid; theta at the first grid point is 0.
    """
    integrand = eframe.energies[:, level] / hbar + np.imag(_connection(eframe, level, level))
    return -cumulative_trapezoid(integrand, eframe.times, initial=0.0)


def level_coupling_residual(
    eframe: EigenFrame, frame_family: FrameFamily, n: int, m: int
) -> np.ndarray:
    """Per-grid-point residual of the cross-level solvability condition.

    For n != m, an eigenstate-with-phase solves the compensated equation
    exactly only when <psi_n|PC dpsi_m/dt> = -1/2 <psi_n|P Cdot psi_m>;
    this returns |LHS - RHS| along the grid.
    """
    if n == m:
        raise ValueError("coupling residual is defined for distinct levels (n != m)")
    lhs = _connection(eframe, n, m)
    p = frame_family.p
    rhs = np.empty_like(lhs)
    for k, t in enumerate(eframe.times):
        op = p @ frame_family.cdot_at(t)
        rhs[k] = -0.5 * np.vdot(eframe.states[k, n], op @ eframe.states[k, m])
    return np.abs(lhs - rhs)


def operator_phase(
    hamiltonian: OperatorFamily,
    frame_family: FrameFamily,
    eframe: EigenFrame,
    level: int,
    hbar: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Operator-valued phase A(t) for a level, plus commutator diagnostics.

    A(t) = int_0^t ((H(s) - E_m(s) I)/hbar + (i/2) C(s) Cdot(s)) ds by
    cumulative trapezoid, A(0) = 0. Returns (A series, ||[A(t), H(t)]||
    series); the rotation exp(iA) maps level-m solutions of the plain
    Schrodinger equation to solutions of the compensated equation exactly
    when the commutator vanishes.
    """
    n_t = eframe.times.size
    dim = eframe.dim
    eye = np.eye(dim)
    integrand = np.empty((n_t, dim, dim), dtype=complex)
    hams = []
    for k, t in enumerate(eframe.times):
        H = hamiltonian(t)
        hams.append(H)
        C = frame_family.c_at(t)
        Cdot = frame_family.cdot_at(t)
        integrand[k] = (H - eframe.energies[k, level] * eye) / hbar + 0.5j * (C @ Cdot)
    A = cumulative_trapezoid(integrand, eframe.times, axis=0, initial=0.0)
    comm = np.array([
        linalg.operator_norm(A[k] @ hams[k] - hams[k] @ A[k]) for k in range(n_t)
    ])
    return A, comm


def adiabatic_bound_profile(
    eframe: EigenFrame, frame_family: FrameFamily, level: int
) -> np.ndarray:
    """Running value of the adiabatic bound integral V(t) along the grid.

    Integrand: ||(PC)^(1/2)|| * (||dpsi_m/dt|| + 1/2 ||C Cdot psi_m||), with
    the vector norms taken in the plain Euclidean norm. Nonnegative
    integrand, so the profile is nondecreasing.
    """
    dpsi = eframe.state_derivatives(level)
    integrand = np.empty(eframe.times.size)
    for k, t in enumerate(eframe.times):
        frame = frame_family.frame_at(t)
        prefactor = linalg.operator_norm(frame.metric_sqrt)
        C = frame_family.c_at(t)
        Cdot = frame_family.cdot_at(t)
        drag = 0.5 * np.linalg.norm(C @ Cdot @ eframe.states[k, level])
        integrand[k] = prefactor * (np.linalg.norm(dpsi[k]) + drag)
    return cumulative_trapezoid(integrand, eframe.times, initial=0.0)


def adiabatic_bound(eframe: EigenFrame, frame_family: FrameFamily, level: int) -> float:
    """V(T): the adiabatic bound integral over the whole grid."""
    return float(adiabatic_bound_profile(eframe, frame_family, level)[-1])


def fidelity_loss(trajectory: Trajectory, eframe: EigenFrame, level: int) -> np.ndarray:
    """1 - |(psi_m(t)|phi(t))_t| per grid point, in [0, 1].

    The trajectory must live on the eigenframe's grid and should start in
    the tracked level's (unit frame norm) eigenvector for the loss to start
    at zero.
    """
    if trajectory.times.shape != eframe.times.shape or not np.allclose(
        trajectory.times, eframe.times
    ):
        raise ValueError("trajectory and eigenframe are on different grids")
    overlaps = np.einsum(
        "ki,kij,kj->k", eframe.states[:, level, :].conj(), eframe.metrics, trajectory.states
    )
    return np.maximum(1.0 - np.abs(overlaps), 0.0)


def gauge_fix(eframe: EigenFrame, frame_family: FrameFamily) -> EigenFrame:
    """Rephase every level so its metric connection vanishes.

    Requires a constant C over the grid. Each level is multiplied by
    exp(-i int_0^t Im <psi_n|PC dpsi_n/ds> ds), after which
    <psi_n|PC dpsi_n/dt> = 0 pointwise (parallel-transport gauge) up to
    the differencing error of the grid.
    """
    c0 = frame_family.c_at(eframe.times[0])
    c_scale = max(1.0, linalg.operator_norm(c0))
    for t in eframe.times[1:]:
        if linalg.operator_norm(frame_family.c_at(t) - c0) > 1e-12 * c_scale:
            raise ValueError("gauge fixing requires a constant C over the grid")
    states = eframe.states.copy()
    for n in range(eframe.dim):
        conn = np.imag(_connection(eframe, n, n))
        phase = cumulative_trapezoid(conn, eframe.times, initial=0.0)
        states[:, n, :] = states[:, n, :] * np.exp(-1j * phase)[:, None]
    return EigenFrame(
        times=eframe.times,
        energies=eframe.energies,
        states=states,
        metrics=eframe.metrics,
        diagnostics=dict(eframe.diagnostics, gauge="parallel-transport"),
    )


@dataclass(frozen=True)
class AdiabaticReport:
    """Summary of an adiabatic run for one tracked level.

    ``bound_satisfied`` is the implication check: whenever the computed
    bound V(T) is below epsilon, the maximum fidelity loss must be too.
    """

    bound: float
    epsilon: float
    max_fidelity_loss: float
    bound_satisfied: bool
    theta: np.ndarray
    fidelity: np.ndarray
    coupling_residual: np.ndarray
    bound_profile: np.ndarray


def build_report(
    eframe: EigenFrame,
    frame_family: FrameFamily,
    trajectory: Trajectory,
    level: int,
    epsilon: float,
    hbar: float = 1.0,
) -> AdiabaticReport:
    """Assemble the per-level adiabatic report for an integrated run."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon out of (0,1)")
    profile = adiabatic_bound_profile(eframe, frame_family, level)
    loss = fidelity_loss(trajectory, eframe, level)
    theta = dynamical_phase(eframe, level, hbar=hbar)
    if eframe.dim > 1:
        coupling = np.max(
            [
                level_coupling_residual(eframe, frame_family, n, level)
                for n in range(eframe.dim)
                if n != level
            ],
            axis=0,
        )
    else:
        coupling = np.zeros_like(eframe.times)
    bound = float(profile[-1])
    max_loss = float(np.max(loss))
    satisfied = (bound >= epsilon) or (max_loss < epsilon)
    return AdiabaticReport(
        bound=bound,
        epsilon=epsilon,
        max_fidelity_loss=max_loss,
        bound_satisfied=satisfied,
        theta=theta,
        fidelity=loss,
        coupling_residual=coupling,
        bound_profile=profile,
    )
