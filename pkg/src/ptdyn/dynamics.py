"""Time evolution under a time-dependent metric.

Three evolution equations are supported, differing in their generator:

* ``SCHRODINGER``   — i hbar dphi/dt = H(t) phi
* ``AUGMENTED``     — i hbar dphi/dt = (H(t) + i G(t)) phi, user-supplied G
* ``COMPENSATED``   — i hbar dphi/dt = (H(t) - (i hbar/2) C(t) Cdot(t)) phi

The compensated generator cancels the norm drift caused by a time-varying
metric, making the evolution unitary between the instantaneous inner-product
spaces. Integration is classical fixed-step fourth-order Runge-Kutta; the
trajectory records the frame norm and the drift-rate diagnostic at every
grid point.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import linalg
from .frames import FrameFamily, cpt_norm
from .linalg import OperatorFamily, as_state

__all__ = [
    "Equation",
    "IntegrationAbort",
    "EvolutionProblem",
    "OperatorFamily",
    "Trajectory",
    "effective_generator",
    "norm_drift_rate",
    "evolve_state",
    "evolve_propagator",
]

logger = logging.getLogger(__name__)

# Default substep count per grid interval: ceil(100 * ||generator|| * dt).
SUBSTEP_DENSITY = 100.0
# Warn when a single Runge-Kutta substep is coarser than this.
STEP_NORM_WARN = 0.5


class Equation(Enum):
    SCHRODINGER = "schrodinger"
    AUGMENTED = "augmented"
    COMPENSATED = "compensated"


class IntegrationAbort(RuntimeError):
    """State became non-finite; carries the last time that was still good."""

    def __init__(self, message: str, last_good_t: float):
        super().__init__(message)
        self.last_good_t = last_good_t


@dataclass(frozen=True)
class EvolutionProblem:
    """One evolution run: generator ingredients, grid, and initial state.

    ``correction`` is the G family of the AUGMENTED equation and must be
    present exactly for that equation. ``substeps``, when given, fixes the
    Runge-Kutta substep count per grid interval; otherwise the count scales
    with the local generator norm.
    """

    hamiltonian: OperatorFamily
    frame_family: FrameFamily
    grid: np.ndarray
    equation: Equation
    initial_state: np.ndarray
    correction: Optional[OperatorFamily] = None
    hbar: float = 1.0
    substeps: Optional[int] = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid must contain at least two time points")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "initial_state", as_state(self.initial_state, "initial_state"))
        if self.initial_state.shape[0] != self.frame_family.dim:
            raise ValueError("initial_state dimension does not match the frame")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        if self.equation is Equation.AUGMENTED and self.correction is None:
            raise ValueError("AUGMENTED equation requires a correction family G")
        if self.equation is not Equation.AUGMENTED and self.correction is not None:
            raise ValueError(f"{self.equation.name} equation forbids a correction family")
        if self.substeps is not None and self.substeps < 1:
            raise ValueError("substeps must be >= 1")


@dataclass(frozen=True)
class Trajectory:
    """Per-grid-point record of an integrated state evolution."""

    times: np.ndarray
    states: np.ndarray      # (n_t, dim)
    cpt_norms: np.ndarray   # (n_t,)
    drift_rates: np.ndarray  # (n_t,)
    diagnostics: dict = field(repr=False, default_factory=dict)

    @property
    def max_norm_drift(self) -> float:
        """Largest deviation of the frame norm from its initial value."""
        return float(np.max(np.abs(self.cpt_norms - self.cpt_norms[0])))


def effective_generator(problem: EvolutionProblem, t: float) -> np.ndarray:
    """The matrix on the right-hand side of i hbar dphi/dt = (...) phi."""
    H = problem.hamiltonian(t)
    if problem.equation is Equation.SCHRODINGER:
        return H
    if problem.equation is Equation.AUGMENTED:
        return H + 1j * problem.correction(t)
    C = problem.frame_family.c_at(t)
    Cdot = problem.frame_family.cdot_at(t)
    return H - 0.5j * problem.hbar * (C @ Cdot)


def norm_drift_rate(problem: EvolutionProblem, phi: np.ndarray, t: float) -> float:
    """d/dt of the squared frame norm along a solution at (phi, t).

    For the Schrodinger equation this is <phi|P Cdot phi>; the augmented
    equation adds (2/hbar) PC G. For the compensated equation the quantity
    vanishes identically and the computed value is returned as a residual
    health check. The value is analytically real; a notable imaginary part
    is logged.
    """
    phi = as_state(phi)
    fam = problem.frame_family
    op = fam.p @ fam.cdot_at(t)
    if problem.equation is Equation.AUGMENTED:
        op = op + (2.0 / problem.hbar) * fam.metric_at(t) @ problem.correction(t)
    elif problem.equation is Equation.COMPENSATED:
        C = fam.c_at(t)
        op = op - fam.metric_at(t) @ C @ fam.cdot_at(t)
    val = complex(np.vdot(phi, op @ phi))
    scale = max(abs(val), 1.0)
    if abs(val.imag) > 1e-10 * scale:
        logger.debug("drift rate at t=%g has imaginary residual %.3e", t, val.imag)
    return val.real


def _rk4_run(problem: EvolutionProblem, y0: np.ndarray):
    """Fixed-step RK4 over the grid; returns (values at grid points, substeps).

    The right-hand side is y' = -(i/hbar) * generator(t) y, with the
    generator re-evaluated at every substep node (no caching across time).
    Works unchanged for state vectors and for propagator matrices.
    """
    hbar = problem.hbar
    grid = problem.grid
    y = y0.astype(complex)
    values = [y]
    substeps_used = []

    def f(t, v):
        return (-1j / hbar) * (effective_generator(problem, t) @ v)

    for k in range(grid.size - 1):
        t0, t1 = grid[k], grid[k + 1]
        dt = t1 - t0
        gnorm = linalg.operator_norm(effective_generator(problem, t0))
        if problem.substeps is not None:
            nsub = problem.substeps
        else:
            nsub = max(1, int(math.ceil(SUBSTEP_DENSITY * gnorm * dt)))
        h = dt / nsub
        if gnorm * h > STEP_NORM_WARN:
            logger.warning(
                "coarse step at t=%g: ||generator||*h = %.3g > %.2g",
                t0, gnorm * h, STEP_NORM_WARN,
            )
        substeps_used.append(nsub)

        with np.errstate(over="ignore", invalid="ignore"):
            for j in range(nsub):
                t = t0 + j * h
                k1 = f(t, y)
                k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
                k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
                k4 = f(t + h, y + h * k3)
                y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationAbort(
                f"state became non-finite between t={t0} and t={t1}", last_good_t=t0
            )
        values.append(y)
    return values, substeps_used


def evolve_state(problem: EvolutionProblem) -> Trajectory:
    """Integrate the configured equation for the problem's initial state.

    The frame is validated at every grid point, where the frame norm and
    the drift-rate diagnostic are recorded. Non-finite states abort with
    the last good time.
    """
    values, substeps = _rk4_run(problem, problem.initial_state)
    norms, drifts = [], []
    for t, y in zip(problem.grid, values):
        frame = problem.frame_family.frame_at(t)
        norms.append(cpt_norm(frame, y))
        drifts.append(norm_drift_rate(problem, y, t))
    return Trajectory(
        times=problem.grid.copy(),
        states=np.array(values),
        cpt_norms=np.array(norms),
        drift_rates=np.array(drifts),
        diagnostics={"substeps": substeps},
    )


def evolve_propagator(problem: EvolutionProblem) -> list[tuple[float, np.ndarray]]:
    """Integrate the propagator: i hbar dU/dt = generator(t) U, U(0) = I.

    Only defined for the compensated equation, whose propagator is unitary
    as a map between the initial and instantaneous inner-product spaces
    (U^dag PC(t) U = PC(0)); applying it to any initial state reproduces
    :func:`evolve_state` for that state.
    """
    if problem.equation is not Equation.COMPENSATED:
        raise ValueError("propagator evolution is defined for the COMPENSATED equation")
    dim = problem.frame_family.dim
    values, _ = _rk4_run(problem, np.eye(dim, dtype=complex))
    return list(zip(problem.grid.tolist(), values))
