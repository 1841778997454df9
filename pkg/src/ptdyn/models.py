"""Built-in scenarios with closed-form spectral data.

Two constructors are provided:

* :func:`build_two_level` — the 2x2 model with

      H(t) = [[s e^{i a}, s], [s, s e^{-i a}]],
      C(t) = (1/cos a) [[i sin a, 1], [1, -i sin a]],
      P    = [[0, 1], [1, 0]],   T = componentwise conjugation,

  where s(t) is an energy scale and a(t) an angle constrained to
  cos a(t) >= 1/2 so the metric PC stays positive definite. Eigenvalues
  are 0 and 2 s cos a with known eigenvectors.

* :func:`build_constant_metric` — H(t) = a(t) I + b(t) C over a fixed,
  validated frame; the metric never moves, so the plain Schrodinger
  evolution is already unitary in the frame norm.

Both expose analytic eigendata for use as test oracles against the numeric
paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import Equation, EvolutionProblem
from .frames import CPTFrame, FrameFamily
from .linalg import AntilinearOperator, OperatorFamily

__all__ = [
    "ScalarFunction",
    "TwoLevelModel",
    "ConstantMetricModel",
    "build_two_level",
    "build_constant_metric",
]

MIN_COS_ALPHA = 0.5


@dataclass(frozen=True)
class ScalarFunction:
    """Real-valued function of time with an optional analytic derivative."""

    fn: Callable[[float], float]
    dfn: Optional[Callable[[float], float]] = None
    spec: Optional[dict] = None

    def __call__(self, t: float) -> float:
        value = self.fn(t)
        if isinstance(value, complex) or np.iscomplexobj(value):
            raise ValueError(f"scalar function returned non-real value {value!r} at t={t}")
        return float(value)

    @classmethod
    def constant(cls, value: float) -> "ScalarFunction":
        value = float(value)
        return cls(lambda t: value, lambda t: 0.0, {"kind": "constant", "value": value})

    @classmethod
    def ramp(cls, start: float, stop: float, t_start: float, t_end: float) -> "ScalarFunction":
        """Linear ramp from start to stop over [t_start, t_end], clamped outside."""
        start, stop = float(start), float(stop)
        t_start, t_end = float(t_start), float(t_end)
        if not t_start < t_end:
            raise ValueError("ramp needs t_start < t_end")
        slope = (stop - start) / (t_end - t_start)

        def fn(t):
            if t <= t_start:
                return start
            if t >= t_end:
                return stop
            return start + slope * (t - t_start)

        def dfn(t):
            return slope if t_start < t < t_end else 0.0

        return cls(fn, dfn, {
            "kind": "ramp", "start": start, "stop": stop,
            "t_start": t_start, "t_end": t_end,
        })

    @classmethod
    def sinusoid(cls, amplitude: float, frequency: float, phase: float = 0.0,
                 offset: float = 0.0) -> "ScalarFunction":
        """offset + amplitude * sin(frequency * t + phase)."""
        amplitude, frequency = float(amplitude), float(frequency)
        phase, offset = float(phase), float(offset)
        return cls(
            lambda t: offset + amplitude * math.sin(frequency * t + phase),
            lambda t: amplitude * frequency * math.cos(frequency * t + phase),
            {"kind": "sinusoid", "amplitude": amplitude, "frequency": frequency,
             "phase": phase, "offset": offset},
        )

    @classmethod
    def from_samples(cls, times: Sequence[float], values: Sequence[float]) -> "ScalarFunction":
        """Piecewise-linear interpolant; derivatives fall back to differencing."""
        ts = np.asarray(times, dtype=float)
        vs = np.asarray(values)
        if np.iscomplexobj(vs) and np.any(vs.imag != 0):
            raise ValueError("sample values must be real")
        vs = vs.real.astype(float)
        if ts.ndim != 1 or ts.size < 2 or not np.all(np.diff(ts) > 0):
            raise ValueError("sample times must be strictly increasing, length >= 2")
        if vs.shape != ts.shape:
            raise ValueError("times and values must have the same length")
        return cls(
            lambda t: float(np.interp(t, ts, vs)),
            None,
            {"kind": "samples", "times": ts.tolist(), "values": vs.tolist()},
        )


def _two_level_matrices(s: float, a: float):
    H = np.array([[s * np.exp(1j * a), s], [s, s * np.exp(-1j * a)]], dtype=complex)
    C = (1.0 / math.cos(a)) * np.array(
        [[1j * math.sin(a), 1.0], [1.0, -1j * math.sin(a)]], dtype=complex
    )
    return H, C


@dataclass(frozen=True)
class TwoLevelModel:
    """The 2x2 scenario with energy scale s(t) and mixing angle alpha(t)."""

    s: ScalarFunction
    alpha: ScalarFunction
    t_start: float
    t_end: float
    frame_tol: float = 1e-10

    @property
    def p(self) -> np.ndarray:
        return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)

    @property
    def t_op(self) -> AntilinearOperator:
        return AntilinearOperator.conjugation(2)

    def hamiltonian(self) -> OperatorFamily:
        def evaluate(t):
            return _two_level_matrices(self.s(t), self.alpha(t))[0]

        derivative = None
        if self.s.dfn is not None and self.alpha.dfn is not None:
            def derivative(t):
                s, a = self.s(t), self.alpha(t)
                sd, ad = self.s.dfn(t), self.alpha.dfn(t)
                ea = np.exp(1j * a)
                return np.array([
                    [sd * ea + 1j * ad * s * ea, sd],
                    [sd, sd / ea - 1j * ad * s / ea],
                ], dtype=complex)

        return OperatorFamily(self.t_start, self.t_end, evaluate, derivative)

    def frame_family(self) -> FrameFamily:
        def evaluate(t):
            return _two_level_matrices(self.s(t), self.alpha(t))[1]

        derivative = None
        if self.alpha.dfn is not None:
            def derivative(t):
                # dC/d_alpha = tan(a) C + i diag(1, -1)
                a = self.alpha(t)
                C = _two_level_matrices(1.0, a)[1]
                return self.alpha.dfn(t) * (
                    math.tan(a) * C + 1j * np.diag([1.0, -1.0])
                )

        fam = OperatorFamily(self.t_start, self.t_end, evaluate, derivative)
        return FrameFamily(fam, self.p, self.t_op, tol=self.frame_tol)

    def frame_at(self, t: float) -> CPTFrame:
        return self.frame_family().frame_at(t)

    def energies(self, t: float) -> np.ndarray:
        """Closed-form eigenvalues, ascending for s > 0: (0, 2 s cos a)."""
        return np.array([0.0, 2.0 * self.s(t) * math.cos(self.alpha(t))])

    def eigenvector(self, level: int, t: float, normalization: str = "metric") -> np.ndarray:
        """Closed-form eigenvectors.

        ``normalization="euclidean"`` gives the unit-2-norm form
        (1/sqrt 2)(e^{-+ i a/2}, -+ e^{+- i a/2}); its squared frame norm is
        cos a, so ``"metric"`` divides by sqrt(cos a) to make the pair
        orthonormal in the frame inner product.
        """
        a = self.alpha(t)
        if level == 0:
            v = np.array([np.exp(-0.5j * a), -np.exp(0.5j * a)]) / math.sqrt(2.0)
        elif level == 1:
            v = np.array([np.exp(0.5j * a), np.exp(-0.5j * a)]) / math.sqrt(2.0)
        else:
            raise ValueError(f"level must be 0 or 1, got {level}")
        if normalization == "metric":
            return v / math.sqrt(math.cos(a))
        if normalization == "euclidean":
            return v
        raise ValueError(f"unknown normalization {normalization!r}")

    def problem(self, grid, equation: Equation, initial_state,
                hbar: float = 1.0, substeps: Optional[int] = None,
                correction: Optional[OperatorFamily] = None) -> EvolutionProblem:
        return EvolutionProblem(
            hamiltonian=self.hamiltonian(),
            frame_family=self.frame_family(),
            grid=grid,
            equation=equation,
            initial_state=initial_state,
            correction=correction,
            hbar=hbar,
            substeps=substeps,
        )


def build_two_level(s: ScalarFunction, alpha: ScalarFunction, grid,
                    frame_tol: float = 1e-10) -> TwoLevelModel:
    """Construct and validate the two-level model on a grid.

    Rejects any grid point where cos alpha(t) < 1/2 (the metric would lose
    positive definiteness headroom), naming the offending time. The frames
    are validated at every grid point.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be a strictly increasing array of at least two times")
    for t in grid:
        c = math.cos(alpha(t))
        if c < MIN_COS_ALPHA:
            raise ValueError(
                f"cos(alpha) = {c:.4f} < {MIN_COS_ALPHA} at t={t}; "
                "the angle must keep cos(alpha) >= 1/2"
            )
    model = TwoLevelModel(
        s=s, alpha=alpha, t_start=float(grid[0]), t_end=float(grid[-1]),
        frame_tol=frame_tol,
    )
    family = model.frame_family()
    for t in grid:
        family.frame_at(t)  # raises FrameAxiomError on any violation
    return model


@dataclass(frozen=True)
class ConstantMetricModel:
    """H(t) = a(t) I + b(t) C over a fixed frame (the metric never moves)."""

    a: ScalarFunction
    b: ScalarFunction
    frame: CPTFrame
    t_start: float
    t_end: float

    def hamiltonian(self) -> OperatorFamily:
        eye = np.eye(self.frame.dim, dtype=complex)
        C = self.frame.c

        def evaluate(t):
            return self.a(t) * eye + self.b(t) * C

        derivative = None
        if self.a.dfn is not None and self.b.dfn is not None:
            def derivative(t):
                return self.a.dfn(t) * eye + self.b.dfn(t) * C

        return OperatorFamily(self.t_start, self.t_end, evaluate, derivative)

    def frame_family(self) -> FrameFamily:
        return FrameFamily.constant(self.frame)

    def energies(self, t: float) -> np.ndarray:
        """a(t) + b(t) * (eigenvalues of C), sorted ascending."""
        c_eigs = np.sort(np.linalg.eigvals(self.frame.c).real)
        return np.sort(self.a(t) + self.b(t) * c_eigs)

    def problem(self, grid, equation: Equation, initial_state,
                hbar: float = 1.0, substeps: Optional[int] = None,
                correction: Optional[OperatorFamily] = None) -> EvolutionProblem:
        return EvolutionProblem(
            hamiltonian=self.hamiltonian(),
            frame_family=self.frame_family(),
            grid=grid,
            equation=equation,
            initial_state=initial_state,
            correction=correction,
            hbar=hbar,
            substeps=substeps,
        )


def build_constant_metric(a: ScalarFunction, b: ScalarFunction, frame: CPTFrame,
                          grid) -> ConstantMetricModel:
    """Constant-frame model with H(t) = a(t) I + b(t) C.

    a and b must be real-valued (ScalarFunction already enforces real
    output); the frame must be validated.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be a strictly increasing array of at least two times")
    if not isinstance(frame, CPTFrame):
        raise TypeError("frame must be a validated CPTFrame")
    for fn in (a, b):
        for t in grid[:: max(1, grid.size // 8)]:
            fn(t)  # raises if the function is not real-valued
    return ConstantMetricModel(
        a=a, b=b, frame=frame, t_start=float(grid[0]), t_end=float(grid[-1])
    )
