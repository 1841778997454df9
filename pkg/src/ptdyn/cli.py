"""Scenario runner: load a config, integrate, analyze, persist artifacts.

``run`` writes three artifacts into the output directory:

* ``trajectory.csv``  — t, Re/Im of each state component, frame norm,
  drift rate (floats at 17 significant digits; output is bit-reproducible)
* ``adiabatic.csv``   — t, dynamical phase, fidelity loss, cross-level
  coupling residual, running bound V(t)
* ``summary.json``    — frame-axiom residuals, symmetry report, bound,
  max fidelity loss, norm drift, per-check pass/fail

Exit codes: 0 all enabled checks pass, 1 a check failed, 2 configuration
error, 3 numerical abort (message carries the last good time).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import adiabatic as adb
from . import config as cfg_mod
from . import dynamics as dyn
from . import frames as frm
from .config import ConfigError, ScenarioConfig
from .frames import FrameAxiomError
from .linalg import AntilinearOperator, ConvergenceError, OperatorFamily

__all__ = ["run_scenario", "sweep", "validate_scenario", "main"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

NUMERIC_ERRORS = (
    dyn.IntegrationAbort,
    ConvergenceError,
    adb.LevelTrackingError,
    adb.BrokenSymmetryError,
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class _InlineModel:
    """Constant-matrix scenario assembled directly from config matrices."""

    H: np.ndarray
    frame: frm.CPTFrame
    t_start: float
    t_end: float

    def hamiltonian(self) -> OperatorFamily:
        return OperatorFamily.constant(self.H)

    def frame_family(self) -> frm.FrameFamily:
        return frm.FrameFamily.constant(self.frame)

    def problem(self, grid, equation, initial_state, hbar=1.0, substeps=None,
                correction=None) -> dyn.EvolutionProblem:
        return dyn.EvolutionProblem(
            hamiltonian=self.hamiltonian(),
            frame_family=self.frame_family(),
            grid=grid,
            equation=equation,
            initial_state=initial_state,
            correction=correction,
            hbar=hbar,
            substeps=substeps,
        )


def build_model(cfg: ScenarioConfig):
    """Instantiate the configured model; config problems raise ConfigError."""
    from .models import build_constant_metric, build_two_level

    grid = cfg.grid.times()
    try:
        if cfg.model_kind == "two_level":
            return build_two_level(
                cfg.scalar("s"), cfg.scalar("alpha"), grid,
                frame_tol=cfg.tolerances["frame"],
            )
        if cfg.model_kind == "constant_metric":
            frame = frm.validate_frames(
                cfg.matrix("C"), cfg.matrix("P"),
                AntilinearOperator(cfg.matrix("K")),
                tol=cfg.tolerances["frame"],
            )
            return build_constant_metric(cfg.scalar("a"), cfg.scalar("b"), frame, grid)
        frame = frm.validate_frames(
            cfg.matrix("C"), cfg.matrix("P"),
            AntilinearOperator(cfg.matrix("K")),
            tol=cfg.tolerances["frame"],
        )
        H = cfg.matrix("H")
        if H.shape[0] != frame.dim:
            raise ConfigError("model.H", f"dimension {H.shape[0]} does not match frame dim {frame.dim}")
        return _InlineModel(H=H, frame=frame, t_start=float(grid[0]), t_end=float(grid[-1]))
    except (FrameAxiomError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("model", str(exc)) from exc


def _correction_family(cfg: ScenarioConfig, dim: int) -> Optional[OperatorFamily]:
    if cfg.equation is not dyn.Equation.AUGMENTED:
        return None
    G = cfg.matrix("G")
    if G.shape[0] != dim:
        raise ConfigError("model.G", f"dimension {G.shape[0]} does not match the model dim {dim}")
    return OperatorFamily.constant(G)


def _frame_and_symmetry(model, cfg: ScenarioConfig, grid) -> tuple[dict, dict, bool, bool]:
    """Aggregate frame residuals and symmetry classification over the grid."""
    family = model.frame_family()
    ham = model.hamiltonian()
    residuals: dict = {}
    min_metric_eig = np.inf
    symmetry = {"pt_symmetric": True, "cpt_hermitian": True, "unbroken": True}
    max_realness = 0.0
    for t in grid:
        frame = family.frame_at(t)
        for axiom, value in frame.residuals.items():
            if axiom == "metric min eigenvalue":
                min_metric_eig = min(min_metric_eig, value)
            else:
                residuals[axiom] = max(residuals.get(axiom, 0.0), value)
        rep = frm.symmetry_report(frame, ham(t), tol=cfg.tolerances["symmetry"])
        symmetry["pt_symmetric"] &= rep.pt_symmetric
        symmetry["cpt_hermitian"] &= rep.cpt_hermitian
        symmetry["unbroken"] &= rep.unbroken
        max_realness = max(max_realness, rep.eigen_realness)
    residuals["metric min eigenvalue"] = float(min_metric_eig)
    symmetry["max_eigen_imag"] = max_realness
    frames_ok = True  # validate_frames raises on any axiom failure
    symmetry_ok = bool(
        symmetry["pt_symmetric"] and symmetry["cpt_hermitian"] and symmetry["unbroken"]
    )
    return residuals, symmetry, frames_ok, symmetry_ok


def _norm_check_enabled(cfg: ScenarioConfig) -> bool:
    if cfg.equation is dyn.Equation.COMPENSATED:
        return True
    # The plain equation conserves the frame norm only when the metric is static.
    return cfg.equation is dyn.Equation.SCHRODINGER and cfg.model_kind in (
        "constant_metric", "inline",
    )


def run_scenario(cfg: ScenarioConfig, out_dir: Optional[Path] = None) -> dict:
    """Execute a scenario and return its summary (written to disk if out_dir).

    The run builds the model, validates frames and symmetry along the grid,
    tracks the eigenframe, integrates the configured equation starting from
    the tracked level's eigenvector, and evaluates the adiabatic report.
    """
    grid = cfg.grid.times()
    model = build_model(cfg)
    family = model.frame_family()
    if cfg.level >= family.dim:
        raise ConfigError("level", f"level {cfg.level} out of range for dimension {family.dim}")

    residuals, symmetry, frames_ok, symmetry_ok = _frame_and_symmetry(model, cfg, grid)

    eframe = adb.build_eigenframe(
        model.hamiltonian(), family, grid,
        realness_tol=cfg.tolerances["realness"],
    )
    problem = model.problem(
        grid, cfg.equation, eframe.states[0, cfg.level],
        hbar=cfg.hbar, substeps=cfg.substeps,
        correction=_correction_family(cfg, family.dim),
    )
    trajectory = dyn.evolve_state(problem)
    report = adb.build_report(
        eframe, family, trajectory, cfg.level, cfg.epsilon, hbar=cfg.hbar
    )

    checks = {
        "frames": frames_ok,
        "symmetry": symmetry_ok,
    }
    norm_drift = trajectory.max_norm_drift
    if _norm_check_enabled(cfg):
        # The bound implication presumes norm-conserving dynamics; gate both
        # checks on the same condition.
        checks["norm_conservation"] = bool(norm_drift <= cfg.tolerances["norm_drift"])
        checks["adiabatic_bound"] = report.bound_satisfied

    summary = {
        "frame_residuals": residuals,
        "symmetry": symmetry,
        "adiabatic": {
            "bound": report.bound,
            "epsilon": report.epsilon,
            "max_fidelity_loss": report.max_fidelity_loss,
            "bound_satisfied": report.bound_satisfied,
        },
        "norm_drift": norm_drift,
        "checks": checks,
        "exit_status": EXIT_OK if all(checks.values()) else EXIT_CHECK_FAILED,
    }

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_trajectory_csv(out_dir / "trajectory.csv", trajectory)
        _write_adiabatic_csv(out_dir / "adiabatic.csv", eframe.times, report)
        _atomic_write(out_dir / "summary.json", json.dumps(summary, indent=2) + "\n")
    return summary


def validate_scenario(cfg: ScenarioConfig) -> dict:
    """Frame and symmetry checks only; no integration."""
    grid = cfg.grid.times()
    model = build_model(cfg)
    residuals, symmetry, frames_ok, symmetry_ok = _frame_and_symmetry(model, cfg, grid)
    ok = frames_ok and symmetry_ok
    return {
        "frame_residuals": residuals,
        "symmetry": symmetry,
        "checks": {"frames": frames_ok, "symmetry": symmetry_ok},
        "exit_status": EXIT_OK if ok else EXIT_CHECK_FAILED,
    }


def _resolve_dotted(raw: dict, path: str) -> tuple[dict, str]:
    keys = path.split(".")
    node = raw
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(path, "no such config field")
        node = node[key]
    last = keys[-1]
    if not isinstance(node, dict) or last not in node:
        raise ConfigError(path, "no such config field")
    current = node[last]
    if current is not None and (
        not isinstance(current, (int, float)) or isinstance(current, bool)
    ):
        raise ConfigError(path, "sweep axis must name a numeric field")
    return node, last


def _set_dotted(raw: dict, path: str, value: float) -> None:
    node, last = _resolve_dotted(raw, path)
    node[last] = value


def sweep(cfg: ScenarioConfig, axis: str, values: Sequence[float],
          out_dir: Optional[Path] = None) -> list[dict]:
    """Run the scenario once per axis value; failures are recorded in-row.

    Returns one row per value with the bound, max fidelity loss, whether
    the bound implication held, and the norm drift. When ``out_dir`` is
    given the table is written to ``sweep.csv`` atomically.
    """
    base = cfg_mod.to_dict(cfg)
    _resolve_dotted(base, axis)  # a bad axis fails the whole sweep up front
    rows = []
    for value in values:
        row = {"value": value, "bound": None, "max_fidelity_loss": None,
               "bound_satisfied": None, "norm_drift": None,
               "status": "ok", "error": ""}
        try:
            raw = json.loads(json.dumps(base))
            _set_dotted(raw, axis, value)
            row_cfg = cfg_mod.from_dict(raw)
            summary = run_scenario(row_cfg, out_dir=None)
            row["bound"] = summary["adiabatic"]["bound"]
            row["max_fidelity_loss"] = summary["adiabatic"]["max_fidelity_loss"]
            row["bound_satisfied"] = summary["adiabatic"]["bound_satisfied"]
            row["norm_drift"] = summary["norm_drift"]
        except (ConfigError, *NUMERIC_ERRORS) as exc:
            row["status"] = "error"
            row["error"] = str(exc)
        rows.append(row)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_sweep_csv(out_dir / "sweep.csv", rows)
    return rows


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_trajectory_csv(path: Path, trajectory: dyn.Trajectory) -> None:
    dim = trajectory.states.shape[1]
    header = ["t"]
    for i in range(dim):
        header += [f"re{i}", f"im{i}"]
    header += ["cpt_norm", "drift_rate"]
    lines = [",".join(header)]
    for k, t in enumerate(trajectory.times):
        row = [_fmt(t)]
        for i in range(dim):
            z = trajectory.states[k, i]
            row += [_fmt(z.real), _fmt(z.imag)]
        row += [_fmt(trajectory.cpt_norms[k]), _fmt(trajectory.drift_rates[k])]
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_adiabatic_csv(path: Path, times: np.ndarray, report: adb.AdiabaticReport) -> None:
    lines = ["t,theta,fidelity_loss,coupling_residual,bound_running"]
    for k, t in enumerate(times):
        lines.append(",".join([
            _fmt(t), _fmt(report.theta[k]), _fmt(report.fidelity[k]),
            _fmt(report.coupling_residual[k]), _fmt(report.bound_profile[k]),
        ]))
    lines.append(
        f"# bound={_fmt(report.bound)} max_loss={_fmt(report.max_fidelity_loss)} "
        f"epsilon={_fmt(report.epsilon)} bound_satisfied={report.bound_satisfied}"
    )
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_sweep_csv(path: Path, rows: list[dict]) -> None:
    lines = ["value,bound,max_fidelity_loss,bound_satisfied,norm_drift,status,error"]
    for row in rows:
        def cell(key):
            v = row[key]
            if v is None:
                return ""
            if isinstance(v, bool):
                return str(v).lower()
            if isinstance(v, float):
                return _fmt(v)
            return str(v).replace(",", ";")
        lines.append(",".join(cell(k) for k in (
            "value", "bound", "max_fidelity_loss", "bound_satisfied",
            "norm_drift", "status", "error",
        )))
    _atomic_write(path, "\n".join(lines) + "\n")


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    raw = cfg_mod.to_dict(cfg)
    if args.substeps is not None:
        raw["substeps"] = args.substeps
    if args.tol is not None:
        raw.setdefault("tolerances", {})
        raw["tolerances"]["frame"] = args.tol
        raw["tolerances"]["symmetry"] = args.tol
    return cfg_mod.from_dict(raw)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptdyn",
        description="Simulate PT-symmetric quantum dynamics with time-dependent metrics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("config", help="path to a scenario JSON file")
        p.add_argument("--out-dir", default=None,
                       help="artifact directory (default: config output.dir, then 'out')")
        p.add_argument("--substeps", type=int, default=None,
                       help="override integrator substeps per grid interval")
        p.add_argument("--tol", type=float, default=None,
                       help="override frame/symmetry validation tolerance")

    add_common(sub.add_parser("run", help="run a scenario and write artifacts"))
    sweep_p = sub.add_parser("sweep", help="re-run a scenario over an axis of values")
    add_common(sweep_p)
    sweep_p.add_argument("--axis", required=True,
                         help="dotted config field to vary, e.g. grid.t_end")
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated numeric values")
    add_common(sub.add_parser("validate", help="frame and symmetry checks only"))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        cfg = cfg_mod.load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        out_dir = Path(args.out_dir or cfg.out_dir or "out")
        if args.command == "run":
            summary = run_scenario(cfg, out_dir=out_dir)
            print(json.dumps(summary["checks"]))
            return summary["exit_status"]
        if args.command == "validate":
            result = validate_scenario(cfg)
            print(json.dumps(result["checks"]))
            return result["exit_status"]
        try:
            values = [float(v) for v in args.values.split(",") if v.strip() != ""]
        except ValueError as exc:
            raise ConfigError("--values", f"non-numeric sweep value: {exc}") from None
        rows = sweep(cfg, args.axis, values, out_dir=out_dir)
        print(f"sweep complete: {len(rows)} rows "
              f"({sum(1 for r in rows if r['status'] == 'ok')} ok)")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
