"""Command-line runner: scenario construction, orchestration, serialization.

Subcommands:
    run <config>       execute the configured driver, write artifacts
    validate <config>  parse the config and check scenario preconditions only
    norms <traj.bin>   recompute the cumulative norm report from a dump

Exit codes separate "the math failed to converge" from "the program failed":
    0  run converged, no invariant flag fired
    2  configuration or scenario validation error
    3  solver NoConvergence / BlowUp / flagged step (artifacts still written)
    4  I/O failure

The output directory comes from the config, overridable with the
NEMATICFLOW_OUTDIR environment variable. CSV floats are written with repr
(shortest round-trip), so identical runs produce bitwise-identical files.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, parse_config, render_manifest
from .elliptic import EllipticSolveOptions
from .errors import ConfigError, InvalidScenario, SolverError, TraceIncompatibility
from .fieldio import read_trajectory, write_snapshot, write_trajectory
from .grid import GridSpec, StateSnapshot
from .norms import (
    HFunctionalAccumulator,
    NormConfig,
    NormReport,
    divergence_residual,
    energy,
    unit_drift,
)
from .picard import divergence_of, solve_global_smalldata, solve_marching
from .scenarios import equilibrium_state, perturbed_state, twisted_state
from .stokes import INITIAL_DIV_TOL
from .trajectory import PicardTrace, SolveConfig, SolveMode, Trajectory

__all__ = ["main", "make_scenario", "run_from_config"]

OUTDIR_ENV = "NEMATICFLOW_OUTDIR"

NORM_COLUMNS = (
    "time",
    "sup_proxy_u",
    "sup_proxy_d",
    "lp_w2q_u",
    "lp_w2q_d",
    "lp_dt_u",
    "lp_dt_d",
    "lp_gradP",
    "H_total",
)


def make_scenario(cfg: RunConfig) -> StateSnapshot:
    """Construct the configured initial state; raises InvalidScenario on
    unknown ids and TraceIncompatibility on boundary mismatches."""
    grid = GridSpec(cfg.n, cfg.extent)
    e = cfg.unit_director
    if cfg.scenario == "equilibrium":
        return equilibrium_state(grid, e)
    if cfg.scenario == "small_perturbation":
        return perturbed_state(grid, e, cfg.epsilon)
    if cfg.scenario == "strong_twist":
        return twisted_state(grid, cfg.wavenumber, cfg.amplitude)
    raise InvalidScenario(f"unknown scenario {cfg.scenario!r}")


def _scenario_reference(cfg: RunConfig) -> np.ndarray:
    if cfg.scenario == "strong_twist":
        return np.array([1.0, 0.0, 0.0])
    return cfg.unit_director


def _validate_preconditions(cfg: RunConfig, init: StateSnapshot) -> list[str]:
    checks = []
    drift = float(np.abs(init.d.magnitude() - 1.0).max())
    if drift > 1e-10:
        raise InvalidScenario(f"initial director not unit length: {drift:.3e}")
    checks.append(f"unit_length_defect = {drift!r}")
    div = divergence_of(init.u)
    bound = INITIAL_DIV_TOL * (1.0 + init.u.max_norm())
    if div > bound:
        raise InvalidScenario(f"initial divergence residual {div:.3e} exceeds {bound:.3e}")
    checks.append(f"divergence_residual = {div!r}")
    if cfg.mode == SolveMode.PICARD_GLOBAL.value:
        e = _scenario_reference(cfg)
        trace_gap = _boundary_gap(init, e)
        if trace_gap > 1e-10:
            raise TraceIncompatibility(trace_gap, 1e-10, what="director boundary vs e")
        checks.append(f"boundary_trace_gap = {trace_gap!r}")
    return checks


def _boundary_gap(init: StateSnapshot, e: np.ndarray) -> float:
    vals = init.d.values
    gap = 0.0
    for face in (vals[0], vals[-1], vals[:, 0], vals[:, -1], vals[:, :, 0], vals[:, :, -1]):
        gap = max(gap, float(np.abs(face - e).max()))
    return gap


def _norm_csv_row(time: float, rep: NormReport) -> str:
    vals = [time] + [rep.components()[c] for c in NORM_COLUMNS[1:-1]] + [rep.H_total]
    return ",".join(repr(float(v)) for v in vals)


def _write_norms_csv(path: Path, rows: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(NORM_COLUMNS) + "\n")
        for row in rows:
            fh.write(row + "\n")


def _write_trace_csv(path: Path, traces: list[PicardTrace]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("window,sweep,df,de,dh,ratio\n")
        for w, trace in enumerate(traces):
            for rec in trace.records:
                ratio = "" if rec.ratio is None else repr(float(rec.ratio))
                fh.write(f"{w},{rec.sweep},{rec.df!r},{rec.de!r},{rec.dh!r},{ratio}\n")


def _write_summary(path: Path, entries: dict) -> None:
    with open(path, "w") as fh:
        for key, value in entries.items():
            fh.write(f"{key} = {value}\n")


def _summary_entries(cfg: RunConfig, traj: Trajectory | None, traces: list[PicardTrace],
                     converged: bool, exit_reason: str, windows_completed: int) -> dict:
    entries = {
        "converged": str(converged).lower(),
        "exit_reason": exit_reason,
        "windows_completed": windows_completed,
        "total_sweeps": sum(t.sweeps_used for t in traces),
    }
    if traj is not None:
        kin, ela, tot = energy(traj.final)
        e = _scenario_reference(cfg)
        entries.update(
            unit_drift=repr(unit_drift(traj)),
            max_divergence_residual=repr(max(divergence_residual(s) for s in traj.snapshots)),
            final_energy_kinetic=repr(kin),
            final_energy_elastic=repr(ela),
            final_energy_total=repr(tot),
            final_d_deviation=repr(float(np.abs(traj.final.d.values - e).max())),
        )
    return entries


def _dump_fields(outdir: Path, traj: Trajectory, stride: int) -> None:
    if stride <= 0:
        return
    for k in range(0, len(traj.snapshots), stride):
        write_snapshot(outdir / f"snapshot_{k:06d}.bin", traj.snapshots[k])
    last = len(traj.snapshots) - 1
    if last % stride != 0:
        write_snapshot(outdir / f"snapshot_{last:06d}.bin", traj.snapshots[last])


def run_from_config(cfg: RunConfig, outdir: str | None = None) -> int:
    """Execute one configured run; returns the process exit code."""
    out = Path(outdir or os.environ.get(OUTDIR_ENV) or cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "manifest.txt").write_text(render_manifest(cfg))
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return 4

    try:
        init = make_scenario(cfg)
        _validate_preconditions(cfg, init)
    except (InvalidScenario, TraceIncompatibility, ConfigError) as err:
        print(f"scenario error: {err}", file=sys.stderr)
        return 2

    solve_cfg = SolveConfig(
        T=cfg.horizon,
        steps=cfg.steps,
        picard_tol=cfg.picard_tol,
        max_sweeps=cfg.max_sweeps,
        mode=SolveMode(cfg.mode),
        renormalize_director=cfg.renormalize_director,
        blowup_threshold=cfg.blowup_threshold,
        parallel_sweep=cfg.parallel_sweep,
        elliptic=EllipticSolveOptions(tol=cfg.elliptic_tol),
    )
    norm_cfg = NormConfig(p=cfg.p, q=cfg.q)
    e = _scenario_reference(cfg)

    traj: Trajectory | None = None
    reports: list[NormReport] = []
    traces: list[PicardTrace] = []
    converged = False
    exit_reason = "ok"

    try:
        if cfg.mode == SolveMode.PICARD_GLOBAL.value:
            traj, reports, traces = solve_global_smalldata(
                init, e, solve_cfg, cfg.windows, norm_cfg
            )
            converged = all(t.converged for t in traces)
        else:
            acc = HFunctionalAccumulator(norm_cfg, ref_director=e)
            snaps = [init]
            current = init
            for _w in range(cfg.windows):
                window = solve_marching(current, solve_cfg)
                acc.add_window(window)
                reports.append(acc.report())
                offset = len(snaps) - 1
                for k in range(1, window.steps + 1):
                    s = window.snapshots[k]
                    snaps.append(
                        StateSnapshot(s.u, s.d, s.p, time=(offset + k) * solve_cfg.dt)
                    )
                last = window.final
                current = StateSnapshot(last.u, last.d, last.p, time=0.0)
            traj = Trajectory(init.grid, solve_cfg.dt, tuple(snaps))
            converged = True
    except SolverError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        exit_reason = type(err).__name__
        if hasattr(err, "trace"):
            traces = traces + [err.trace]

    try:
        rows = [
            _norm_csv_row((w + 1) * cfg.horizon, rep) for w, rep in enumerate(reports)
        ]
        _write_norms_csv(out / "norms.csv", rows)
        _write_trace_csv(out / "trace.csv", traces)
        _write_summary(
            out / "summary.txt",
            _summary_entries(
                cfg, traj, traces, converged and exit_reason == "ok", exit_reason,
                windows_completed=len(reports),
            ),
        )
        if traj is not None:
            _dump_fields(out, traj, cfg.dump_stride)
            if cfg.dump_trajectory:
                write_trajectory(out / "trajectory.bin", traj)
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return 4

    return 0 if (converged and exit_reason == "ok") else 3


def _cmd_run(args) -> int:
    try:
        cfg = parse_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    return run_from_config(cfg)


def _cmd_validate(args) -> int:
    try:
        cfg = parse_config(args.config)
        init = make_scenario(cfg)
        checks = _validate_preconditions(cfg, init)
    except (ConfigError, InvalidScenario, TraceIncompatibility) as err:
        print(f"invalid: {err}", file=sys.stderr)
        return 2
    print(f"ok: scenario {cfg.scenario!r} on n={cfg.n} grid")
    for line in checks:
        print("  " + line)
    return 0


def _cmd_norms(args) -> int:
    try:
        traj = read_trajectory(args.trajectory)
    except (OSError, ValueError) as err:
        print(f"cannot read trajectory: {err}", file=sys.stderr)
        return 4
    try:
        norm_cfg = NormConfig(p=args.p, q=args.q)
    except ValueError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    e = np.asarray([float(v) for v in args.director.split()], dtype=np.float64)
    e /= np.linalg.norm(e)

    acc = HFunctionalAccumulator(norm_cfg, ref_director=e)
    lines = [",".join(NORM_COLUMNS)]
    for k in range(1, len(traj.snapshots)):
        piece = Trajectory(
            traj.grid,
            traj.dt,
            (
                StateSnapshot(*(getattr(traj.snapshots[k - 1], f) for f in ("u", "d", "p")), time=0.0),
                StateSnapshot(*(getattr(traj.snapshots[k], f) for f in ("u", "d", "p")), time=traj.dt),
            ),
        )
        acc.add_window(piece)
        lines.append(_norm_csv_row(k * traj.dt, acc.report()))
    text = "\n".join(lines) + "\n"
    if args.output:
        try:
            Path(args.output).write_text(text)
        except OSError as err:
            print(f"I/O error: {err}", file=sys.stderr)
            return 4
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nematicflow",
        description="Coupled flow / director solver and verification harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured run")
    p_run.add_argument("config")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="parse config and check scenario preconditions")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_norms = sub.add_parser("norms", help="recompute the norm report from a trajectory dump")
    p_norms.add_argument("trajectory")
    p_norms.add_argument("--p", type=float, default=4.0)
    p_norms.add_argument("--q", type=float, default=8.0)
    p_norms.add_argument("--director", default="0 0 1")
    p_norms.add_argument("--output", default=None)
    p_norms.set_defaults(func=_cmd_norms)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
