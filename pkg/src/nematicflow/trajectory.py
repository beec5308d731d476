"""Time-indexed solution containers and solver configuration."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .elliptic import EllipticSolveOptions
from .grid import GridSpec, ScalarField, StateSnapshot, VectorField, interior_mean

__all__ = [
    "Trajectory",
    "PicardTrace",
    "SweepRecord",
    "SolveMode",
    "SolveConfig",
    "constant_trajectory",
    "difference_trajectory",
]

#: Slack for snapshot-time consistency checks.
TIME_TOL = 1e-9


@dataclass(frozen=True)
class Trajectory:
    """Snapshots at levels 0..steps with uniform spacing dt; level 0 is the data."""

    grid: GridSpec
    dt: float
    snapshots: tuple[StateSnapshot, ...]

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if len(self.snapshots) < 1:
            raise ValueError("a trajectory needs at least the initial snapshot")
        for k, snap in enumerate(self.snapshots):
            if snap.grid != self.grid:
                raise ValueError("all snapshots must share the trajectory grid")
            if abs(snap.time - k * self.dt) > TIME_TOL * max(1.0, k * self.dt):
                raise ValueError(
                    f"snapshot {k} carries time {snap.time}, expected {k * self.dt}"
                )
        object.__setattr__(self, "snapshots", tuple(self.snapshots))

    @property
    def steps(self) -> int:
        return len(self.snapshots) - 1

    @property
    def final(self) -> StateSnapshot:
        return self.snapshots[-1]


def constant_trajectory(init: StateSnapshot, dt: float, steps: int) -> Trajectory:
    """The zeroth Picard iterate: the initial data held at every time level."""
    snaps = [init] + [
        StateSnapshot(init.u, init.d, init.p, time=k * dt) for k in range(1, steps + 1)
    ]
    return Trajectory(init.grid, dt, tuple(snaps))


def difference_trajectory(a: Trajectory, b: Trajectory) -> Trajectory:
    """Snapshot-wise difference a - b (pressures re-centered to zero interior mean)."""
    if a.grid != b.grid or a.steps != b.steps or abs(a.dt - b.dt) > TIME_TOL * a.dt:
        raise ValueError("trajectories must share grid, steps and dt")
    snaps = []
    for sa, sb in zip(a.snapshots, b.snapshots):
        du = VectorField(a.grid, sa.u.values - sb.u.values)
        dd = VectorField(a.grid, sa.d.values - sb.d.values)
        pv = sa.p.values - sb.p.values
        pv = pv - interior_mean(pv)
        snaps.append(StateSnapshot(du, dd, ScalarField(a.grid, pv), time=sa.time))
    return Trajectory(a.grid, a.dt, tuple(snaps))


@dataclass(frozen=True)
class SweepRecord:
    """Difference functionals of one Picard sweep against its predecessor."""

    sweep: int
    df: float
    de: float
    dh: float
    #: dh of this sweep over dh of the previous one; None when the
    #: denominator sits below 1e-14 (ratio would be noise).
    ratio: float | None

    def __post_init__(self):
        for name in ("df", "de", "dh"):
            if getattr(self, name) < 0 or not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be a finite nonnegative real")


@dataclass(frozen=True)
class PicardTrace:
    """Per-sweep contraction record of a Picard run."""

    records: tuple[SweepRecord, ...]
    converged: bool
    sweeps_used: int

    def dh_history(self) -> list[float]:
        return [r.dh for r in self.records]

    def ratios(self) -> list[float]:
        return [r.ratio for r in self.records if r.ratio is not None]


class SolveMode(enum.Enum):
    PICARD_GLOBAL = "picard_global"
    TIME_MARCHING = "time_marching"


@dataclass(frozen=True)
class SolveConfig:
    """Knobs of the Picard / marching drivers over one horizon of length T."""

    T: float
    steps: int
    picard_tol: float = 1e-8
    max_sweeps: int = 50
    mode: SolveMode = SolveMode.PICARD_GLOBAL
    renormalize_director: bool = False
    blowup_threshold: float = 1e6
    parallel_sweep: bool = False
    elliptic: EllipticSolveOptions = field(default_factory=EllipticSolveOptions)

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if not 0.0 < self.picard_tol < 1.0:
            raise ValueError(f"picard_tol must lie in (0, 1), got {self.picard_tol}")
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps}")
        if not self.blowup_threshold > 0:
            raise ValueError("blowup_threshold must be positive")

    @property
    def dt(self) -> float:
        return self.T / self.steps
