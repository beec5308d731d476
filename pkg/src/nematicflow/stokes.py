"""Time-discrete Stokes solves: implicit diffusion plus pressure projection.

Each step runs the classical splitting on the collocated grid:

    (i)   (I - dt Lap) u* = u_k + dt f_{k+1}   (zero Dirichlet data)
    (ii)  Lap P = div(u*) / dt                 (homogeneous Neumann data)
    (iii) u_{k+1} = u* - dt grad(P), boundary nodes reset to zero.

On the collocated grid the projection is realized exactly: with D the
central interior divergence (boundary velocities clamped to zero) the step
solves the SPD system (D D^T) lambda = D u* and corrects u* by D^T lambda,
so the post-correction divergence residual equals the CG residual and is
driven directly below the flag threshold. The reported pressure is
lambda / dt, extended to boundary nodes by the one-sided zero-slope rule and
normalized to zero interior mean. A compact-stencil Neumann solve behind the
standalone pressure_poisson operation keeps that public contract unchanged.
Steps whose residual still breaches 1e-6 * (1 + ||u||_inf) raise
DivergenceResidualExceeded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .elliptic import (
    EllipticSolveOptions,
    interior_divergence_clamped,
    leray_correction_gradient,
    neumann_weights,
    solve_leray_multiplier,
    solve_neumann_poisson,
    solve_shifted_dirichlet,
    weighted_mean,
)
from .errors import DivergenceResidualExceeded, IncompatibleRHS
from .grid import GridSpec, ScalarField, VectorField, interior_mean
from .operators import diff_axis

__all__ = [
    "StokesProblem",
    "pressure_poisson",
    "stokes_solve",
    "StokesMarch",
    "check_velocity_intake",
]

#: Initial-data divergence tolerance, relative to 1 + ||u||_inf.
INITIAL_DIV_TOL = 1e-8
#: Per-step post-correction divergence flag threshold, relative to 1 + ||u||_inf.
DIV_FLAG_COEFF = 1e-6
#: Neumann solvability bound for the public pressure_poisson entry point.
RHS_MEAN_TOL = 1e-8


def _interior_div_max(u_values: np.ndarray, h: float) -> float:
    div = diff_axis(u_values[..., 0], 0, h)
    div += diff_axis(u_values[..., 1], 1, h)
    div += diff_axis(u_values[..., 2], 2, h)
    return float(np.abs(div[1:-1, 1:-1, 1:-1]).max())


def check_velocity_intake(u: VectorField) -> None:
    """No-slip and near-solenoidal requirements on a starting velocity."""
    vals = u.values
    bmax = max(
        float(np.abs(vals[0]).max()), float(np.abs(vals[-1]).max()),
        float(np.abs(vals[:, 0]).max()), float(np.abs(vals[:, -1]).max()),
        float(np.abs(vals[:, :, 0]).max()), float(np.abs(vals[:, :, -1]).max()),
    )
    if bmax != 0.0:
        raise ValueError(f"no-slip violated: initial velocity is {bmax:.3e} on the boundary")
    div = _interior_div_max(vals, u.grid.h)
    bound = INITIAL_DIV_TOL * (1.0 + u.max_norm())
    if div > bound:
        raise ValueError(
            f"initial velocity is not discretely solenoidal: divergence "
            f"max-norm {div:.3e} exceeds {bound:.3e}"
        )


@dataclass(frozen=True)
class StokesProblem:
    """No-slip Stokes marching data; forcing[k] drives the step to level k+1."""

    initial: VectorField
    forcing: Sequence[VectorField]
    steps: int
    dt: float

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if len(self.forcing) != self.steps:
            raise ValueError(
                f"forcing sequence length {len(self.forcing)} must equal steps {self.steps}"
            )
        for f in self.forcing:
            if f.grid != self.initial.grid:
                raise ValueError("forcing fields must share the problem grid")
        check_velocity_intake(self.initial)

    @property
    def grid(self) -> GridSpec:
        return self.initial.grid


def pressure_poisson(rhs: ScalarField, opts: EllipticSolveOptions | None = None
                     ) -> ScalarField:
    """Solve Lap P = rhs with homogeneous Neumann data, zero-mean output.

    The solvability functional is the trapezoid-weighted mean of rhs (the
    discrete null-space pairing of the mirrored stencil); if it exceeds
    1e-8 * ||rhs||_inf the mean is reported via IncompatibleRHS rather than
    silently removed. The returned pressure has zero interior mean.
    """
    opts = opts or EllipticSolveOptions()
    grid = rhs.grid
    sup = rhs.max_norm()
    if sup == 0.0:
        return ScalarField(grid, np.zeros(grid.shape))
    mean = weighted_mean(rhs.values, neumann_weights(grid))
    if abs(mean) > RHS_MEAN_TOL * sup:
        raise IncompatibleRHS(mean, RHS_MEAN_TOL * sup)
    p = solve_neumann_poisson(rhs.values, grid, opts=opts)
    p = p - interior_mean(p)
    return ScalarField(grid, p)


def _extend_pressure(lam_over_dt: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Interior pressure to the full grid via the one-sided zero-slope rule."""
    full = np.zeros(grid.shape)
    full[1:-1, 1:-1, 1:-1] = lam_over_dt
    full[0, :, :] = (4.0 * full[1, :, :] - full[2, :, :]) / 3.0
    full[-1, :, :] = (4.0 * full[-2, :, :] - full[-3, :, :]) / 3.0
    full[:, 0, :] = (4.0 * full[:, 1, :] - full[:, 2, :]) / 3.0
    full[:, -1, :] = (4.0 * full[:, -2, :] - full[:, -3, :]) / 3.0
    full[:, :, 0] = (4.0 * full[:, :, 1] - full[:, :, 2]) / 3.0
    full[:, :, -1] = (4.0 * full[:, :, -2] - full[:, :, -3]) / 3.0
    return full


class StokesMarch:
    """Single-step projection engine behind stokes_solve and the marching driver."""

    def __init__(self, initial: VectorField, dt: float,
                 opts: EllipticSolveOptions | None = None):
        self.opts = opts or EllipticSolveOptions()
        self.grid = initial.grid
        self.dt = dt
        self.u = np.array(initial.values)
        self._lam_prev: np.ndarray | None = None
        self._level = 0

    def step(self, forcing: VectorField) -> tuple[VectorField, ScalarField]:
        """One projection step; returns the corrected velocity and its pressure."""
        self._level += 1
        grid, dt, h = self.grid, self.dt, self.grid.h
        interior = (slice(1, -1), slice(1, -1), slice(1, -1))

        ustar = np.zeros_like(self.u)
        for c in range(3):
            rhs = self.u[interior + (c,)] + dt * forcing.values[interior + (c,)]
            ustar[interior + (c,)] = solve_shifted_dirichlet(
                rhs,
                grid,
                alpha=1.0,
                beta=dt,
                opts=self.opts,
                x0=self.u[interior + (c,)],
                context="tentative velocity",
                step=self._level,
            )

        u_int = ustar[interior]
        b = interior_divergence_clamped(u_int, h)
        bmax = float(np.abs(b).max())
        flag = DIV_FLAG_COEFF * (1.0 + float(np.abs(ustar).max()))
        if bmax > 0.0:
            target = min(self.opts.tol * bmax, 0.2 * flag)
            lam = solve_leray_multiplier(
                b, grid, opts=self.opts, abs_target=target,
                x0=self._lam_prev, step=self._level,
            )
            self._lam_prev = lam
            unew = ustar.copy()
            unew[interior] = u_int - leray_correction_gradient(lam, h)
        else:
            lam = np.zeros_like(b)
            unew = ustar

        p = _extend_pressure(lam / dt, grid)
        p -= interior_mean(p)

        self.u = unew
        residual = _interior_div_max(unew, h)
        threshold = DIV_FLAG_COEFF * (1.0 + float(np.abs(unew).max()))
        if residual > threshold:
            raise DivergenceResidualExceeded(self._level, residual, threshold)
        return VectorField(grid, unew), ScalarField(grid, p)


def stokes_solve(prob: StokesProblem, opts: EllipticSolveOptions | None = None
                 ) -> list[tuple[VectorField, ScalarField]]:
    """March the projection scheme; returns (u_k, P_k) at levels 0..steps.

    Level 0 carries the initial velocity with a zero pressure placeholder
    (the splitting defines pressure only at advanced levels).
    """
    march = StokesMarch(prob.initial, prob.dt, opts)
    zero_p = ScalarField(prob.grid, np.zeros(prob.grid.shape))
    out = [(prob.initial, zero_p)]
    for k in range(prob.steps):
        out.append(march.step(prob.forcing[k]))
    return out
