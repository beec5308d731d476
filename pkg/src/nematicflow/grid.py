"""Uniform box lattice and the field containers every solver consumes.

Fields live on the nodes of a uniform lattice over the closed box [0, L]^3,
including both boundary faces. Scalar values are stored as (n, n, n) arrays,
vector values as (n, n, n, 3); axis order is (x, y, z). Field arrays are
frozen (read-only) on construction so returned fields can be shared across
threads without defensive copies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TraceIncompatibility

__all__ = [
    "GridSpec",
    "ScalarField",
    "VectorField",
    "StateSnapshot",
    "scalar_from_function",
    "vector_from_function",
    "boundary_mask",
    "interior_mean",
]

#: StateSnapshot zero-mean pressure tolerance, relative to ||p||_inf.
PRESSURE_MEAN_RTOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform n x n x n node lattice on the box [0, extent]^3."""

    n: int
    extent: float = 1.0

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"grid needs at least 8 points per axis, got n={self.n}")
        if not self.extent > 0:
            raise ValueError(f"box edge length must be positive, got {self.extent}")

    @property
    def h(self) -> float:
        """Node spacing extent / (n - 1)."""
        return self.extent / (self.n - 1)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis (all axes are identical)."""
        return np.linspace(0.0, self.extent, self.n)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = self.axis()
        return np.meshgrid(x, x, x, indexing="ij")


def _freeze(values: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(values, dtype=np.float64)
    if out is values:
        out = out.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ScalarField:
    """Real-valued samples on every lattice node."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise ValueError(f"scalar values must have shape {self.grid.shape}, got {values.shape}")
        if not np.isfinite(values).all():
            raise ValueError("scalar field contains non-finite entries")
        object.__setattr__(self, "values", _freeze(values))

    def max_norm(self) -> float:
        return float(np.abs(self.values).max())


@dataclass(frozen=True)
class VectorField:
    """R^3-valued samples on every lattice node, components last."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape + (3,):
            raise ValueError(
                f"vector values must have shape {self.grid.shape + (3,)}, got {values.shape}"
            )
        if not np.isfinite(values).all():
            raise ValueError("vector field contains non-finite entries")
        object.__setattr__(self, "values", _freeze(values))

    def max_norm(self) -> float:
        return float(np.abs(self.values).max())

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean length, shape (n, n, n)."""
        return np.sqrt(np.einsum("...c,...c->...", self.values, self.values))


def scalar_from_function(grid: GridSpec, fn) -> ScalarField:
    """Sample ``fn(x, y, z)`` (vectorized over meshgrid arrays) on the lattice."""
    x, y, z = grid.meshgrid()
    return ScalarField(grid, np.broadcast_to(fn(x, y, z), grid.shape).astype(np.float64))


def vector_from_function(grid: GridSpec, fn) -> VectorField:
    """Sample a callable returning three components on the lattice."""
    x, y, z = grid.meshgrid()
    cx, cy, cz = fn(x, y, z)
    values = np.empty(grid.shape + (3,))
    values[..., 0] = cx
    values[..., 1] = cy
    values[..., 2] = cz
    return VectorField(grid, values)


def boundary_mask(grid: GridSpec) -> np.ndarray:
    """Boolean (n, n, n) mask of boundary nodes (any face of the box)."""
    mask = np.zeros(grid.shape, dtype=bool)
    mask[0, :, :] = mask[-1, :, :] = True
    mask[:, 0, :] = mask[:, -1, :] = True
    mask[:, :, 0] = mask[:, :, -1] = True
    return mask


def interior_mean(values: np.ndarray) -> float:
    """Plain average over interior nodes (used for the pressure normalization)."""
    return float(values[1:-1, 1:-1, 1:-1].mean())


@dataclass(frozen=True)
class StateSnapshot:
    """The (u, d, P) triplet at one time level on a shared grid."""

    u: VectorField
    d: VectorField
    p: ScalarField
    time: float = 0.0

    def __post_init__(self):
        if not (self.u.grid == self.d.grid == self.p.grid):
            raise ValueError("snapshot fields must share one grid")
        if self.time < 0:
            raise ValueError("snapshot time must be nonnegative")
        mean = abs(interior_mean(self.p.values))
        if mean > PRESSURE_MEAN_RTOL * max(self.p.max_norm(), 1e-300):
            raise ValueError(
                f"pressure interior mean {mean:.3e} violates the zero-mean normalization"
            )

    @property
    def grid(self) -> GridSpec:
        return self.u.grid


def check_trace_agreement(values: np.ndarray, boundary_values: np.ndarray,
                          tolerance: float, what: str = "field") -> None:
    """Raise TraceIncompatibility if the two arrays differ on boundary nodes."""
    mask = np.zeros(values.shape[:3], dtype=bool)
    mask[0, :, :] = mask[-1, :, :] = True
    mask[:, 0, :] = mask[:, -1, :] = True
    mask[:, :, 0] = mask[:, :, -1] = True
    mismatch = float(np.abs(values[mask] - boundary_values[mask]).max())
    if mismatch > tolerance:
        raise TraceIncompatibility(mismatch, tolerance, what=what)
