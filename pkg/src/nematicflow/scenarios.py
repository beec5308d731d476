"""Initial-data constructions for the documented scenario set.

All scenarios return a unit-length director with a trace compatible with the
constant state the run measures against, and a velocity that is exactly zero
on the boundary and discretely solenoidal by construction: streams are
windowed to vanish identically in a band near the boundary, and the velocity
is the *discrete* curl of the stream, so the central-difference divergence
cancels through the exact commutation of separable stencils.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidScenario
from .grid import GridSpec, ScalarField, StateSnapshot, VectorField
from .operators import diff_axis

__all__ = [
    "SCENARIOS",
    "equilibrium_state",
    "perturbed_state",
    "twisted_state",
    "boundary_window",
    "solenoidal_bump_velocity",
]

#: Normalized distances (fractions of the edge length) bracketing the
#: smoothstep band of the boundary window: identically 0 below the inner
#: radius, identically 1 above the outer one. The boundary one-sided stencils
#: reach two layers in, so the zero band must cover nodes 0..2: 2h <= inner,
#: i.e. n >= 13; coarser grids are rejected by the scenario constructors.
WINDOW_INNER = 0.18
WINDOW_OUTER = 0.40


def _require_window_resolution(grid: GridSpec) -> None:
    if 2.0 * grid.h > WINDOW_INNER * grid.extent:
        raise InvalidScenario(
            f"grid too coarse for the boundary window: need 2h <= {WINDOW_INNER} L "
            f"(n >= {int(np.ceil(2.0 / WINDOW_INNER)) + 1}), got n = {grid.n}"
        )

SCENARIOS = ("equilibrium", "small_perturbation", "strong_twist")


def _smoothstep(t: np.ndarray) -> np.ndarray:
    """Quintic smoothstep: C^2, exactly 0 below 0 and exactly 1 above 1."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def boundary_window(grid: GridSpec) -> np.ndarray:
    """Scalar window: exactly 0 within WINDOW_INNER of any face, 1 deep inside."""
    xi = grid.axis() / grid.extent
    edge = np.minimum(xi, 1.0 - xi)
    w1 = _smoothstep((edge - WINDOW_INNER) / (WINDOW_OUTER - WINDOW_INNER))
    return w1[:, None, None] * w1[None, :, None] * w1[None, None, :]


def _unit_vector(e) -> np.ndarray:
    e = np.asarray(e, dtype=np.float64)
    if e.shape != (3,):
        raise InvalidScenario("reference director must be a 3-vector")
    norm = float(np.linalg.norm(e))
    if norm == 0.0:
        raise InvalidScenario("reference director must be nonzero")
    return e / norm


def _zero_pressure(grid: GridSpec) -> ScalarField:
    return ScalarField(grid, np.zeros(grid.shape))


def solenoidal_bump_velocity(grid: GridSpec, epsilon: float) -> VectorField:
    """epsilon times the discrete curl of a windowed stream field.

    The stream is (0, 0, S) with S vanishing identically near the boundary,
    so the velocity is exactly zero on boundary nodes and its interior
    central-difference divergence cancels to round-off.
    """
    _require_window_resolution(grid)
    x, y, z = grid.meshgrid()
    L = grid.extent
    stream = boundary_window(grid) * np.sin(2.0 * np.pi * x / L) * np.sin(np.pi * y / L)
    h = grid.h
    values = np.zeros(grid.shape + (3,))
    values[..., 0] = diff_axis(stream, 1, h)
    values[..., 1] = -diff_axis(stream, 0, h)
    return VectorField(grid, epsilon * values)


def equilibrium_state(grid: GridSpec, e) -> StateSnapshot:
    """u = 0, d = e everywhere: the exact fixed point of the system."""
    e = _unit_vector(e)
    u = VectorField(grid, np.zeros(grid.shape + (3,)))
    d = VectorField(grid, np.broadcast_to(e, grid.shape + (3,)).copy())
    return StateSnapshot(u, d, _zero_pressure(grid), time=0.0)


def perturbed_state(grid: GridSpec, e, epsilon: float) -> StateSnapshot:
    """Small smooth departure from equilibrium (the paper's global regime).

    d is the pointwise normalization of e + epsilon * phi with phi a smooth
    bump vanishing with its gradient on the boundary and |phi| <= 1, so
    ||d - e||_inf <= 2 epsilon; u is the solenoidal windowed curl scaled by
    epsilon.
    """
    if epsilon < 0:
        raise InvalidScenario("perturbation amplitude must be nonnegative")
    if epsilon >= 0.5:
        raise InvalidScenario(
            "perturbation amplitude must stay below 0.5 to keep the director "
            "normalizable; use the strong_twist scenario for large data"
        )
    e = _unit_vector(e)
    x, y, z = grid.meshgrid()
    L = grid.extent
    bump1 = lambda t: (4.0 * (t / L) * (1.0 - t / L)) ** 2
    bump = bump1(x) * bump1(y) * bump1(z)
    scale = 1.0 / np.sqrt(3.0)
    phi = np.empty(grid.shape + (3,))
    phi[..., 0] = bump * np.sin(np.pi * y / L) * scale
    phi[..., 1] = bump * np.sin(np.pi * z / L) * scale
    phi[..., 2] = bump * np.sin(np.pi * x / L) * scale

    raw = e + epsilon * phi
    mag = np.sqrt(np.einsum("...c,...c->...", raw, raw))
    d = VectorField(grid, raw / mag[..., None])
    u = solenoidal_bump_velocity(grid, epsilon)
    return StateSnapshot(u, d, _zero_pressure(grid), time=0.0)


def twisted_state(grid: GridSpec, wavenumber: int, amplitude: float = 1.0
                  ) -> StateSnapshot:
    """In-plane director twist with constant boundary trace (1, 0, 0).

    theta = amplitude * wavenumber * pi * (x/L) * window, so the window
    flattens the phase to zero near every face and the trace is exactly the
    constant first basis vector. u = 0. Large amplitudes/wavenumbers leave
    the small-data regime; runs on such data are exploratory by design.
    """
    if wavenumber < 1:
        raise InvalidScenario("twist wavenumber must be a positive integer")
    _require_window_resolution(grid)
    x, _, _ = grid.meshgrid()
    L = grid.extent
    theta = amplitude * wavenumber * np.pi * (x / L) * boundary_window(grid)
    values = np.zeros(grid.shape + (3,))
    values[..., 0] = np.cos(theta)
    values[..., 1] = np.sin(theta)
    d = VectorField(grid, values)
    u = VectorField(grid, np.zeros(grid.shape + (3,)))
    return StateSnapshot(u, d, _zero_pressure(grid), time=0.0)
