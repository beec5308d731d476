"""Nonlinear forcing assembly for the coupled momentum / director system.

The elastic stress uses the expanded identity

    div(grad d (.) grad d) = grad(|grad d|^2 / 2) + (Lap d) . (grad d),

one fewer differentiation of products than differentiating the assembled
3x3 matrix; the direct matrix form lives in the test suite as the oracle.
The (i, j) entry of the matrix is the contraction sum_m (d_m/dx_i)(d_m/dx_j).
"""

from __future__ import annotations

import numpy as np

from .grid import ScalarField, StateSnapshot, VectorField
from .operators import advect, diff_axis, grad_squared, hessian_contract, laplacian

__all__ = ["elastic_stress", "ginzburg_term", "momentum_forcing", "director_forcing"]


def elastic_stress(d: VectorField) -> VectorField:
    """div(grad d (.) grad d) via the expanded identity."""
    h = d.grid.h
    lap = laplacian(d).values
    out = hessian_contract(d).values.copy()
    for axis in range(3):
        der = diff_axis(d.values, axis, h)
        out[..., axis] += np.einsum("...c,...c->...", lap, der)
    return VectorField(d.grid, out)


def ginzburg_term(d: VectorField) -> VectorField:
    """|grad d|^2 d, the sphere-tangency source of the director equation."""
    return VectorField(d.grid, grad_squared(d)[..., None] * d.values)


def momentum_forcing(s: StateSnapshot) -> VectorField:
    """-(u . grad) u - div(grad d (.) grad d), the frozen momentum right side."""
    adv = advect(s.u, s.u)
    stress = elastic_stress(s.d)
    return VectorField(s.grid, -adv.values - stress.values)


def director_forcing(s: StateSnapshot) -> VectorField:
    """-(u . grad) d + |grad d|^2 d, the frozen director right side."""
    adv = advect(s.u, s.d)
    gb = ginzburg_term(s.d)
    return VectorField(s.grid, -adv.values + gb.values)
