"""Second-order finite-difference operators on the uniform box lattice.

Interior nodes use central differences (7-point stencil for the Laplacian);
boundary nodes use second-order one-sided differences so first derivatives
are defined everywhere (the elastic stress needs boundary values of grad d).
The Laplacian is only defined at interior nodes; its boundary entries are
returned as zero and must never be consumed (solvers impose boundary values).

Everything here is a pure function of its arguments and linear in the
differentiated field; stencils are separable, so mixed difference operators
along distinct axes commute exactly.
"""

from __future__ import annotations

import numpy as np

from .grid import GridSpec, ScalarField, VectorField

__all__ = [
    "gradient",
    "divergence",
    "laplacian",
    "advect",
    "hessian_contract",
    "diff_axis",
    "diff2_axis",
    "grad_squared",
]


def _sl(axis: int, s) -> tuple:
    idx = [slice(None), slice(None), slice(None)]
    idx[axis] = s
    return tuple(idx) + (Ellipsis,)


def diff_axis(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """First derivative along a spatial axis; central interior, one-sided ends."""
    out = np.empty_like(values)
    out[_sl(axis, slice(1, -1))] = (
        values[_sl(axis, slice(2, None))] - values[_sl(axis, slice(None, -2))]
    ) / (2.0 * h)
    out[_sl(axis, 0)] = (
        -3.0 * values[_sl(axis, 0)] + 4.0 * values[_sl(axis, 1)] - values[_sl(axis, 2)]
    ) / (2.0 * h)
    out[_sl(axis, -1)] = (
        3.0 * values[_sl(axis, -1)] - 4.0 * values[_sl(axis, -2)] + values[_sl(axis, -3)]
    ) / (2.0 * h)
    return out


def diff2_axis(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Second derivative along one axis; 3-point interior, one-sided ends."""
    out = np.empty_like(values)
    h2 = h * h
    out[_sl(axis, slice(1, -1))] = (
        values[_sl(axis, slice(2, None))]
        - 2.0 * values[_sl(axis, slice(1, -1))]
        + values[_sl(axis, slice(None, -2))]
    ) / h2
    out[_sl(axis, 0)] = (
        2.0 * values[_sl(axis, 0)]
        - 5.0 * values[_sl(axis, 1)]
        + 4.0 * values[_sl(axis, 2)]
        - values[_sl(axis, 3)]
    ) / h2
    out[_sl(axis, -1)] = (
        2.0 * values[_sl(axis, -1)]
        - 5.0 * values[_sl(axis, -2)]
        + 4.0 * values[_sl(axis, -3)]
        - values[_sl(axis, -4)]
    ) / h2
    return out


def _laplacian_values(values: np.ndarray, h: float) -> np.ndarray:
    """7-point Laplacian at interior nodes; boundary entries zeroed."""
    out = np.zeros_like(values)
    core = values[1:-1, 1:-1, 1:-1]
    acc = -6.0 * core
    acc = acc + values[2:, 1:-1, 1:-1] + values[:-2, 1:-1, 1:-1]
    acc = acc + values[1:-1, 2:, 1:-1] + values[1:-1, :-2, 1:-1]
    acc = acc + values[1:-1, 1:-1, 2:] + values[1:-1, 1:-1, :-2]
    out[1:-1, 1:-1, 1:-1] = acc / (h * h)
    return out


def gradient(f: ScalarField) -> VectorField:
    """Discrete gradient of a scalar field."""
    h = f.grid.h
    values = np.stack([diff_axis(f.values, a, h) for a in range(3)], axis=-1)
    return VectorField(f.grid, values)


def divergence(v: VectorField) -> ScalarField:
    """Discrete divergence, the gradient stencil applied componentwise and summed."""
    h = v.grid.h
    out = diff_axis(v.values[..., 0], 0, h)
    out += diff_axis(v.values[..., 1], 1, h)
    out += diff_axis(v.values[..., 2], 2, h)
    return ScalarField(v.grid, out)


def laplacian(f: ScalarField | VectorField) -> ScalarField | VectorField:
    """7-point Laplacian at interior nodes (boundary entries are zero, unused)."""
    out = _laplacian_values(f.values, f.grid.h)
    if isinstance(f, ScalarField):
        return ScalarField(f.grid, out)
    return VectorField(f.grid, out)


def advect(u: VectorField, g: ScalarField | VectorField) -> ScalarField | VectorField:
    """(u . grad) g with central differences, componentwise on g."""
    if u.grid != g.grid:
        raise ValueError("advect requires fields on a shared grid")
    h = u.grid.h
    if isinstance(g, ScalarField):
        out = u.values[..., 0] * diff_axis(g.values, 0, h)
        out += u.values[..., 1] * diff_axis(g.values, 1, h)
        out += u.values[..., 2] * diff_axis(g.values, 2, h)
        return ScalarField(g.grid, out)
    out = u.values[..., 0:1] * diff_axis(g.values, 0, h)
    out += u.values[..., 1:2] * diff_axis(g.values, 1, h)
    out += u.values[..., 2:3] * diff_axis(g.values, 2, h)
    return VectorField(g.grid, out)


def grad_squared(d: VectorField) -> np.ndarray:
    """Pointwise squared Frobenius norm of grad d, i.e. sum_{i,m} (d_m/dx_i)^2."""
    h = d.grid.h
    out = np.zeros(d.grid.shape)
    for axis in range(3):
        der = diff_axis(d.values, axis, h)
        out += np.einsum("...c,...c->...", der, der)
    return out


def hessian_contract(d: VectorField) -> VectorField:
    """grad(|grad d|^2 / 2), the Hessian-gradient contraction of the director."""
    half_sq = ScalarField(d.grid, 0.5 * grad_squared(d))
    return gradient(half_sq)
