"""Discrete surrogates of the tracked norm functionals, plus physical diagnostics.

The interpolation-scale norms of the analysis (Besov / Stokes fractional
domains) enter every estimate the harness checks only through sup-norm
embeddings and L^q bounds, so they are replaced by the computable proxy

    proxy(f) = ||f||_inf + ||grad f||_inf + ||f||_q.

This is the single largest modeling decision in the package: the proxy
preserves every inequality the tests exercise while staying evaluable on a
grid. Space norms use flat h^3 quadrature over all nodes (boundary weights
affect constants only, never the asserted convergence orders); time norms
are left-endpoint-free Riemann sums (levels 1..K), so window-wise
accumulation reproduces the whole-trajectory value. All reductions run in a
fixed deterministic order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ScalarField, StateSnapshot, VectorField
from .operators import diff_axis, diff2_axis, grad_squared
from .trajectory import Trajectory

__all__ = [
    "NormConfig",
    "NormReport",
    "lq_norm",
    "w2q_norm",
    "proxy_trace_norm",
    "lp_time_norm",
    "h_functional",
    "HFunctionalAccumulator",
    "unit_drift",
    "energy",
    "divergence_residual",
]


@dataclass(frozen=True)
class NormConfig:
    """Time exponent p and space exponent q with (1 - 2/p) q > 3."""

    p: float = 4.0
    q: float = 8.0

    def __post_init__(self):
        if not (1.0 < self.p < np.inf and 1.0 < self.q < np.inf):
            raise ValueError("exponents must lie in (1, inf)")
        if not (1.0 - 2.0 / self.p) * self.q > 3.0:
            raise ValueError(
                f"exponent pair (p={self.p}, q={self.q}) violates (1 - 2/p) q > 3"
            )


@dataclass(frozen=True)
class NormReport:
    """The seven tracked components and their sum."""

    sup_proxy_u: float
    sup_proxy_d: float
    lp_w2q_u: float
    lp_w2q_d: float
    lp_dt_u: float
    lp_dt_d: float
    lp_gradP: float
    H_total: float

    def __post_init__(self):
        parts = self.components()
        for name, value in parts.items():
            if value < 0 or not np.isfinite(value):
                raise ValueError(f"norm component {name} must be finite and nonnegative")
        total = sum(parts.values())
        if abs(self.H_total - total) > 1e-12 * max(total, 1e-300):
            raise ValueError("H_total must equal the component sum")

    def components(self) -> dict[str, float]:
        return {
            "sup_proxy_u": self.sup_proxy_u,
            "sup_proxy_d": self.sup_proxy_d,
            "lp_w2q_u": self.lp_w2q_u,
            "lp_w2q_d": self.lp_w2q_d,
            "lp_dt_u": self.lp_dt_u,
            "lp_dt_d": self.lp_dt_d,
            "lp_gradP": self.lp_gradP,
        }

    @classmethod
    def from_components(cls, **parts) -> "NormReport":
        return cls(H_total=sum(parts.values()), **parts)

    def velocity_part(self) -> float:
        """Velocity/pressure block: the discrete F functional."""
        return self.sup_proxy_u + self.lp_w2q_u + self.lp_dt_u + self.lp_gradP

    def director_part(self) -> float:
        """Director block: the discrete E functional."""
        return self.sup_proxy_d + self.lp_w2q_d + self.lp_dt_d


def _magnitude(values: np.ndarray) -> np.ndarray:
    """Euclidean magnitude over any trailing component axes."""
    if values.ndim == 3:
        return np.abs(values)
    flat = values.reshape(values.shape[:3] + (-1,))
    return np.sqrt(np.einsum("...c,...c->...", flat, flat))


def _values_of(f) -> tuple[np.ndarray, float]:
    if isinstance(f, (ScalarField, VectorField)):
        return f.values, f.grid.h
    raise TypeError(f"expected a field, got {type(f).__name__}")


def lq_norm(f: ScalarField | VectorField, q: float) -> float:
    """(h^3 sum |f|^q)^(1/q) over all nodes, |f| the Euclidean magnitude."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    values, h = _values_of(f)
    mag = _magnitude(values)
    return float((h ** 3 * np.sum(mag ** q)) ** (1.0 / q))


def _lq_of_array(mag: np.ndarray, h: float, q: float) -> float:
    return float((h ** 3 * np.sum(mag ** q)) ** (1.0 / q))


def _first_derivatives(values: np.ndarray, h: float) -> list[np.ndarray]:
    return [diff_axis(values, a, h) for a in range(3)]


def _second_sq(values: np.ndarray, h: float, firsts: list[np.ndarray]) -> np.ndarray:
    """Pointwise squared Frobenius norm of the full second-derivative tensor."""
    out = np.zeros(values.shape[:3])
    for a in range(3):
        d2 = diff2_axis(values, a, h)
        out += _magnitude(d2) ** 2
    for a in range(3):
        for b in range(a + 1, 3):
            mixed = diff_axis(firsts[a], b, h)
            out += 2.0 * _magnitude(mixed) ** 2
    return out


def w2q_norm(f: ScalarField | VectorField, q: float) -> float:
    """||f||_q + ||grad f||_q + ||second derivatives||_q (Frobenius magnitudes)."""
    values, h = _values_of(f)
    firsts = _first_derivatives(values, h)
    grad_sq = np.zeros(values.shape[:3])
    for g in firsts:
        grad_sq += _magnitude(g) ** 2
    out = _lq_of_array(_magnitude(values), h, q)
    out += _lq_of_array(np.sqrt(grad_sq), h, q)
    out += _lq_of_array(np.sqrt(_second_sq(values, h, firsts)), h, q)
    return out


def proxy_trace_norm(f: ScalarField | VectorField, cfg: NormConfig | None = None) -> float:
    """||f||_inf + ||grad f||_inf + ||f||_q: the computable trace-norm stand-in."""
    cfg = cfg or NormConfig()
    values, h = _values_of(f)
    grad_sq = np.zeros(values.shape[:3])
    for g in _first_derivatives(values, h):
        grad_sq += _magnitude(g) ** 2
    mag = _magnitude(values)
    return float(mag.max()) + float(np.sqrt(grad_sq.max())) + _lq_of_array(mag, h, cfg.q)


def lp_time_norm(values, p: float, dt: float) -> float:
    """(dt sum v_k^p)^(1/p) over the supplied per-level values."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        return 0.0
    return float((dt * np.sum(arr ** p)) ** (1.0 / p))


def _shift_director(d: VectorField, ref_director) -> VectorField:
    if ref_director is None:
        return d
    e = np.asarray(ref_director, dtype=np.float64)
    if e.shape != (3,):
        raise ValueError("reference director must be a 3-vector")
    return VectorField(d.grid, d.values - e)


class HFunctionalAccumulator:
    """Streams the cumulative norm functional across consecutive time windows.

    Sup components take running maxima over every seen level; L^p-in-time
    components accumulate dt-weighted p-th powers over levels 1..K of each
    window (the shared restart level is never double counted). Backward time
    differences at a window's level 1 reach back to its level 0, which is the
    previous window's final level, so the stream matches the one-shot
    evaluation of the concatenated trajectory.
    """

    def __init__(self, cfg: NormConfig | None = None, ref_director=None):
        self.cfg = cfg or NormConfig()
        self.ref = ref_director
        self._sup_u = 0.0
        self._sup_d = 0.0
        self._sums = {"w2q_u": 0.0, "w2q_d": 0.0, "dt_u": 0.0, "dt_d": 0.0, "gradP": 0.0}

    def add_window(self, traj: Trajectory) -> None:
        cfg = self.cfg
        dt = traj.dt
        grid = traj.grid
        h = grid.h
        for snap in traj.snapshots:
            self._sup_u = max(self._sup_u, proxy_trace_norm(snap.u, cfg))
            self._sup_d = max(self._sup_d, proxy_trace_norm(_shift_director(snap.d, self.ref), cfg))
        p = cfg.p
        for k in range(1, traj.steps + 1):
            cur, prev = traj.snapshots[k], traj.snapshots[k - 1]
            self._sums["w2q_u"] += dt * w2q_norm(cur.u, cfg.q) ** p
            self._sums["w2q_d"] += dt * w2q_norm(_shift_director(cur.d, self.ref), cfg.q) ** p
            du = VectorField(grid, (cur.u.values - prev.u.values) / dt)
            dd = VectorField(grid, (cur.d.values - prev.d.values) / dt)
            self._sums["dt_u"] += dt * lq_norm(du, cfg.q) ** p
            self._sums["dt_d"] += dt * lq_norm(dd, cfg.q) ** p
            gp = np.stack([diff_axis(cur.p.values, a, h) for a in range(3)], axis=-1)
            self._sums["gradP"] += dt * lq_norm(VectorField(grid, gp), cfg.q) ** p

    def report(self) -> NormReport:
        p = self.cfg.p
        return NormReport.from_components(
            sup_proxy_u=self._sup_u,
            sup_proxy_d=self._sup_d,
            lp_w2q_u=self._sums["w2q_u"] ** (1.0 / p),
            lp_w2q_d=self._sums["w2q_d"] ** (1.0 / p),
            lp_dt_u=self._sums["dt_u"] ** (1.0 / p),
            lp_dt_d=self._sums["dt_d"] ** (1.0 / p),
            lp_gradP=self._sums["gradP"] ** (1.0 / p),
        )


def h_functional(traj: Trajectory, ref_director=None, cfg: NormConfig | None = None
                 ) -> NormReport:
    """Assemble all seven components over one trajectory.

    ref_director of None measures the director as-is (the Picard residual
    functionals); a unit vector e measures d - e (the small-data functional).
    Time derivatives are backward differences; the pressure enters through
    its gradient.
    """
    acc = HFunctionalAccumulator(cfg, ref_director)
    acc.add_window(traj)
    return acc.report()


def unit_drift(traj: Trajectory) -> float:
    """Max over space-time of | |d| - 1 |."""
    worst = 0.0
    for snap in traj.snapshots:
        worst = max(worst, float(np.abs(snap.d.magnitude() - 1.0).max()))
    return worst


def energy(snapshot: StateSnapshot) -> tuple[float, float, float]:
    """(kinetic, elastic, total) with flat h^3 weights."""
    h3 = snapshot.grid.h ** 3
    kin = 0.5 * h3 * float(np.sum(snapshot.u.values ** 2))
    ela = 0.5 * h3 * float(np.sum(grad_squared(snapshot.d)))
    return kin, ela, kin + ela


def divergence_residual(snapshot: StateSnapshot) -> float:
    """Max-norm of the discrete velocity divergence at interior nodes."""
    h = snapshot.grid.h
    div = diff_axis(snapshot.u.values[..., 0], 0, h)
    div += diff_axis(snapshot.u.values[..., 1], 1, h)
    div += diff_axis(snapshot.u.values[..., 2], 2, h)
    return float(np.abs(div[1:-1, 1:-1, 1:-1]).max())
