"""Binary field/trajectory dumps and CSV line export.

Field record layout (little endian):
    32-byte header: magic 4s | uint32 n | uint32 components | uint32 pad
                    | float64 extent | float64 time
    payload: float64 C-order array, shape (n, n, n) or (n, n, n, components)

Magic values: b"NLCF" for a single field record, b"NLCT" for a trajectory
file. A snapshot dump is three consecutive field records (u, d, p). A
trajectory file carries one 32-byte header (components slot holds the level
count, time slot holds dt) followed by per-level raw blocks u | d | p.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import GridSpec, ScalarField, StateSnapshot, VectorField
from .trajectory import Trajectory

__all__ = [
    "write_field",
    "read_field",
    "write_snapshot",
    "read_snapshot",
    "write_trajectory",
    "read_trajectory",
    "export_line_csv",
]

_HEADER = struct.Struct("<4sIII d d")
FIELD_MAGIC = b"NLCF"
TRAJ_MAGIC = b"NLCT"
assert _HEADER.size == 32


def _pack(magic: bytes, n: int, count: int, extent: float, time: float) -> bytes:
    return _HEADER.pack(magic, n, count, 0, extent, time)


def write_field(fh, field: ScalarField | VectorField, time: float = 0.0) -> None:
    comps = 1 if isinstance(field, ScalarField) else 3
    fh.write(_pack(FIELD_MAGIC, field.grid.n, comps, field.grid.extent, time))
    fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_field(fh) -> tuple[ScalarField | VectorField, float]:
    magic, n, comps, _pad, extent, time = _HEADER.unpack(fh.read(_HEADER.size))
    if magic != FIELD_MAGIC:
        raise ValueError(f"not a field record (magic {magic!r})")
    count = n ** 3 * comps
    data = np.frombuffer(fh.read(count * 8), dtype="<f8").astype(np.float64)
    grid = GridSpec(n, extent)
    if comps == 1:
        return ScalarField(grid, data.reshape(grid.shape)), time
    return VectorField(grid, data.reshape(grid.shape + (comps,))), time


def write_snapshot(path, snap: StateSnapshot) -> None:
    with open(path, "wb") as fh:
        write_field(fh, snap.u, snap.time)
        write_field(fh, snap.d, snap.time)
        write_field(fh, snap.p, snap.time)


def read_snapshot(path) -> StateSnapshot:
    with open(path, "rb") as fh:
        u, time = read_field(fh)
        d, _ = read_field(fh)
        p, _ = read_field(fh)
    return StateSnapshot(u, d, p, time=time)


def write_trajectory(path, traj: Trajectory) -> None:
    n = traj.grid.n
    with open(path, "wb") as fh:
        fh.write(_pack(TRAJ_MAGIC, n, len(traj.snapshots), traj.grid.extent, traj.dt))
        for snap in traj.snapshots:
            fh.write(np.ascontiguousarray(snap.u.values, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(snap.d.values, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(snap.p.values, dtype="<f8").tobytes())


def read_trajectory(path) -> Trajectory:
    with open(path, "rb") as fh:
        magic, n, levels, _pad, extent, dt = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != TRAJ_MAGIC:
            raise ValueError(f"not a trajectory file (magic {magic!r})")
        grid = GridSpec(n, extent)
        vec_count = 3 * n ** 3
        sca_count = n ** 3
        snaps = []
        for k in range(levels):
            u = np.frombuffer(fh.read(vec_count * 8), dtype="<f8").astype(np.float64)
            d = np.frombuffer(fh.read(vec_count * 8), dtype="<f8").astype(np.float64)
            p = np.frombuffer(fh.read(sca_count * 8), dtype="<f8").astype(np.float64)
            snaps.append(
                StateSnapshot(
                    VectorField(grid, u.reshape(grid.shape + (3,))),
                    VectorField(grid, d.reshape(grid.shape + (3,))),
                    ScalarField(grid, p.reshape(grid.shape)),
                    time=k * dt,
                )
            )
    return Trajectory(grid, dt, tuple(snaps))


def export_line_csv(path, field: ScalarField | VectorField, axis: int = 0,
                    j: int | None = None, k: int | None = None) -> None:
    """Dump a 1D axis-aligned slice: coordinate column plus value column(s).

    j, k index the two transverse axes (in increasing axis order); they
    default to the midplane.
    """
    if axis not in (0, 1, 2):
        raise ValueError("axis must be 0, 1 or 2")
    n = field.grid.n
    j = n // 2 if j is None else j
    k = n // 2 if k is None else k
    idx = [j, k]
    idx.insert(axis, slice(None))
    line = field.values[tuple(idx)]
    coords = field.grid.axis()
    with open(path, "w", newline="") as fh:
        if isinstance(field, ScalarField):
            fh.write("coord,value\n")
            for c, v in zip(coords, line):
                fh.write(f"{c!r},{v!r}\n")
        else:
            fh.write("coord,vx,vy,vz\n")
            for c, row in zip(coords, line):
                fh.write(f"{c!r},{row[0]!r},{row[1]!r},{row[2]!r}\n")


def _ensure_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out
