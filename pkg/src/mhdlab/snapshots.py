"""Binary field snapshots, format MHDS1.

Layout (all multi-byte values little-endian regardless of host):

    bytes 0..4   magic "MHDS1"
    u8           dimension D
    u32          points per axis N
    f64          box period L
    f64          snapshot time t
    u8           role bitmask: 1 = U, 2 = B, 4 = total pressure
    u32          metadata length, then that many UTF-8 bytes
    payload      f64 arrays in C (row-major) order: U components, then B
                 components, then the pressure

Round trips are bit-exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import SnapshotError
from .spectral import Grid, ScalarField, SpectralField

__all__ = ["Snapshot", "write_snapshot", "read_snapshot", "MAGIC"]

MAGIC = b"MHDS1"
_HEADER = struct.Struct("<BIddB")
_ROLE_U, _ROLE_B, _ROLE_P = 1, 2, 4


@dataclass(frozen=True)
class Snapshot:
    grid: Grid
    time: float
    u: SpectralField | None
    b: SpectralField | None
    pressure: ScalarField | None
    meta: str = ""


def write_snapshot(path, snapshot: Snapshot) -> None:
    roles = 0
    arrays: list[np.ndarray] = []
    if snapshot.u is not None:
        roles |= _ROLE_U
        arrays.extend(snapshot.u.physical)
    if snapshot.b is not None:
        roles |= _ROLE_B
        arrays.extend(snapshot.b.physical)
    if snapshot.pressure is not None:
        roles |= _ROLE_P
        arrays.append(snapshot.pressure.physical)
    meta = snapshot.meta.encode("utf-8")
    grid = snapshot.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(grid.dim, grid.n, grid.length, snapshot.time, roles))
        fh.write(struct.pack("<I", len(meta)))
        fh.write(meta)
        for arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read_exact(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise SnapshotError(f"truncated snapshot while reading {what}")
    return data


def read_snapshot(path) -> Snapshot:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise SnapshotError(
                f"bad magic {magic!r}: not an {MAGIC.decode()} snapshot"
            )
        dim, n, length, time, roles = _HEADER.unpack(
            _read_exact(fh, _HEADER.size, "header")
        )
        (meta_len,) = struct.unpack("<I", _read_exact(fh, 4, "metadata length"))
        meta = _read_exact(fh, meta_len, "metadata").decode("utf-8")
        grid = Grid(dim=dim, n=n, length=length)

        def read_array(shape, what):
            raw = _read_exact(fh, 8 * int(np.prod(shape)), what)
            return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)

        u = b = pressure = None
        if roles & _ROLE_U:
            u = SpectralField.from_physical(grid, read_array((dim,) + grid.shape, "U"))
        if roles & _ROLE_B:
            b = SpectralField.from_physical(grid, read_array((dim,) + grid.shape, "B"))
        if roles & _ROLE_P:
            pressure = ScalarField.from_physical(grid, read_array(grid.shape, "pressure"))
        trailing = fh.read(1)
        if trailing:
            raise SnapshotError("trailing bytes after snapshot payload")
    return Snapshot(grid=grid, time=time, u=u, b=b, pressure=pressure, meta=meta)
