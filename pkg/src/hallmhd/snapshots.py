"""Binary state snapshots, format "HMHD1".

Byte layout (all little-endian):

    offset  size  field
    0       5     magic b"HMHD1"
    5       1     dim (u8)
    6       4     n (u32)
    10      1     components per field (u8, always 3)
    11      8     alpha (f64)
    19      8     s (f64)
    27      8     t (f64)
    35      ...   u coefficients: components * n^dim complex64, C order
    ...     ...   b coefficients: same size

Coefficients are stored complex64; reading returns complex128 fields upcast
from the stored values, so read -> write reproduces a file byte-exactly.
"""

from __future__ import annotations

import struct

import numpy as np

from .spectral import Grid, MhdState, SpectralField

MAGIC = b"HMHD1"
_HEADER = struct.Struct("<5sBIBddd")


class SnapshotError(Exception):
    pass


def write_snapshot(path: str, state: MhdState, alpha: float, s: float) -> None:
    grid = state.u.grid
    header = _HEADER.pack(MAGIC, grid.dim, grid.n, state.u.components,
                          float(alpha), float(s), float(state.t))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.u.coeffs, dtype="<c8").tobytes())
        fh.write(np.ascontiguousarray(state.b.coeffs, dtype="<c8").tobytes())


def read_snapshot(path: str):
    """Returns (MhdState, meta) with meta = {'alpha': ..., 's': ...}."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise SnapshotError("unexpected end of snapshot (truncated header)")
        magic, dim, n, ncomp, alpha, s, t = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise SnapshotError(f"bad magic {magic!r}, expected {MAGIC.decode()!r}")
        grid = Grid(dim, n)
        count = ncomp * grid.npoints
        fields = []
        for _ in range(2):
            block = fh.read(count * 8)
            if len(block) < count * 8:
                raise SnapshotError("unexpected end of snapshot (truncated coefficients)")
            coeffs = np.frombuffer(block, dtype="<c8").astype(np.complex128)
            fields.append(SpectralField(grid, coeffs.reshape((ncomp,) + grid.shape)))
        if fh.read(1):
            raise SnapshotError("trailing bytes after snapshot payload")
    return MhdState(fields[0], fields[1], t), {"alpha": alpha, "s": s}
