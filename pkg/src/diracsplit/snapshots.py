"""Binary snapshot files for spinor fields.

Layout (all little-endian):

    bytes 0..3   magic "DSPN"
    u32          format version (currently 1)
    u32          d, number of spatial dimensions
    u32          ncomp, number of spinor components
    u32 * d      grid points per axis, axis 0 (x) first
    f64          simulation time t
    f64 * 2N     field data as (re, im) pairs

The data block runs with the component index fastest, then axis 0,
then axis 1, and so on; the last axis varies slowest.  Grid bounds are
not stored; they live in the run configuration or summary file.
"""

from __future__ import annotations

import struct

import numpy as np

from .fields import SpinorField

MAGIC = b"DSPN"
VERSION = 1


class SnapshotFormatError(ValueError):
    pass


def _spatial_reversed(data, ndim):
    axes = tuple(reversed(range(ndim))) + (ndim,)
    return np.transpose(data, axes)


def write_snapshot(path, field, t):
    """Write one field at time t; returns the byte count."""
    data = np.ascontiguousarray(_spatial_reversed(field.data, field.grid.ndim),
                                dtype=np.complex128)
    ncomp = field.data.shape[-1]
    header = struct.pack("<4sIII", MAGIC, VERSION, field.grid.ndim, ncomp)
    header += struct.pack(f"<{field.grid.ndim}I", *field.grid.shape)
    header += struct.pack("<d", float(t))
    # complex128 is an adjacent (re, im) float64 pair in memory
    payload = data.astype("<c16", copy=False).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    return len(header) + len(payload)


def read_snapshot(path):
    """Read a snapshot; returns (t, data) with data shaped (*M, ncomp)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise SnapshotFormatError(f"{path}: not a DSPN snapshot")
    version, d, ncomp = struct.unpack_from("<III", raw, 4)
    if version != VERSION:
        raise SnapshotFormatError(f"{path}: unsupported version {version}")
    if d not in (1, 2, 3):
        raise SnapshotFormatError(f"{path}: bad dimension {d}")
    if ncomp not in (2, 4):
        raise SnapshotFormatError(f"{path}: bad component count {ncomp}")
    off = 16
    shape = struct.unpack_from(f"<{d}I", raw, off)
    off += 4 * d
    (t,) = struct.unpack_from("<d", raw, off)
    off += 8
    n = ncomp
    for m in shape:
        n *= m
    expect = off + 16 * n
    if len(raw) != expect:
        raise SnapshotFormatError(f"{path}: expected {expect} bytes, "
                                  f"got {len(raw)}")
    flat = np.frombuffer(raw, dtype="<c16", offset=off, count=n)
    data = flat.reshape(tuple(reversed(shape)) + (ncomp,))
    return t, np.ascontiguousarray(_spatial_reversed(data, d))


def read_snapshot_field(path, grid):
    """Read a snapshot onto a known grid; returns (t, SpinorField)."""
    t, data = read_snapshot(path)
    if data.shape[:-1] != grid.shape:
        raise SnapshotFormatError(
            f"{path}: stored shape {data.shape[:-1]} does not match the "
            f"grid {grid.shape}")
    return t, SpinorField(grid, data)
