"""Binary and CSV containers for fields, ensembles and result tables.

Binary field layout (little endian)::

    int64   n
    float64 L
    int64   ncomp
    float64 payload[ncomp, n, n, 2]   # (re, im) of the full forward-normalized spectrum

The spectrum index order is numpy ``fft2`` order with x on the first axis.
An ensemble file is a plain concatenation of field containers next to a JSON
index listing byte offsets and per-member metadata.
"""

from __future__ import annotations

import csv
import io
import json
import struct

import numpy as np
import scipy.fft as sfft

from .spectral import TorusGrid, VelocityField

__all__ = [
    "field_to_bytes",
    "field_from_bytes",
    "write_field",
    "read_field",
    "write_field_csv",
    "read_field_csv",
    "write_ensemble",
    "read_ensemble",
    "format_value",
    "write_table",
    "read_table",
]

_HEADER = struct.Struct("<qdq")


def field_to_bytes(u):
    g = u.grid
    full = sfft.fft2(u.physical(), axes=(-2, -1), norm="forward")
    payload = np.empty(full.shape + (2,), dtype="<f8")
    payload[..., 0] = full.real
    payload[..., 1] = full.imag
    return _HEADER.pack(g.n, g.L, full.shape[0]) + payload.tobytes()


def field_from_bytes(buf, offset=0):
    """Decode one container starting at ``offset``; returns ``(field, end_offset)``."""
    n, L, ncomp = _HEADER.unpack_from(buf, offset)
    if ncomp != 2:
        raise ValueError(f"expected a 2-component field, got {ncomp}")
    start = offset + _HEADER.size
    count = ncomp * n * n * 2
    data = np.frombuffer(buf, dtype="<f8", count=count, offset=start).reshape(ncomp, n, n, 2)
    full = data[..., 0] + 1j * data[..., 1]
    grid = TorusGrid(int(n), float(L))
    return VelocityField(grid, full[:, :, : n // 2 + 1].copy()), start + 8 * count


def write_field(path, u):
    with open(path, "wb") as fh:
        fh.write(field_to_bytes(u))


def read_field(path):
    with open(path, "rb") as fh:
        return field_from_bytes(fh.read())[0]


def write_field_csv(path, u):
    """Physical values as ``x, y, u1, u2`` rows; meant for small grids."""
    g = u.grid
    x, y = g.coords
    vals = u.physical()
    rows = zip(x.ravel(), y.ravel(), vals[0].ravel(), vals[1].ravel())
    write_table(path, ["x", "y", "u1", "u2"], rows, header_comment=f"n={g.n} L={format_value(g.L)}")


def read_field_csv(path):
    with open(path) as fh:
        first = fh.readline()
    meta = dict(kv.split("=") for kv in first.lstrip("# ").split())
    grid = TorusGrid(int(meta["n"]), float(meta["L"]))
    cols, data = read_table(path)
    vals = np.stack([data[:, cols.index("u1")], data[:, cols.index("u2")]])
    return VelocityField.from_physical(grid, vals.reshape(2, grid.n, grid.n))


def write_ensemble(path, index_path, members):
    """Write ``members``, a list of ``(field, metadata_dict)``, plus the JSON index."""
    entries = []
    offset = 0
    with open(path, "wb") as fh:
        for u, meta in members:
            buf = field_to_bytes(u)
            fh.write(buf)
            entries.append({"offset": offset, "nbytes": len(buf), **meta})
            offset += len(buf)
    with open(index_path, "w") as fh:
        json.dump({"file": str(path), "members": entries}, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_ensemble(path, index_path):
    with open(index_path) as fh:
        index = json.load(fh)
    with open(path, "rb") as fh:
        buf = fh.read()
    out = []
    for e in index["members"]:
        u, _ = field_from_bytes(buf, e["offset"])
        meta = {k: v for k, v in e.items() if k not in ("offset", "nbytes")}
        out.append((u, meta))
    return out


def format_value(x):
    """Round-trip text form; fixed so that reruns give identical bytes."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_table(path, columns, rows, header_comment=None):
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        if isinstance(row, dict):
            row = [row[c] for c in columns]
        w.writerow([format_value(v) for v in row])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_table(path):
    """Numeric CSV written by :func:`write_table`; returns ``(columns, array)``."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    cols = next(reader)
    conv = {"true": 1.0, "false": 0.0}
    data = np.array([[conv.get(v, None) if v in conv else float(v) for v in row] for row in reader])
    return cols, data.reshape(-1, len(cols))
