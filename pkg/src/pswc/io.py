"""Artifact I/O: the PSWC binary array format and CSV helpers.

Binary layout (little endian): magic ``PSWC``, version u16, rank u16,
one u64 per axis with the point count, then float64 pairs (re, im) in
row-major order.  Round-trips are bit exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"PSWC"
VERSION = 1


def save_pswc(path, array: np.ndarray) -> None:
    array = np.ascontiguousarray(array, dtype=complex)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HH", VERSION, array.ndim))
        fh.write(struct.pack(f"<{array.ndim}Q", *array.shape))
        inter = np.empty(array.shape + (2,), dtype="<f8")
        inter[..., 0] = array.real
        inter[..., 1] = array.imag
        fh.write(inter.tobytes())


def load_pswc(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not a PSWC file: magic {magic!r}")
        version, rank = struct.unpack("<HH", fh.read(4))
        if version != VERSION:
            raise ValueError(f"unsupported PSWC version {version}")
        shape = struct.unpack(f"<{rank}Q", fh.read(8 * rank))
        flat = np.frombuffer(fh.read(), dtype="<f8").reshape(shape + (2,))
    return (flat[..., 0] + 1j * flat[..., 1]).reshape(shape)


def save_matrix_csv(path, matrix: np.ndarray) -> None:
    """Real matrix as CSV, row-major, one row per line."""
    np.savetxt(path, np.asarray(matrix, dtype=float), delimiter=",")


def load_matrix_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))


def save_field_slice_csv(path, array: np.ndarray) -> None:
    """1D/2D complex slice as CSV with re/im column pairs."""
    arr = np.atleast_2d(np.asarray(array, dtype=complex))
    if arr.ndim != 2:
        raise ValueError("CSV export handles 1D/2D slices only")
    inter = np.empty((arr.shape[0], 2 * arr.shape[1]))
    inter[:, 0::2] = arr.real
    inter[:, 1::2] = arr.imag
    np.savetxt(path, inter, delimiter=",")


def write_rows_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")
