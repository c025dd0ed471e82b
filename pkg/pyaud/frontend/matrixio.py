# encoding: utf-8
"""Flat binary matrix files and CSV dumps.

Binary layout, little endian::

    8 bytes   magic b"PYAUDMAT"
    uint32    rows (T)
    uint32    columns (D)
    float64   frame shift in seconds (0 for non temporal matrices)
    float64   rows * columns values, row major
"""
import logging
import struct

import numpy as np

from pyaud.errors import CorruptFile, NotFound, UnsupportedFormat

__all__ = ["MAGIC", "write_matrix", "read_matrix", "write_csv"]

logger = logging.getLogger(__name__)

MAGIC = b"PYAUDMAT"
_HEADER = struct.Struct("<8sIId")


def write_matrix(path, matrix, frame_shift=0.0):
    matrix = np.ascontiguousarray(matrix, dtype="<f8")
    if matrix.ndim != 2:
        matrix = matrix.reshape(len(matrix), -1)
    rows, cols = matrix.shape
    with open(path, "wb") as fid:
        fid.write(_HEADER.pack(MAGIC, rows, cols, float(frame_shift)))
        fid.write(matrix.tobytes())
    logger.debug("Wrote %dx%d matrix to %s", rows, cols, path)


def read_matrix(path):
    """Return (matrix, frame_shift)."""
    try:
        with open(path, "rb") as fid:
            header = fid.read(_HEADER.size)
            payload = fid.read()
    except FileNotFoundError:
        raise NotFound("File not found: {0}".format(path))
    if len(header) < _HEADER.size:
        raise CorruptFile("Truncated matrix header in {0}".format(path))
    magic, rows, cols, frame_shift = _HEADER.unpack(header)
    if magic != MAGIC:
        raise UnsupportedFormat("Not a pyaud matrix file: {0}".format(path))
    expected = rows * cols * 8
    if len(payload) != expected:
        msg = "Matrix {0} declares {1} bytes of data, found {2}."
        raise CorruptFile(msg.format(path, expected, len(payload)))
    matrix = np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()
    return matrix, frame_shift


def write_csv(path, matrix, header=None):
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    comments = ""
    hdr = ""
    if header is not None:
        hdr = ",".join(header)
    np.savetxt(path, matrix, delimiter=",", fmt="%.9g", header=hdr, comments=comments)
