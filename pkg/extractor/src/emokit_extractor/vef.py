"""VEF1 writer, implemented against the documented byte layout.

Layout: 4-byte magic b"VEF1", uint32 LE n_rows, uint32 LE dim, then
n_rows*dim float32 LE values in row-major order. This is the pipeline's
interchange format; the extractor writes it without importing the
pipeline package so the two stay coupled only through bytes on disk.

Writes are atomic: payload goes to a temp file in the target directory,
then os.replace moves it into place.
"""

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import NumericalError, ValidationError

VEF_MAGIC = b"VEF1"
VEF_HEADER = struct.Struct("<4sII")


def write_vef1(path, features) -> None:
    """Write a (n_rows, dim) float matrix to `path` atomically."""
    path = Path(path)
    arr = np.ascontiguousarray(features, dtype="<f4")
    if arr.ndim != 2:
        raise ValidationError(f"{path.name}: features must be 2-D, got shape {arr.shape}")
    n_rows, dim = arr.shape
    if n_rows < 1 or dim < 1:
        raise ValidationError(f"{path.name}: empty feature matrix {arr.shape}")
    if not np.isfinite(arr).all():
        raise NumericalError(f"{path.name}: non-finite feature values")
    header = VEF_HEADER.pack(VEF_MAGIC, n_rows, dim)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(arr.tobytes())
            fh.flush()
            os.fsync(fh.fileno())
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
