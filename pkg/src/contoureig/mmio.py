"""Matrix Market reading and writing for pencil matrices.

Wraps scipy's Matrix Market support: reads coordinate or array files of any
numeric field (real files are promoted to complex), writes complex files
with 17 significant digits so that values round-trip bit-exactly.
"""

from __future__ import annotations

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import InputFormatError, MatrixDataError

__all__ = ["read_matrix", "write_matrix"]


def read_matrix(path):
    """Read one matrix; sparse files yield CSR arrays, array files ndarrays."""
    try:
        mat = scipy.io.mmread(path)
    except OSError:
        raise
    except Exception as exc:
        raise InputFormatError(f"{path}: not a readable Matrix Market file ({exc})") from exc
    if sp.issparse(mat):
        out = sp.csr_array(mat).astype(np.complex128)
        out.sum_duplicates()
        if out.nnz and not np.all(np.isfinite(out.data)):
            raise MatrixDataError(f"{path}: contains non-finite entries")
        return out
    arr = np.asarray(mat, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise MatrixDataError(f"{path}: contains non-finite entries")
    return arr


def write_matrix(path, mat) -> None:
    """Write a dense or sparse complex matrix with full float64 fidelity."""
    if sp.issparse(mat):
        payload = sp.coo_matrix(mat.astype(np.complex128))
    else:
        payload = np.asarray(mat, dtype=np.complex128)
    scipy.io.mmwrite(path, payload, field="complex", precision=16)
