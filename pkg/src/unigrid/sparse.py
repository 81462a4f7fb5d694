"""Sparse linear algebra helpers.

Matrices are ``scipy.sparse.csr_matrix`` instances kept in canonical form
(sorted column indices, no duplicates, float64 values).  The functions here
add the dimension checks, drop tolerances and structural predicates the rest
of the package relies on.
"""

import numpy as np
import scipy.io
import scipy.sparse as sp

__all__ = [
    "as_csr",
    "validate_csr",
    "spmv",
    "transpose",
    "galerkin_product",
    "residual",
    "is_z_matrix",
    "diagonal_dominance_violations",
    "is_irreducible",
    "to_dense",
    "read_matrix_market",
    "write_matrix_market",
    "read_vector",
    "write_vector",
]

DROP_TOL = 1e-14
DENSE_LIMIT = 64


def as_csr(A):
    """Return ``A`` as a canonical float64 CSR matrix (copying if needed)."""
    A = sp.csr_matrix(A, dtype=np.float64, copy=True)
    A.sum_duplicates()
    A.sort_indices()
    return A


def validate_csr(A):
    """Raise ``ValueError`` if ``A`` breaks any CSR structural invariant."""
    if not sp.isspmatrix_csr(A):
        raise ValueError("expected a csr_matrix")
    n_rows, n_cols = A.shape
    ptr, idx = A.indptr, A.indices
    if len(ptr) != n_rows + 1 or ptr[0] != 0:
        raise ValueError("row offsets have wrong length or do not start at 0")
    if ptr[-1] != len(idx) or len(idx) != len(A.data):
        raise ValueError("row_offsets[n_rows] must equal nnz")
    if np.any(np.diff(ptr) < 0):
        raise ValueError("row offsets must be non-decreasing")
    if len(idx) and (idx.min() < 0 or idx.max() >= n_cols):
        raise ValueError("column index out of range")
    for i in range(n_rows):
        cols = idx[ptr[i]:ptr[i + 1]]
        if np.any(np.diff(cols) <= 0):
            raise ValueError(f"row {i}: column indices not strictly increasing")
    if A.data.dtype != np.float64:
        raise ValueError("values must be float64")
    return True


def spmv(A, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or A.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} @ {x.shape}")
    return A @ x


def transpose(A):
    return as_csr(A.T)


def _drop_small(A, tol=DROP_TOL):
    """Drop entries with ``|a_ij| <= tol * max_j |a_ij|`` row by row."""
    A = as_csr(A)
    if A.nnz == 0:
        return A
    row_max = np.zeros(A.shape[0])
    rows = np.repeat(np.arange(A.shape[0]), np.diff(A.indptr))
    np.maximum.at(row_max, rows, np.abs(A.data))
    keep = np.abs(A.data) > tol * row_max[rows]
    if keep.all():
        return A
    B = sp.csr_matrix((A.data[keep], A.indices[keep], np.concatenate(
        [[0], np.cumsum(np.bincount(rows[keep], minlength=A.shape[0]))])),
        shape=A.shape)
    return B


def galerkin_product(R, A, P, drop_tol=DROP_TOL):
    """Triple product ``R @ A @ P`` with cancellation fill removed.

    Entries with magnitude at most ``drop_tol`` times the largest magnitude
    in their row are dropped.
    """
    if R.shape[1] != A.shape[0] or A.shape[1] != P.shape[0]:
        raise ValueError(
            f"dimension mismatch: {R.shape} x {A.shape} x {P.shape}")
    return _drop_small(as_csr(R) @ as_csr(A) @ as_csr(P), drop_tol)


def residual(A, u, b):
    b = np.asarray(b, dtype=np.float64)
    if A.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} vs b {b.shape}")
    return b - spmv(A, u)


def _require_square(A):
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got {A.shape}")


def is_z_matrix(A):
    """Check the Z-matrix sign pattern.

    Returns
    -------
    ok : bool
        True iff every stored off-diagonal entry is <= 0 and every diagonal
        entry is >= 0.
    offending : list of (int, int)
        Positions violating the pattern (0-based).
    """
    _require_square(A)
    C = as_csr(A).tocoo()
    off = (C.row != C.col) & (C.data > 0)
    diag = (C.row == C.col) & (C.data < 0)
    bad = off | diag
    offending = sorted(zip(C.row[bad].tolist(), C.col[bad].tolist()))
    return (not offending), offending


def diagonal_dominance_violations(A, rtol=1e-12):
    """Return ``(violations, strict_rows)`` for weak row diagonal dominance.

    ``violations`` lists rows with ``a_ii < sum_{j != i} |a_ij|`` beyond a
    relative tolerance; ``strict_rows`` lists rows where the inequality is
    strict.
    """
    _require_square(A)
    A = as_csr(A)
    d = A.diagonal()
    off = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(d)
    scale = np.maximum(np.abs(d), off)
    violations = np.flatnonzero(d < off - rtol * scale).tolist()
    strict = np.flatnonzero(d > off + rtol * scale).tolist()
    return violations, strict


def is_irreducible(A):
    """True iff the directed graph of the off-diagonal pattern is strongly connected."""
    _require_square(A)
    if A.shape[0] <= 1:
        return True
    G = as_csr(A)
    G.setdiag(0)
    G.eliminate_zeros()
    n_comp, _ = sp.csgraph.connected_components(G, directed=True,
                                                connection="strong")
    return n_comp == 1


def to_dense(A):
    """Dense row-major copy, for small test oracles only."""
    if max(A.shape) > DENSE_LIMIT:
        raise ValueError(f"dense oracle limited to {DENSE_LIMIT}x{DENSE_LIMIT}")
    return np.asarray(A.todense())


def read_matrix_market(path):
    return as_csr(scipy.io.mmread(path))


def write_matrix_market(path, A):
    scipy.io.mmwrite(path, sp.coo_matrix(A), precision=17)


def read_vector(path):
    return np.loadtxt(path, dtype=np.float64, ndmin=1)


def write_vector(path, x):
    np.savetxt(path, np.asarray(x, dtype=np.float64), fmt="%.17g")
