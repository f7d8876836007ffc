"""Minimal CSR sparse matrices and a Jacobi-preconditioned CG solver.

Everything the package needs from sparse linear algebra lives here:
triplet assembly with duplicate summation, a row-wise matvec, same-pattern
linear combinations (mass plus scaled stiffness), and conjugate gradients
for the SPD systems of the time stepping.  Kept deliberately small and
numpy-only; the per-row summation order is fixed by the CSR layout, so
repeated runs give bitwise identical results.
"""

import numpy as np


class CgError(RuntimeError):
    """CG failed to reach the requested tolerance.

    Carries the final relative residual in ``residual``.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class SparseMatrix:
    """Compressed sparse row matrix with sorted, unique column indices."""

    def __init__(self, n_rows, n_cols, row_offsets, col_indices, values):
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.row_offsets = row_offsets
        self.col_indices = col_indices
        self.values = values

    @property
    def nnz(self):
        return len(self.values)

    def diagonal(self):
        d = np.zeros(self.n_rows)
        rows = np.repeat(np.arange(self.n_rows), np.diff(self.row_offsets))
        on_diag = rows == self.col_indices
        d[rows[on_diag]] = self.values[on_diag]
        return d


def assemble(n_rows, n_cols, triplets):
    """Build a SparseMatrix from (row, col, value) triplets.

    Duplicate positions are summed (in triplet order, so assembly is
    deterministic).  Indices outside the matrix raise ValueError.
    """
    if len(triplets) == 0:
        rows = np.zeros(0, dtype=np.int64)
        cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    else:
        if isinstance(triplets, tuple) and len(triplets) == 3:
            rows, cols, vals = triplets
            rows = np.asarray(rows, dtype=np.int64)
            cols = np.asarray(cols, dtype=np.int64)
            vals = np.asarray(vals, dtype=float)
        else:
            arr = np.asarray(triplets, dtype=float)
            rows = arr[:, 0].astype(np.int64)
            cols = arr[:, 1].astype(np.int64)
            vals = arr[:, 2]
    if rows.size and (rows.min() < 0 or rows.max() >= n_rows
                      or cols.min() < 0 or cols.max() >= n_cols):
        raise ValueError("triplet index out of range")

    # sort lexicographically by (row, col); stable, so duplicates keep order
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if rows.size:
        first = np.concatenate([[True], (np.diff(rows) != 0) | (np.diff(cols) != 0)])
        starts = np.flatnonzero(first)
        summed = np.add.reduceat(vals, starts)
        rows, cols, vals = rows[first], cols[first], summed
    counts = np.bincount(rows, minlength=n_rows)
    row_offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return SparseMatrix(n_rows, n_cols, row_offsets, cols, vals)


def matvec(A, x):
    """Row-wise A @ x; empty rows contribute exact zeros."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(A.n_rows)
    if A.nnz == 0:
        return out
    # pad with one zero so every row start is a valid reduceat index,
    # then mask away the bogus segments reduceat produces for empty rows
    prod = np.append(A.values * x[A.col_indices], 0.0)
    starts = A.row_offsets[:-1]
    seg = np.add.reduceat(prod, starts)
    nonempty = np.diff(A.row_offsets) > 0
    out[nonempty] = seg[nonempty]
    return out


def add_scaled(A, B, ca, cb):
    """ca*A + cb*B for two matrices sharing one sparsity pattern."""
    if not (np.array_equal(A.row_offsets, B.row_offsets)
            and np.array_equal(A.col_indices, B.col_indices)):
        raise ValueError("sparsity patterns differ")
    return SparseMatrix(A.n_rows, A.n_cols, A.row_offsets, A.col_indices,
                        ca * A.values + cb * B.values)


def cg_solve(A, b, tol=1e-12, max_iter=None, x0=None):
    """Jacobi-preconditioned CG for SPD systems.

    Stops when the true residual satisfies ||b - A x|| <= tol * ||b||.
    Returns (x, iterations); raises CgError on stagnation past max_iter
    and ValueError if the diagonal has a non-positive entry.
    """
    b = np.asarray(b, dtype=float)
    if max_iter is None:
        max_iter = 10 * A.n_rows
    d = A.diagonal()
    if np.any(d <= 0.0):
        raise ValueError("Jacobi preconditioner needs a positive diagonal")
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return np.zeros(A.n_rows), 0
    x = np.zeros(A.n_rows) if x0 is None else np.array(x0, dtype=float)
    r = b - matvec(A, x)
    if np.linalg.norm(r) <= tol * nb:
        return x, 0
    z = r / d
    p = z.copy()
    rz = r @ z
    for it in range(1, max_iter + 1):
        Ap = matvec(A, p)
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= tol * nb:
            return x, it
        z = r / d
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise CgError(
        f"CG did not converge in {max_iter} iterations "
        f"(relative residual {np.linalg.norm(r) / nb:.3e})",
        residual=np.linalg.norm(r) / nb,
    )
