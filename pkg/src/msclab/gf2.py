"""Dense linear algebra over GF(2).

Matrices are numpy uint8 arrays with entries in {0, 1}, row-major.  All
routines are destructive-free: inputs are copied before elimination.
"""
from __future__ import annotations

import numpy as np


class RankDeficientError(ValueError):
    """Raised when an operation needs full row rank and the matrix lacks it."""


def to_gf2(a) -> np.ndarray:
    """Coerce array-like binary data to a uint8 array, validating entries."""
    m = np.asarray(a, dtype=np.uint8)
    if m.size and m.max() > 1:
        raise ValueError("matrix entries must be 0 or 1")
    return m


def row_reduce(a) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form.

    Returns (rref, pivot_cols).  Pivot columns are in increasing order; the
    number of pivots is the rank.
    """
    m = to_gf2(a).copy()
    rows, cols = m.shape
    pivot_cols: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.nonzero(m[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        others = np.nonzero(m[:, c])[0]
        others = others[others != r]
        if others.size:
            m[others] ^= m[r]
        pivot_cols.append(c)
        r += 1
    return m, pivot_cols


def rank(a) -> int:
    return len(row_reduce(a)[1])


def systematic_form(g) -> tuple[np.ndarray, np.ndarray]:
    """Bring a full-rank k x n matrix to the form [I_k | P] by row reduction
    plus a column permutation.

    Returns (g_sys, perm) where ``g_sys = rref(g)[:, perm]``.  ``perm`` is an
    index array mapping new column positions to old ones; it is the identity
    whenever the first k columns of ``g`` are already independent.

    Raises RankDeficientError if the rows are dependent.
    """
    m, pivot_cols = row_reduce(g)
    k, n = m.shape
    if len(pivot_cols) < k:
        raise RankDeficientError(
            f"matrix has rank {len(pivot_cols)} < {k} rows"
        )
    rest = [c for c in range(n) if c not in set(pivot_cols)]
    perm = np.array(pivot_cols + rest, dtype=np.int64)
    return m[:, perm], perm


def inverse(a) -> np.ndarray:
    """Inverse of a square matrix over GF(2)."""
    m = to_gf2(a)
    k, k2 = m.shape
    if k != k2:
        raise ValueError("matrix must be square")
    aug = np.concatenate([m, np.eye(k, dtype=np.uint8)], axis=1)
    red, pivots = row_reduce(aug)
    if pivots[:k] != list(range(k)):
        raise RankDeficientError("matrix is singular")
    return red[:, k:]


def matmul(a, b) -> np.ndarray:
    """Matrix product over GF(2).  Accepts vectors or matrices."""
    prod = np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64)
    return (prod & 1).astype(np.uint8)


def nullspace(a) -> np.ndarray:
    """Basis of the right null space, one vector per row.

    Returns a (n - rank) x n matrix N with a @ N.T == 0.
    """
    m = to_gf2(a)
    _, n = m.shape
    red, pivots = row_reduce(m)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, fc in enumerate(free):
        basis[i, fc] = 1
        for r, pc in enumerate(pivots):
            basis[i, pc] = red[r, fc]
    return basis
