"""Dense order-3 tensors and the multilinear operations on them.

Tensors are plain C-ordered ``numpy`` arrays of shape ``(n1, n2, n3)``, so
element ``(i, j, k)`` sits at flat position ``(i*n2 + j)*n3 + k``.  The third
mode indexes time; ``X[:, :, t]`` is the frontal slice at time ``t``.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateInputError, ShapeError

__all__ = [
    "as_tensor",
    "as_data_tensor",
    "as_matrix",
    "mode_multiply",
    "frobenius_norm",
    "reconstruct",
    "relative_error",
]


def as_tensor(x, name="tensor"):
    """Validate and return a finite float64 order-3 array."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 3:
        raise ShapeError(f"{name} must be order 3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} contains non-finite values")
    return arr


def as_data_tensor(x, name="data tensor"):
    """Like :func:`as_tensor` but also rejects negative elements."""
    arr = as_tensor(x, name)
    if arr.size and arr.min() < 0:
        raise ShapeError(f"{name} contains negative values")
    return arr


def as_matrix(x, name="matrix"):
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} contains non-finite values")
    return arr


def mode_multiply(X, M, mode):
    """Mode-``mode`` product ``X ×_mode M`` (modes are 1-based).

    For ``mode=1`` the result is ``Y[i, j, k] = sum_l M[i, l] * X[l, j, k]``;
    modes 2 and 3 contract the corresponding axis the same way.
    """
    X = as_tensor(X)
    M = as_matrix(M)
    if mode not in (1, 2, 3):
        raise ShapeError(f"mode must be 1, 2 or 3, got {mode!r}")
    axis = mode - 1
    if M.shape[1] != X.shape[axis]:
        raise ShapeError(
            f"mode-{mode} mismatch: matrix has {M.shape[1]} columns, "
            f"tensor has {X.shape[axis]} entries along mode {mode}"
        )
    out = np.tensordot(M, X, axes=([1], [axis]))  # contracted axis moves to front
    return np.ascontiguousarray(np.moveaxis(out, 0, axis))


def frobenius_norm(X):
    """Square root of the sum of squared elements (matrix or tensor)."""
    arr = np.asarray(X, dtype=np.float64)
    return float(np.sqrt(np.sum(arr * arr)))


def reconstruct(A, R):
    """Return the ``n x n x T`` tensor whose slice ``t`` is ``A @ R[:, :, t] @ A.T``."""
    A = as_matrix(A, "A")
    R = as_tensor(R, "R")
    r = A.shape[1]
    if R.shape[0] != r or R.shape[1] != r:
        raise ShapeError(f"A has {r} columns but R has slices of shape {R.shape[:2]}")
    slices = A @ np.moveaxis(R, 2, 0) @ A.T  # (T, n, n)
    return np.ascontiguousarray(np.moveaxis(slices, 0, 2))


def relative_error(X, A, R):
    """``||X - reconstruct(A, R)||_F / ||X||_F``."""
    X = as_tensor(X, "X")
    denom = frobenius_norm(X)
    if denom == 0:
        raise DegenerateInputError("relative error undefined for a zero tensor")
    return frobenius_norm(X - reconstruct(A, R)) / denom
