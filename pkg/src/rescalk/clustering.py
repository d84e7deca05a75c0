"""Constrained clustering of ensemble factor columns and silhouette statistics.

Each replica contributes exactly one column to each cluster: assignment is a
greedy one-to-one matching on cosine similarity between the replica's
columns and the current centroids. Cluster quality is measured with
silhouettes under the cosine distance ``1 - cos(u, v)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVectorError, InvalidConfigError, NumericalError, ShapeError

__all__ = [
    "ClusterAssignment",
    "ClusterStats",
    "cosine_similarity",
    "cosine_distances",
    "greedy_match",
    "greedy_assign",
    "cluster_features",
    "cohesion",
    "silhouette",
]


@dataclass(frozen=True)
class ClusterAssignment:
    """``perms[p, c]`` is the column of replica ``p`` placed in cluster ``c``."""

    perms: np.ndarray
    passes: int
    converged: bool


@dataclass(frozen=True)
class ClusterStats:
    mean_silhouette: float
    min_cluster_silhouette: float
    min_point_silhouette: float
    per_cluster: np.ndarray
    per_point: np.ndarray
    centroids: np.ndarray  # n x r, unit-length columns


def cosine_similarity(u, v):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise DegenerateVectorError("cosine similarity undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def _unit_columns(M, what="column"):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ShapeError(f"expected a matrix of column vectors, got shape {M.shape}")
    norms = np.linalg.norm(M, axis=0)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise DegenerateVectorError(f"{what} {int(zero[0])} is a zero vector")
    return M / norms


def cosine_distances(points):
    """Pairwise ``1 - cos`` between the rows of ``points``.

    Evaluated as ``|u/|u| - v/|v||^2 / 2`` so coincident directions give an
    exact zero.
    """
    U = _unit_columns(np.asarray(points, dtype=np.float64).T, "point").T
    diff = U[:, None, :] - U[None, :, :]
    D = 0.5 * np.einsum("ijk,ijk->ij", diff, diff)
    return np.clip(D, 0.0, 2.0)


def greedy_assign(S):
    """Greedy one-to-one assignment on a square similarity matrix.

    Takes the largest remaining entry, fixes that (row, column) pair, and
    removes both. ``argmax`` on the row-major matrix resolves ties towards the
    lowest row, then the lowest column. Returns ``perm`` with ``perm[row] = column``.
    """
    S = np.array(S, dtype=np.float64)
    r = S.shape[0]
    if S.shape != (r, r):
        raise ShapeError(f"similarity matrix must be square, got {S.shape}")
    perm = np.empty(r, dtype=np.intp)
    for _ in range(r):
        i, j = np.unravel_index(np.argmax(S), S.shape)
        perm[i] = j
        S[i, :] = -np.inf
        S[:, j] = -np.inf
    return perm


def greedy_match(centroids, columns):
    """Match the columns of ``columns`` to the columns of ``centroids`` (both ``n x r``)."""
    C = _unit_columns(centroids, "centroid")
    V = _unit_columns(columns, "column")
    if C.shape != V.shape:
        raise ShapeError(f"centroids {C.shape} and columns {V.shape} differ in shape")
    return greedy_assign(np.clip(C.T @ V, -1.0, 1.0))


def _cluster_sums(stack, perms):
    # stack: (P, n, r) unit columns; sum each cluster's members -> (n, r)
    P = stack.shape[0]
    return stack[np.arange(P)[:, None], :, perms].sum(axis=0).T


def cohesion(stack, perms):
    """Sum over clusters of the cosine similarity between members and their centroid."""
    return float(np.linalg.norm(_cluster_sums(stack, perms), axis=0).sum())


def cluster_features(factors, max_passes=100):
    """Cluster the columns of every factor matrix in ``factors`` (length P, each ``n x r``).

    Centroids start at the columns of the first matrix. Each pass matches
    every replica to the centroids and then moves each centroid to the
    normalised mean of its members. Passes stop once an assignment repeats
    or would lower :func:`cohesion` (greedy matching does not guarantee
    descent, so the better assignment is kept).
    """
    if len(factors) < 2:
        raise InvalidConfigError(f"need at least 2 replicas, got {len(factors)}")
    if max_passes < 1:
        raise InvalidConfigError(f"max_passes must be >= 1, got {max_passes}")
    mats = [np.asarray(A, dtype=np.float64) for A in factors]
    shape = mats[0].shape
    stack = []
    for p, A in enumerate(mats):
        if A.shape != shape:
            raise ShapeError(f"replica {p} has shape {A.shape}, expected {shape}")
        norms = np.linalg.norm(A, axis=0)
        zero = np.flatnonzero(norms == 0)
        if zero.size:
            raise DegenerateVectorError(f"replica {p}, column {int(zero[0])} is a zero vector")
        stack.append(A / norms)
    stack = np.stack(stack)
    P, n, r = stack.shape

    centroids = stack[0]
    perms = None
    converged = False
    passes = 0
    while passes < max_passes:
        passes += 1
        new = np.stack([greedy_assign(np.clip(centroids.T @ stack[p], -1.0, 1.0)) for p in range(P)])
        if perms is not None and (
            np.array_equal(new, perms) or cohesion(stack, new) < cohesion(stack, perms)
        ):
            converged = True
            break
        perms = new
        centroids = _unit_columns(_cluster_sums(stack, perms), "centroid")

    assignment = ClusterAssignment(perms=perms, passes=passes, converged=converged)
    points = stack[np.arange(P)[:, None], :, perms].reshape(P * r, n)
    labels = np.tile(np.arange(r), P)
    return assignment, silhouette(points, labels)


def silhouette(points, labels):
    """Silhouette statistics of a labelled point set under cosine distance.

    ``a`` is the mean distance to the other members of the point's cluster,
    ``b`` the smallest mean distance to another cluster, and
    ``s = (b - a) / max(a, b)`` (0 when both vanish). With a single cluster
    every silhouette is reported as 1.
    """
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    if points.ndim != 2 or labels.shape != (points.shape[0],):
        raise ShapeError("points must be (N, n) with one label per point")
    ids, inverse, counts = np.unique(labels, return_inverse=True, return_counts=True)
    if np.any(counts < 1):
        raise NumericalError("empty cluster")
    k = ids.size
    U = _unit_columns(points.T, "point")
    sums = np.zeros((points.shape[1], k))
    np.add.at(sums.T, inverse, U.T)
    centroids = _unit_columns(sums, "centroid")

    N = points.shape[0]
    if k == 1:
        s = np.ones(N)
    else:
        if np.any(counts < 2):
            raise NumericalError("silhouette needs at least 2 points per cluster")
        D = cosine_distances(points)
        member = np.zeros((N, k))
        member[np.arange(N), inverse] = 1.0
        mean_to = (D @ member) / counts  # mean distance from each point to each cluster
        own = inverse
        a = (D @ member)[np.arange(N), own] / (counts[own] - 1)
        mean_to[np.arange(N), own] = np.inf
        b = mean_to.min(axis=1)
        top = np.maximum(a, b)
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(top > 0, (b - a) / np.where(top > 0, top, 1.0), 0.0)
        s = np.clip(s, -1.0, 1.0)

    per_cluster = np.array([s[inverse == c].mean() for c in range(k)])
    return ClusterStats(
        mean_silhouette=float(s.mean()),
        min_cluster_silhouette=float(per_cluster.min()),
        min_point_silhouette=float(s.min()),
        per_cluster=per_cluster,
        per_point=s,
        centroids=centroids,
    )
