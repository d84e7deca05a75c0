"""Nonnegative RESCAL by multiplicative updates.

Fits ``X[:, :, t] ≈ A @ R[:, :, t] @ A.T`` with ``A >= 0`` (``n x r``) and
``R >= 0`` (``r x r x T``), minimising ``sum_t ||X_t - A R_t A^T||_F^2``.
After the iterations stop, the columns of ``A`` are rescaled to sum to one
and the scale is pushed into ``R`` so the reconstruction is unchanged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import seeding
from .errors import (
    DegenerateFactorError,
    DegenerateInputError,
    InvalidConfigError,
    InvalidRankError,
    ShapeError,
)
from .tensor import as_data_tensor, as_matrix, as_tensor, frobenius_norm, relative_error

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "Decomposition",
    "init_factors",
    "update_core",
    "update_features",
    "full_sweep",
    "normalize",
    "solve",
    "best_of",
    "restart_seed",
]


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule and guards for :func:`solve`.

    ``tol`` bounds the relative change of the relative error between two
    sweeps; ``eps`` is added to every multiplicative-update denominator.
    """

    tol: float = 1e-8
    max_iters: int = 5000
    eps: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidConfigError(f"tol must be > 0, got {self.tol}")
        if int(self.max_iters) < 1:
            raise InvalidConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.eps > 0:
            raise InvalidConfigError(f"eps must be > 0, got {self.eps}")
        object.__setattr__(self, "seed", seeding.check_seed(self.seed))


@dataclass(frozen=True)
class Decomposition:
    A: np.ndarray
    R: np.ndarray
    rel_error: float
    iterations: int
    converged: bool
    seed: int
    restart: int = field(default=0, compare=False)

    @property
    def rank(self):
        return self.A.shape[1]

    def to_dict(self):
        n, r = self.A.shape
        return {
            "n": n,
            "r": r,
            "T": self.R.shape[2],
            "A": self.A.ravel().tolist(),
            # slice-major: R[:, :, 0] row-major, then R[:, :, 1], ...
            "R": np.moveaxis(self.R, 2, 0).ravel().tolist(),
            "rel_error": self.rel_error,
            "iterations": self.iterations,
            "converged": self.converged,
            "seed": self.seed,
            "restart": self.restart,
        }

    @classmethod
    def from_dict(cls, d):
        n, r, T = int(d["n"]), int(d["r"]), int(d["T"])
        A = np.asarray(d["A"], dtype=np.float64).reshape(n, r)
        R = np.moveaxis(np.asarray(d["R"], dtype=np.float64).reshape(T, r, r), 0, 2)
        return cls(
            A=A,
            R=np.ascontiguousarray(R),
            rel_error=float(d["rel_error"]),
            iterations=int(d["iterations"]),
            converged=bool(d["converged"]),
            seed=int(d["seed"]),
            restart=int(d.get("restart", 0)),
        )


def init_factors(n, r, T, seed):
    """Draw ``A`` (``n x r``) and ``R`` (``r x r x T``) i.i.d. from U(0, 1)."""
    if r < 1 or r > n:
        raise InvalidRankError(f"rank must satisfy 1 <= r <= n={n}, got {r}")
    if T < 1:
        raise ShapeError(f"T must be >= 1, got {T}")
    gen = seeding.rng(seeding.check_seed(seed))
    A = gen.random((n, r))
    R = gen.random((r, r, T))
    # Generator.random samples [0, 1); zero is measure-zero but would lock an entry forever
    A[A == 0.0] = np.finfo(np.float64).tiny
    R[R == 0.0] = np.finfo(np.float64).tiny
    return A, R


# Slice-major kernels: Xs is (T, n, n), Rs is (T, r, r).

def _core_step(Xs, A, Rs, eps):
    AtA = A.T @ A
    num = A.T @ Xs @ A
    den = AtA @ Rs @ AtA + eps
    return Rs * num / den


def _feature_ratio(Xs, A, Rs, eps):
    AtA = A.T @ A
    Rt = Rs.transpose(0, 2, 1)
    num = (Xs @ A @ Rt).sum(axis=0) + (Xs.transpose(0, 2, 1) @ A @ Rs).sum(axis=0)
    inner = (Rs @ AtA @ Rt).sum(axis=0) + (Rt @ AtA @ Rs).sum(axis=0)
    return num / (A @ inner + eps)


def _features_step(Xs, A, Rs, eps):
    return A * _feature_ratio(Xs, A, Rs, eps)


def _rel_error(Xs, A, Rs, xnorm):
    diff = Xs - A @ Rs @ A.T
    return float(np.sqrt(np.sum(diff * diff))) / xnorm


# The objective is quartic in A and the plain feature step can overshoot
# (seen mostly at r=1). A rejected step is retried as A * ratio**theta with
# theta halved down to MIN_THETA; past that, A is left as is for this sweep.
MIN_THETA = 2.0**-10


def _sweep(Xs, A, Rs, eps, xnorm, err_prev):
    """Core step, then a feature step that never raises the relative error.

    Returns ``(A, Rs, err, theta)``; ``theta`` is the exponent that was
    accepted (1 for the plain rule, 0 if the feature step was skipped).
    """
    Rs = _core_step(Xs, A, Rs, eps)
    ratio = _feature_ratio(Xs, A, Rs, eps)
    theta = 1.0
    A_new = A * ratio
    err = _rel_error(Xs, A_new, Rs, xnorm)
    while err > err_prev:
        theta /= 2
        if theta < MIN_THETA:
            return A, Rs, _rel_error(Xs, A, Rs, xnorm), 0.0
        A_new = A * ratio**theta
        err = _rel_error(Xs, A_new, Rs, xnorm)
    return A_new, Rs, err, theta


def _check_pair(X, A, R):
    X = as_tensor(X, "X")
    A = as_matrix(A, "A")
    R = as_tensor(R, "R")
    n, n2, T = X.shape
    if n != n2:
        raise ShapeError(f"X must be square in modes 1-2, got {X.shape}")
    r = A.shape[1]
    if A.shape[0] != n:
        raise ShapeError(f"A has {A.shape[0]} rows, X has n={n}")
    if R.shape != (r, r, T):
        raise ShapeError(f"R must have shape {(r, r, T)}, got {R.shape}")
    return X, A, R


def _slices(X):
    return np.ascontiguousarray(np.moveaxis(X, 2, 0))


def _unslice(Xs):
    return np.ascontiguousarray(np.moveaxis(Xs, 0, 2))


def update_core(X, A, R, eps=1e-9):
    """One multiplicative update of every ``R_t``.

    ``R_t <- R_t * (A^T X_t A) / (A^T A R_t A^T A + eps)``, elementwise; this
    is the Kronecker-vectorised rule applied without forming ``A^T A ⊗ A^T A``.
    """
    X, A, R = _check_pair(X, A, R)
    return _unslice(_core_step(_slices(X), A, _slices(R), eps))


def update_features(X, A, R, eps=1e-9):
    """One multiplicative update of ``A``.

    Numerator ``sum_t X_t A R_t^T + X_t^T A R_t``; denominator
    ``A sum_t (R_t A^T A R_t^T + R_t^T A^T A R_t) + eps``.
    """
    X, A, R = _check_pair(X, A, R)
    return _features_step(_slices(X), A, _slices(R), eps)


def full_sweep(X, A, R, eps=1e-9):
    """One full solver iteration: :func:`update_core`, then a safeguarded
    :func:`update_features` that is damped if it would raise the error."""
    X, A, R = _check_pair(X, A, R)
    xnorm = frobenius_norm(X)
    if xnorm == 0:
        raise DegenerateInputError("cannot decompose an all-zero tensor")
    Xs = _slices(X)
    Rs = _slices(R)
    A, Rs, _, _ = _sweep(Xs, A, Rs, eps, xnorm, _rel_error(Xs, A, Rs, xnorm))
    return A, _unslice(Rs)


def normalize(A, R):
    """Rescale so columns of ``A`` sum to one: ``A D^-1`` and ``D R_t D``."""
    A = as_matrix(A, "A")
    R = as_tensor(R, "R")
    d = A.sum(axis=0)
    bad = np.flatnonzero(~(d > 0))
    if bad.size:
        raise DegenerateFactorError(int(bad[0]))
    return A / d, R * d[:, None, None] * d[None, :, None]


def solve(X, r, cfg=None):
    """Fit nonnegative RESCAL of rank ``r`` from the initialisation ``cfg.seed``.

    Alternates a core sweep and a feature sweep until the relative error
    changes by less than ``cfg.tol`` (relative) or ``cfg.max_iters`` sweeps ran.
    """
    cfg = cfg or SolverConfig()
    X = as_data_tensor(X, "X")
    n, n2, T = X.shape
    if n != n2:
        raise ShapeError(f"X must be square in modes 1-2, got {X.shape}")
    xnorm = frobenius_norm(X)
    if xnorm == 0:
        raise DegenerateInputError("cannot decompose an all-zero tensor")
    A, R = init_factors(n, r, T, cfg.seed)

    Xs = _slices(X)
    Rs = _slices(R)
    err_prev = _rel_error(Xs, A, Rs, xnorm)
    converged = False
    it = 0
    while it < cfg.max_iters:
        it += 1
        A, Rs, err, _ = _sweep(Xs, A, Rs, cfg.eps, xnorm, err_prev)
        if err_prev == 0 or abs(err_prev - err) / err_prev < cfg.tol:
            converged = True
            break
        err_prev = err

    A, R = normalize(A, _unslice(Rs))
    return Decomposition(
        A=A,
        R=R,
        rel_error=relative_error(X, A, R),
        iterations=it,
        converged=converged,
        seed=cfg.seed,
    )


def restart_seed(root, index):
    return seeding.derive_seed(root, seeding.RESTART, index)


def _solve_restart(args):
    X, r, cfg, index = args
    try:
        return replace(solve(X, r, cfg), restart=index)
    except DegenerateFactorError as exc:
        log.warning("restart %d (seed %d) degenerated: %s", index, cfg.seed, exc)
        return None


def best_of(X, r, restarts, cfg=None, executor=None):
    """Run ``restarts`` independent solves and keep the lowest relative error.

    Restart ``i`` is seeded with ``restart_seed(cfg.seed, i)``. Ties go to the
    lower restart index. Restarts whose factors collapse are skipped.
    ``executor`` (anything with an ordered ``map``) may run restarts in parallel.
    """
    cfg = cfg or SolverConfig()
    if restarts < 1:
        raise InvalidConfigError(f"restarts must be >= 1, got {restarts}")
    X = as_data_tensor(X, "X")
    jobs = [(X, r, replace(cfg, seed=restart_seed(cfg.seed, i)), i) for i in range(restarts)]
    mapper = executor.map if executor is not None else map
    best = None
    for dec in mapper(_solve_restart, jobs):
        if dec is not None and (best is None or dec.rel_error < best.rel_error):
            best = dec
    if best is None:
        raise DegenerateFactorError(-1, f"all {restarts} restarts produced a zero factor column")
    return best
