"""Synthetic ground-truth tensors with a known latent dimension."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import seeding
from .errors import DegenerateInputError, GenerationError, InvalidConfigError
from .tensor import frobenius_norm, reconstruct

__all__ = ["SynthConfig", "SynthInstance", "generate", "noise_level", "numerical_rank"]


@dataclass(frozen=True)
class SynthConfig:
    n: int
    T: int
    k_true: int
    value_hi: float = 10.0
    thresh_A: float = 0.0
    thresh_R: float = 0.0
    noise_factor: float = 0.0
    seed: int = 0
    max_regen: int = 1000

    def __post_init__(self):
        if self.n < 1 or self.T < 1:
            raise InvalidConfigError(f"n and T must be >= 1, got n={self.n}, T={self.T}")
        if not 1 <= self.k_true <= self.n:
            raise InvalidConfigError(f"k_true must be in [1, n={self.n}], got {self.k_true}")
        if not self.value_hi > 0:
            raise InvalidConfigError(f"value_hi must be > 0, got {self.value_hi}")
        if self.thresh_A < 0 or self.thresh_R < 0:
            raise InvalidConfigError("thresholds must be >= 0")
        if self.noise_factor < 0:
            raise InvalidConfigError(f"noise_factor must be >= 0, got {self.noise_factor}")
        if self.max_regen < 1:
            raise InvalidConfigError(f"max_regen must be >= 1, got {self.max_regen}")
        object.__setattr__(self, "seed", seeding.check_seed(self.seed))


@dataclass(frozen=True)
class SynthInstance:
    X: np.ndarray
    A_true: np.ndarray
    R_true: np.ndarray
    noise_level: float
    regen_count: int
    config: SynthConfig


def numerical_rank(M):
    """Number of singular values above ``max(M.shape) * s_max * 1e-12``."""
    s = np.linalg.svd(np.asarray(M, dtype=np.float64), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > max(M.shape) * s[0] * 1e-12))


def generate(cfg):
    """Draw ``A``, ``R`` from U[0, value_hi), sparsify, and add U[0, noise_factor) noise.

    ``A`` is thresholded before its rank is checked and redrawn until it has
    full column rank ``k_true``. The noise uses its own stream, so at a fixed
    seed the ground truth is identical across noise factors.
    """
    factors = seeding.rng(seeding.derive_seed(cfg.seed, seeding.SYNTH_FACTORS))
    k = cfg.k_true
    for regen in range(cfg.max_regen):
        A = factors.uniform(0.0, cfg.value_hi, size=(cfg.n, k))
        A[A < cfg.thresh_A] = 0.0
        if numerical_rank(A) == k:
            break
    else:
        raise GenerationError(
            f"no rank-{k} factor matrix after {cfg.max_regen} draws "
            f"(thresh_A={cfg.thresh_A}, value_hi={cfg.value_hi})"
        )
    R = factors.uniform(0.0, cfg.value_hi, size=(k, k, cfg.T))
    R[R < cfg.thresh_R] = 0.0

    clean = reconstruct(A, R)
    noise = seeding.rng(seeding.derive_seed(cfg.seed, seeding.SYNTH_NOISE))
    if cfg.noise_factor > 0:
        X = clean + noise.uniform(0.0, cfg.noise_factor, size=clean.shape)
    else:
        X = clean.copy()
    level = noise_level(X, A, R) if frobenius_norm(clean) > 0 else float("nan")
    return SynthInstance(X=X, A_true=A, R_true=R, noise_level=level, regen_count=regen, config=cfg)


def noise_level(X, A, R):
    """``||X - A R A^T||_F / ||A R A^T||_F``."""
    clean = reconstruct(A, R)
    denom = frobenius_norm(clean)
    if denom == 0:
        raise DegenerateInputError("noise level undefined: reconstruction is all zero")
    return frobenius_norm(np.asarray(X, dtype=np.float64) - clean) / denom
