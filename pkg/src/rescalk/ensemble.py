"""Bootstrap ensembles: multiplicative resampling and per-replica fits."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from . import seeding
from .errors import DegenerateFactorError, InvalidConfigError
from .rescal import SolverConfig, best_of
from .tensor import as_data_tensor

log = logging.getLogger(__name__)

__all__ = ["EnsembleConfig", "EnsembleResult", "resample", "decompose_ensemble", "replica_seeds"]


@dataclass(frozen=True)
class EnsembleConfig:
    """``replicas`` perturbed copies, each element scaled by U(1-perturb, 1+perturb).

    With ``shared_init`` every replica starts its solver from ``SolverConfig.seed``;
    otherwise replica ``p`` gets its own initialisation seed.
    """

    replicas: int = 50
    perturb: float = 0.03
    seed: int = 0
    restarts_per_replica: int = 1
    shared_init: bool = False

    def __post_init__(self):
        if self.replicas < 2:
            raise InvalidConfigError(f"replicas must be >= 2, got {self.replicas}")
        if not 0 <= self.perturb < 1:
            raise InvalidConfigError(f"perturb must be in [0, 1), got {self.perturb}")
        if self.restarts_per_replica < 1:
            raise InvalidConfigError(
                f"restarts_per_replica must be >= 1, got {self.restarts_per_replica}"
            )
        object.__setattr__(self, "seed", seeding.check_seed(self.seed))


@dataclass(frozen=True)
class EnsembleResult:
    decompositions: tuple
    data_seeds: tuple
    init_seeds: tuple

    def __len__(self):
        return len(self.decompositions)

    @property
    def factors(self):
        return [d.A for d in self.decompositions]

    @property
    def mean_rel_error(self):
        return float(np.mean([d.rel_error for d in self.decompositions]))


def resample(X, perturb, seed):
    """Multiply every element of ``X`` by an independent U(1-perturb, 1+perturb) draw."""
    if not 0 <= perturb < 1:
        raise InvalidConfigError(f"perturb must be in [0, 1), got {perturb}")
    X = as_data_tensor(X)
    if perturb == 0:
        return X.copy()
    gen = seeding.rng(seeding.check_seed(seed))
    return X * gen.uniform(1.0 - perturb, 1.0 + perturb, size=X.shape)


def replica_seeds(ecfg, scfg):
    """Per-replica ``(data_seed, init_seed)`` pairs."""
    out = []
    for p in range(ecfg.replicas):
        data = seeding.derive_seed(ecfg.seed, seeding.REPLICA_DATA, p)
        init = scfg.seed if ecfg.shared_init else seeding.derive_seed(scfg.seed, seeding.REPLICA_INIT, p)
        out.append((data, init))
    return out


def _fit_replica(args):
    X, r, ecfg, scfg, p, data_seed, init_seed = args
    Xp = resample(X, ecfg.perturb, data_seed)
    try:
        return best_of(Xp, r, ecfg.restarts_per_replica, replace(scfg, seed=init_seed))
    except DegenerateFactorError as exc:
        raise DegenerateFactorError(
            exc.column, f"replica {p}: every restart degenerated ({exc})"
        ) from exc


def decompose_ensemble(X, r, ecfg, scfg=None, executor=None):
    """Resample ``X`` ``ecfg.replicas`` times and fit rank ``r`` to each replica.

    Results are ordered by replica index whatever ``executor`` does.
    """
    scfg = scfg or SolverConfig()
    X = as_data_tensor(X)
    seeds = replica_seeds(ecfg, scfg)
    jobs = [(X, r, ecfg, scfg, p, d, i) for p, (d, i) in enumerate(seeds)]
    mapper = executor.map if executor is not None else map
    decs = tuple(mapper(_fit_replica, jobs))
    log.debug("rank %d: ensemble of %d, mean rel error %.3g", r, len(decs),
              np.mean([d.rel_error for d in decs]))
    return EnsembleResult(
        decompositions=decs,
        data_seeds=tuple(d for d, _ in seeds),
        init_seeds=tuple(i for _, i in seeds),
    )
