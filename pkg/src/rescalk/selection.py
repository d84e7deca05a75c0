"""Latent-dimension sweep and the selection rule."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

from . import seeding
from .clustering import cluster_features
from .ensemble import decompose_ensemble
from .errors import InvalidConfigError, RescalKError
from .rescal import SolverConfig
from .tensor import as_data_tensor

log = logging.getLogger(__name__)

__all__ = [
    "CurveRow",
    "SelectionCurve",
    "SelectionThresholds",
    "SelectionResult",
    "KDetails",
    "sweep",
    "choose_k",
    "select",
]


@dataclass(frozen=True)
class CurveRow:
    k: int
    rel_error: float
    mean_silhouette: float
    min_cluster_silhouette: float
    min_point_silhouette: float = float("nan")


@dataclass(frozen=True)
class SelectionCurve:
    rows: tuple

    def __post_init__(self):
        rows = tuple(sorted(self.rows, key=lambda row: row.k))
        ks = [row.k for row in rows]
        if len(set(ks)) != len(ks):
            raise InvalidConfigError(f"duplicate k in curve: {ks}")
        object.__setattr__(self, "rows", rows)

    @property
    def ks(self):
        return [row.k for row in self.rows]

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, k):
        for row in self.rows:
            if row.k == k:
                return row
        raise KeyError(k)


@dataclass(frozen=True)
class SelectionThresholds:
    """Silhouette floors a rank must clear; ``max_rel_error`` is an optional extra gate."""

    min_sil_floor: float = 0.75
    mean_sil_floor: float = 0.90
    max_rel_error: float | None = None

    def __post_init__(self):
        for name in ("min_sil_floor", "mean_sil_floor"):
            value = getattr(self, name)
            if not -1.0 <= value <= 1.0:
                raise InvalidConfigError(f"{name} must be in [-1, 1], got {value}")
        if self.max_rel_error is not None and not self.max_rel_error > 0:
            raise InvalidConfigError(f"max_rel_error must be > 0, got {self.max_rel_error}")


@dataclass(frozen=True)
class KDetails:
    ensemble: object
    assignment: object
    stats: object


@dataclass(frozen=True)
class SelectionResult:
    curve: SelectionCurve
    chosen_k: int
    thresholds: SelectionThresholds
    fallback: bool
    details: dict = field(default_factory=dict, compare=False)


def k_configs(k, ecfg, scfg):
    # k is folded into both roots so adding a k to the range leaves the others unchanged
    return (
        replace(ecfg, seed=seeding.derive_seed(ecfg.seed, seeding.SWEEP_K, k)),
        replace(scfg, seed=seeding.derive_seed(scfg.seed, seeding.SWEEP_K, k)),
    )


def sweep(X, k_range, ecfg, scfg=None, executor=None, keep_details=False, details=None):
    """Ensemble-decompose ``X`` at every ``k`` and tabulate error and silhouettes.

    ``details``, if given, is a dict filled with :class:`KDetails` per ``k``
    when ``keep_details`` is set.
    """
    scfg = scfg or SolverConfig()
    X = as_data_tensor(X)
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise InvalidConfigError("k_range is empty")
    n = X.shape[0]
    for k in ks:
        if not 2 <= k <= n:
            raise InvalidConfigError(f"every k must satisfy 2 <= k <= n={n}, got {k}")
    rows = []
    for k in ks:
        ecfg_k, scfg_k = k_configs(k, ecfg, scfg)
        try:
            ens = decompose_ensemble(X, k, ecfg_k, scfg_k, executor=executor)
            assignment, stats = cluster_features(ens.factors)
        except RescalKError as exc:
            exc.k = k
            exc.args = (f"k={k}: {exc}",)
            raise
        row = CurveRow(
            k=k,
            rel_error=ens.mean_rel_error,
            mean_silhouette=stats.mean_silhouette,
            min_cluster_silhouette=stats.min_cluster_silhouette,
            min_point_silhouette=stats.min_point_silhouette,
        )
        log.info("k=%d rel_error=%.4g mean_sil=%.4f min_sil=%.4f", k, row.rel_error,
                 row.mean_silhouette, row.min_cluster_silhouette)
        rows.append(row)
        if keep_details and details is not None:
            details[k] = KDetails(ensemble=ens, assignment=assignment, stats=stats)
    return SelectionCurve(tuple(rows))


def choose_k(curve, thresholds=None):
    """Largest ``k`` whose silhouettes clear both floors (and the optional error gate).

    When no ``k`` qualifies, falls back to the ``k`` with the highest minimum
    cluster silhouette (smaller ``k`` on ties) and flags the result.
    """
    th = thresholds or SelectionThresholds()
    if not isinstance(curve, SelectionCurve):
        curve = SelectionCurve(tuple(curve))
    if len(curve) == 0:
        raise InvalidConfigError("cannot choose k from an empty curve")
    ok = [
        row.k
        for row in curve.rows
        if row.min_cluster_silhouette >= th.min_sil_floor
        and row.mean_silhouette >= th.mean_sil_floor
        and (th.max_rel_error is None or row.rel_error <= th.max_rel_error)
    ]
    if ok:
        return SelectionResult(curve=curve, chosen_k=max(ok), thresholds=th, fallback=False)
    best = max(curve.rows, key=lambda row: (row.min_cluster_silhouette, -row.k))
    return SelectionResult(curve=curve, chosen_k=best.k, thresholds=th, fallback=True)


def select(X, k_range, ecfg, scfg=None, thresholds=None, executor=None, keep_details=False):
    """:func:`sweep` followed by :func:`choose_k`."""
    details = {}
    curve = sweep(X, k_range, ecfg, scfg, executor=executor,
                  keep_details=keep_details, details=details)
    result = choose_k(curve, thresholds)
    return replace(result, details=details)
