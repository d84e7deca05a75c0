"""Nonnegative RESCAL with latent-dimension selection by ensemble clustering."""

__version__ = "0.1.0"

from .analysis import group_activity, interaction_summary
from .clustering import (
    ClusterAssignment,
    ClusterStats,
    cluster_features,
    cosine_similarity,
    greedy_match,
    silhouette,
)
from .ensemble import EnsembleConfig, EnsembleResult, decompose_ensemble, resample
from .rescal import (
    Decomposition,
    SolverConfig,
    best_of,
    init_factors,
    normalize,
    solve,
    full_sweep,
    update_core,
    update_features,
)
from .selection import (
    SelectionCurve,
    SelectionResult,
    SelectionThresholds,
    choose_k,
    select,
    sweep,
)
from .synth import SynthConfig, SynthInstance, generate, noise_level
from .tensor import frobenius_norm, mode_multiply, reconstruct, relative_error
