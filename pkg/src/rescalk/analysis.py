"""Interpretation helpers for a fitted core tensor ``R`` (``r x r x T``)."""

import numpy as np

from .errors import DegenerateInputError
from .tensor import as_tensor

__all__ = ["group_activity", "interaction_summary"]


def group_activity(R, include_diagonal=False):
    """Outgoing activity per group and time step, an ``r x T`` matrix.

    Entry ``(g, t)`` is the row sum of ``R[:, :, t]`` over ``j != g``; pass
    ``include_diagonal=True`` to keep the self-interaction term.
    """
    R = as_tensor(R, "R")
    total = R.sum(axis=1)
    if include_diagonal:
        return total
    return total - np.diagonal(R, axis1=0, axis2=1).T


def interaction_summary(R):
    """Time-summed interaction matrix scaled so its largest entry is 1."""
    R = as_tensor(R, "R")
    S = R.sum(axis=2)
    top = S.max() if S.size else 0.0
    if not top > 0:
        raise DegenerateInputError("interaction summary undefined: R has no positive entry")
    return S / top
