import numpy as np
import pytest


def brute_mode_multiply(X, M, mode):
    """Index-by-index evaluation of the mode product."""
    X = np.asarray(X, dtype=float)
    M = np.asarray(M, dtype=float)
    shape = list(X.shape)
    shape[mode - 1] = M.shape[0]
    out = np.zeros(shape)
    for i in range(shape[0]):
        for j in range(shape[1]):
            for k in range(shape[2]):
                idx = [i, j, k]
                total = 0.0
                for l in range(X.shape[mode - 1]):
                    src = list(idx)
                    src[mode - 1] = l
                    total += M[idx[mode - 1], l] * X[tuple(src)]
                out[i, j, k] = total
    return out


def brute_objective(X, A, R):
    """sum_t ||X_t - A R_t A^T||_F^2 with explicit loops."""
    n, _, T = X.shape
    r = A.shape[1]
    total = 0.0
    for t in range(T):
        for i in range(n):
            for j in range(n):
                model = 0.0
                for a in range(r):
                    for b in range(r):
                        model += A[i, a] * R[a, b, t] * A[j, b]
                total += (X[i, j, t] - model) ** 2
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def brute_best_assignment(S):
    """All r! assignments of rows to columns, sorted by total similarity (best first)."""
    import itertools

    r = S.shape[0]
    scored = [
        (sum(S[i, p[i]] for i in range(r)), p) for p in itertools.permutations(range(r))
    ]
    scored.sort(key=lambda item: -item[0])
    return scored


def loop_silhouette(points, labels):
    """Textbook silhouette with cosine distance, one point at a time."""
    import math

    def cos_dist(u, v):
        dot = sum(a * b for a, b in zip(u, v))
        nu = math.sqrt(sum(a * a for a in u))
        nv = math.sqrt(sum(b * b for b in v))
        return 1.0 - dot / (nu * nv)

    labels = list(labels)
    out = []
    for i, p in enumerate(points):
        own = [j for j in range(len(points)) if labels[j] == labels[i] and j != i]
        a = sum(cos_dist(p, points[j]) for j in own) / len(own)
        b = min(
            sum(cos_dist(p, points[j]) for j in range(len(points)) if labels[j] == c)
            / labels.count(c)
            for c in set(labels) - {labels[i]}
        )
        out.append(0.0 if max(a, b) == 0 else (b - a) / max(a, b))
    return out


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def _report(label, ok, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
        assert ok, detail

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
