import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rescalk.ensemble import EnsembleConfig
from rescalk.errors import InvalidConfigError
from rescalk.rescal import SolverConfig
from rescalk.selection import (
    CurveRow,
    SelectionCurve,
    SelectionThresholds,
    choose_k,
    select,
    sweep,
)
from rescalk.synth import SynthConfig, generate


def curve_from(ks, mins, means=None, errs=None):
    means = means if means is not None else [max(m, 0.95) for m in mins]
    errs = errs if errs is not None else [0.1] * len(ks)
    return SelectionCurve(tuple(CurveRow(k, e, a, m) for k, e, a, m in zip(ks, errs, means, mins)))


def test_choose_k_synthetic_shape():
    curve = curve_from([2, 3, 4, 5, 6], [0.99, 0.98, 0.97, 0.35, 0.20],
                       means=[0.99, 0.99, 0.98, 0.70, 0.55])
    res = choose_k(curve)
    assert res.chosen_k == 4 and not res.fallback


def test_choose_k_fallback():
    curve = curve_from([2, 3, 4, 5], [0.3, 0.6, 0.5, 0.1], means=[0.5, 0.7, 0.6, 0.4])
    res = choose_k(curve)
    assert res.chosen_k == 3 and res.fallback


def test_choose_k_fallback_tie_prefers_smaller_k():
    curve = curve_from([3, 4, 5], [0.5, 0.5, 0.2], means=[0.5, 0.5, 0.5])
    assert choose_k(curve).chosen_k == 3


def test_choose_k_error_gate():
    curve = curve_from([2, 3, 4], [0.99, 0.99, 0.99], errs=[0.5, 0.2, 0.05])
    assert choose_k(curve, SelectionThresholds(max_rel_error=0.1)).chosen_k == 4
    assert choose_k(curve, SelectionThresholds(max_rel_error=0.01)).fallback


def test_curve_sorted_and_unique():
    curve = SelectionCurve((CurveRow(5, 0, 1, 1), CurveRow(3, 0, 1, 1)))
    assert curve.ks == [3, 5]
    with pytest.raises(InvalidConfigError):
        SelectionCurve((CurveRow(3, 0, 1, 1), CurveRow(3, 0, 1, 1)))
    with pytest.raises(InvalidConfigError):
        choose_k(SelectionCurve(()))


def test_threshold_validation():
    with pytest.raises(InvalidConfigError):
        SelectionThresholds(min_sil_floor=1.5)
    with pytest.raises(InvalidConfigError):
        SelectionThresholds(max_rel_error=0)


rows = st.lists(
    st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=7
)


@settings(max_examples=200, deadline=None)
@given(rows=rows, f1=st.floats(0, 1), f2=st.floats(0, 1), g1=st.floats(0, 1), g2=st.floats(0, 1))
def test_choose_k_monotone_in_thresholds(rows, f1, f2, g1, g2):
    curve = SelectionCurve(tuple(CurveRow(k + 2, e, a, m) for k, (e, a, m) in enumerate(rows)))
    lo = choose_k(curve, SelectionThresholds(min(f1, f2), min(g1, g2)))
    hi = choose_k(curve, SelectionThresholds(max(f1, f2), max(g1, g2)))
    if not hi.fallback:
        assert hi.chosen_k <= lo.chosen_k


@settings(max_examples=100, deadline=None)
@given(rows=rows, seed=st.integers(0, 1000))
def test_choose_k_independent_of_row_order(rows, seed):
    built = [CurveRow(k + 2, e, a, m) for k, (e, a, m) in enumerate(rows)]
    shuffled = list(built)
    np.random.default_rng(seed).shuffle(shuffled)
    assert choose_k(tuple(built)).chosen_k == choose_k(tuple(shuffled)).chosen_k


@settings(max_examples=100, deadline=None)
@given(rows=rows)
def test_zero_floors_choose_largest_k(rows):
    curve = SelectionCurve(tuple(CurveRow(k + 2, e, a, m) for k, (e, a, m) in enumerate(rows)))
    assert choose_k(curve, SelectionThresholds(0.0, 0.0)).chosen_k == max(curve.ks)


@pytest.fixture(scope="module")
def small_synth():
    return generate(SynthConfig(n=8, T=20, k_true=3, thresh_A=3, thresh_R=8, seed=3))


FAST = SolverConfig(max_iters=300, seed=1)


def test_singleton_sweep(small_synth):
    curve = sweep(small_synth.X, [3], EnsembleConfig(replicas=3, perturb=0.03), FAST)
    assert curve.ks == [3]
    row = curve[3]
    assert -1 <= row.min_cluster_silhouette <= row.mean_silhouette <= 1
    assert row.rel_error >= 0


def test_sweep_rows_stable_when_range_grows(small_synth):
    ecfg = EnsembleConfig(replicas=3, perturb=0.03, seed=9)
    a = sweep(small_synth.X, [2, 3], ecfg, FAST)
    b = sweep(small_synth.X, [2, 3, 4], ecfg, FAST)
    assert a[2] == b[2] and a[3] == b[3]


def test_sweep_rejects_bad_ranges(small_synth):
    ecfg = EnsembleConfig(replicas=2)
    with pytest.raises(InvalidConfigError):
        sweep(small_synth.X, [], ecfg, FAST)
    with pytest.raises(InvalidConfigError):
        sweep(small_synth.X, [1, 2], ecfg, FAST)
    with pytest.raises(InvalidConfigError):
        sweep(small_synth.X, [9], ecfg, FAST)


def test_noise_free_sweep_shape():
    # min cluster silhouette stays near 1 up to the true rank and drops after it
    inst = generate(SynthConfig(n=10, T=30, k_true=4, thresh_A=3, thresh_R=8, seed=0))
    res = select(inst.X, range(2, 7), EnsembleConfig(replicas=10, perturb=0.03, seed=0,
                                                     restarts_per_replica=3),
                 SolverConfig(max_iters=1000, seed=0), keep_details=True)
    curve = res.curve
    for k in (2, 3, 4):
        assert curve[k].min_cluster_silhouette >= 0.9
    for k in (5, 6):
        assert curve[k].min_cluster_silhouette < curve[4].min_cluster_silhouette - 0.2
    assert res.chosen_k == 4
    assert set(res.details) == {2, 3, 4, 5, 6}
    assert len(res.details[4].ensemble) == 10
