import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from conftest import dataset, naive_silhouette, partition_from_labels
from ksil.core import Partition, validate_dataset
from ksil.errors import EmptyIndexSet, SampleTooSmall, SingleCluster
from ksil.silhouette import (
    aggregate,
    approx_silhouette_apr,
    approx_silhouette_aps,
    cluster_stats,
    exact_silhouette,
    sample_indices,
    silhouette,
)


def _pair_instance():
    ds = dataset([0.0, 2.0, 10.0, 12.0])
    return ds, partition_from_labels(ds.points, [0, 0, 1, 1])


def test_exact_hand_example():
    ds = dataset([0.0, 1.0, 10.0, 11.0])
    rep = exact_silhouette(ds, partition_from_labels(ds.points, [0, 0, 1, 1]))
    assert rep.per_point[0] == pytest.approx(9.5 / 10.5, abs=1e-12)
    assert rep.mode == "exact"


def test_exact_singleton_scores_zero():
    ds = dataset([0.0, 1.0, 10.0])
    rep = exact_silhouette(ds, partition_from_labels(ds.points, [0, 0, 1]))
    assert rep.per_point[2] == 0.0


def test_exact_a_equals_b_scores_zero():
    # point 1 sits midway: a = 1 (to 0), b = 1 (to 2)
    ds = dataset([0.0, 1.0, 2.0, 2.0])
    rep = exact_silhouette(ds, Partition([0, 0, 1, 1], [[0.5], [2.0]]))
    assert rep.per_point[1] == 0.0


def test_exact_errors():
    ds = dataset([0.0, 1.0, 2.0])
    with pytest.raises(SingleCluster):
        exact_silhouette(ds, Partition([0, 0, 0], [[1.0]]))
    with pytest.raises(EmptyIndexSet):
        exact_silhouette(ds, partition_from_labels(ds.points, [0, 0, 1]), indices=[])


def test_exact_subset_matches_full():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(40, 3))
    lab = rng.integers(0, 3, 40)
    lab[:3] = [0, 1, 2]
    ds = validate_dataset(X)
    part = partition_from_labels(X, lab)
    full = exact_silhouette(ds, part)
    idx = np.array([1, 5, 7, 30])
    sub = exact_silhouette(ds, part, indices=idx)
    np.testing.assert_allclose(sub.per_point, full.per_point[idx], atol=1e-12)
    nocache = exact_silhouette(ds, part, indices=idx, use_cache=False)
    np.testing.assert_allclose(nocache.per_point, sub.per_point, atol=1e-12)


def test_apr_hand_example():
    ds, part = _pair_instance()
    rep = approx_silhouette_apr(ds, None, part)
    assert rep.per_point[0] == pytest.approx(1 - 2 / np.sqrt(122), abs=1e-9)
    assert rep.per_point[0] == pytest.approx(0.81893, abs=1e-5)
    assert rep.mode == "apr"


def test_apr_two_point_cluster_a_is_exact():
    rng = np.random.default_rng(0)
    lab = np.array([0, 0, 1, 1, 1])
    for _ in range(50):
        X = rng.normal(size=(5, 3))
        st = cluster_stats(X, lab, 2)
        for i in (0, 1):
            a_apr = np.sqrt(2 * np.sum((X[i] - st.centroids[0]) ** 2) + st.ss[0])
            assert a_apr == pytest.approx(np.linalg.norm(X[0] - X[1]), rel=1e-12)


def test_apr_singleton_scores_zero():
    ds = dataset([0.0, 1.0, 10.0])
    rep = approx_silhouette_apr(ds, None, partition_from_labels(ds.points, [0, 0, 1]))
    assert rep.per_point[2] == 0.0


def test_aps_hand_example():
    ds, part = _pair_instance()
    rep = approx_silhouette_aps(ds, part)
    assert rep.per_point[0] == pytest.approx(10 / 11, abs=1e-12)
    assert exact_silhouette(ds, part).per_point[0] == pytest.approx(9 / 11, abs=1e-12)


def test_aps_point_at_centroid_and_equidistant():
    ds = dataset([[0.0, 0.0], [0.0, 0.0], [5.0, 0.0], [5.0, 0.0], [2.5, 0.0]])
    part = Partition([0, 0, 1, 1, 0], [[0.0, 0.0], [5.0, 0.0]])
    rep = approx_silhouette_aps(ds, part)
    assert rep.per_point[0] == 1.0
    assert rep.per_point[4] == 0.0


def test_cluster_stats_ss_matches_recomputation():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 2))
    lab = np.repeat([0, 1, 2], 10)
    st = cluster_stats(X, lab, 3)
    for j in range(3):
        m = X[lab == j]
        assert st.ss[j] == pytest.approx(((m - m.mean(0)) ** 2).sum(), rel=1e-9)
    assert (st.ss >= 0).all() and list(st.sizes) == [10, 10, 10]


def test_aggregate_examples():
    assert aggregate([0.5] * 4, [0, 0, 1, 1], range(4), 0.3) == pytest.approx((0.5, 0.5, 0.5))
    micro, macro, comb = aggregate([0.9, 0.9, 0.9, 0.1], [0, 0, 0, 1], range(4), 0.5)
    assert micro == pytest.approx(0.7) and macro == pytest.approx(0.5)
    assert comb == pytest.approx(0.6)
    s = [0.2, 0.4, 0.9, 0.1]
    micro, macro, _ = aggregate(s, [0, 0, 1, 1], range(4))
    assert micro == macro
    with pytest.raises(EmptyIndexSet):
        aggregate([], [0, 1], [])


def test_aggregate_skips_unevaluated_cluster():
    micro, macro, _ = aggregate([0.2, 0.4], [0, 0, 1], [0, 1])
    assert micro == pytest.approx(0.3) and macro == pytest.approx(0.3)


def test_dispatch():
    ds, part = _pair_instance()
    for mode in ("exact", "apr", "aps"):
        assert silhouette(ds, part, mode=mode).mode == mode
    with pytest.raises(ValueError):
        silhouette(ds, part, mode="fast")


def _two_sized(n0, n1):
    lab = np.repeat([0, 1], [n0, n1])
    return Partition(lab, [[0.0], [1.0]])


def test_sample_full():
    part = _two_sized(6, 4)
    for obj in ("micro", "macro"):
        assert list(sample_indices(part, 10, obj, np.random.default_rng(0))) == list(range(10))


def test_sample_macro_exhausted_cluster():
    part = _two_sized(100, 4)
    idx = sample_indices(part, 10, "macro", np.random.default_rng(0))
    counts = np.bincount(part.assignments[idx], minlength=2)
    assert list(counts) == [6, 4]
    assert len(set(idx.tolist())) == 10


def test_sample_round_robin_remainder():
    part = Partition(np.repeat([0, 1, 2], 10), [[0.0], [1.0], [2.0]])
    idx = sample_indices(part, 8, "combined", np.random.default_rng(0))
    assert list(np.bincount(part.assignments[idx])) == [3, 3, 2]


def test_sample_too_small():
    with pytest.raises(SampleTooSmall):
        sample_indices(_two_sized(5, 5), 1, "macro", np.random.default_rng(0))


def test_sample_micro_proportional():
    part = _two_sized(80, 20)
    counts = np.zeros(2)
    for seed in range(1000):
        idx = sample_indices(part, 10, "micro", np.random.default_rng(seed))
        assert idx.size == 10 and np.unique(idx).size == 10
        counts += np.bincount(part.assignments[idx], minlength=2)
    chi2 = stats.chisquare(counts, counts.sum() * np.array([0.8, 0.2]))
    assert chi2.pvalue > 1e-3


def test_sample_micro_covers_every_cluster():
    part = Partition(np.repeat([0, 1, 2], [97, 2, 1]), [[0.0], [1.0], [2.0]])
    for seed in range(200):
        idx = sample_indices(part, 3, "micro", np.random.default_rng(seed))
        assert set(part.assignments[idx].tolist()) == {0, 1, 2}


@st.composite
def labelled_points(draw):
    n = draw(st.integers(4, 25))
    d = draw(st.integers(1, 4))
    k = draw(st.integers(2, min(4, n)))
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d)) * draw(st.floats(0.1, 10))
    lab = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
    return X, lab


@settings(max_examples=60, deadline=None)
@given(labelled_points())
def test_exact_matches_naive_oracle(inst):
    X, lab = inst
    rep = exact_silhouette(validate_dataset(X), partition_from_labels(X, lab))
    np.testing.assert_allclose(rep.per_point, naive_silhouette(X, lab), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(labelled_points())
def test_scores_bounded(inst):
    X, lab = inst
    ds, part = validate_dataset(X), partition_from_labels(X, lab)
    for rep in (exact_silhouette(ds, part), approx_silhouette_apr(ds, None, part),
                approx_silhouette_aps(ds, part)):
        assert (rep.per_point >= -1).all() and (rep.per_point <= 1).all()


@settings(max_examples=40, deadline=None)
@given(labelled_points(), st.floats(0.01, 100), st.floats(-50, 50))
def test_exact_invariant_to_similarity_transforms(inst, scale, shift):
    X, lab = inst
    base = exact_silhouette(validate_dataset(X), partition_from_labels(X, lab)).per_point
    d = X.shape[1]
    Q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(d, d)))
    Y = scale * X @ Q + shift
    moved = exact_silhouette(validate_dataset(Y), partition_from_labels(Y, lab)).per_point
    np.testing.assert_allclose(moved, base, atol=1e-9)
