import numpy as np
import pytest
from sklearn.neighbors import LocalOutlierFactor

from conftest import dataset
from ksil.baselines import (
    density_weights,
    local_outlier_factor,
    lof_weights,
    neighborhood_weights,
    run_kmeans,
    run_weighted_kmeans,
    tune_neighborhood,
)
from ksil.core import check_partition, make_rng, validate_dataset
from ksil.data import SyntheticSpec, generate_synthetic
from ksil.engine import init_partition
from ksil.errors import KTooSmall


def test_kmeans_two_blobs_two_iterations():
    ds = dataset([0.0, 1.0, 2.0, 10.0, 11.0, 12.0])
    r = run_kmeans(ds, 2, seed=0)
    lab = r.best_partition.assignments
    assert len(set(lab[:3])) == 1 and len(set(lab[3:])) == 1 and lab[0] != lab[3]
    assert r.iterations_run == 2 and r.terminated_by == "threshold"
    assert sorted(r.best_partition.centroids[:, 0]) == [1.0, 11.0]


def test_kmeans_rejects_k1():
    with pytest.raises(KTooSmall):
        run_kmeans(dataset([0.0, 1.0, 2.0]), 1)


def test_kmeans_deterministic():
    ds = generate_synthetic(SyntheticSpec("s1", seed=0))
    a, b = run_kmeans(ds, 4, seed=5), run_kmeans(ds, 4, seed=5)
    assert np.array_equal(a.best_partition.assignments, b.best_partition.assignments)
    assert a.best_objective == b.best_objective


def test_density_examples():
    ds = dataset([0.0, 1.0, 2.0, 10.0])
    w = density_weights(ds, 2, eps=1e-8).weights
    assert w[0] == pytest.approx(1 / (1.5 + 1e-8), rel=1e-12)
    assert w[1] > w[3]
    dup = density_weights(dataset([3.0, 3.0, 9.0]), 1, eps=1e-8).weights
    assert dup[0] == pytest.approx(1e8) and np.isfinite(dup).all()


def test_lof_matches_sklearn():
    rng = np.random.default_rng(2)
    X = np.vstack([rng.normal(size=(60, 2)), [[8.0, 8.0]]])
    ds = validate_dataset(X)
    for h in (3, 5, 10):
        ref = -LocalOutlierFactor(n_neighbors=h).fit(X).negative_outlier_factor_
        np.testing.assert_allclose(local_outlier_factor(ds, h, eps=1e-300), ref, rtol=1e-7)


def test_lof_grid_and_outlier():
    g = np.array([[i, j] for i in range(7) for j in range(7)], dtype=float)
    ds = validate_dataset(np.vstack([g, [[40.0, 40.0]]]))
    w = lof_weights(ds, 4).weights
    interior = [i * 7 + j for i in range(2, 5) for j in range(2, 5)]
    assert np.allclose(w[interior], 1.0, atol=0.05)
    assert w[-1] < 0.5
    assert (w <= 1.0).all()


def test_lof_identical_points():
    ds = validate_dataset(np.ones((6, 2)))
    np.testing.assert_array_equal(lof_weights(ds, 3).weights, np.ones(6))


def test_neighbour_weights_invariances():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(40, 3))
    perm = rng.permutation(40)
    for algo in ("density", "lof"):
        base = neighborhood_weights(validate_dataset(X), algo, 5).weights
        shifted = neighborhood_weights(validate_dataset(X + 100.0), algo, 5).weights
        permuted = neighborhood_weights(validate_dataset(X[perm]), algo, 5).weights
        np.testing.assert_allclose(shifted, base, rtol=1e-6)
        np.testing.assert_allclose(permuted, base[perm], rtol=1e-12)
    with pytest.raises(ValueError):
        neighborhood_weights(validate_dataset(X), "knn", 5)


def test_h_out_of_range():
    with pytest.raises(ValueError):
        density_weights(dataset([0.0, 1.0, 2.0]), 3)


def test_unit_weights_identical_to_kmeans():
    ds = generate_synthetic(SyntheticSpec("s3", seed=2))
    a = run_kmeans(ds, 5, seed=4)
    b = run_weighted_kmeans(ds, 5, np.ones(ds.n), seed=4)
    assert len(a.trace) == len(b.trace)
    for x, y in zip(a.trace, b.trace):
        assert np.array_equal(x.labels, y.labels)
    assert np.array_equal(a.best_partition.centroids, b.best_partition.centroids)


def test_zero_weight_outlier_excluded():
    ds = dataset([0.0, 1.0, 2.0, 100.0, 200.0, 201.0])
    w = np.array([1.0, 1.0, 1.0, 0.0, 1.0, 1.0])
    init = init_partition(ds, 2, "random", make_rng(0))
    r = run_weighted_kmeans(ds, 2, w, initial=init)
    cents = sorted(r.final_partition.centroids[:, 0])
    assert cents == [1.0, 200.5]


def test_density_pulls_centroid_toward_blob():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(0, 0.3, (10, 2)), [[6.0, 0.0]], rng.normal(0, 0.3, (10, 2)) + [50, 0]])
    ds = validate_dataset(X)
    w = density_weights(ds, 3).weights
    blob = X[:10].mean(axis=0)
    unweighted = X[:11].mean(axis=0)
    weighted = (w[:11, None] * X[:11]).sum(0) / w[:11].sum()
    assert np.linalg.norm(weighted - blob) < np.linalg.norm(unweighted - blob)
    r = run_weighted_kmeans(ds, 2, w, seed=0)
    check_partition(r.best_partition, ds.n, ds.d)


def test_weighted_rejects_bad_weights():
    ds = dataset([0.0, 1.0, 5.0])
    with pytest.raises(ValueError):
        run_weighted_kmeans(ds, 2, [1.0, -1.0, 1.0])
    with pytest.raises(ValueError):
        run_weighted_kmeans(ds, 2, [1.0, 1.0])


def test_tune_matches_exhaustive():
    ds = generate_synthetic(SyntheticSpec("s4", n=300, seed=3))
    init = init_partition(ds, 3, "kmeanspp", make_rng(1))
    for algo in ("density", "lof"):
        best_h, r = tune_neighborhood(ds, 3, algo, grid=(20, 2), initial=init)
        scores = {h: run_weighted_kmeans(ds, 3, neighborhood_weights(ds, algo, h),
                                         initial=init).best_objective for h in (2, 20)}
        expect = 2 if scores[2] >= scores[20] else 20
        assert best_h == expect and r.params["h"] == expect
        assert r.best_objective == scores[expect]


def test_tune_singleton_and_tie():
    ds = dataset([0.0, 0.1, 0.2, 10.0, 10.1, 10.2, 10.3])
    best_h, r = tune_neighborhood(ds, 2, "density", grid=(3,))
    assert best_h == 3
    # clean separation: every h recovers the same partition, smaller h wins
    best_h, _ = tune_neighborhood(ds, 2, "lof", grid=(4, 2, 3))
    assert best_h == 2
    with pytest.raises(ValueError):
        tune_neighborhood(ds, 2, "lof", grid=(50,))


def test_baselines_retain_best():
    ds = generate_synthetic(SyntheticSpec("s1", seed=4))
    for r in (run_kmeans(ds, 6, seed=2), tune_neighborhood(ds, 6, "lof", seed=2)[1]):
        assert r.best_objective == max(t.objective for t in r.trace)
        check_partition(r.best_partition, ds.n, ds.d)
