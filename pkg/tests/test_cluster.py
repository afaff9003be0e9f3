import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from oracles import dtw_table, silhouette_brute
from sddsafe.cluster import (ClusterModel, assign, kmeans_dtw, load_model, save_model,
                             select_clusters, silhouette_dtw, smallest_cluster)
from sddsafe.errors import AssignError, ClusterError, ScoreError
from sddsafe.series import sliding_windows
from sddsafe.synthetic import pattern, planted_windows


def duplicated_groups():
    w = 8
    groups = [np.zeros(w), np.ones(w), np.linspace(-1, 1, w)]
    X = np.vstack([g for g in groups for _ in range(5)])
    return X, np.repeat([0, 1, 2], 5)


def same_partition(a, b):
    # label-invariant comparison: identical co-membership matrices
    a, b = np.asarray(a), np.asarray(b)
    return np.array_equal(a[:, None] == a[None, :], b[:, None] == b[None, :])


def test_duplicates_split_exactly():
    X, labels = duplicated_groups()
    model = kmeans_dtw(X, 3, seed=1)
    assert same_partition(model.assignments, labels)
    assert model.inertia == 0
    for j in range(3):
        members = X[model.assignments == j]
        assert np.allclose(model.centroids[j], members[0])


def test_partition_independent_of_seed():
    X, _ = duplicated_groups()
    a = kmeans_dtw(X, 3, seed=1)
    b = kmeans_dtw(X, 3, seed=99)
    assert same_partition(a.assignments, b.assignments)


def test_planted_recovery(planted, planted_model):
    _, labels = planted
    assert adjusted_rand_score(labels, planted_model.assignments) >= 0.9


def test_same_seed_bit_identical(planted):
    X, _ = planted
    a = kmeans_dtw(X, 3, seed=5)
    b = kmeans_dtw(X, 3, seed=5, threads=4)
    assert np.array_equal(a.centroids, b.centroids)
    assert np.array_equal(a.assignments, b.assignments)
    assert a.silhouette == b.silhouette


def test_inertia_non_increasing(rng):
    X = rng.normal(size=(60, 12)).cumsum(axis=1)
    model = kmeans_dtw(X, 4, seed=3)
    hist = np.array(model.inertia_history)
    assert np.all(np.diff(hist) <= 1e-9)


def test_assignments_are_fixed_point(rng):
    X = rng.normal(size=(50, 10)).cumsum(axis=1)
    model = kmeans_dtw(X, 3, seed=0)
    for i, x in enumerate(X):
        assert assign(model, x)[0] == model.assignments[i]
    assert np.all(model.sizes > 0)
    assert model.sizes.sum() == len(X)


def test_kmeans_errors():
    X = np.zeros((3, 5))
    with pytest.raises(ClusterError):
        kmeans_dtw(X, 4)
    with pytest.raises(ClusterError):
        kmeans_dtw(X, 1)
    with pytest.raises(ClusterError):
        kmeans_dtw([np.zeros(4), np.zeros(5), np.zeros(4)], 2)


def test_identical_windows_get_repaired_clusters():
    model = kmeans_dtw(np.ones((6, 4)), 2, seed=0)
    assert np.all(model.sizes > 0)
    assert model.silhouette == 0.0


def test_silhouette_far_groups(rng):
    X = np.vstack([rng.normal(0, 0.01, size=(10, 6)), rng.normal(10, 0.01, size=(10, 6))])
    assert kmeans_dtw(X, 2, seed=0).silhouette > 0.9


def test_silhouette_matches_brute_force(rng):
    X = rng.normal(size=(14, 6))
    labels = np.array([0, 1, 2] * 4 + [0, 0])
    model = ClusterModel(3, X[:3].copy(), labels, np.bincount(labels), float("nan"), 0)
    D = [[dtw_table(a, b) for b in X] for a in X]
    assert silhouette_dtw(model, X) == pytest.approx(silhouette_brute(D, labels), abs=1e-9)


def test_silhouette_singletons_count_zero(rng):
    X = rng.normal(size=(4, 5))
    labels = np.array([0, 1, 1, 1])
    model = ClusterModel(2, X[:2].copy(), labels, np.bincount(labels), float("nan"), 0)
    D = [[dtw_table(a, b) for b in X] for a in X]
    assert silhouette_dtw(model, X) == pytest.approx(silhouette_brute(D, labels), abs=1e-9)


def test_silhouette_needs_two_clusters(rng):
    X = rng.normal(size=(4, 5))
    labels = np.zeros(4, dtype=int)
    model = ClusterModel(2, X[:2].copy(), labels, np.array([4, 0]), float("nan"), 0)
    with pytest.raises(ScoreError):
        silhouette_dtw(model, X)


def test_select_planted(planted):
    X, _ = planted
    selection, model = select_clusters(X, 2, 6, 1, seed=0)
    assert selection.chosen_k == 3 and model.k == 3
    assert sorted(selection.scores) == [2, 3, 4, 5, 6]
    assert selection.scores[3] == max(selection.scores.values())
    assert len(selection.summaries[4]) == 4


def test_select_singleton_range(planted):
    X, _ = planted
    selection, model = select_clusters(X, 5, 5, 1, seed=0)
    assert selection.chosen_k == 5 and list(selection.scores) == [5]


def test_select_reports_every_k_including_seven(rng):
    # a Reliance-like setup: a random walk cut into 20-step windows, range covering 7
    walk = rng.normal(size=400).cumsum()
    wins = sliding_windows(walk, 20, 10)
    selection, _ = select_clusters(wins, 5, 8, 1, seed=0)
    assert sorted(selection.scores) == [5, 6, 7, 8]
    assert all(-1 <= s <= 1 for s in selection.scores.values())


def test_select_tie_prefers_larger_k(planted):
    import sddsafe.cluster as cl
    X, _ = planted
    selection, _ = select_clusters(X, 2, 4, 1, seed=0)
    best = max(selection.scores.values())
    chosen = max(k for k, s in selection.scores.items() if s >= best - cl.SILHOUETTE_TIE)
    assert selection.chosen_k == chosen


def test_assign_centroid_and_ties(planted_model):
    j = 2
    assert assign(planted_model, planted_model.centroids[j]) == (j, 0.0)
    tie = ClusterModel(4, np.array([[0.0, 0], [1, 1], [5, 5], [1, 1]]), np.array([0, 1, 2, 3]),
                       np.ones(4, int), 0.0, 0)
    assert assign(tie, [1.0, 1.0])[0] == 1
    with pytest.raises(AssignError):
        assign(planted_model, np.zeros(5))


def test_assign_noisy_pattern(planted_model, rng):
    for name in ("sinusoid", "ramp", "step"):
        x = pattern(name, 30) + rng.normal(0, 0.05, 30)
        dists = [dtw_table(x, c) for c in planted_model.centroids]
        assert assign(planted_model, x)[0] == int(np.argmin(dists))


def test_smallest_cluster():
    def model(sizes):
        labels = np.repeat(np.arange(len(sizes)), sizes)
        return ClusterModel(len(sizes), np.zeros((len(sizes), 3)), labels, np.array(sizes), 0.0, 0)
    assert smallest_cluster(model([10, 3, 7])) == (1, 3)
    assert smallest_cluster(model([4, 4])) == (0, 4)


def test_smallest_cluster_counts(planted_model):
    j, m = smallest_cluster(planted_model)
    counts = np.bincount(planted_model.assignments)
    assert m == counts.min() and j == int(np.argmin(counts))


def test_model_roundtrip(tmp_path, planted_model):
    path = tmp_path / "model.json"
    save_model(planted_model, path)
    back = load_model(path)
    assert back.k == planted_model.k and back.w == planted_model.w
    assert np.array_equal(back.centroids, planted_model.centroids)
    assert np.array_equal(back.assignments, planted_model.assignments)
    assert back.silhouette == planted_model.silhouette


def test_planted_generator_shape():
    X, labels = planted_windows(4, 10, 0.0, seed=0)
    assert X.shape == (12, 10)
    assert np.array_equal(X[0], pattern("sinusoid", 10))
