import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import cvm_rank, dtw_table, ecdf_area, ks_brute
from sddsafe.distance import (DistanceMeasure, EmpiricalCDF, cramer_von_mises, dtw, dtw_matrix,
                              dtw_path, kolmogorov_smirnov, wasserstein)
from sddsafe.errors import BandError, DistanceError

vals = st.floats(-10, 10, allow_nan=False)
samples = st.lists(vals, min_size=1, max_size=25)
MEASURES = [wasserstein, kolmogorov_smirnov, cramer_von_mises]


def test_ecdf_steps():
    F = EmpiricalCDF.from_sample([3, 1, 2, 2])
    assert F.evaluate(0.5) == 0
    assert F.evaluate(2) == 0.75
    assert F.evaluate(np.inf) == 1 and F.evaluate(-np.inf) == 0


def test_wasserstein_examples():
    assert wasserstein([0, 1], [1, 2]) == 1.0
    assert wasserstein([4, 2, 7], [4, 2, 7]) == 0.0


def test_wasserstein_matches_area_oracle(rng):
    a, b = rng.normal(size=50), rng.normal(0.4, 1.3, size=70)
    assert wasserstein(a, b) == pytest.approx(ecdf_area(a, b), abs=1e-9)


def test_ks_examples():
    assert kolmogorov_smirnov([1, 2, 3], [1, 2, 3]) == 0.0
    assert kolmogorov_smirnov([0, 1], [10, 11]) == 1.0


def test_ks_matches_brute(rng):
    for _ in range(20):
        a = rng.integers(0, 6, size=rng.integers(1, 9)).astype(float)
        b = rng.integers(0, 6, size=rng.integers(1, 9)).astype(float)
        assert kolmogorov_smirnov(a, b) == pytest.approx(ks_brute(a, b), abs=1e-12)


def test_cvm_matches_rank_formula(rng):
    for _ in range(20):
        a = rng.normal(size=rng.integers(2, 30))
        b = rng.normal(0.3, 1, size=rng.integers(2, 30))
        assert cramer_von_mises(a, b) == pytest.approx(cvm_rank(a, b), abs=1e-9)


def test_cvm_grows_with_shift(rng):
    a = rng.normal(size=40)
    values = [cramer_von_mises(a, a + s) for s in (0.0, 0.2, 0.5, 1.0)]
    assert values[0] == 0.0
    assert all(x < y for x, y in zip(values, values[1:]))


@pytest.mark.parametrize("measure", MEASURES)
def test_empty_sample_rejected(measure):
    with pytest.raises(DistanceError):
        measure([], [1.0])


@pytest.mark.parametrize("measure", MEASURES)
@given(a=samples, b=samples)
def test_measure_axioms(measure, a, b):
    d = measure(a, b)
    assert d >= 0
    assert d == measure(b, a)
    assert measure(a, a) == 0


@given(samples, samples)
def test_ks_bounded(a, b):
    assert 0 <= kolmogorov_smirnov(a, b) <= 1


@given(samples, samples, st.floats(-10, 10))
def test_wasserstein_translation(a, b, c):
    shifted = wasserstein(np.add(a, c), np.add(b, c))
    assert shifted == pytest.approx(wasserstein(a, b), abs=1e-12)


@given(st.integers(1, 30).flatmap(lambda n: st.tuples(
    st.lists(vals, min_size=n, max_size=n), st.lists(vals, min_size=n, max_size=n))))
def test_wasserstein_equal_size_order_statistics(pair):
    a, b = pair
    expected = np.mean(np.abs(np.sort(a) - np.sort(b)))
    assert wasserstein(a, b) == pytest.approx(expected, abs=1e-12)


def test_measure_tags():
    assert DistanceMeasure.parse("Wasserstein") is DistanceMeasure.WASSERSTEIN
    assert DistanceMeasure.parse("KolmogorovSmirnov") is DistanceMeasure.KOLMOGOROV_SMIRNOV
    assert DistanceMeasure.parse("cramer_von_mises") is DistanceMeasure.CRAMER_VON_MISES
    assert DistanceMeasure.WASSERSTEIN([0, 1], [1, 2]) == 1.0
    with pytest.raises(DistanceError):
        DistanceMeasure.parse("anderson")


def test_dtw_examples():
    assert dtw([1, 2, 3], [1, 2, 3]) == 0
    assert dtw([0, 0, 0], [1, 1, 1]) == 3
    assert dtw([1, 2, 3], [1, 1, 2, 3]) == 0


def test_dtw_squared_cost():
    assert dtw([0, 0], [2, 2], squared=True) == 8


def test_dtw_band_validation():
    with pytest.raises(BandError):
        dtw([1, 2, 3], [1, 2, 3, 4, 5], band=1)
    assert dtw([1, 2, 3], [1, 2, 3, 4, 5], band=2) == dtw_table([1, 2, 3], [1, 2, 3, 4, 5], band=2)


def test_dtw_empty():
    with pytest.raises(DistanceError):
        dtw([], [1.0])


seqs = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=12)


@given(seqs, seqs)
def test_dtw_matches_table(a, b):
    assert dtw(a, b) == dtw_table(a, b)
    assert dtw(a, b) == dtw(b, a)


@given(seqs, seqs, st.integers(0, 12))
def test_dtw_band_only_adds_cost(a, b, band):
    if band < abs(len(a) - len(b)):
        return
    assert dtw(a, b) <= dtw(a, b, band=band)
    assert dtw(a, b, band=band) == dtw_table(a, b, band=band)


@given(seqs, seqs)
def test_dtw_path_cost_is_optimal(a, b):
    path, cost = dtw_path(a, b)
    assert path[0] == (0, 0) and path[-1] == (len(a) - 1, len(b) - 1)
    steps = {(i2 - i1, j2 - j1) for (i1, j1), (i2, j2) in zip(path, path[1:])}
    assert steps <= {(1, 1), (1, 0), (0, 1)}
    along = sum(abs(a[i] - b[j]) for i, j in path)
    assert along == pytest.approx(cost, abs=1e-9)
    assert cost == pytest.approx(dtw(a, b), abs=1e-12)


def test_dtw_matrix_thread_invariant(rng):
    X = rng.normal(size=(37, 15))
    Y = rng.normal(size=(5, 15))
    assert np.array_equal(dtw_matrix(X), dtw_matrix(X, threads=4))
    assert np.array_equal(dtw_matrix(X, Y), dtw_matrix(X, Y, threads=3))
    assert dtw_matrix(X, Y)[3, 2] == dtw(X[3], Y[2])
    D = dtw_matrix(X)
    assert np.array_equal(D, D.T) and np.all(np.diag(D) == 0)
