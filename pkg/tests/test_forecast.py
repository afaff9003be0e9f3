import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import metrics_direct, ridge_normal_equations
from sddsafe.errors import FitError, ForecastError, IngestError, MapeUndefined
from sddsafe.forecast import (PredictionRecord, ar_forecaster, export_predictions,
                              import_predictions, metrics, one_step_predictions,
                              persistence_forecaster, window_errors)
from sddsafe.series import TimeSeries, fit_normalizer


def records(actual, predicted):
    return [PredictionRecord(i, a, p) for i, (a, p) in enumerate(zip(actual, predicted))]


def test_persistence_last_value():
    assert persistence_forecaster().predict_next([0.1, -0.3, 0.4]) == 0.4
    with pytest.raises(ForecastError):
        persistence_forecaster().predict_next([])


def test_persistence_exact_on_constant():
    series = TimeSeries.from_values([5.0] * 10 + [6.0])
    nz = fit_normalizer(series)
    recs = one_step_predictions(persistence_forecaster(), series.slice(0, 10), nz, 1)
    assert all(r.actual == pytest.approx(r.predicted, abs=1e-12) for r in recs)


def test_persistence_random_walk_rmse():
    sigma = 0.7
    steps = np.random.default_rng(3).normal(0, sigma, 10_000)
    walk = np.concatenate([[0.0], steps.cumsum()])
    preds = [persistence_forecaster().predict_next(walk[:t]) for t in range(1, len(walk))]
    rmse = metrics(records(walk[1:], preds)).rmse
    assert abs(rmse - sigma) <= 0.1 * sigma


def test_ar_recovers_coefficient():
    y = 0.9 ** np.arange(60)
    model = ar_forecaster(1, 0.0).fit(y)
    assert model.coef[0] == pytest.approx(0.9, abs=1e-6)
    assert model.predict_next(y[:5]) == pytest.approx(0.9 ** 5, abs=1e-6)


def test_ar_ridge_limit_gives_mean():
    y = np.random.default_rng(0).normal(size=200)
    model = ar_forecaster(2, 1e12).fit(y)
    assert np.all(np.abs(model.coef) < 1e-6)
    assert model.predict_next(y[-2:]) == pytest.approx(y[2:].mean(), abs=1e-6)


def test_ar_matches_normal_equations():
    y = np.random.default_rng(1).normal(size=40).cumsum()
    model = ar_forecaster(3, 0.5).fit(y)
    beta = ridge_normal_equations(y, 3, 0.5)
    assert np.allclose([model.intercept, *model.coef], beta, atol=1e-8, rtol=0)


def test_ar_singular_without_ridge():
    with pytest.raises(FitError):
        ar_forecaster(2, 0.0).fit(np.ones(20))
    with pytest.raises(FitError):
        ar_forecaster(3).fit([1.0, 2.0, 3.0])


@given(st.lists(st.floats(-1, 1), min_size=5, max_size=40), st.integers(1, 3),
       st.floats(1e-6, 1e3))
def test_ar_ridge_finite(y, order, ridge):
    if len(y) <= order:
        return
    model = ar_forecaster(order, ridge).fit(y)
    assert np.all(np.isfinite(model.coef)) and math.isfinite(model.intercept)


def test_metrics_examples():
    m = metrics(records([2, 4], [1, 5]))
    assert (m.mse, m.rmse, m.mape) == (1.0, 1.0, 37.5)
    m = metrics(records([3, 1], [3, 1]))
    assert (m.rmse, m.mape, m.mse) == (0.0, 0.0, 0.0)


def test_metrics_match_direct(rng):
    for _ in range(20):
        a = rng.uniform(1, 100, size=15)
        p = a + rng.normal(size=15)
        rmse, mape, mse = metrics_direct(list(a), list(p))
        m = metrics(records(a, p))
        assert m.rmse == pytest.approx(rmse, abs=1e-10)
        assert m.mape == pytest.approx(mape, abs=1e-10)
        assert m.mse == pytest.approx(mse, abs=1e-10)


def test_mape_skips_zero_actuals():
    m = metrics(records([0, 2], [1, 1]))
    assert m.mape_skipped == 1 and m.mape == 50.0


def test_mape_undefined_keeps_rmse():
    with pytest.raises(MapeUndefined) as info:
        metrics(records([0, 0], [1, 3]))
    assert info.value.metrics.mse == 5.0


@given(st.lists(st.tuples(st.floats(0.5, 50), st.floats(-50, 50)), min_size=1, max_size=30),
       st.randoms())
def test_metrics_properties(pairs, shuffler):
    recs = records(*zip(*pairs))
    m = metrics(recs)
    assert m.rmse ** 2 == pytest.approx(m.mse, abs=1e-12, rel=1e-12)
    shuffled = list(recs)
    shuffler.shuffle(shuffled)
    m2 = metrics(shuffled)
    assert m2.mse == pytest.approx(m.mse, rel=1e-12, abs=1e-12)
    assert m2.mape == pytest.approx(m.mape, rel=1e-12, abs=1e-12)


def test_window_errors():
    values = np.array([0.0, 1.0, 2.0, 4.0])
    errs = window_errors(persistence_forecaster(), values, [0, 1, 2], 2)
    assert errs == {0: -1.0, 1: -2.0}


def test_prediction_file_roundtrip(tmp_path):
    series = TimeSeries.from_values(np.random.default_rng(2).normal(size=30).cumsum() + 50)
    nz = fit_normalizer(series)
    recs = one_step_predictions(ar_forecaster(2, 0.1).fit(nz.apply(series.values)), series, nz, 5)
    path = tmp_path / "p.csv"
    export_predictions(recs, path, comment="made in a test")
    assert import_predictions(path) == recs


def test_import_three_rows_sorted(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("tick,actual,predicted\n3,1,1.5\n1,2,2\n2,3,2.5\n")
    recs = import_predictions(p)
    assert [r.time for r in recs] == [1, 2, 3]


def test_import_duplicate_tick(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("tick,actual,predicted\n1,1,1\n2,1,1\n1,1,1\n")
    with pytest.raises(IngestError, match=":4: duplicate tick 1"):
        import_predictions(p)


def test_import_missing_column(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("tick,actual\n1,1\n")
    with pytest.raises(IngestError, match="predicted"):
        import_predictions(p)


def test_import_bad_number(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("tick,actual,predicted\n1,1,x\n")
    with pytest.raises(IngestError, match=":2:"):
        import_predictions(p)
