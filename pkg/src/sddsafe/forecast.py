"""Baseline one-step forecasters, prediction files and error metrics."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import FitError, ForecastError, IngestError, MapeUndefined


def _values(x) -> np.ndarray:
    return np.asarray(getattr(x, "values", x), dtype=np.float64)


class Forecaster(Protocol):
    """Anything with ``fit`` and a one-step ``predict_next`` on normalized values."""

    min_history: int

    def fit(self, train) -> "Forecaster": ...

    def predict_next(self, history) -> float: ...


class PersistenceForecaster:
    """Predicts that tomorrow equals today."""

    min_history = 1

    def fit(self, train):
        return self

    def predict_next(self, history) -> float:
        values = _values(history)
        if values.size == 0:
            raise ForecastError("persistence needs at least one past value")
        return float(values[-1])


def persistence_forecaster() -> PersistenceForecaster:
    return PersistenceForecaster()


class ARForecaster:
    """Linear autoregression with an unpenalized intercept and a ridge penalty on the lags."""

    def __init__(self, order: int = 1, ridge: float = 0.0):
        if order < 1:
            raise FitError(f"order must be >= 1, got {order}")
        if ridge < 0 or not math.isfinite(ridge):
            raise FitError(f"ridge must be a finite value >= 0, got {ridge}")
        self.order = int(order)
        self.ridge = float(ridge)
        self.intercept = None
        self.coef = None

    @property
    def min_history(self) -> int:
        return self.order

    def design(self, values: np.ndarray):
        p = self.order
        n = len(values)
        lags = np.column_stack([values[p - j:n - j] for j in range(1, p + 1)])
        return np.column_stack([np.ones(n - p), lags]), values[p:]

    def fit(self, train):
        values = _values(train)
        if len(values) <= self.order:
            raise FitError(f"need more than {self.order} training values, got {len(values)}")
        A, y = self.design(values)
        penalty = np.diag([0.0] + [self.ridge] * self.order)
        gram = A.T @ A + penalty
        if self.ridge == 0 and np.linalg.matrix_rank(gram) < gram.shape[0]:
            raise FitError("singular normal equations; use a positive ridge")
        try:
            beta = np.linalg.solve(gram, A.T @ y)
        except np.linalg.LinAlgError as exc:
            raise FitError(f"normal equations could not be solved: {exc}") from exc
        if not np.all(np.isfinite(beta)):
            raise FitError("fit produced non-finite coefficients")
        self.intercept = float(beta[0])
        self.coef = beta[1:]
        return self

    def predict_next(self, history) -> float:
        if self.coef is None:
            raise ForecastError("forecaster has not been fitted")
        values = _values(history)
        if len(values) < self.order:
            raise ForecastError(f"need {self.order} past values, got {len(values)}")
        lags = values[::-1][:self.order]
        return float(self.intercept + self.coef @ lags)


def ar_forecaster(order: int = 1, ridge: float = 0.0) -> ARForecaster:
    return ARForecaster(order, ridge)


@dataclass(frozen=True)
class PredictionRecord:
    time: int
    actual: float
    predicted: float


@dataclass(frozen=True)
class PerfMetrics:
    rmse: float
    mape: float
    mse: float
    n: int = 0
    mape_skipped: int = 0


def metrics(records) -> PerfMetrics:
    """MSE/RMSE over all records; MAPE (percent) over records whose actual is non-zero."""
    records = list(records)
    if not records:
        raise ForecastError("no prediction records")
    actual = np.array([r.actual for r in records], dtype=np.float64)
    predicted = np.array([r.predicted for r in records], dtype=np.float64)
    err = actual - predicted
    mse = float(np.mean(err * err))
    rmse = math.sqrt(mse)
    nonzero = actual != 0
    skipped = int(np.count_nonzero(~nonzero))
    if not nonzero.any():
        partial = PerfMetrics(rmse, float("nan"), mse, len(records), skipped)
        raise MapeUndefined("MAPE undefined: every actual value is zero", partial)
    mape = float(100.0 * np.mean(np.abs(err[nonzero]) / np.abs(actual[nonzero])))
    return PerfMetrics(rmse, mape, mse, len(records), skipped)


def one_step_predictions(forecaster, series, normalizer, start: int) -> list[PredictionRecord]:
    """Predict every tick from position ``start`` onward using all earlier values.

    The forecaster sees normalized values; records are in domain units.
    """
    domain = _values(series)
    index = np.asarray(getattr(series, "index", np.arange(len(domain))))
    scaled = normalizer.apply(domain)
    need = getattr(forecaster, "min_history", 1)
    if start < need:
        raise ForecastError(f"first prediction at position {start} lacks {need} values of history")
    out = []
    for pos in range(start, len(domain)):
        pred = forecaster.predict_next(scaled[pos - need:pos])
        out.append(PredictionRecord(int(index[pos]), float(domain[pos]),
                                    float(normalizer.invert(pred))))
    return out


def window_errors(forecaster, values, starts, w: int) -> dict:
    """One-step error (predicted minus actual) right after each window, keyed by window index.

    Windows whose following tick falls outside ``values`` are left out.
    """
    values = _values(values)
    need = getattr(forecaster, "min_history", 1)
    if need > w:
        raise ForecastError(f"forecaster needs {need} values but windows hold {w}")
    out = {}
    for i, s in enumerate(starts):
        nxt = int(s) + w
        if nxt >= len(values):
            continue
        out[i] = forecaster.predict_next(values[nxt - need:nxt]) - float(values[nxt])
    return out


HEADER = ["tick", "actual", "predicted"]


def export_predictions(records, path, comment: str | None = None) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for r in records:
            writer.writerow([r.time, repr(float(r.actual)), repr(float(r.predicted))])


def import_predictions(path) -> list[PredictionRecord]:
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"{path}: cannot open ({exc.strerror})") from exc
    seen = {}
    records = []
    with handle:
        reader = csv.reader(handle)
        cols = None
        for row in reader:
            lineno = reader.line_num
            if not row or row[0].startswith("#"):
                continue
            if cols is None:
                header = [c.strip().lower() for c in row]
                missing = [c for c in HEADER if c not in header]
                if missing:
                    raise IngestError(f"{path}:{lineno}: missing column(s) {', '.join(missing)}")
                cols = [header.index(c) for c in HEADER]
                continue
            try:
                tick = int(row[cols[0]])
                actual = float(row[cols[1]])
                predicted = float(row[cols[2]])
            except (ValueError, IndexError):
                raise IngestError(f"{path}:{lineno}: unparsable row {row!r}") from None
            if not (math.isfinite(actual) and math.isfinite(predicted)):
                raise IngestError(f"{path}:{lineno}: non-finite value")
            if tick in seen:
                raise IngestError(f"{path}:{lineno}: duplicate tick {tick} (first on line {seen[tick]})")
            seen[tick] = lineno
            records.append(PredictionRecord(tick, actual, predicted))
    if cols is None:
        raise IngestError(f"{path}: missing header 'tick,actual,predicted'")
    records.sort(key=lambda r: r.time)
    return records


def parse_forecaster(spec: str):
    """``persistence``, ``ar:ORDER:RIDGE`` or ``external:PATH``.

    Returns a forecaster, or the prediction path for ``external``.
    """
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "persistence" and not rest:
        return persistence_forecaster()
    if kind == "ar":
        parts = rest.split(":") if rest else []
        order = int(parts[0]) if parts else 1
        ridge = float(parts[1]) if len(parts) > 1 else 0.0
        return ar_forecaster(order, ridge)
    if kind == "external" and rest:
        return Path(rest)
    raise ValueError(f"unknown forecaster spec {spec!r}")
