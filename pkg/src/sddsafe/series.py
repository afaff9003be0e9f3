"""Univariate series container, splitting, scaling and windowing."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import IngestError, NormalizeError, SegmentError, SplitError, WindowError


def _frozen(arr, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered samples on integer ticks."""

    index: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        index = _frozen(self.index, np.int64)
        values = _frozen(self.values, np.float64)
        if index.ndim != 1 or values.ndim != 1 or len(index) != len(values):
            raise IngestError("index and values must be 1-D and of equal length")
        if len(values) == 0:
            raise IngestError("series must contain at least one sample")
        if np.any(np.diff(index) <= 0):
            raise IngestError("index must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise IngestError("values must be finite")
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values, start: int = 0) -> "TimeSeries":
        values = np.asarray(values, dtype=np.float64)
        return cls(np.arange(start, start + len(values)), values)

    def __len__(self) -> int:
        return len(self.values)

    def slice(self, start: int, stop: int) -> "TimeSeries":
        return TimeSeries(self.index[start:stop], self.values[start:stop])

    def with_values(self, values) -> "TimeSeries":
        return TimeSeries(self.index, values)


@dataclass(frozen=True)
class DatasetSplit:
    train: TimeSeries
    validation: TimeSeries
    ratio: float


@dataclass(frozen=True)
class Normalizer:
    """Affine map sending [min, max] of the training data onto [target_lo, target_hi].

    Values outside the training range extrapolate linearly; nothing is clipped.
    """

    min: float
    max: float
    target_lo: float = -1.0
    target_hi: float = 1.0

    def __post_init__(self):
        if not self.max > self.min:
            raise NormalizeError(f"degenerate range: min={self.min}, max={self.max}")
        if not self.target_hi > self.target_lo:
            raise NormalizeError("target_hi must exceed target_lo")

    @property
    def scale(self) -> float:
        return (self.target_hi - self.target_lo) / (self.max - self.min)

    def apply(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = self.target_lo + (x - self.min) * self.scale
        return float(out) if out.ndim == 0 else out

    def invert(self, y):
        y = np.asarray(y, dtype=np.float64)
        out = self.min + (y - self.target_lo) / self.scale
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class Window:
    start: int
    length: int
    values: np.ndarray = field(repr=False)

    @property
    def end(self) -> int:
        return self.start + self.length


# Same shape as Window; kept as its own type so signatures say which one they want.
@dataclass(frozen=True, eq=False)
class Segment:
    start: int
    length: int
    values: np.ndarray = field(repr=False)

    @property
    def end(self) -> int:
        return self.start + self.length

    @property
    def label(self) -> str:
        return f"{self.start}:{self.end}"


def _values_of(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.values
    return np.asarray(series, dtype=np.float64)


def split(series: TimeSeries, ratio: float = 0.8) -> DatasetSplit:
    """Contiguous split; the first ``floor(ratio * n)`` samples go to training."""
    if not 0.0 < ratio < 1.0:
        raise SplitError(f"ratio must lie in (0, 1), got {ratio}")
    n = len(series)
    # exact decimal arithmetic so e.g. 0.29 * 100 floors to 29, not 28
    n_train = math.floor(Fraction(repr(float(ratio))) * n)
    if n_train < 1 or n - n_train < 1:
        raise SplitError(f"series of length {n} is too short to split at ratio {ratio}")
    return DatasetSplit(series.slice(0, n_train), series.slice(n_train, n), float(ratio))


def fit_normalizer(train, lo: float = -1.0, hi: float = 1.0) -> Normalizer:
    values = _values_of(train)
    if values.size == 0:
        raise NormalizeError("cannot fit a normalizer on an empty series")
    vmin, vmax = float(values.min()), float(values.max())
    if not vmax > vmin:
        raise NormalizeError("training series is constant; normalization is undefined")
    nz = Normalizer(vmin, vmax, lo, hi)
    if not math.isfinite(nz.scale) or not math.isfinite(vmax - vmin):
        raise NormalizeError(f"training range [{vmin!r}, {vmax!r}] is not representable after scaling")
    return nz


def sliding_windows(series, w: int, stride: int = 1) -> list[Window]:
    values = _values_of(series)
    n = len(values)
    if w < 1 or stride < 1:
        raise WindowError(f"window size and stride must be >= 1 (w={w}, stride={stride})")
    if w > n:
        raise WindowError(f"window size {w} exceeds series length {n}")
    return [Window(s, w, values[s:s + w]) for s in range(0, n - w + 1, stride)]


def segments(series, l: int) -> list[Segment]:
    """Consecutive non-overlapping pieces of length ``l``; a short tail is dropped."""
    values = _values_of(series)
    n = len(values)
    if l < 1:
        raise SegmentError(f"segment length must be >= 1, got {l}")
    if l > n:
        raise SegmentError(f"segment length {l} exceeds series length {n}")
    return [Segment(s, l, values[s:s + l]) for s in range(0, (n // l) * l, l)]


def windows_array(windows) -> np.ndarray:
    """Stack windows (or raw arrays) into a C-contiguous 2-D float array."""
    rows = [w.values if isinstance(w, (Window, Segment)) else np.asarray(w, dtype=np.float64)
            for w in windows]
    if not rows:
        return np.empty((0, 0))
    return np.ascontiguousarray(np.vstack(rows), dtype=np.float64)


def _parse_time(text: str):
    text = text.strip()
    try:
        return int(text), True
    except ValueError:
        pass
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is not None:
        stamp = stamp.replace(tzinfo=None) - stamp.utcoffset()
    return stamp, False


def read_series_csv(path) -> TimeSeries:
    """Read a ``date,value`` CSV.

    Integer dates are kept as ticks. ISO-8601 dates are mapped to consecutive
    ticks 0..n-1 in file order; calendar gaps are not modelled.
    """
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"{path}: cannot open ({exc.strerror})") from exc
    times, values, integer_flags = [], [], []
    with handle:
        reader = csv.reader(handle)
        header = None
        for row in reader:
            lineno = reader.line_num
            if not row or row[0].startswith("#"):
                continue
            if header is None:
                header = [c.strip().lower() for c in row]
                if header[:2] != ["date", "value"]:
                    raise IngestError(f"{path}:{lineno}: expected header 'date,value', got {row!r}")
                continue
            if len(row) < 2:
                raise IngestError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                t, is_int = _parse_time(row[0])
            except ValueError:
                raise IngestError(f"{path}:{lineno}: unparsable date {row[0]!r}") from None
            try:
                v = float(row[1])
            except ValueError:
                raise IngestError(f"{path}:{lineno}: unparsable value {row[1]!r}") from None
            if not math.isfinite(v):
                raise IngestError(f"{path}:{lineno}: non-finite value {row[1]!r}")
            times.append((lineno, t))
            values.append(v)
            integer_flags.append(is_int)
    if header is None or not values:
        raise IngestError(f"{path}: no data rows")
    if any(integer_flags) and not all(integer_flags):
        raise IngestError(f"{path}: mixed integer ticks and calendar dates")
    for (_, prev), (lineno, cur) in zip(times, times[1:]):
        if not cur > prev:
            raise IngestError(f"{path}:{lineno}: time {cur} does not increase")
    if all(integer_flags):
        index = np.array([t for _, t in times], dtype=np.int64)
    else:
        index = np.arange(len(values), dtype=np.int64)
    return TimeSeries(index, np.array(values))
