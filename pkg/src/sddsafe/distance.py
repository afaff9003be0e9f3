"""ECDF-based two-sample distances and dynamic time warping."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .errors import BandError, DistanceError


def _sample(x, name: str) -> np.ndarray:
    arr = np.asarray(getattr(x, "values", x), dtype=np.float64).ravel()
    if arr.size == 0:
        raise DistanceError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise DistanceError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True, eq=False)
class EmpiricalCDF:
    sorted_sample: np.ndarray

    @classmethod
    def from_sample(cls, sample) -> "EmpiricalCDF":
        return cls(np.sort(_sample(sample, "sample")))

    @property
    def n(self) -> int:
        return len(self.sorted_sample)

    def evaluate(self, x):
        """Fraction of the sample that is <= x (right-continuous)."""
        counts = np.searchsorted(self.sorted_sample, x, side="right")
        return counts / self.n


def _merged(a, b):
    fa = EmpiricalCDF.from_sample(_sample(a, "first sample"))
    fb = EmpiricalCDF.from_sample(_sample(b, "second sample"))
    grid = np.sort(np.concatenate([fa.sorted_sample, fb.sorted_sample]))
    return fa, fb, grid


def wasserstein(a, b) -> float:
    """Area between the two ECDFs, integrated exactly over the merged breakpoints."""
    fa, fb, grid = _merged(a, b)
    gaps = np.diff(grid)
    diff = np.abs(fa.evaluate(grid[:-1]) - fb.evaluate(grid[:-1]))
    return float(np.sum(diff * gaps))


def kolmogorov_smirnov(a, b) -> float:
    """Two-sample KS statistic (no p-value)."""
    fa, fb, grid = _merged(a, b)
    return float(np.max(np.abs(fa.evaluate(grid) - fb.evaluate(grid))))


def cramer_von_mises(a, b) -> float:
    """Two-sample Cramer-von Mises criterion.

    Uses the ECDF form ``NM/(N+M)^2 * sum_z (F_a(z) - F_b(z))^2`` over the pooled
    sample, which agrees with Anderson's rank formula when there are no ties
    and is exactly zero for identical samples.
    """
    fa, fb, grid = _merged(a, b)
    n, m = fa.n, fb.n
    diff = fa.evaluate(grid) - fb.evaluate(grid)
    return float(n * m / (n + m) ** 2 * np.sum(diff * diff))


class DistanceMeasure(str, Enum):
    WASSERSTEIN = "wasserstein"
    KOLMOGOROV_SMIRNOV = "ks"
    CRAMER_VON_MISES = "cvm"

    @classmethod
    def parse(cls, tag) -> "DistanceMeasure":
        if isinstance(tag, cls):
            return tag
        key = str(tag).strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "wasserstein": cls.WASSERSTEIN, "wd": cls.WASSERSTEIN, "emd": cls.WASSERSTEIN,
            "ks": cls.KOLMOGOROV_SMIRNOV, "kolmogorovsmirnov": cls.KOLMOGOROV_SMIRNOV,
            "cvm": cls.CRAMER_VON_MISES, "cramervonmises": cls.CRAMER_VON_MISES,
        }
        try:
            return aliases[key]
        except KeyError:
            raise DistanceError(f"unknown distance measure {tag!r}") from None

    def __call__(self, a, b) -> float:
        return _MEASURES[self](a, b)


_MEASURES = {
    DistanceMeasure.WASSERSTEIN: wasserstein,
    DistanceMeasure.KOLMOGOROV_SMIRNOV: kolmogorov_smirnov,
    DistanceMeasure.CRAMER_VON_MISES: cramer_von_mises,
}


def _band_arg(band, len_a: int, len_b: int) -> int:
    if band is None:
        return -1
    band = int(band)
    if band < abs(len_a - len_b):
        raise BandError(f"band {band} is narrower than the length difference {abs(len_a - len_b)}")
    return band


def dtw(a, b, band: int | None = None, squared: bool = False) -> float:
    """DTW alignment cost with match/insert/delete steps.

    Local cost is ``|a_i - b_j|`` (or its square with ``squared=True``).
    ``band`` is an optional Sakoe-Chiba half-width.
    """
    x = _sample(a, "first sequence")
    y = _sample(b, "second sequence")
    return float(_kernels.dtw_cost(x, y, _band_arg(band, len(x), len(y)), squared))


def dtw_path(a, b, squared: bool = False):
    x = _sample(a, "first sequence")
    y = _sample(b, "second sequence")
    pi, pj, cost = _kernels.dtw_path(x, y, squared)
    return list(zip(pi.tolist(), pj.tolist())), float(cost)


def _chunks(n_rows: int, threads: int):
    threads = max(1, min(int(threads), n_rows))
    edges = np.linspace(0, n_rows, threads + 1).astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def _run(tasks, threads: int):
    if threads <= 1 or len(tasks) <= 1:
        for task in tasks:
            task()
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for fut in [pool.submit(t) for t in tasks]:
            fut.result()


def dtw_matrix(X, Y=None, band: int | None = None, squared: bool = False,
               threads: int = 1) -> np.ndarray:
    """Pairwise DTW between rows of ``X`` and rows of ``Y`` (or ``X`` itself).

    Every entry is computed independently, so the result does not depend on
    ``threads``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise DistanceError("expected a non-empty 2-D array of sequences")
    if Y is None:
        b = _band_arg(band, X.shape[1], X.shape[1])
        out = np.zeros((X.shape[0], X.shape[0]))
        tasks = [lambda lo=lo, hi=hi: _kernels.symmetric_rows(X, lo, hi, b, squared, out)
                 for lo, hi in _chunks(X.shape[0], threads)]
        _run(tasks, threads)
        upper = np.triu(out, 1)
        return upper + upper.T
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[0] == 0 or Y.shape[1] == 0:
        raise DistanceError("expected a non-empty 2-D array of sequences")
    b = _band_arg(band, X.shape[1], Y.shape[1])
    out = np.empty((X.shape[0], Y.shape[0]))
    tasks = [lambda lo=lo, hi=hi: _kernels.pairwise_rows(X, Y, lo, hi, b, squared, out)
             for lo, hi in _chunks(X.shape[0], threads)]
    _run(tasks, threads)
    return out
