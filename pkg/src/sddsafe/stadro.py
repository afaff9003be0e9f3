"""Robustness verdicts from a fitted performance-vs-SDD curve."""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distance import DistanceMeasure
from .errors import ConfigError, CurveError, FitError, InversionError, MapeUndefined
from .forecast import metrics
from .series import Segment, segments

CURVE_FORMAT = "sddsafe.curve"
CURVE_VERSION = 1


class NonMonotoneCurveWarning(UserWarning):
    """The fitted curve is decreasing where it crosses the requested performance."""


@dataclass(frozen=True)
class PerfSddPoint:
    start: int
    end: int
    sdd: float
    rmse: float
    mape: float

    @property
    def segment(self) -> tuple[int, int]:
        return self.start, self.end


@dataclass(frozen=True)
class FittedCurve:
    metric: str
    coeffs: tuple
    domain: tuple
    rss: float
    n_points: int

    def __call__(self, d):
        c0, c1, c2 = self.coeffs
        d = np.asarray(d, dtype=np.float64)
        out = c0 + d * (c1 + c2 * d)
        return float(out) if out.ndim == 0 else out

    def slope(self, d: float) -> float:
        return self.coeffs[1] + 2.0 * self.coeffs[2] * d

    def to_dict(self) -> dict:
        return {
            "format": CURVE_FORMAT, "version": CURVE_VERSION, "metric": self.metric,
            "coeffs": list(self.coeffs), "domain": list(self.domain),
            "rss": self.rss, "n_points": self.n_points,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FittedCurve":
        if data.get("format") != CURVE_FORMAT:
            raise ConfigError("not a curve file")
        if data.get("version") != CURVE_VERSION:
            raise ConfigError(f"unsupported curve version {data.get('version')}")
        return cls(data["metric"], tuple(float(c) for c in data["coeffs"]),
                   tuple(float(d) for d in data["domain"]), float(data["rss"]),
                   int(data["n_points"]))


def save_curve(curve: FittedCurve, path, extra: dict | None = None) -> None:
    data = curve.to_dict()
    if extra:
        data.update(extra)
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def load_curve(path) -> FittedCurve:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"{path}: cannot read curve ({exc})") from exc
    return FittedCurve.from_dict(data)


@dataclass(frozen=True)
class RobustnessVerdict:
    instance: tuple
    p_min: float
    d_pmin: float
    d_instance: float
    ratio: float
    robust: bool
    extrapolated: bool = False
    warnings: tuple = field(default=())


def _metric_name(metric) -> str:
    name = str(metric).strip().lower()
    if name not in ("rmse", "mape"):
        raise FitError(f"metric must be 'rmse' or 'mape', got {metric!r}")
    return name


def build_curve_points(train, validation, predictions, l: int, measure="wasserstein"):
    """One (SDD, error) point per consecutive length-``l`` validation segment.

    SDD compares the pooled training values with the segment's values.
    """
    measure = DistanceMeasure.parse(measure)
    train_values = np.asarray(getattr(train, "values", train), dtype=np.float64)
    by_tick = {r.time: r for r in predictions}
    points = []
    for seg in segments(validation, l):
        ticks = validation.index[seg.start:seg.end]
        missing = [int(t) for t in ticks if int(t) not in by_tick]
        if missing:
            raise CurveError(f"segment {seg.label}: no prediction for tick {missing[0]}"
                             f" ({len(missing)} missing)")
        recs = [by_tick[int(t)] for t in ticks]
        try:
            perf = metrics(recs)
            mape = perf.mape
        except MapeUndefined as exc:
            perf, mape = exc.metrics, float("nan")
        points.append(PerfSddPoint(seg.start, seg.end, measure(train_values, seg.values),
                                   perf.rmse, mape))
    return points


def fit_quadratic(points, metric="rmse") -> FittedCurve:
    """Least-squares ``metric = c0 + c1*sdd + c2*sdd**2``."""
    metric = _metric_name(metric)
    d = np.array([p.sdd for p in points], dtype=np.float64)
    y = np.array([getattr(p, metric) for p in points], dtype=np.float64)
    if len(d) < 3 or len(np.unique(d)) < 3:
        raise FitError("a quadratic fit needs at least 3 distinct SDD values")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(y))):
        raise FitError(f"non-finite sdd or {metric} values")
    A = np.column_stack([np.ones_like(d), d, d * d])
    coeffs, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < 3:
        raise FitError("rank-deficient design")
    resid = y - A @ coeffs
    return FittedCurve(metric, tuple(float(c) for c in coeffs),
                       (float(d.min()), float(d.max())), float(resid @ resid), len(d))


def _polish(curve: FittedCurve, p_min: float, d: float) -> float:
    # Newton steps on the closed-form root; keep whichever residual is smallest
    best, best_res = d, abs(curve(d) - p_min)
    for _ in range(3):
        s = curve.slope(d)
        if s == 0:
            break
        d = d - (curve(d) - p_min) / s
        res = abs(curve(d) - p_min)
        if d >= 0 and res < best_res:
            best, best_res = d, res
    return best


def invert_curve(curve: FittedCurve, p_min: float) -> float:
    """Smallest non-negative SDD at which the curve reaches ``p_min``.

    Roots where the curve is non-decreasing are preferred. If every
    non-negative root sits on a decreasing stretch, the smallest one is
    returned and a ``NonMonotoneCurveWarning`` is issued.
    """
    c0, c1, c2 = curve.coeffs
    k = c0 - p_min
    # the cancellation-free form below already returns -k/c1 as c2 -> 0, so a
    # tolerance-based linear shortcut would only lose the c2*d^2 term
    if c2 == 0:
        if c1 == 0:
            raise InversionError(f"flat curve never reaches {p_min}")
        roots = [-k / c1]
    else:
        disc = c1 * c1 - 4.0 * c2 * k
        if disc < 0:
            raise InversionError(f"curve never reaches {p_min}")
        q = -0.5 * (c1 + math.copysign(math.sqrt(disc), c1))
        roots = [q / c2]
        if q != 0:
            roots.append(k / q)
        else:
            roots.append(-q / c2)
    roots = sorted(r for r in roots if r >= 0 and math.isfinite(r))
    if not roots:
        raise InversionError(f"no non-negative SDD reaches {p_min}")
    rising = [r for r in roots if curve.slope(r) >= 0]
    if rising:
        root = rising[0]
    else:
        root = roots[0]
        warnings.warn(f"curve is decreasing where it reaches {p_min} (d={root:.6g})",
                      NonMonotoneCurveWarning, stacklevel=2)
    root = _polish(curve, p_min, root)
    if not abs(curve(root) - p_min) <= 1e-9 * max(1.0, abs(p_min)):
        # huge roots where the terms cancel to nothing
        raise InversionError(f"crossing of {p_min} at d={root:.6g} is not resolvable in float64")
    return root


def robustness(d_instance: float, d_pmin: float, p_min: float = float("nan"),
               instance=(0, 0), domain=None, notes=()) -> RobustnessVerdict:
    """Verdict from the two distances: robust iff ``d_instance / d_pmin <= 1``."""
    if not d_pmin > 0:
        raise InversionError(f"threshold distance must be positive, got {d_pmin}")
    ratio = d_instance / d_pmin
    notes = list(notes)
    extrapolated = False
    if domain is not None:
        lo, hi = domain
        extrapolated = not (lo <= d_instance <= hi and lo <= d_pmin <= hi)
        if extrapolated:
            notes.append("outside the fitted SDD range")
    return RobustnessVerdict(tuple(instance), float(p_min), float(d_pmin), float(d_instance),
                             float(ratio), bool(ratio <= 1.0), extrapolated, tuple(notes))


def stadro(train, instance, curve: FittedCurve, p_min: float, measure="wasserstein") -> RobustnessVerdict:
    measure = DistanceMeasure.parse(measure)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonMonotoneCurveWarning)
        d_pmin = invert_curve(curve, p_min)
    notes = [str(w.message) for w in caught if issubclass(w.category, NonMonotoneCurveWarning)]
    train_values = np.asarray(getattr(train, "values", train), dtype=np.float64)
    values = np.asarray(getattr(instance, "values", instance), dtype=np.float64)
    if isinstance(instance, Segment):
        span = (instance.start, instance.end)
    else:
        span = (0, len(values))
    return robustness(measure(train_values, values), d_pmin, p_min, span, curve.domain, notes)


VERDICT_HEADER = ["start", "end", "metric_value", "sdd", "ratio", "robust"]


def write_verdicts(rows, path, comment: str | None = None) -> None:
    """``rows`` are ``(verdict, metric_value)`` pairs."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(VERDICT_HEADER)
        for verdict, value in rows:
            start, end = verdict.instance
            writer.writerow([start, end, repr(float(value)), repr(verdict.d_instance),
                             repr(verdict.ratio), "TRUE" if verdict.robust else "FALSE"])
