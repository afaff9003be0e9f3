"""Synthetic data used by the experiment scripts and the test-suite."""
from __future__ import annotations

import numpy as np

from .series import TimeSeries

PATTERNS = ("sinusoid", "ramp", "step")


def pattern(name: str, w: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, w)
    if name == "sinusoid":
        return np.sin(2 * np.pi * t)
    if name == "ramp":
        return 2 * t - 1
    if name == "step":
        return np.where(t < 0.5, 1.0, -1.0)
    raise ValueError(f"unknown pattern {name!r}")


def planted_windows(n_per: int = 30, w: int = 30, noise: float = 0.05, seed: int = 0):
    """Noisy copies of a sinusoid, an up-ramp and a down-step.

    Returns ``(X, labels)`` with ``X`` of shape ``(3 * n_per, w)``.
    """
    rng = np.random.default_rng(seed)
    rows, labels = [], []
    for label, name in enumerate(PATTERNS):
        base = pattern(name, w)
        for _ in range(n_per):
            rows.append(base + rng.normal(0.0, noise, w))
            labels.append(label)
    return np.array(rows), np.array(labels)


def drifting_ar1(n: int = 2500, drift_start: int | None = None, drift_per_step: float = 0.05,
                 level: float = 100.0, scale: float = 2.0, phi: float = 0.8,
                 seed: int = 0) -> TimeSeries:
    """Price-like series: an AR(1) fluctuation around a mean that drifts linearly.

    The mean is ``level`` until ``drift_start`` (default: 80 % of ``n``) and
    then rises by ``drift_per_step`` per tick. The fluctuation amplitude is
    proportional to the current mean, as it is for prices, so forecast errors
    grow together with the shift.
    """
    rng = np.random.default_rng(seed)
    if drift_start is None:
        drift_start = int(0.8 * n)
    x = np.empty(n)
    x[0] = rng.normal(0.0, 1.0 / np.sqrt(1 - phi * phi))
    eps = rng.normal(0.0, 1.0, n)
    for t in range(1, n):
        x[t] = phi * x[t - 1] + eps[t]
    ticks = np.arange(n)
    mean = level + drift_per_step * np.clip(ticks - drift_start, 0, None)
    return TimeSeries(ticks, mean + scale * (mean / level) * x)
