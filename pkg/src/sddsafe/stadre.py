"""Reliability of a single instance from neighbour errors and cluster-relative distance.

The score is ``(2 - mean(eps**2) - d(c, x) / d(c, O)) / 2`` where ``c`` is the
assigned cluster's representative, ``x`` the instance and ``O`` an all-zero
series of the same length as ``c``. Neighbours are the members of the assigned
cluster, subsampled down to the size of the smallest cluster.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .cluster import ClusterModel, assign, smallest_cluster
from .distance import DistanceMeasure
from .errors import DegenerateClusterError, ReliabilityError


@dataclass(frozen=True)
class NeighborErrors:
    cluster_id: int
    member_indices: tuple
    errors: tuple
    m: int


@dataclass(frozen=True)
class ReliabilityReport:
    instance_start: int
    cluster_id: int
    m: int
    mean_sq_error: float
    d_instance: float
    d_origin: float
    confine: float
    stadre: float
    seed: int
    out_of_range: bool

    def to_json(self, **extra) -> str:
        data = asdict(self)
        data.update(extra)
        return json.dumps(data)


def confine(errors) -> float:
    """``1 - mean(eps**2)`` over the neighbour errors."""
    eps = np.asarray(list(errors), dtype=np.float64)
    if eps.size == 0:
        raise ReliabilityError("no neighbour errors")
    return float(1.0 - np.mean(eps * eps))


def neighbor_errors(model: ClusterModel, cluster_id: int, per_window_errors, seed: int,
                    instance_start: int = 0) -> NeighborErrors:
    """Errors of ``m`` members of ``cluster_id``, ``m`` being the smallest cluster size.

    Members are sampled without replacement from a generator keyed by
    ``(seed, instance_start)``, so scoring more instances never changes the
    sample drawn for an earlier one.
    """
    members = model.members(cluster_id)
    missing = [int(i) for i in members if int(i) not in per_window_errors]
    if missing:
        raise ReliabilityError(
            f"no error recorded for {len(missing)} member(s) of cluster {cluster_id}, e.g. window {missing[0]}")
    _, m = smallest_cluster(model)
    if len(members) == m:
        chosen = members
    else:
        rng = np.random.default_rng([int(seed), int(instance_start)])
        chosen = np.sort(rng.choice(members, size=m, replace=False))
    errors = tuple(float(per_window_errors[int(i)]) for i in chosen)
    return NeighborErrors(int(cluster_id), tuple(int(i) for i in chosen), errors, int(m))


def origin_series(w: int) -> np.ndarray:
    if w < 1:
        raise ReliabilityError(f"origin length must be >= 1, got {w}")
    return np.zeros(int(w))


def stadre(instance, model: ClusterModel, per_window_errors, measure="wasserstein",
           seed: int = 0, instance_start: int | None = None, cluster_repr: str = "centroid",
           windows=None) -> ReliabilityReport:
    """Score one instance (a window of the model's length).

    ``cluster_repr="pooled"`` compares against all member values of the
    assigned cluster instead of its centroid; it needs ``windows``.
    """
    measure = DistanceMeasure.parse(measure)
    values = np.asarray(getattr(instance, "values", instance), dtype=np.float64)
    if instance_start is None:
        instance_start = int(getattr(instance, "start", 0))
    cluster_id, _ = assign(model, values)
    neighbors = neighbor_errors(model, cluster_id, per_window_errors, seed, instance_start)

    if cluster_repr == "centroid":
        reference = model.centroids[cluster_id]
    elif cluster_repr == "pooled":
        if windows is None:
            raise ReliabilityError("cluster_repr='pooled' needs the training windows")
        rows = [np.asarray(getattr(windows[i], "values", windows[i])) for i in model.members(cluster_id)]
        reference = np.concatenate(rows)
    else:
        raise ReliabilityError(f"unknown cluster_repr {cluster_repr!r}")

    d_origin = measure(reference, origin_series(len(reference)))
    if d_origin == 0:
        raise DegenerateClusterError(f"cluster {cluster_id} representative is all zeros")
    d_instance = measure(reference, values)
    eps = np.asarray(neighbors.errors)
    mse = float(np.mean(eps * eps))
    conf = 1.0 - mse
    score = (2.0 - mse - d_instance / d_origin) / 2.0
    return ReliabilityReport(
        instance_start=int(instance_start), cluster_id=cluster_id, m=neighbors.m,
        mean_sq_error=mse, d_instance=float(d_instance), d_origin=float(d_origin),
        confine=conf, stadre=float(score), seed=int(seed),
        out_of_range=not 0.0 <= score <= 1.0,
    )
