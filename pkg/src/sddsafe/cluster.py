"""DTW K-means over fixed-length windows, silhouette scoring and cluster-count selection."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import _kernels
from .distance import dtw_matrix
from .errors import AssignError, ClusterError, ConfigError, ScoreError
from .series import windows_array

MODEL_FORMAT = "sddsafe.cluster-model"
MODEL_VERSION = 1
DBA_ITERATIONS = 10
SILHOUETTE_TIE = 0.01


@dataclass(frozen=True, eq=False)
class ClusterModel:
    k: int
    centroids: np.ndarray
    assignments: np.ndarray
    sizes: np.ndarray
    silhouette: float
    seed: int
    squared: bool = False
    inertia_history: tuple = ()
    window_starts: np.ndarray | None = field(default=None, repr=False)

    @property
    def w(self) -> int:
        return int(self.centroids.shape[1])

    @property
    def inertia(self) -> float:
        return self.inertia_history[-1] if self.inertia_history else float("nan")

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == cluster_id)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "k": self.k,
            "w": self.w,
            "seed": self.seed,
            "cost": "squared" if self.squared else "abs",
            "silhouette": self.silhouette,
            "sizes": [int(s) for s in self.sizes],
            "centroids": [[float(v) for v in row] for row in self.centroids],
            "assignments": [int(a) for a in self.assignments],
            "window_starts": None if self.window_starts is None
            else [int(s) for s in self.window_starts],
            "inertia_history": [float(v) for v in self.inertia_history],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClusterModel":
        if data.get("format") != MODEL_FORMAT:
            raise ConfigError("not a cluster model file")
        if data.get("version") != MODEL_VERSION:
            raise ConfigError(f"unsupported cluster model version {data.get('version')}")
        starts = data.get("window_starts")
        return cls(
            k=int(data["k"]),
            centroids=np.array(data["centroids"], dtype=np.float64),
            assignments=np.array(data["assignments"], dtype=np.int64),
            sizes=np.array(data["sizes"], dtype=np.int64),
            silhouette=float(data["silhouette"]),
            seed=int(data["seed"]),
            squared=data.get("cost", "abs") == "squared",
            inertia_history=tuple(data.get("inertia_history", ())),
            window_starts=None if starts is None else np.array(starts, dtype=np.int64),
        )


@dataclass(frozen=True)
class ClusterSelection:
    k_min: int
    k_max: int
    step: int
    scores: dict
    chosen_k: int
    summaries: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "k_min": self.k_min, "k_max": self.k_max, "step": self.step,
            "scores": {str(k): v for k, v in self.scores.items()},
            "chosen_k": self.chosen_k,
            "summaries": {str(k): v for k, v in self.summaries.items()},
        }


def save_model(model: ClusterModel, path, extra: dict | None = None) -> None:
    data = model.to_dict()
    if extra:
        data.update(extra)
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def load_model(path) -> ClusterModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"{path}: cannot read cluster model ({exc})") from exc
    return ClusterModel.from_dict(data)


def _as_matrix(windows) -> np.ndarray:
    if isinstance(windows, np.ndarray):
        X = np.ascontiguousarray(windows, dtype=np.float64)
        if X.ndim != 2:
            raise ClusterError("windows array must be 2-D")
        return X
    lengths = {len(getattr(w, "values", w)) for w in windows}
    if len(lengths) > 1:
        raise ClusterError(f"windows have differing lengths {sorted(lengths)}")
    return windows_array(windows)


def _nearest(dists: np.ndarray):
    # argmin keeps the first minimum, i.e. the lowest cluster id on ties
    labels = np.argmin(dists, axis=1)
    return labels, dists[np.arange(len(labels)), labels]


def _seed_centroids(X, k, rng, squared, threads):
    """k-means++ style seeding under DTW."""
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    closest = dtw_matrix(X, X[chosen], squared=squared, threads=threads)[:, 0]
    for _ in range(1, k):
        weights = closest ** 2
        total = weights.sum()
        if total > 0:
            idx = int(rng.choice(n, p=weights / total))
        else:
            idx = int(rng.integers(n))
        chosen.append(idx)
        closest = np.minimum(closest, dtw_matrix(X, X[[idx]], squared=squared, threads=threads)[:, 0])
    return X[chosen].copy()


def _repair_empty(X, labels, dists, centroids):
    """Give each empty cluster the window lying farthest from its own centroid."""
    k = centroids.shape[0]
    for j in range(k):
        sizes = np.bincount(labels, minlength=k)
        if sizes[j] > 0:
            continue
        movable = sizes[labels] > 1
        if not movable.any():
            raise ClusterError("cannot repair an empty cluster")
        cand = np.where(movable, dists, -np.inf)
        idx = int(np.argmax(cand))
        labels[idx] = j
        dists[idx] = 0.0
        centroids[j] = X[idx]
    return labels, dists, centroids


def _update_centroid(members, previous, squared):
    medoid = members[_kernels.medoid_index(members, squared)]
    best, best_cost = _kernels.refine_barycenter(medoid, members, DBA_ITERATIONS, squared)
    # also refine from the previous centroid so the within-cluster cost never rises
    alt, alt_cost = _kernels.refine_barycenter(previous, members, DBA_ITERATIONS, squared)
    if alt_cost < best_cost:
        return alt
    return best


def kmeans_dtw(windows, k: int, seed: int = 0, max_iter: int = 50, squared: bool = False,
               threads: int = 1, distances: np.ndarray | None = None,
               compute_silhouette: bool = True) -> ClusterModel:
    """K-means with DTW assignments and DBA centroids.

    Deterministic for a given ``seed``. ``distances`` may carry a precomputed
    window-to-window DTW matrix used for the silhouette.
    """
    X = _as_matrix(windows)
    n = X.shape[0]
    if k < 2:
        raise ClusterError(f"k must be >= 2, got {k}")
    if n < k:
        raise ClusterError(f"{n} windows cannot form {k} clusters")
    rng = np.random.default_rng(seed)
    centroids = _seed_centroids(X, k, rng, squared, threads)
    labels = None
    history = []
    for _ in range(max_iter):
        new_labels, dists = _nearest(dtw_matrix(X, centroids, squared=squared, threads=threads))
        new_labels, dists, centroids = _repair_empty(X, new_labels, dists, centroids)
        history.append(float(dists.sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centroids = np.vstack([
            _update_centroid(np.ascontiguousarray(X[labels == j]), centroids[j], squared)
            for j in range(k)
        ])
    else:
        labels, dists = _nearest(dtw_matrix(X, centroids, squared=squared, threads=threads))
        labels, dists, centroids = _repair_empty(X, labels, dists, centroids)
        history.append(float(dists.sum()))
    sizes = np.bincount(labels, minlength=k)
    model = ClusterModel(k=k, centroids=centroids, assignments=labels, sizes=sizes,
                         silhouette=float("nan"), seed=int(seed), squared=squared,
                         inertia_history=tuple(history))
    if compute_silhouette:
        score = silhouette_dtw(model, X, distances=distances, threads=threads)
        model = replace(model, silhouette=score)
    return model


def silhouette_dtw(model: ClusterModel, windows, distances: np.ndarray | None = None,
                   threads: int = 1) -> float:
    """Mean silhouette under DTW. Singleton members and 0/0 cases score 0."""
    labels = np.asarray(model.assignments)
    k = int(model.k)
    sizes = np.bincount(labels, minlength=k)
    if k < 2 or np.count_nonzero(sizes) < 2:
        raise ScoreError("silhouette needs at least two non-empty clusters")
    if distances is None:
        distances = dtw_matrix(_as_matrix(windows), squared=model.squared, threads=threads)
    n = len(labels)
    # per-window sums of distances to each cluster
    onehot = np.zeros((n, k))
    onehot[np.arange(n), labels] = 1.0
    sums = distances @ onehot
    own = sizes[labels]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = sums[np.arange(n), labels] / np.maximum(own - 1, 1)
        means = sums / sizes
    means[:, sizes == 0] = np.inf
    means[np.arange(n), labels] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    s = np.zeros(n)
    ok = (own > 1) & (denom > 0)
    s[ok] = (b[ok] - a[ok]) / denom[ok]
    return float(s.mean())


def _summaries(model: ClusterModel) -> list:
    return [
        {"cluster": j, "size": int(model.sizes[j]),
         "mean": float(c.mean()), "min": float(c.min()), "max": float(c.max())}
        for j, c in enumerate(model.centroids)
    ]


def select_clusters(windows, k_min: int = 2, k_max: int = 10, step: int = 1, seed: int = 0,
                    max_iter: int = 50, squared: bool = False, threads: int = 1):
    """Try every k in ``k_min..k_max`` (inclusive) and keep the best silhouette.

    Scores within ``SILHOUETTE_TIE`` of the best count as ties; the larger k
    wins a tie.
    """
    if not 2 <= k_min <= k_max:
        raise ClusterError(f"need 2 <= k_min <= k_max (got {k_min}, {k_max})")
    if step < 1:
        raise ClusterError(f"step must be >= 1, got {step}")
    X = _as_matrix(windows)
    if X.shape[0] < k_min:
        raise ClusterError(f"{X.shape[0]} windows cannot form {k_min} clusters")
    distances = dtw_matrix(X, squared=squared, threads=threads)
    models, scores, summaries = {}, {}, {}
    for k in range(k_min, k_max + 1, step):
        model = kmeans_dtw(X, k, seed=seed, max_iter=max_iter, squared=squared,
                           threads=threads, distances=distances)
        models[k] = model
        scores[k] = model.silhouette
        summaries[k] = _summaries(model)
    best = max(scores.values())
    chosen = max(k for k, s in scores.items() if s >= best - SILHOUETTE_TIE)
    selection = ClusterSelection(k_min, k_max, step, scores, chosen, summaries)
    return selection, models[chosen]


def assign(model: ClusterModel, instance) -> tuple[int, float]:
    """Nearest centroid under DTW; the lowest cluster id wins ties."""
    values = np.asarray(getattr(instance, "values", instance), dtype=np.float64)
    if values.ndim != 1 or len(values) != model.w:
        raise AssignError(f"instance length {values.size} does not match centroid length {model.w}")
    dists = dtw_matrix(values[None, :], model.centroids, squared=model.squared)[0]
    j = int(np.argmin(dists))
    return j, float(dists[j])


def smallest_cluster(model: ClusterModel) -> tuple[int, int]:
    j = int(np.argmin(model.sizes))
    return j, int(model.sizes[j])
