"""k-means segmentation over company embeddings.

Lloyd iterations on Euclidean distance with k-means++ seeding. Every source
of randomness flows from the caller's seed, so a fit is bit-for-bit
reproducible for the same (data, k, seed, max_iter). Distortion is checked
to be non-increasing after every assignment pass; an empty cluster is
repaired by re-seeding its centroid to the point farthest from the
centroid's current position.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embed import EmbeddingMatrix
from .errors import FitError, InputError

DEFAULT_K = 400  # production default; desk-scale fits use far smaller k
DEFAULT_MAX_ITER = 100

_MONOTONE_SLACK = 1e-9  # relative tolerance for the per-iteration distortion check


@dataclass
class SegmentationModel:
    k: int
    centroids: np.ndarray  # (k, dim) float64
    assignments: np.ndarray  # (K,) int32; -1 marks a masked row
    seed: int
    iterations_run: int
    distortion_history: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.centroids = np.asarray(self.centroids, dtype=np.float64)
        self.assignments = np.asarray(self.assignments, dtype=np.int32)
        if self.centroids.shape[0] != self.k:
            raise InputError(f"{self.centroids.shape[0]} centroids for k={self.k}")
        valid = self.assignments[self.assignments >= 0]
        if valid.size and int(valid.max()) >= self.k:
            raise InputError("assignment label out of range")

    @property
    def dim(self) -> int:
        return int(self.centroids.shape[1])


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """(n, k) squared Euclidean distances, clipped at zero against rounding."""
    sq = (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * (points @ centroids.T)
        + np.sum(centroids**2, axis=1)[None, :]
    )
    return np.maximum(sq, 0.0)


def assign_rows(model_or_centroids, points: np.ndarray) -> np.ndarray:
    """Nearest-centroid label per row; ties go to the lowest centroid index."""
    centroids = (
        model_or_centroids.centroids
        if isinstance(model_or_centroids, SegmentationModel)
        else np.asarray(model_or_centroids, dtype=np.float64)
    )
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != centroids.shape[1]:
        raise InputError(
            f"points of dim {points.shape[-1]} against centroids of dim {centroids.shape[1]}"
        )
    return np.argmin(_squared_distances(points, centroids), axis=1).astype(np.int32)


def assign_segment(model: SegmentationModel, v: np.ndarray) -> int:
    """The segmentation function: map one vector to its cluster label."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (model.dim,):
        raise InputError(f"vector shape {v.shape} != ({model.dim},)")
    return int(assign_rows(model, v[None, :])[0])


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    closest_sq = _squared_distances(points, points[chosen[0]][None, :])[:, 0]
    for c in range(1, k):
        total = float(closest_sq.sum())
        if total <= 0.0:
            # all remaining mass sits on already-chosen points; take the
            # lowest-index point not yet selected
            remaining = np.setdiff1d(np.arange(n), chosen[:c], assume_unique=False)
            chosen[c] = remaining[0]
        else:
            chosen[c] = rng.choice(n, p=closest_sq / total)
        new_sq = _squared_distances(points, points[chosen[c]][None, :])[:, 0]
        closest_sq = np.minimum(closest_sq, new_sq)
    return points[chosen].copy()


def fit_kmeans(
    matrix: EmbeddingMatrix,
    k: int,
    seed: int,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SegmentationModel:
    """Cluster the non-masked rows; stops at an assignment fixpoint."""
    points = matrix.active_rows()
    n = points.shape[0]
    if not 1 <= k <= n:
        raise InputError(f"k must be in [1, {n}] for {n} usable rows, got {k}")
    if max_iter < 1:
        raise InputError(f"max_iter must be >= 1, got {max_iter}")

    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(points, k, rng)
    labels = assign_rows(centroids, points)

    history: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        centroids = _update_centroids(points, labels, centroids, k)
        new_labels = assign_rows(centroids, points)
        sq = _squared_distances(points, centroids)
        dist = float(sq[np.arange(n), new_labels].sum())
        if history and dist > history[-1] * (1.0 + _MONOTONE_SLACK) + 1e-12:
            raise FitError(
                f"distortion increased from {history[-1]} to {dist}; Lloyd step is broken"
            )
        history.append(dist)
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels

    assignments = np.full(matrix.size, -1, dtype=np.int32)
    assignments[matrix.active_indices()] = labels
    return SegmentationModel(
        k=k,
        centroids=centroids,
        assignments=assignments,
        seed=seed,
        iterations_run=iterations,
        distortion_history=history,
    )


def _update_centroids(
    points: np.ndarray, labels: np.ndarray, old_centroids: np.ndarray, k: int
) -> np.ndarray:
    centroids = old_centroids.copy()
    taken: set[int] = set()
    for c in range(k):
        members = labels == c
        if members.any():
            centroids[c] = points[members].mean(axis=0)
    for c in range(k):
        if not (labels == c).any():
            # empty cluster: re-seed at the point farthest from this centroid
            dist = _squared_distances(points, centroids[c][None, :])[:, 0]
            if taken:
                dist[list(taken)] = -1.0
            farthest = int(np.argmax(dist))
            taken.add(farthest)
            centroids[c] = points[farthest]
    return centroids


def distortion(model: SegmentationModel, matrix: EmbeddingMatrix) -> float:
    """Sum of squared distances from non-masked rows to their nearest centroid."""
    points = matrix.active_rows()
    if points.shape[1] != model.dim:
        raise InputError(f"matrix dim {points.shape[1]} != model dim {model.dim}")
    if points.shape[0] == 0:
        return 0.0
    sq = _squared_distances(points, model.centroids)
    labels = np.argmin(sq, axis=1)
    return float(sq[np.arange(points.shape[0]), labels].sum())


def centroid_matrix(model: SegmentationModel) -> EmbeddingMatrix:
    """The k centroids packaged as a matrix with synthetic ids."""
    ids = [f"centroid_{c}" for c in range(model.k)]
    return EmbeddingMatrix(
        company_ids=ids,
        rows=model.centroids,
        empty_mask=np.zeros(model.k, dtype=bool),
        names=ids,
    )


def majority_labels(
    model: SegmentationModel, row_labels: list[str | None]
) -> list[str | None]:
    """Per-cluster majority label of member rows; ties pick the
    lexicographically smallest label, empty clusters yield None."""
    if len(row_labels) != len(model.assignments):
        raise InputError(
            f"{len(row_labels)} labels for {len(model.assignments)} assignment entries"
        )
    out: list[str | None] = []
    for c in range(model.k):
        counts: dict[str, int] = {}
        for label, assigned in zip(row_labels, model.assignments):
            if assigned == c and label is not None:
                counts[label] = counts.get(label, 0) + 1
        if not counts:
            out.append(None)
        else:
            top_count = max(counts.values())
            winners = sorted(label for label, cnt in counts.items() if cnt == top_count)
            out.append(winners[0])
    return out


def distortion_curve(
    matrix: EmbeddingMatrix,
    k_values: list[int],
    seed: int,
    restarts: int = 4,
    max_iter: int = DEFAULT_MAX_ITER,
) -> list[tuple[int, float]]:
    """Best-of-restarts distortion per k, for elbow analysis."""
    curve = []
    for k in k_values:
        best = None
        for r in range(restarts):
            model = fit_kmeans(matrix, k, seed=seed + r, max_iter=max_iter)
            d = distortion(model, matrix)
            if best is None or d < best:
                best = d
        curve.append((k, float(best)))
    return curve


def elbow_k(curve: list[tuple[int, float]]) -> int:
    """Maximum-curvature point of a distortion curve.

    Uses the distance-to-chord rule on the normalized curve: the k whose
    point lies farthest below the straight line joining the curve's
    endpoints.
    """
    if len(curve) < 3:
        raise InputError("elbow detection needs at least 3 (k, distortion) points")
    ks = np.asarray([k for k, _ in curve], dtype=np.float64)
    ds = np.asarray([d for _, d in curve], dtype=np.float64)
    span_k = ks[-1] - ks[0]
    span_d = ds[0] - ds[-1]
    if span_k <= 0:
        raise InputError("k values must be strictly increasing")
    x = (ks - ks[0]) / span_k
    y = (ds - ds[-1]) / span_d if span_d > 0 else np.zeros_like(ds)
    # distance from each point to the x + y = 1 chord, up to a constant factor
    gap = 1.0 - x - y
    return int(ks[int(np.argmax(gap))])
