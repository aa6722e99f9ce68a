"""Principal component analysis with variance-threshold component selection.

The fit works on the centered data matrix through SVD (never the explicit
covariance matrix), which stays stable when there are fewer rows than
dimensions. Components follow a fixed sign convention so repeated fits are
bit-identical: the largest-magnitude coordinate of each component is
positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embed import EmbeddingMatrix
from .errors import FitError, InputError

DEFAULT_VARIANCE_THRESHOLD = 0.90
DEFAULT_MAX_COMPONENTS = 100

_RANK_TOL = 1e-12
_THRESHOLD_SLACK = 1e-12  # cumulative ratios land at 1.0 only up to rounding


@dataclass
class PcaModel:
    mean: np.ndarray  # (input_dim,)
    components: np.ndarray  # (output_dim, input_dim), orthonormal rows
    explained_ratio: np.ndarray  # (output_dim,), non-increasing, each in (0, 1]
    input_dim: int
    output_dim: int
    scale: np.ndarray | None = None  # per-dimension std, set only when standardized

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.components = np.asarray(self.components, dtype=np.float64)
        self.explained_ratio = np.asarray(self.explained_ratio, dtype=np.float64)
        if self.components.shape != (self.output_dim, self.input_dim):
            raise InputError(
                f"components shape {self.components.shape} != "
                f"({self.output_dim}, {self.input_dim})"
            )
        if self.mean.shape != (self.input_dim,):
            raise InputError(f"mean shape {self.mean.shape} != ({self.input_dim},)")
        if self.explained_ratio.shape != (self.output_dim,):
            raise InputError("one explained ratio per component required")


def _as_fit_rows(data: EmbeddingMatrix | np.ndarray) -> np.ndarray:
    if isinstance(data, EmbeddingMatrix):
        return data.active_rows()
    rows = np.asarray(data, dtype=np.float64)
    if rows.ndim != 2:
        raise InputError(f"expected a 2-D array of rows, got shape {rows.shape}")
    return rows


def fit_pca(
    data: EmbeddingMatrix | np.ndarray,
    variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD,
    max_components: int = DEFAULT_MAX_COMPONENTS,
    standardize: bool = False,
) -> PcaModel:
    """Fit on the non-masked rows; keep the smallest component count whose
    cumulative explained variance reaches the threshold, capped at
    max_components.

    `standardize` additionally scales each dimension to unit variance before
    the decomposition (off by default: the fit centers only).
    """
    if not 0.0 < variance_threshold <= 1.0:
        raise InputError(f"variance_threshold must be in (0, 1], got {variance_threshold}")
    if max_components < 1:
        raise InputError(f"max_components must be >= 1, got {max_components}")
    rows = _as_fit_rows(data)
    n, input_dim = rows.shape
    if n < 2:
        raise FitError(f"PCA needs at least 2 non-masked rows, got {n}")

    mean = rows.mean(axis=0)
    centered = rows - mean
    scale = None
    if standardize:
        scale = centered.std(axis=0, ddof=1)
        scale[scale == 0.0] = 1.0
        centered = centered / scale

    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    eigenvalues = (singular**2) / (n - 1)
    total_variance = float(eigenvalues.sum())
    if total_variance <= 0.0:
        raise FitError("data has zero variance; nothing to decompose")

    ratios = eigenvalues / total_variance
    rank = int(np.sum(eigenvalues > eigenvalues[0] * _RANK_TOL))
    cumulative = np.cumsum(ratios[:rank])
    reached = np.flatnonzero(cumulative >= variance_threshold - _THRESHOLD_SLACK)
    threshold_m = int(reached[0]) + 1 if reached.size else rank
    output_dim = min(max_components, threshold_m, rank)

    components = vt[:output_dim].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0

    return PcaModel(
        mean=mean,
        components=components,
        explained_ratio=ratios[:output_dim],
        input_dim=input_dim,
        output_dim=output_dim,
        scale=scale,
    )


def transform(model: PcaModel, vectors: np.ndarray) -> np.ndarray:
    """Project a vector (or stack of row vectors) onto the components."""
    arr = np.asarray(vectors, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != model.input_dim:
        raise InputError(f"expected vectors of length {model.input_dim}, got shape {arr.shape}")
    centered = arr - model.mean
    if model.scale is not None:
        centered = centered / model.scale
    out = centered @ model.components.T
    return out[0] if single else out


def explained_at(model: PcaModel, m: int) -> float:
    """Cumulative explained-variance ratio of the first m components."""
    if not 1 <= m <= model.output_dim:
        raise InputError(f"m must be in [1, {model.output_dim}], got {m}")
    return float(model.explained_ratio[:m].sum())


def transform_matrix(model: PcaModel, matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Apply the projection to every non-masked row; masked rows stay zero."""
    if matrix.dim != model.input_dim:
        raise InputError(
            f"matrix dim {matrix.dim} does not match PCA input dim {model.input_dim}"
        )
    out = np.zeros((matrix.size, model.output_dim), dtype=np.float64)
    active = matrix.active_indices()
    if active.size:
        out[active] = transform(model, matrix.rows[active].astype(np.float64))
    return EmbeddingMatrix(
        company_ids=list(matrix.company_ids),
        rows=out,
        empty_mask=matrix.empty_mask.copy(),
        names=list(matrix.names or matrix.company_ids),
    )
