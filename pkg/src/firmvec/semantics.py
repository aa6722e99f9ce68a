"""Semantic probes over the joint company/word space.

Word vectors never get their own decomposition: the company-fitted PCA is
applied to them, which puts words and firms into one comparable space. All
operations here are read-only and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embed import EmbeddingMatrix
from .errors import InputError, UnknownEntityError
from .pca import PcaModel, fit_pca, transform
from .wordvec import WordVectorTable


@dataclass
class SemanticQueryContext:
    """Word table + company-fitted PCA + the reduced company matrix."""

    table: WordVectorTable
    pca: PcaModel
    matrix: EmbeddingMatrix
    _word_rows: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.pca.input_dim != self.table.dim:
            raise InputError(
                f"PCA input dim {self.pca.input_dim} != word dim {self.table.dim}"
            )
        if self.matrix.dim != self.pca.output_dim:
            raise InputError(
                f"matrix dim {self.matrix.dim} != PCA output dim {self.pca.output_dim}"
            )

    def word_rows(self) -> np.ndarray:
        """Whole vocabulary projected through the company PCA (cached)."""
        if self._word_rows is None:
            self._word_rows = transform(self.pca, self.table.vectors.astype(np.float64))
        return self._word_rows


def top_n_words(
    ctx: SemanticQueryContext, company_id: str, n: int
) -> list[tuple[str, float]]:
    """The n vocabulary words most cosine-similar to the company vector.

    n beyond the vocabulary size is clamped; equal similarities order
    lexicographically. A company with an empty embedding yields [].
    """
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    row = ctx.matrix.row_index(company_id)
    if ctx.matrix.empty_mask[row]:
        return []
    company_vec = ctx.matrix.rows[row].astype(np.float64)
    company_norm = float(np.linalg.norm(company_vec))
    if company_norm == 0.0:
        return []

    words = ctx.word_rows()
    norms = np.linalg.norm(words, axis=1)
    usable = np.flatnonzero(norms > 0.0)
    sims = (words[usable] @ company_vec) / (norms[usable] * company_norm)

    ranked = sorted(
        ((ctx.table.words[int(i)], float(s)) for i, s in zip(usable, sims)),
        key=lambda item: (-item[1], item[0]),
    )
    return ranked[: min(n, len(ranked))]


@dataclass(frozen=True)
class EntityMatch:
    kind: str  # "company" | "word"
    name: str
    similarity: float


def _resolve_entity(ctx: SemanticQueryContext, name: str) -> np.ndarray:
    """Company id first, then vocabulary word (with lowercase fallback)."""
    if ctx.matrix.has_id(name):
        row = ctx.matrix.row_index(name)
        if ctx.matrix.empty_mask[row]:
            raise UnknownEntityError(f"company {name!r} has an empty embedding")
        return ctx.matrix.rows[row].astype(np.float64)
    word_row = ctx.table.row_of(name)
    if word_row is not None:
        return transform(ctx.pca, ctx.table.vectors[word_row].astype(np.float64))
    raise UnknownEntityError(f"{name!r} is neither a known company id nor a vocabulary word")


def analogy(
    ctx: SemanticQueryContext, a: str, b: str, c: str, n: int
) -> list[EntityMatch]:
    """Vector-offset analogy: rank entities by cosine to (b - a + c).

    Candidates are the union of companies and vocabulary words, minus the
    three query entities themselves.
    """
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    target = _resolve_entity(ctx, b) - _resolve_entity(ctx, a) + _resolve_entity(ctx, c)
    target_norm = float(np.linalg.norm(target))
    if target_norm == 0.0:
        return []

    excluded = {a, b, c}
    matches: list[EntityMatch] = []

    word_rows = ctx.word_rows()
    word_norms = np.linalg.norm(word_rows, axis=1)
    word_sims = np.full(len(word_norms), -np.inf)
    ok = word_norms > 0.0
    word_sims[ok] = (word_rows[ok] @ target) / (word_norms[ok] * target_norm)
    for i in np.flatnonzero(ok):
        word = ctx.table.words[int(i)]
        if word not in excluded:
            matches.append(EntityMatch("word", word, float(word_sims[int(i)])))

    comp_rows = ctx.matrix.rows.astype(np.float64)
    comp_norms = ctx.matrix.norms
    for i in ctx.matrix.active_indices():
        cid = ctx.matrix.company_ids[int(i)]
        if cid in excluded or comp_norms[int(i)] == 0.0:
            continue
        sim = float(comp_rows[int(i)] @ target / (comp_norms[int(i)] * target_norm))
        matches.append(EntityMatch("company", cid, sim))

    matches.sort(key=lambda m: (-m.similarity, m.name))
    return matches[:n]


def project_2d(matrix: EmbeddingMatrix) -> list[tuple[str, float, float]]:
    """First two principal components of the non-masked rows, for plotting."""
    active = matrix.active_indices()
    if active.size < 3:
        raise InputError(f"2-D projection needs >= 3 non-masked rows, got {active.size}")
    model = fit_pca(matrix, variance_threshold=1.0, max_components=2)
    coords = transform(model, matrix.rows[active].astype(np.float64))
    if model.output_dim < 2:  # degenerate rank-1 data: pad a zero axis
        coords = np.hstack([coords, np.zeros((coords.shape[0], 2 - model.output_dim))])
    return [
        (matrix.company_ids[int(i)], float(coords[pos, 0]), float(coords[pos, 1]))
        for pos, i in enumerate(active)
    ]
