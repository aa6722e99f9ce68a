"""Peer-firm identification: distance kernels and the three query algorithms.

All queries are read-only scans over an immutable EmbeddingMatrix. Results
are sorted by cosine similarity descending with ties broken by ascending row
index, so outputs are fully deterministic. A query against a firm with an
empty embedding yields an empty list rather than an error.

`peers_for_firm` scores every candidate and sorts all of them;
`peers_for_firm_selective` returns the identical result but keeps only a
bounded n-element heap while scanning, so its cost stays linear in the
matrix size for small n.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass

import numpy as np

from .embed import EmbeddingMatrix
from .errors import DomainError, InputError
from .segment import SegmentationModel, assign_rows, assign_segment

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PeerResult:
    company_id: str
    name: str
    similarity: float


@dataclass(frozen=True)
class PortfolioVector:
    """Mean embedding of the portfolio members that have one."""

    vector: np.ndarray | None
    member_count: int
    present_count: int


def euclidean_distance(f1: np.ndarray, f2: np.ndarray) -> float:
    a = np.asarray(f1, dtype=np.float64)
    b = np.asarray(f2, dtype=np.float64)
    if a.shape != b.shape:
        raise InputError(f"vector shapes differ: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def cosine_distance(f1: np.ndarray, f2: np.ndarray) -> float:
    """1 - cos(angle), in [0, 2]."""
    a = np.asarray(f1, dtype=np.float64)
    b = np.asarray(f2, dtype=np.float64)
    if a.shape != b.shape:
        raise InputError(f"vector shapes differ: {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise DomainError("cosine distance of a zero-norm vector is undefined")
    return 1.0 - float(np.dot(a, b) / (norm_a * norm_b))


def _candidate_similarities(
    matrix: EmbeddingMatrix, query: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Cosine similarity of `query` against every usable row.

    Returns (row_indices, similarities). Masked rows and zero-norm rows are
    excluded; the caller guarantees the query itself has positive norm. One
    matrix-vector product per query, no per-query matrix copies.
    """
    query64 = np.asarray(query, dtype=np.float64)
    query_norm = float(np.linalg.norm(query64))
    if query_norm == 0.0:
        raise DomainError("cosine similarity of a zero-norm query is undefined")
    dots = matrix.rows64 @ query64
    usable = (~matrix.empty_mask) & (matrix.norms > 0.0)
    indices = np.flatnonzero(usable)
    sims = dots[indices] / (matrix.norms[indices] * query_norm)
    return indices, sims


def _validate_n(n: int, k: int) -> None:
    if not 1 <= n <= k:
        raise InputError(f"n must be in [1, {k}], got {n}")


def _build_results(
    matrix: EmbeddingMatrix, indices: np.ndarray, sims: np.ndarray
) -> list[PeerResult]:
    names = matrix.names or matrix.company_ids
    return [
        PeerResult(matrix.company_ids[int(i)], names[int(i)], float(s))
        for i, s in zip(indices, sims)
    ]


def peers_for_firm(matrix: EmbeddingMatrix, j: int, n: int) -> list[PeerResult]:
    """Top-n most cosine-similar firms to firm j; firm j leads with 1.0.

    Scores every non-masked row, then fully sorts the scores.
    """
    _validate_n(n, matrix.size)
    if not 0 <= j < matrix.size:
        raise InputError(f"row index {j} out of range for {matrix.size} firms")
    if matrix.empty_mask[j]:
        return []
    indices, sims = _candidate_similarities(matrix, matrix.rows[j])
    sims[np.searchsorted(indices, j)] = 1.0  # a firm is always its own first peer
    # stable sort on the negated scores keeps ascending row index among ties
    order = np.argsort(-sims, kind="stable")[:n]
    return _build_results(matrix, indices[order], sims[order])


_SCAN_BLOCK = 8192


def peers_for_firm_selective(matrix: EmbeddingMatrix, j: int, n: int) -> list[PeerResult]:
    """Identical contract and output as peers_for_firm, without a full sort.

    A single pass keeps the n best candidates in a min-heap keyed by
    (similarity, -row_index), whose root is the worst kept entry. The scan
    runs in fixed-size blocks: one vectorized comparison against the root
    filters each block, and only survivors touch the heap. The top-n set
    under the (similarity desc, index asc) total order is unique, so the
    result matches the full sort element for element, ties included.
    """
    _validate_n(n, matrix.size)
    if not 0 <= j < matrix.size:
        raise InputError(f"row index {j} out of range for {matrix.size} firms")
    if matrix.empty_mask[j]:
        return []
    indices, sims = _candidate_similarities(matrix, matrix.rows[j])
    sims[np.searchsorted(indices, j)] = 1.0

    fill = min(n, len(sims))
    heap: list[tuple[float, int]] = [
        (float(sims[i]), -int(indices[i])) for i in range(fill)
    ]
    heapq.heapify(heap)
    pos = fill
    while pos < len(sims):
        block_sims = sims[pos : pos + _SCAN_BLOCK]
        survivors = np.flatnonzero(block_sims >= heap[0][0])  # >= keeps tie candidates
        for offset in survivors.tolist():
            item = (float(block_sims[offset]), -int(indices[pos + offset]))
            if item > heap[0]:
                heapq.heappushpop(heap, item)
        pos += _SCAN_BLOCK

    kept = sorted(heap, key=lambda item: (-item[0], -item[1]))
    names = matrix.names or matrix.company_ids
    return [PeerResult(matrix.company_ids[-neg], names[-neg], sim) for sim, neg in kept]


def peers_in_segment(
    matrix: EmbeddingMatrix, j: int, segmentation: SegmentationModel
) -> list[PeerResult]:
    """All firms sharing firm j's cluster, annotated with cosine to j.

    Cluster membership alone defines the result set; the similarity sort on
    top is a usability extension and does not change membership.
    """
    if not 0 <= j < matrix.size:
        raise InputError(f"row index {j} out of range for {matrix.size} firms")
    if segmentation.centroids.shape[1] != matrix.dim:
        raise InputError(
            f"segmentation dim {segmentation.centroids.shape[1]} != matrix dim {matrix.dim}"
        )
    if matrix.empty_mask[j]:
        return []
    target = assign_segment(segmentation, matrix.rows[j].astype(np.float64))
    indices, sims = _candidate_similarities(matrix, matrix.rows[j])
    sims[np.searchsorted(indices, j)] = 1.0
    labels = assign_rows(segmentation, matrix.rows[indices].astype(np.float64))
    member = labels == target
    indices = indices[member]
    sims = sims[member]
    order = np.argsort(-sims, kind="stable")
    return _build_results(matrix, indices[order], sims[order])


def portfolio_vector(matrix: EmbeddingMatrix, member_indices: list[int]) -> PortfolioVector:
    """Mean of the members' embeddings; the divisor counts only members that
    actually have one."""
    if not member_indices:
        raise InputError("portfolio must contain at least one firm")
    for idx in member_indices:
        if not 0 <= idx < matrix.size:
            raise InputError(f"row index {idx} out of range for {matrix.size} firms")
    present = [idx for idx in member_indices if not matrix.empty_mask[idx]]
    if not present:
        return PortfolioVector(vector=None, member_count=len(member_indices), present_count=0)
    total = matrix.rows[present].astype(np.float64).sum(axis=0)
    return PortfolioVector(
        vector=total / len(present),
        member_count=len(member_indices),
        present_count=len(present),
    )


def peers_for_portfolio(
    matrix: EmbeddingMatrix, member_indices: list[int], n: int
) -> list[PeerResult]:
    """Top-n firms most similar to the portfolio mean vector.

    The portfolio is not a matrix row, so there is no self entry; member
    firms compete like any other candidate. Degenerate portfolios (no member
    embeddings, or members cancelling to a zero vector) yield an empty list.
    """
    _validate_n(n, matrix.size)
    pv = portfolio_vector(matrix, member_indices)
    if pv.vector is None:
        log.warning("portfolio %s has no member embeddings", member_indices)
        return []
    if float(np.linalg.norm(pv.vector)) == 0.0:
        log.warning("portfolio %s averages to the zero vector", member_indices)
        return []
    indices, sims = _candidate_similarities(matrix, pv.vector)
    order = np.argsort(-sims, kind="stable")[:n]
    return _build_results(matrix, indices[order], sims[order])
