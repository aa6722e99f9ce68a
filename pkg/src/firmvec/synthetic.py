"""Deterministic synthetic fixtures: a labeled company corpus and blob data.

The corpus mimics the real ingestion product at desk scale: an informative
text channel, a noisy image-label channel, and a sparse alt channel, over a
small vocabulary whose topic words cluster by industry class. Everything is
a pure function of the seed.
"""

from __future__ import annotations

import numpy as np

from .embed import CompanyRecord, EmbeddingMatrix
from .wordvec import WordVectorTable

CLASS_LABELS = ["A", "B", "C", "D", "E"]

# channel composition: (share of tokens drawn from the company's own class,
# min tokens, max tokens)
_TEXT_PROFILE = (0.85, 20, 40)
_IMAGE_PROFILE = (0.30, 3, 6)
_ALT_PROFILE = (0.60, 2, 8)
_ALT_PRESENT_RATE = 0.5
_EMPTY_COMPANY_RATE = 0.03  # firms whose page yielded nothing usable


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def make_word_table(
    seed: int = 0,
    dim: int = 32,
    n_classes: int = 5,
    words_per_class: int = 30,
    n_noise_words: int = 120,
    topic_spread: float = 0.35,
) -> WordVectorTable:
    """Vocabulary with one tight word cloud per class plus background noise."""
    rng = np.random.default_rng(seed)
    anchors = [_unit(rng.normal(size=dim)) for _ in range(n_classes)]

    words: list[str] = []
    vectors: list[np.ndarray] = []
    for c in range(n_classes):
        label = CLASS_LABELS[c % len(CLASS_LABELS)].lower()
        for i in range(words_per_class):
            words.append(f"{label}topic{i}")
            vectors.append(_unit(anchors[c] + topic_spread * rng.normal(size=dim)))
    for i in range(n_noise_words):
        words.append(f"noise{i}")
        vectors.append(_unit(rng.normal(size=dim)))

    return WordVectorTable(
        dim=dim,
        words=words,
        vectors=np.vstack(vectors).astype(np.float32),
    )


def _draw_tokens(
    rng: np.random.Generator,
    class_words: list[str],
    noise_words: list[str],
    profile: tuple[float, int, int],
) -> list[str]:
    class_share, lo, hi = profile
    count = int(rng.integers(lo, hi + 1))
    tokens = []
    for _ in range(count):
        pool = class_words if rng.uniform() < class_share else noise_words
        tokens.append(pool[int(rng.integers(len(pool)))])
    return tokens


def make_labeled_corpus(
    seed: int = 0,
    n_companies: int = 300,
    dim: int = 32,
    n_classes: int = 5,
    words_per_class: int = 30,
) -> tuple[list[CompanyRecord], WordVectorTable]:
    """Company records with three token channels and NACE-style labels."""
    table = make_word_table(
        seed=seed, dim=dim, n_classes=n_classes, words_per_class=words_per_class
    )
    rng = np.random.default_rng(seed + 1)

    by_class: dict[int, list[str]] = {c: [] for c in range(n_classes)}
    noise_words = []
    for word in table.words:
        if word.startswith("noise"):
            noise_words.append(word)
        else:
            for c in range(n_classes):
                if word.startswith(CLASS_LABELS[c % len(CLASS_LABELS)].lower() + "topic"):
                    by_class[c].append(word)
                    break

    # mildly imbalanced class mix, like real registries
    weights = np.linspace(1.6, 0.6, n_classes)
    weights = weights / weights.sum()

    records = []
    for i in range(n_companies):
        c = int(rng.choice(n_classes, p=weights))
        label1 = CLASS_LABELS[c % len(CLASS_LABELS)]
        label2 = f"{label1}{int(rng.integers(1, 3)):02d}"
        if rng.uniform() < _EMPTY_COMPANY_RATE:
            text, image, alt = [], [], []
        else:
            text = _draw_tokens(rng, by_class[c], noise_words, _TEXT_PROFILE)
            image = _draw_tokens(rng, by_class[c], noise_words, _IMAGE_PROFILE)
            if rng.uniform() < _ALT_PRESENT_RATE:
                alt = _draw_tokens(rng, by_class[c], noise_words, _ALT_PROFILE)
            else:
                alt = []
        records.append(
            CompanyRecord(
                id=f"firm{i:04d}",
                name=f"{label1}-Werke {i:04d} GmbH",
                url=f"https://firm{i:04d}.example.de/",
                nace_level1=label1,
                nace_level2=label2,
                text_tokens=text,
                image_tokens=image,
                alt_tokens=alt,
            )
        )
    return records, table


def make_blob_matrix(
    seed: int = 0,
    n_clusters: int = 3,
    points_per_cluster: int = 40,
    dim: int = 8,
    center_scale: float = 10.0,
    spread: float = 0.5,
    equidistant_centers: bool = False,
) -> tuple[EmbeddingMatrix, list[str]]:
    """Well-separated Gaussian blobs packaged as an embedding matrix.

    `equidistant_centers` puts the centers on orthogonal axes so every pair
    is exactly center_scale * sqrt(2) apart (needs n_clusters <= dim), which
    produces the textbook piecewise-linear distortion elbow.

    Returns the matrix and the per-row cluster label ("blob0", ...).
    """
    rng = np.random.default_rng(seed)
    if equidistant_centers:
        if n_clusters > dim:
            raise ValueError("equidistant centers need n_clusters <= dim")
        centers = center_scale * np.eye(n_clusters, dim)
    else:
        centers = rng.normal(scale=center_scale, size=(n_clusters, dim))
    rows = []
    labels = []
    for c in range(n_clusters):
        rows.append(centers[c] + spread * rng.normal(size=(points_per_cluster, dim)))
        labels.extend([f"blob{c}"] * points_per_cluster)
    stacked = np.vstack(rows).astype(np.float32)
    ids = [f"p{i}" for i in range(stacked.shape[0])]
    matrix = EmbeddingMatrix(
        company_ids=ids,
        rows=stacked,
        empty_mask=np.zeros(stacked.shape[0], dtype=bool),
    )
    return matrix, labels
