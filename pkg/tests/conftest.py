import numpy as np
import pytest

from firmvec.embed import EmbeddingMatrix
from firmvec.wordvec import WordVectorTable


@pytest.fixture
def tiny_table() -> WordVectorTable:
    return WordVectorTable(
        dim=2,
        words=["a", "b", "Haus"],
        vectors=np.asarray([[1.0, 0.0], [0.0, 1.0], [2.0, 2.0]], dtype=np.float32),
    )


def random_matrix(rng: np.random.Generator, k: int, dim: int, masked: int = 0) -> EmbeddingMatrix:
    rows = rng.normal(size=(k, dim)).astype(np.float32)
    mask = np.zeros(k, dtype=bool)
    if masked:
        mask[rng.choice(k, size=masked, replace=False)] = True
        rows[mask] = 0.0
    return EmbeddingMatrix(
        company_ids=[f"c{i}" for i in range(k)],
        rows=rows,
        empty_mask=mask,
        names=[f"Firm {i}" for i in range(k)],
    )
