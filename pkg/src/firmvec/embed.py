"""Company embeddings: mean word vectors per channel under five strategies.

A company with no resolvable token in the selected channels carries an empty
embedding (vector None); the matrix masks such rows and every downstream
similarity computation skips them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError
from .wordvec import VECTOR_DTYPE, WordVectorTable, lookup


class EmbeddingStrategy(str, Enum):
    """Which token channels feed the embedding and how they combine."""

    TEXT = "text"
    IMAGE = "image"
    ALT = "alt"
    APPEND_TOKENS = "append_tokens"  # one mean over text + image + alt tokens
    CONCAT_VECTORS = "concat_vectors"  # three channel means side by side

    @classmethod
    def parse(cls, value: str) -> "EmbeddingStrategy":
        try:
            return cls(value.lower())
        except ValueError:
            options = ", ".join(s.value for s in cls)
            raise InputError(f"unknown strategy {value!r}; expected one of: {options}")


@dataclass
class CompanyRecord:
    id: str
    name: str
    url: str = ""
    nace_level1: str | None = None
    nace_level2: str | None = None
    text_tokens: list[str] = field(default_factory=list)
    image_tokens: list[str] = field(default_factory=list)
    alt_tokens: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.nace_level1 == "":
            self.nace_level1 = None
        if self.nace_level2 == "":
            self.nace_level2 = None

    def label(self, level: str) -> str | None:
        if level == "level1":
            return self.nace_level1
        if level == "level2":
            return self.nace_level2
        raise InputError(f"unknown label level {level!r}")


@dataclass
class CompanyEmbedding:
    company_id: str
    vector: np.ndarray | None  # None = empty embedding
    dim: int
    strategy: EmbeddingStrategy


@dataclass
class EmbeddingMatrix:
    """K company rows of uniform dimension plus an empty-row mask.

    Rows are stored float32; masked rows are all zero and excluded from every
    similarity computation. Row norms are precomputed so the matrix can be
    queried concurrently without mutation.
    """

    company_ids: list[str]
    rows: np.ndarray  # (K, dim) float32
    empty_mask: np.ndarray  # (K,) bool, True = empty embedding
    names: list[str] | None = None

    def __post_init__(self) -> None:
        self.rows = np.asarray(self.rows, dtype=VECTOR_DTYPE)
        self.empty_mask = np.asarray(self.empty_mask, dtype=bool)
        k = len(self.company_ids)
        if self.rows.ndim != 2 or self.rows.shape[0] != k or self.empty_mask.shape != (k,):
            raise InputError(
                f"inconsistent matrix: {k} ids, rows {self.rows.shape}, "
                f"mask {self.empty_mask.shape}"
            )
        if self.names is None:
            self.names = list(self.company_ids)
        elif len(self.names) != k:
            raise InputError(f"{len(self.names)} names for {k} ids")
        if len(set(self.company_ids)) != k:
            raise InputError("duplicate company ids in matrix")
        self._id_to_row = {cid: i for i, cid in enumerate(self.company_ids)}
        self._rows64: np.ndarray | None = None
        self._norms = np.linalg.norm(self.rows.astype(np.float64), axis=1)

    @property
    def size(self) -> int:
        return len(self.company_ids)

    @property
    def rows64(self) -> np.ndarray:
        """Rows as float64, computed once; similarity scans accumulate in 64-bit."""
        if self._rows64 is None:
            self._rows64 = self.rows.astype(np.float64)
        return self._rows64

    @property
    def dim(self) -> int:
        return int(self.rows.shape[1])

    @property
    def norms(self) -> np.ndarray:
        return self._norms

    def row_index(self, company_id: str) -> int:
        idx = self._id_to_row.get(company_id)
        if idx is None:
            raise InputError(f"unknown company id {company_id!r}")
        return idx

    def has_id(self, company_id: str) -> bool:
        return company_id in self._id_to_row

    def active_rows(self) -> np.ndarray:
        """Non-masked rows as float64, for fitting."""
        return self.rows[~self.empty_mask].astype(np.float64)

    def active_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.empty_mask)


def embed_tokens(table: WordVectorTable, tokens: list[str]) -> np.ndarray | None:
    """Arithmetic mean of the resolved token vectors; None if nothing resolves.

    Out-of-vocabulary tokens are skipped entirely, so the divisor is the
    resolved count, not the raw token count.
    """
    total = np.zeros(table.dim, dtype=np.float64)
    resolved = 0
    for token in tokens:
        vec = lookup(table, token)
        if vec is not None:
            total += vec
            resolved += 1
    if resolved == 0:
        return None
    return (total / resolved).astype(VECTOR_DTYPE)


def embed_company(
    record: CompanyRecord,
    table: WordVectorTable,
    strategy: EmbeddingStrategy,
) -> CompanyEmbedding:
    """Build one company vector under the given combination strategy."""
    s = table.dim
    if strategy in (EmbeddingStrategy.TEXT, EmbeddingStrategy.IMAGE, EmbeddingStrategy.ALT):
        channel = {
            EmbeddingStrategy.TEXT: record.text_tokens,
            EmbeddingStrategy.IMAGE: record.image_tokens,
            EmbeddingStrategy.ALT: record.alt_tokens,
        }[strategy]
        vector = embed_tokens(table, channel)
        return CompanyEmbedding(record.id, vector, s, strategy)

    if strategy is EmbeddingStrategy.APPEND_TOKENS:
        appended = record.text_tokens + record.image_tokens + record.alt_tokens
        vector = embed_tokens(table, appended)
        return CompanyEmbedding(record.id, vector, s, strategy)

    if strategy is EmbeddingStrategy.CONCAT_VECTORS:
        means = [
            embed_tokens(table, record.text_tokens),
            embed_tokens(table, record.image_tokens),
            embed_tokens(table, record.alt_tokens),
        ]
        if all(m is None for m in means):
            return CompanyEmbedding(record.id, None, 3 * s, strategy)
        blocks = [m if m is not None else np.zeros(s, dtype=VECTOR_DTYPE) for m in means]
        return CompanyEmbedding(record.id, np.concatenate(blocks), 3 * s, strategy)

    raise InputError(f"unhandled strategy {strategy!r}")


def build_embedding_matrix(
    records: list[CompanyRecord],
    table: WordVectorTable,
    strategy: EmbeddingStrategy,
) -> EmbeddingMatrix:
    """Stack per-company embeddings in input order, masking empty ones."""
    if not records:
        raise InputError("cannot build an embedding matrix from zero records")
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        seen: set[str] = set()
        for cid in ids:
            if cid in seen:
                raise InputError(f"duplicate company id {cid!r}")
            seen.add(cid)

    dim = 3 * table.dim if strategy is EmbeddingStrategy.CONCAT_VECTORS else table.dim
    rows = np.zeros((len(records), dim), dtype=VECTOR_DTYPE)
    mask = np.zeros(len(records), dtype=bool)
    for i, record in enumerate(records):
        emb = embed_company(record, table, strategy)
        if emb.vector is None:
            mask[i] = True
        else:
            rows[i] = emb.vector
    return EmbeddingMatrix(
        company_ids=ids,
        rows=rows,
        empty_mask=mask,
        names=[r.name for r in records],
    )


DATASET_COLUMNS = [
    "id",
    "name",
    "url",
    "nace_level1",
    "nace_level2",
    "text_tokens",
    "image_tokens",
    "alt_tokens",
]


def save_company_dataset(records: list[CompanyRecord], path: str | Path) -> None:
    """Write the tab-separated dataset file with `;`-joined token columns."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\t".join(DATASET_COLUMNS) + "\n")
        for r in records:
            handle.write(
                "\t".join(
                    [
                        r.id,
                        r.name,
                        r.url,
                        r.nace_level1 or "",
                        r.nace_level2 or "",
                        ";".join(r.text_tokens),
                        ";".join(r.image_tokens),
                        ";".join(r.alt_tokens),
                    ]
                )
                + "\n"
            )


def load_company_dataset(path: str | Path) -> list[CompanyRecord]:
    path = Path(path)
    records = []
    lines = path.read_text(encoding="utf-8").splitlines()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if lineno == 1 and parts[0] == "id":
            continue
        if len(parts) != len(DATASET_COLUMNS):
            raise ParseError(
                f"{path}:{lineno}: expected {len(DATASET_COLUMNS)} columns, got {len(parts)}"
            )
        records.append(
            CompanyRecord(
                id=parts[0],
                name=parts[1],
                url=parts[2],
                nace_level1=parts[3] or None,
                nace_level2=parts[4] or None,
                text_tokens=[t for t in parts[5].split(";") if t],
                image_tokens=[t for t in parts[6].split(";") if t],
                alt_tokens=[t for t in parts[7].split(";") if t],
            )
        )
    if not records:
        raise ParseError(f"{path}: no company records found")
    return records
