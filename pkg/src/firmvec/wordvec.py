"""Pretrained word-vector tables: parsing, lookup, and intrinsic evaluation.

Two on-disk formats are supported:

* text — optional header line ``"<count> <dim>"`` followed by lines
  ``"word v1 ... vD"``.
* binary — header line ``"<count> <dim>\\n"`` (ASCII), then per entry the
  UTF-8 word, a single space, and D little-endian float32 values.

Vectors are held as float32; all similarity arithmetic accumulates in
float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, EvaluationError, InputError, ParseError

VECTOR_DTYPE = np.float32

MIN_EVAL_PAIRS = 3  # Spearman/Pearson are meaningless below this


@dataclass
class WordVectorTable:
    """Immutable vocabulary -> vector lookup table."""

    dim: int
    words: list[str]
    vectors: np.ndarray  # (count, dim) float32
    _index: dict[str, int] = field(repr=False, default_factory=dict)
    _lower_index: dict[str, int] = field(repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape != (len(self.words), self.dim):
            raise InputError(
                f"vector block shape {self.vectors.shape} does not match "
                f"{len(self.words)} words of dim {self.dim}"
            )
        if not self._index:
            self._index = {w: i for i, w in enumerate(self.words)}
            if len(self._index) != len(self.words):
                raise InputError("duplicate words in vector table")
            # first occurrence wins for case-insensitive fallback
            for i, w in enumerate(self.words):
                self._lower_index.setdefault(w.lower(), i)

    @property
    def count(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return self.row_of(word) is not None

    def row_of(self, word: str) -> int | None:
        """Row index via exact-case match, then lowercase fallback."""
        idx = self._index.get(word)
        if idx is not None:
            return idx
        return self._lower_index.get(word.lower())


def lookup(table: WordVectorTable, word: str) -> np.ndarray | None:
    """Return the vector for `word`, or None if it cannot be resolved."""
    idx = table.row_of(word)
    if idx is None:
        return None
    return table.vectors[idx]


def _parse_header(line: str) -> tuple[int, int] | None:
    parts = line.split()
    if len(parts) == 2:
        try:
            return int(parts[0]), int(parts[1])
        except ValueError:
            return None
    return None


def load_word_vectors(path: str | Path, format: str = "text") -> WordVectorTable:
    """Parse a word-vector file into a table, enforcing a uniform dimension."""
    path = Path(path)
    if format == "text":
        return _load_text(path)
    if format == "binary":
        return _load_binary(path)
    raise InputError(f"unknown word-vector format {format!r}")


def _load_text(path: Path) -> WordVectorTable:
    words: list[str] = []
    rows: list[np.ndarray] = []
    dim: int | None = None
    declared: tuple[int, int] | None = None

    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if lineno == 1:
                declared = _parse_header(line)
                if declared is not None:
                    dim = declared[1]
                    continue
            parts = line.split()
            word, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            if len(values) != dim:
                raise ParseError(
                    f"{path}:{lineno}: expected {dim} values for {word!r}, got {len(values)}"
                )
            try:
                rows.append(np.asarray([float(v) for v in values], dtype=VECTOR_DTYPE))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: non-numeric value ({exc})") from exc
            words.append(word)

    if not words or dim is None or dim == 0:
        raise ParseError(f"{path}: no word vectors found")
    if declared is not None and declared[0] != len(words):
        raise ParseError(
            f"{path}: header declares {declared[0]} entries, file has {len(words)}"
        )
    seen: set[str] = set()
    for w in words:
        if w in seen:
            raise ParseError(f"{path}: duplicate word {w!r}")
        seen.add(w)
    return WordVectorTable(dim=dim, words=words, vectors=np.vstack(rows))


def _load_binary(path: Path) -> WordVectorTable:
    data = path.read_bytes()
    newline = data.find(b"\n")
    if newline < 0:
        raise ParseError(f"{path}: missing binary header")
    header = _parse_header(data[:newline].decode("utf-8", errors="replace"))
    if header is None:
        raise ParseError(f"{path}: malformed binary header")
    count, dim = header
    if count <= 0 or dim <= 0:
        raise ParseError(f"{path}: bad header values count={count} dim={dim}")

    words: list[str] = []
    rows = np.empty((count, dim), dtype=VECTOR_DTYPE)
    pos = newline + 1
    vec_bytes = dim * 4
    for i in range(count):
        space = data.find(b" ", pos)
        if space < 0:
            raise ParseError(f"{path}: truncated at entry {i}")
        try:
            word = data[pos:space].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"{path}: undecodable word at entry {i}") from exc
        pos = space + 1
        if pos + vec_bytes > len(data):
            raise ParseError(f"{path}: truncated vector at entry {i}")
        rows[i] = np.frombuffer(data, dtype="<f4", count=dim, offset=pos)
        pos += vec_bytes
        words.append(word)
    if len(set(words)) != len(words):
        raise ParseError(f"{path}: duplicate words in binary file")
    return WordVectorTable(dim=dim, words=words, vectors=rows)


def save_word_vectors(table: WordVectorTable, path: str | Path, format: str = "text") -> None:
    """Write a table back out in either supported format."""
    path = Path(path)
    if format == "text":
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(f"{table.count} {table.dim}\n")
            for word, row in zip(table.words, table.vectors):
                values = " ".join(repr(float(v)) for v in row)
                handle.write(f"{word} {values}\n")
    elif format == "binary":
        with open(path, "wb") as handle:
            handle.write(f"{table.count} {table.dim}\n".encode("utf-8"))
            for word, row in zip(table.words, table.vectors):
                handle.write(word.encode("utf-8") + b" ")
                handle.write(np.asarray(row, dtype="<f4").tobytes())
    else:
        raise InputError(f"unknown word-vector format {format!r}")


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """(a . b) / (|a| |b|), accumulated in float64."""
    a64 = np.asarray(a, dtype=np.float64)
    b64 = np.asarray(b, dtype=np.float64)
    if a64.shape != b64.shape or a64.ndim != 1:
        raise InputError(f"vector shapes differ: {a64.shape} vs {b64.shape}")
    norm_a = float(np.linalg.norm(a64))
    norm_b = float(np.linalg.norm(b64))
    if norm_a == 0.0 or norm_b == 0.0:
        raise DomainError("cosine similarity of a zero-norm vector is undefined")
    return float(np.dot(a64, b64) / (norm_a * norm_b))


@dataclass(frozen=True)
class SimilarityDataset:
    """Human-judged word pairs with gold relatedness scores."""

    pairs: list[tuple[str, str, float]]

    def __post_init__(self) -> None:
        if not self.pairs:
            raise InputError("similarity dataset has no pairs")
        for a, b, score in self.pairs:
            if not np.isfinite(score):
                raise InputError(f"non-finite gold score for pair ({a!r}, {b!r})")


def load_similarity_dataset(path: str | Path) -> SimilarityDataset:
    """Read tab-separated lines `word_a<TAB>word_b<TAB>score`."""
    path = Path(path)
    pairs = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 3 tab-separated fields")
        try:
            pairs.append((parts[0], parts[1], float(parts[2])))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad score ({exc})") from exc
    return SimilarityDataset(pairs=pairs)


@dataclass(frozen=True)
class EvalReport:
    correlation: float
    coverage: float
    pairs_used: int
    metric: str = "spearman"


def _rankdata(values: np.ndarray) -> np.ndarray:
    """Average-tie ranks, 1-based."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def pearson_correlation(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = float(np.linalg.norm(xc) * np.linalg.norm(yc))
    if denom == 0.0:
        raise EvaluationError("correlation undefined for constant inputs")
    return float(np.dot(xc, yc) / denom)


def spearman_correlation(x: np.ndarray, y: np.ndarray) -> float:
    return pearson_correlation(_rankdata(np.asarray(x)), _rankdata(np.asarray(y)))


def evaluate_similarity_dataset(
    table: WordVectorTable,
    dataset: SimilarityDataset,
    metric: str = "spearman",
) -> EvalReport:
    """Rank-correlate model cosine scores against gold scores.

    Pairs with an unresolvable word are excluded from the correlation and
    only reduce coverage.
    """
    if metric not in ("spearman", "pearson"):
        raise InputError(f"unknown correlation metric {metric!r}")
    model_scores = []
    gold_scores = []
    for word_a, word_b, gold in dataset.pairs:
        vec_a = lookup(table, word_a)
        vec_b = lookup(table, word_b)
        if vec_a is None or vec_b is None:
            continue
        model_scores.append(cosine_similarity(vec_a, vec_b))
        gold_scores.append(gold)

    used = len(model_scores)
    if used < MIN_EVAL_PAIRS:
        raise EvaluationError(
            f"only {used} of {len(dataset.pairs)} pairs resolved; "
            f"need at least {MIN_EVAL_PAIRS} for a correlation"
        )
    corr_fn = spearman_correlation if metric == "spearman" else pearson_correlation
    return EvalReport(
        correlation=corr_fn(np.asarray(model_scores), np.asarray(gold_scores)),
        coverage=used / len(dataset.pairs),
        pairs_used=used,
        metric=metric,
    )
