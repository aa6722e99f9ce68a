"""Token normalization pipeline for raw channel strings.

The pipeline order is fixed and must not be rearranged:

1. strip residual HTML tags and hyperlinks,
2. transliterate German special characters to basic letters,
3. drop every remaining character that is not an ASCII letter or underscore
   (whitespace survives as the token separator),
4. split on whitespace,
5. remove stopwords and corpus-frequent words (case-insensitive),
6. drop tokens shorter than two characters.

Case is preserved throughout; underscores are kept so that multi-word
vocabulary entries (e.g. "bezahlbaren_Wohnraum") pass through untouched,
but the tokenizer itself never produces them.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError, InputError

DEFAULT_TOP_N = 100

_TAG_RE = re.compile(r"<[^>]*>")
_LINK_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
# Keep ASCII letters, underscores and whitespace; everything else is dropped.
_NON_TOKEN_RE = re.compile(r"[^A-Za-z_\s]+")

_TRANSLITERATION = str.maketrans(
    {
        "ä": "ae",
        "ö": "oe",
        "ü": "ue",
        "Ä": "Ae",
        "Ö": "Oe",
        "Ü": "Ue",
        "ß": "ss",
    }
)


@dataclass(frozen=True)
class FrequencyFilter:
    """Words excluded from token output.

    Both sets are stored lowercased because matching is case-insensitive.
    `frequent_words` holds at most `top_n` corpus-derived entries.
    """

    stopwords: frozenset[str] = frozenset()
    frequent_words: frozenset[str] = frozenset()
    top_n: int = 0

    def __post_init__(self) -> None:
        if len(self.frequent_words) > self.top_n:
            raise InputError(
                f"frequency filter holds {len(self.frequent_words)} frequent words, "
                f"more than top_n={self.top_n}"
            )

    def blocks(self, token: str) -> bool:
        folded = token.lower()
        return folded in self.stopwords or folded in self.frequent_words


def transliterate(text: str) -> str:
    """Replace German special characters with their basic-letter digraphs."""
    return text.translate(_TRANSLITERATION)


def strip_markup(text: str) -> str:
    """Remove residual HTML tags and hyperlinks, leaving spaces behind."""
    return _LINK_RE.sub(" ", _TAG_RE.sub(" ", text))


def base_tokens(raw: str) -> list[str]:
    """Pipeline steps 1-4: markup removal, transliteration, cleanup, split.

    No stopword or length filtering happens here; frequency counting uses
    exactly this token stream.
    """
    text = strip_markup(raw)
    text = transliterate(text)
    text = _NON_TOKEN_RE.sub("", text)
    return text.split()


def normalize_and_tokenize(raw: str, filt: FrequencyFilter | None = None) -> list[str]:
    """Run the full pipeline on one raw channel string."""
    if filt is None:
        filt = FrequencyFilter()
    tokens = base_tokens(raw)
    return [t for t in tokens if not filt.blocks(t) and len(t) >= 2]


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword file: one word per line, `#` starts a comment."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read stopword file {path}: {exc}") from exc
    words = set()
    for line in lines:
        word = line.split("#", 1)[0].strip()
        if word:
            words.add(word.lower())
    return frozenset(words)


def build_frequency_filter(
    corpus: list[str] | tuple[str, ...],
    stopword_file: str | Path | None = None,
    top_n: int = DEFAULT_TOP_N,
    stopwords: frozenset[str] | None = None,
) -> FrequencyFilter:
    """Count tokens across the corpus and freeze the top_n most frequent.

    Counting runs on the post-transliteration token stream, before the
    stopword and length rules apply. Ties are broken lexicographically so
    the result is deterministic.
    """
    if top_n < 0:
        raise InputError(f"top_n must be >= 0, got {top_n}")
    if stopwords is None:
        if stopword_file is None:
            raise ConfigurationError("either stopword_file or stopwords must be given")
        stopwords = load_stopwords(stopword_file)

    counts: Counter[str] = Counter()
    for raw in corpus:
        counts.update(base_tokens(raw))
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    frequent = frozenset(word.lower() for word, _ in ranked[:top_n])
    return FrequencyFilter(stopwords=stopwords, frequent_words=frequent, top_n=top_n)
