import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from firmvec.errors import ConfigurationError, InputError
from firmvec.preprocess import (
    FrequencyFilter,
    build_frequency_filter,
    load_stopwords,
    normalize_and_tokenize,
)

EMPTY = FrequencyFilter()


def filt(stop=(), frequent=(), top_n=None):
    frequent = frozenset(w.lower() for w in frequent)
    return FrequencyFilter(
        stopwords=frozenset(w.lower() for w in stop),
        frequent_words=frequent,
        top_n=len(frequent) if top_n is None else top_n,
    )


def test_golden_transliteration_example():
    assert normalize_and_tokenize("</p> Littfaßsäule </p>", EMPTY) == ["Littfasssaeule"]


# one fixture per pipeline rule, hand-applied
DERIVED_CASES = [
    ("", EMPTY, []),
    ("<a href=x>Haeuser zu kaufen</a>", filt(stop=["zu"]), ["Haeuser", "kaufen"]),
    ("ärger über böse Grüße", EMPTY, ["aerger", "ueber", "boese", "Gruesse"]),
    ("Ärzte Öfen Übung", EMPTY, ["Aerzte", "Oefen", "Uebung"]),
    ("Straße", EMPTY, ["Strasse"]),
    ("Haus123", EMPTY, ["Haus"]),
    ("abc42def", EMPTY, ["abcdef"]),
    ("a b c", EMPTY, []),
    ("ab c de", EMPTY, ["ab", "de"]),
    ("Hello, World!", EMPTY, ["Hello", "World"]),
    ("visit https://example.com/page now", EMPTY, ["visit", "now"]),
    ("see www.beispiel.de/x today", EMPTY, ["see", "today"]),
    ("<div class='x'>Inhalt</div>", EMPTY, ["Inhalt"]),
    ("Der Hund", filt(stop=["der"]), ["Hund"]),
    ("DER der DeR", filt(stop=["der"]), []),
    ("Haus Garten", filt(frequent=["haus"]), ["Garten"]),
    ("HAUS Garten", filt(frequent=["Haus"]), ["Garten"]),
    ("bezahlbaren_Wohnraum bleibt", EMPTY, ["bezahlbaren_Wohnraum", "bleibt"]),
    ("Groß-Gerau", EMPTY, ["GrossGerau"]),
    ("Tabs\tund\nZeilen", EMPTY, ["Tabs", "und", "Zeilen"]),
    ("Gärtner&Söhne", EMPTY, ["GaertnerSoehne"]),
    ("  viele   Leerzeichen  ", EMPTY, ["viele", "Leerzeichen"]),
    ("é café naïve", EMPTY, ["caf", "nave"]),
    ("x", EMPTY, []),
    ("xy", EMPTY, ["xy"]),
]


@pytest.mark.parametrize("raw,flt,expected", DERIVED_CASES)
def test_pipeline_rules(raw, flt, expected):
    assert normalize_and_tokenize(raw, flt) == expected


def test_case_is_preserved():
    out = normalize_and_tokenize("Großes GANZ klein", EMPTY)
    assert out == ["Grosses", "GANZ", "klein"]


FORBIDDEN = set("äöüßÄÖÜ<>/0123456789")


_fragments = st.lists(
    st.sampled_from(
        list("abcdefXYZ ßäöüÄÖÜ<>/_.,;:!?0123456789-\t\n")
        + ["<p>", "</p>", "https://x.de ", "www.y.de "]
    ),
    max_size=40,
).map("".join)


@settings(max_examples=300, deadline=None)
@given(_fragments)
def test_no_forbidden_characters_in_output(raw):
    for token in normalize_and_tokenize(raw, EMPTY):
        assert not (set(token) & FORBIDDEN), token


@settings(max_examples=300, deadline=None)
@given(_fragments)
def test_idempotent_on_own_output(raw):
    once = normalize_and_tokenize(raw, EMPTY)
    again = normalize_and_tokenize(" ".join(once), EMPTY)
    assert again == once


@settings(max_examples=200, deadline=None)
@given(
    st.text(alphabet=st.sampled_from(list("abcd efg ")), max_size=60),
    st.sets(st.sampled_from(["ab", "cd", "efg", "abc"]), max_size=3),
    st.sampled_from(["ab", "cd", "efg", "abc"]),
)
def test_stopword_monotonicity(raw, stop, removed):
    """Shrinking the stopword set never removes output tokens."""
    bigger = filt(stop=stop | {removed})
    smaller = filt(stop=stop - {removed})
    with_more = normalize_and_tokenize(raw, bigger)
    with_fewer = normalize_and_tokenize(raw, smaller)
    # output under the larger stopword set is a subsequence of the other one
    it = iter(with_fewer)
    assert all(tok in it for tok in with_more)


def test_build_frequency_filter_counts_before_length_rule():
    built = build_frequency_filter(["a b b", "b c"], stopwords=frozenset(), top_n=1)
    assert built.frequent_words == frozenset({"b"})


def test_build_frequency_filter_tie_break_lexicographic():
    built = build_frequency_filter(["aa bb", "bb aa"], stopwords=frozenset(), top_n=1)
    assert built.frequent_words == frozenset({"aa"})


def test_build_frequency_filter_top_zero():
    built = build_frequency_filter(["a b"], stopwords=frozenset(), top_n=0)
    assert built.frequent_words == frozenset()


def test_build_frequency_filter_counts_post_transliteration():
    built = build_frequency_filter(["Grüße Gruesse Gruesse"], stopwords=frozenset(), top_n=1)
    assert built.frequent_words == frozenset({"gruesse"})


def test_build_frequency_filter_negative_top_n():
    with pytest.raises(InputError):
        build_frequency_filter(["a"], stopwords=frozenset(), top_n=-1)


def test_missing_stopword_file(tmp_path):
    with pytest.raises(ConfigurationError):
        build_frequency_filter(["a"], stopword_file=tmp_path / "nope.txt", top_n=5)


def test_stopword_file_with_comments(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("und\n# comment line\nder # trailing\n\noder\n", encoding="utf-8")
    words = load_stopwords(path)
    assert words == frozenset({"und", "der", "oder"})


def test_filter_invariant_rejects_oversized_frequent_set():
    with pytest.raises(InputError):
        FrequencyFilter(frequent_words=frozenset({"a", "b"}), top_n=1)
