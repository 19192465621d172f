import pytest
from hypothesis import given
from hypothesis import strategies as st

from ckbprep.lexicon import (
    WAW,
    FrequencyLexicon,
    LexiconFormatError,
    build_lexicon,
    repair_groups,
    repair_text,
    split_trailing_conjunction,
)

TAWANBAR_LEX = FrequencyLexicon({"تاوانبارو": 5, "تاوانبار": 1218}, 1223)


def test_build_examples():
    lex = build_lexicon(["a", "b", "a"])
    assert dict(lex.counts) == {"a": 2, "b": 1}
    empty = build_lexicon([])
    assert dict(empty.counts) == {} and empty.source_tokens == 0
    assert empty["missing"] == 0


def test_build_matches_one_pass_counter(rng):
    tokens = [rng.choice(["و", "ئەو", "کتێب", "x", "y", "z"]) + str(rng.randrange(20)) for _ in range(1000)]
    counts = {}
    for t in tokens:
        counts[t] = counts.get(t, 0) + 1
    lex = build_lexicon(tokens)
    assert dict(lex.counts) == counts
    assert lex.source_tokens == 1000


def test_sharded_merge_is_order_independent(rng):
    tokens = [rng.choice("abcdef") for _ in range(500)]
    shards = [build_lexicon(tokens[i::4]) for i in range(4)]
    a = shards[0].merge(shards[1]).merge(shards[2]).merge(shards[3])
    b = shards[3].merge(shards[1]).merge(shards[0]).merge(shards[2])
    assert a.dumps() == b.dumps() == build_lexicon(tokens).dumps()
    shuffled = list(tokens)
    rng.shuffle(shuffled)
    assert build_lexicon(shuffled).dumps() == a.dumps()


def test_split_examples():
    assert split_trailing_conjunction("تاوانبارو", TAWANBAR_LEX) == ["تاوانبار", "و"]
    assert split_trailing_conjunction("و", TAWANBAR_LEX) == ["و"]
    assert split_trailing_conjunction("چوو", FrequencyLexicon({"چوو": 900, "چو": 3}, 903)) == ["چوو"]


def test_ties_and_short_stems_keep_word():
    assert split_trailing_conjunction("abو", FrequencyLexicon({"abو": 4, "ab": 4}, 8)) == ["abو"]
    assert split_trailing_conjunction("aو", FrequencyLexicon({"a": 99}, 99)) == ["aو"]


def test_repair_text():
    assert repair_text(["تاوانبارو", "بوو"], TAWANBAR_LEX) == ["تاوانبار", "و", "بوو"]
    assert repair_text([], TAWANBAR_LEX) == []
    assert repair_text(["ئەم", "کتێبە"], TAWANBAR_LEX) == ["ئەم", "کتێبە"]


words = st.text(alphabet="abو", max_size=5)


@given(st.lists(words.filter(bool), max_size=8), st.dictionaries(words.filter(bool), st.integers(1, 5)))
def test_repair_is_reversible(tokens, counts):
    lex = FrequencyLexicon(counts, sum(counts.values()))
    groups = repair_groups(tokens, lex)
    assert ["".join(g) for g in groups] == tokens
    assert all(1 <= len(g) <= 2 and all(g) for g in groups)
    assert len(repair_text(tokens, lex)) >= len(tokens)


@given(st.text(alphabet="abو", min_size=1, max_size=5), st.integers(0, 5), st.integers(0, 5), st.integers(1, 5))
def test_raising_word_count_never_causes_split(word, word_count, stem_count, bump):
    def lex(wc):
        counts = {k: v for k, v in {word: wc, word[:-1]: stem_count}.items() if k and v}
        return FrequencyLexicon(counts, sum(counts.values()))

    if word[:-1] == word or not word[:-1]:
        return
    before = split_trailing_conjunction(word, lex(word_count))
    after = split_trailing_conjunction(word, lex(word_count + bump))
    if len(before) == 1:
        assert len(after) == 1


def test_file_roundtrip(tmp_path):
    lex = build_lexicon("c b a b c c".split())
    lex.save(tmp_path / "lex.tsv")
    text = (tmp_path / "lex.tsv").read_text(encoding="utf-8")
    assert text == "#total\t6\nc\t3\nb\t2\na\t1\n"
    assert FrequencyLexicon.load(tmp_path / "lex.tsv") == lex


@pytest.mark.parametrize("text", ["a\tx\n", "a\t1\na\t2\n", "#total\t5\na\t1\n", "only-one-field\n"])
def test_malformed_lexicon(text):
    with pytest.raises(LexiconFormatError):
        FrequencyLexicon.loads(text)


def test_invariants():
    with pytest.raises(ValueError):
        FrequencyLexicon({"a": 0}, 0)
    with pytest.raises(ValueError):
        FrequencyLexicon({"a": 2}, 3)
    assert WAW == "و"
