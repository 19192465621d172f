"""Acceptance criteria, one PASS/FAIL line each in the terminal summary.

The Tanzil reproduction needs the real release and only runs when
CKBPREP_TANZIL_TMX points at the ckb-en TMX file.
"""
import math
import os
import random
import time
from collections import Counter
from pathlib import Path

import pytest

from ckbprep.corpus import (
    ParallelCorpus,
    SentencePair,
    SplitSpec,
    compute_stats,
    dumps_jsonl,
    loads_jsonl,
    parse_tmx,
    split_corpus,
)
from ckbprep.lexicon import FrequencyLexicon, repair_text
from ckbprep.metrics import bleu_corpus, meteor_sentence, ter_sentence
from ckbprep.normalize import (
    NormalizationConfig,
    collapse_whitespace,
    default_profile,
    normalize_initial_r,
    normalize_pipeline,
    remove_zwnj,
    strip_parentheticals,
    unify_graphemes,
)
from ckbprep.pipeline import repair_line
from ckbprep.tokenizers import (
    TrainerConfig,
    count_pretokens,
    decode,
    dumps_model,
    encode,
    loads_model,
    train,
    train_bpe,
)
from ckbprep.tokenizers.unigram import em_step, viterbi

from oracles import exhaustive_best, slow_bpe, ter_fuzz

KINDS = ("bpe", "wordpiece", "unigram")


def test_conjunction_heuristic(criterion):
    start = time.perf_counter()
    lexicon = FrequencyLexicon({"تاوانبارو": 5, "تاوانبار": 1218}, 1223)
    tokens = repair_text(["تاوانبارو"], lexicon)
    line = repair_line("ئەو تاوانبارو هات", lexicon)
    elapsed = time.perf_counter() - start
    ok = tokens == ["تاوانبار", "و"] and line == "ئەو تاوانبار و هات" and elapsed < 1
    criterion("conjunction heuristic", ok, f"{tokens} in {elapsed * 1000:.1f} ms")
    assert ok


def clipped_unigram_oracle(hyp, ref):
    h, r = Counter(hyp.split()), Counter(ref.split())
    return sum(min(n, r[w]) for w, n in h.items()), sum(h.values())


def test_metric_oracles(criterion):
    start = time.perf_counter()
    checks = {}
    sentences = ["the cat sat on the mat", "a b c d", "ئەم کتێبە باشە ."]
    checks["BLEU hyp=ref 100"] = bleu_corpus(sentences, [[s] for s in sentences]).score == 100.0
    checks["TER hyp=ref 0"] = all(ter_sentence(s, [s]).score == 0 for s in sentences)
    checks["METEOR 4-token identity"] = meteor_sentence("a b c d", ["a b c d"]).score == 0.9921875
    p1 = bleu_corpus(["the the the the"], [["the cat"]]).precisions[0]
    p1_two = bleu_corpus(["the the the the"], [["the cat on the mat"]]).precisions[0]
    checks["BLEU clipping"] = ((p1.matches, p1.total) == clipped_unigram_oracle("the the the the", "the cat")
                               and p1_two.ratio == 0.5)
    bp = bleu_corpus(["the cat sat"], [["the cat sat down"]], max_order=3).score
    checks["BLEU brevity 71.653"] = abs(bp - 100 * math.exp(-1 / 3)) <= 1e-6
    fuzz = ter_fuzz(500, seed=0)
    mismatches = [(h, r) for h, r, greedy, best in fuzz if greedy != best]
    elapsed = time.perf_counter() - start
    exact_ok = all(checks.values()) and elapsed < 30
    detail = (f"{sum(checks.values())}/{len(checks)} exact checks; TER greedy = exhaustive on "
              f"{len(fuzz) - len(mismatches)}/{len(fuzz)} fuzz cases; {elapsed:.1f} s")
    criterion("metric oracles", exact_ok and not mismatches, detail)
    assert exact_ok, checks
    if mismatches:
        h, r = mismatches[0]
        pytest.xfail(f"greedy TER misses the shift optimum on {len(mismatches)} of 500 cases, e.g. {h} vs {r}")


CLASSIC = {"low": 5, "lower": 2, "newest": 6, "widest": 3}
CORPUS = [
    "ئەم کتێبە زۆر باشە و ئەو کتێبەش باشە",
    "the quick brown fox jumps over the lazy dog",
    "we read books, and they read newspapers.",
    "کوردستان وڵاتێکی جوانە",
    "lower newest widest lowest",
] * 3


def test_tokenizer_oracles(criterion):
    start = time.perf_counter()
    merges = list(train_bpe(CLASSIC, TrainerConfig(vocabulary_size=100)).merges)
    bpe_ok = merges[:3] == [("e", "s"), ("es", "t"), ("l", "o")] and merges == slow_bpe(CLASSIC, 100, 2)

    probs, _ = em_step([("ab", 1)], {"a": 1 / 3, "b": 1 / 3, "ab": 1 / 3})
    em_ok = all(abs(probs[p] - want) <= 1e-12 for p, want in (("a", 0.2), ("b", 0.2), ("ab", 0.6)))

    rng = random.Random(99)
    viterbi_ok = 0
    for _ in range(200):
        alphabet = "abcd"[: rng.randint(2, 4)]
        pieces = set(alphabet)
        while len(pieces) < rng.randint(len(alphabet), 64):
            pieces.add("".join(rng.choice(alphabet) for _ in range(rng.randint(2, 5))))
        scores = {p: math.log(rng.choice([1, 2, 3, 5, 8])) - 5 for p in sorted(pieces)}
        word = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 8)))
        viterbi_ok += viterbi(word, scores, max_len=8) == exhaustive_best(word, scores)[2]

    counts = count_pretokens(CORPUS)
    deterministic = True
    for kind in KINDS:
        config = TrainerConfig(vocabulary_size=120)
        expected = dumps_model(train(kind, counts, config, "fp"))
        words = list(counts.items())
        for _ in range(3):
            rng.shuffle(words)
            deterministic &= dumps_model(train(kind, dict(words), config, "fp")) == expected
        for shards in (1, 4, 8):
            sharded = count_pretokens(CORPUS, shards=shards)
            deterministic &= dumps_model(train(kind, sharded, config, "fp", shards=shards)) == expected
    elapsed = time.perf_counter() - start
    ok = bpe_ok and em_ok and viterbi_ok == 200 and deterministic and elapsed < 60
    criterion("tokenizer oracles", ok,
              f"BPE merges {merges[:3]}; EM step {'ok' if em_ok else 'off'}; Viterbi {viterbi_ok}/200; "
              f"deterministic {deterministic}; {elapsed:.1f} s")
    assert ok


def synthetic_corpus(tag, n):
    return ParallelCorpus([SentencePair(i, tag, "ckb", "en", f"{tag} {i}", (f"{i}",)) for i in range(n)])


def split_problems(corpora, spec):
    result = split_corpus(corpora, spec)
    sets = result.sets()
    problems = []
    keys = [p.key for members in sets.values() for p in members]
    if len(keys) != len(set(keys)):
        problems.append("overlap")
    if set(keys) != {p.key for c in corpora for p in c.pairs}:
        problems.append("not exhaustive")
    for c in corpora:
        tag = c.pairs[0].corpus_tag
        if abs(len(result.test2[tag]) - 0.1 * len(c)) > 1:
            problems.append(f"test2 size for {tag}")
    rest = len(result.train) + len(result.val) + len(result.test1)
    for members, share in ((result.train, 0.8), (result.val, 0.1), (result.test1, 0.1)):
        if abs(len(members) - share * rest) > 1:
            problems.append("80/10/10 sizes")
    again = split_corpus(corpora, spec).sets()
    if {k: [p.key for p in v] for k, v in again.items()} != {k: [p.key for p in v] for k, v in sets.items()}:
        problems.append("not reproducible")
    return problems


def test_split_protocol(criterion):
    start = time.perf_counter()
    rng = random.Random(2024)
    failures = []
    for seed in range(100):
        sizes = [rng.randint(10, 400) for _ in range(rng.randint(1, 3))]
        corpora = [synthetic_corpus(f"c{i}", n) for i, n in enumerate(sizes)]
        problems = split_problems(corpora, SplitSpec(seed=seed))
        if problems:
            failures.append((seed, sizes, problems))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 10
    criterion("split protocol", ok, f"{100 - len(failures)}/100 seeds clean; {elapsed:.1f} s")
    assert ok, failures[:3]


def random_unicode(rng, n_max=30):
    pools = [
        (0x0600, 0x06FF),  # Arabic
        (0x0020, 0x007E),
        (0x00A0, 0x024F),
        (0x2000, 0x206F),  # spaces and joiners
        (0xFB50, 0xFDFF),  # presentation forms
        (0x0000, 0x10FFFF),
    ]
    out = []
    for _ in range(rng.randint(0, n_max)):
        r = rng.random()
        if r < 0.1:
            out.append(rng.choice(" ()‌\t\nرکيى"))
            continue
        lo, hi = rng.choice(pools)
        cp = rng.randint(lo, hi)
        out.append(chr(cp) if not 0xD800 <= cp <= 0xDFFF else "x")
    return "".join(out)


def test_roundtrips(criterion):
    start = time.perf_counter()
    counts = count_pretokens(CORPUS)
    alphabet = sorted({c for line in CORPUS for c in line if not c.isspace()})
    codec_ok, model_ok = {}, True
    for kind in KINDS:
        model = train(kind, counts, TrainerConfig(vocabulary_size=140), "fp")
        model_ok &= loads_model(dumps_model(model)) == model
        inner = [c for c in alphabet if "##" + c in model.piece_to_id] if kind == "wordpiece" else alphabet
        rng = random.Random(kind)
        good = 0
        for _ in range(1000):
            text = " ".join(rng.choice(alphabet) + "".join(rng.choice(inner) for _ in range(rng.randint(0, 6)))
                            for _ in range(rng.randint(1, 5)))
            good += decode(model, encode(model, text)) == text
        codec_ok[kind] = good

    rng = random.Random(7)
    pairs = [SentencePair(i, "ted", "ckb", "en", random_unicode(rng),
                          tuple(random_unicode(rng) for _ in range(rng.randint(1, 3)))) for i in range(1000)]
    jsonl_ok = loads_jsonl(dumps_jsonl(pairs)) == pairs

    profile = default_profile()
    ops = {
        "unify": lambda s: unify_graphemes(s, profile),
        "zwnj": remove_zwnj,
        "initial-r": normalize_initial_r,
        "parens": lambda s: strip_parentheticals(s)[0],
        "whitespace": collapse_whitespace,
        "pipeline-ckb": lambda s: normalize_pipeline(s, NormalizationConfig.for_lang("ckb"))[0],
        "pipeline-en": lambda s: normalize_pipeline(s, NormalizationConfig.for_lang("en"))[0],
    }
    strings = [random_unicode(rng) for _ in range(1000)]
    idempotent = {name: sum(op(op(s)) == op(s) for s in strings) for name, op in ops.items()}
    elapsed = time.perf_counter() - start
    ok = (all(v == 1000 for v in codec_ok.values()) and model_ok and jsonl_ok
          and all(v == 1000 for v in idempotent.values()) and elapsed < 30)
    criterion("round-trips", ok,
              f"codec {codec_ok}; model save/load {model_ok}; JSONL {jsonl_ok}; "
              f"idempotent {min(idempotent.values())}/1000 minimum over {len(ops)} ops; {elapsed:.1f} s")
    assert ok, (codec_ok, idempotent)


PUBLISHED_STATS = {"ckb": (25.82, 159.36), "en": (27.96, 134.72)}


def within(value, target, tol=0.05):
    return abs(value - target) <= tol * target


def test_tanzil_line_statistics(criterion):
    if not os.environ.get("CKBPREP_TANZIL_TMX"):
        criterion("Tanzil line statistics", None, "CKBPREP_TANZIL_TMX not set, release not available offline")
        pytest.skip("set CKBPREP_TANZIL_TMX to the Tanzil ckb-en TMX")
    corpus = parse_tmx(Path(os.environ["CKBPREP_TANZIL_TMX"]).read_bytes(), "ckb", "en", "tanzil")
    raw = compute_stats(corpus.pairs)
    configs = {lang: NormalizationConfig.for_lang(lang) for lang in PUBLISHED_STATS}
    normalized_pairs = [
        SentencePair(p.id, p.corpus_tag, p.src_lang, p.tgt_lang,
                     normalize_pipeline(p.src, configs["ckb"])[0],
                     tuple(normalize_pipeline(r, configs["en"])[0] for r in p.refs))
        for p in corpus.pairs
    ]
    normalized = compute_stats(normalized_pairs)

    def close(stats):
        return all(within(float(stats[lang].tokens_per_line), t) and within(float(stats[lang].chars_per_line), c)
                   for lang, (t, c) in PUBLISHED_STATS.items())

    ok = close(raw) or close(normalized)
    detail = "; ".join(
        f"{label} {lang} {float(s[lang].tokens_per_line):.2f}/{float(s[lang].chars_per_line):.2f}"
        for label, s in (("raw", raw), ("normalized", normalized)) for lang in PUBLISHED_STATS
    )
    criterion("Tanzil line statistics", ok, f"{len(corpus)} pairs; {detail}")
    assert ok
