"""Unigram language-model segmentation trained by EM over segmentation lattices."""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from typing import Mapping, Sequence

from ckbprep.tokenizers.bpe import known_runs
from ckbprep.tokenizers.model import (
    UNK,
    SubwordModel,
    TrainerConfig,
    check_corpus,
    retained_alphabet,
)

NEG_INF = float("-inf")
# unk gets exp(-10) times the smallest piece probability before renormalization
UNK_PENALTY = 10.0


class ExactSum:
    """Shewchuk partials: the final ``fsum`` is independent of addition order."""

    __slots__ = ("partials",)

    def __init__(self):
        self.partials: list[float] = []

    def add(self, x: float) -> None:
        i = 0
        for y in self.partials:
            if abs(x) < abs(y):
                x, y = y, x
            hi = x + y
            lo = y - (hi - x)
            if lo:
                self.partials[i] = lo
                i += 1
            x = hi
        self.partials[i:] = [x]

    def extend(self, other: "ExactSum") -> None:
        for p in other.partials:
            self.add(p)

    def value(self) -> float:
        return math.fsum(self.partials)


def logsumexp(values: Sequence[float]) -> float:
    m = max(values)
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(math.fsum(math.exp(v - m) for v in values))


def _forward_backward(word: str, logp: Mapping[str, float], max_len: int):
    n = len(word)
    edges = []
    for i in range(n):
        for j in range(i + 1, min(n, i + max_len) + 1):
            lp = logp.get(word[i:j])
            if lp is not None:
                edges.append((i, j, lp))
    incoming = defaultdict(list)
    outgoing = defaultdict(list)
    for e in edges:
        incoming[e[1]].append(e)
        outgoing[e[0]].append(e)
    alpha = [NEG_INF] * (n + 1)
    alpha[0] = 0.0
    for j in range(1, n + 1):
        terms = [alpha[i] + lp for i, _, lp in incoming[j] if alpha[i] != NEG_INF]
        if terms:
            alpha[j] = logsumexp(terms)
    beta = [NEG_INF] * (n + 1)
    beta[n] = 0.0
    for i in range(n - 1, -1, -1):
        terms = [lp + beta[j] for _, j, lp in outgoing[i] if beta[j] != NEG_INF]
        if terms:
            beta[i] = logsumexp(terms)
    return edges, alpha, beta


def _expected_counts(words: Sequence[tuple[str, int]], logp: Mapping[str, float], max_len: int):
    sums: dict[str, ExactSum] = defaultdict(ExactSum)
    loglik = ExactSum()
    for word, count in words:
        edges, alpha, beta = _forward_backward(word, logp, max_len)
        z = alpha[len(word)]
        if z == NEG_INF:
            raise ValueError(f"word {word!r} has no segmentation under the current pieces")
        loglik.add(count * z)
        for i, j, lp in edges:
            if alpha[i] == NEG_INF or beta[j] == NEG_INF:
                continue
            post = math.exp(alpha[i] + lp + beta[j] - z)
            if post > 0.0:
                sums[word[i:j]].add(count * post)
    return sums, loglik


def em_step(
    words: Sequence[tuple[str, int]],
    probs: Mapping[str, float],
    max_len: int | None = None,
    shards: int = 1,
) -> tuple[dict[str, float], float]:
    """One E-step (exact lattice posteriors) and M-step (renormalization).

    Returns the new piece probabilities and the corpus log-likelihood under
    ``probs``.  Single characters are kept even when their expected count
    underflows.
    """
    logp = {p: math.log(v) for p, v in probs.items() if v > 0.0}
    if max_len is None:
        max_len = max(len(p) for p in logp)
    if shards <= 1 or len(words) < 2:
        parts = [_expected_counts(words, logp, max_len)]
    else:
        size = -(-len(words) // shards)
        chunks = [words[i:i + size] for i in range(0, len(words), size)]
        with ThreadPoolExecutor(max_workers=shards) as pool:
            parts = list(pool.map(lambda c: _expected_counts(c, logp, max_len), chunks))
    sums: dict[str, ExactSum] = defaultdict(ExactSum)
    loglik = ExactSum()
    for part_sums, part_ll in parts:
        loglik.extend(part_ll)
        for piece, acc in part_sums.items():
            sums[piece].extend(acc)
    expected = {}
    for piece in probs:
        e = sums[piece].value() if piece in sums else 0.0
        if e > 0.0:
            expected[piece] = e
        elif len(piece) == 1:
            expected[piece] = 1e-30
    total = math.fsum(expected.values())
    new = {p: e / total for p, e in sorted(expected.items())}
    return new, loglik.value()


def corpus_loglik(words: Sequence[tuple[str, int]], probs: Mapping[str, float]) -> float:
    logp = {p: math.log(v) for p, v in probs.items() if v > 0.0}
    max_len = max(len(p) for p in logp)
    acc = ExactSum()
    for word, count in words:
        _, alpha, _ = _forward_backward(word, logp, max_len)
        acc.add(count * alpha[len(word)])
    return acc.value()


def viterbi(word: str, scores: Mapping[str, float], max_len: int,
            unk: str | None = None, unk_score: float = NEG_INF,
            exclude: str | None = None) -> list[str] | None:
    """Best segmentation: highest total score, then fewest pieces, then smallest sequence.

    Characters with no single-character piece become ``unk`` when given.
    ``exclude`` names one piece to treat as absent.
    """
    n = len(word)
    # totals are correctly rounded sums of the piece scores, so equal multisets
    # of pieces tie exactly whatever order they were added in
    best: list[tuple[float, int, tuple[str, ...], tuple[float, ...]] | None] = [None] * (n + 1)
    best[0] = (0.0, 0, (), ())
    for i in range(n):
        if best[i] is None:
            continue
        _, count_i, seq_i, parts_i = best[i]
        for j in range(i + 1, min(n, i + max_len) + 1):
            piece = word[i:j]
            s = scores.get(piece) if piece != exclude else None
            if s is None:
                if j == i + 1 and unk is not None:
                    piece, s = unk, unk_score
                else:
                    continue
            parts = parts_i + (s,)
            cand = (math.fsum(parts), count_i + 1, seq_i + (piece,), parts)
            cur = best[j]
            if cur is None or cand[0] > cur[0] or (
                cand[0] == cur[0] and (cand[1], cand[2]) < (cur[1], cur[2])
            ):
                best[j] = cand
    return None if best[n] is None else list(best[n][2])


def seed_pieces(words: Sequence[tuple[str, int]], alphabet: Sequence[str],
                config: TrainerConfig) -> dict[str, int]:
    """Single characters plus frequent substrings, ranked by frequency times length."""
    chars: Counter = Counter()
    subs: Counter = Counter()
    for word, count in words:
        n = len(word)
        for i in range(n):
            chars[word[i]] += count
            for j in range(i + 2, min(n, i + config.max_piece_length) + 1):
                subs[word[i:j]] += count
    seed = {ch: chars[ch] for ch in alphabet if chars[ch] > 0}
    room = config.vocabulary_size * config.unigram_seed_factor - len(seed)
    frequent = [(s, c) for s, c in subs.items() if c >= 2]
    frequent.sort(key=lambda sc: (-sc[1] * len(sc[0]), sc[0]))
    for s, c in frequent[:max(room, 0)]:
        seed[s] = c
    return seed


def _prune(words, probs: dict[str, float], target: int, max_len: int) -> dict[str, float]:
    """Drop the multi-character pieces whose removal costs the least likelihood."""
    scores = {p: math.log(v) for p, v in probs.items()}
    freq: Counter = Counter()
    for word, count in words:
        for piece in viterbi(word, scores, max_len):
            freq[piece] += count
    total = sum(freq.values())
    log_total = math.log(total)
    losses = []
    for piece in probs:
        if len(piece) == 1:
            continue
        f = freq.get(piece, 0)
        if f == 0:
            losses.append((NEG_INF, piece))
            continue
        alt = viterbi(piece, scores, max_len, exclude=piece)
        logprob_piece = math.log(f) - log_total
        log_total_alt = math.log(total + f * (len(alt) - 1))
        logprob_alt = math.fsum(math.log(freq.get(a, 0) + f) for a in alt) - log_total_alt
        losses.append(((f / total) * (logprob_piece - logprob_alt), piece))
    losses.sort()
    n_remove = max(0, len(probs) - target)
    removed = {piece for _, piece in losses[:n_remove]}
    kept = {p: v for p, v in probs.items() if p not in removed}
    z = math.fsum(kept.values())
    return {p: v / z for p, v in sorted(kept.items())}


def train_unigram(
    word_counts: Mapping[str, int],
    config: TrainerConfig = TrainerConfig(),
    fingerprint: str = "",
    shards: int = 1,
    history: list[float] | None = None,
) -> SubwordModel:
    """Seed, then alternate EM rounds and pruning until the vocabulary fits.

    ``history`` (if given) receives the corpus log-likelihood of every E-step.
    """
    check_corpus(word_counts)
    alphabet = retained_alphabet(word_counts, config.character_coverage)
    if config.vocabulary_size < len(alphabet) + 1:
        raise ValueError(
            f"vocabulary_size {config.vocabulary_size} is below the {len(alphabet) + 1} base pieces"
        )
    charset = set(alphabet)
    merged: Counter = Counter()
    for word in sorted(word_counts):
        if word_counts[word] > 0:
            for run in known_runs(word, charset):
                merged[run] += word_counts[word]
    words = sorted(merged.items())

    seed = seed_pieces(words, alphabet, config)
    total = sum(seed.values())
    probs = {p: c / total for p, c in sorted(seed.items())}
    max_len = config.max_piece_length
    target = config.vocabulary_size - 1  # one slot for unk
    while True:
        for _ in range(config.em_iterations_per_round):
            probs, ll = em_step(words, probs, max_len, shards)
            if history is not None:
                history.append(ll)
        if len(probs) <= target:
            break
        keep = max(target, int(len(probs) * config.unigram_prune_keep))
        if keep >= len(probs):
            keep = len(probs) - 1
        pruned = _prune(words, probs, keep, max_len)
        if len(pruned) == len(probs):
            break  # only single characters left
        probs = pruned

    return unigram_model(probs, fingerprint)


def unigram_model(probs: Mapping[str, float], fingerprint: str = "") -> SubwordModel:
    """Build a model from piece probabilities, reserving a small mass for unk."""
    # log space: the unk mass may underflow as a plain float
    log_unk = math.log(min(probs.values())) - UNK_PENALTY
    log_z = math.log(math.fsum(probs.values()) + math.exp(log_unk))
    ranked = sorted(probs.items(), key=lambda kv: (-kv[1], kv[0]))
    vocab = [(UNK, 0, log_unk - log_z)]
    vocab += [(p, i, math.log(v) - log_z) for i, (p, v) in enumerate(ranked, 1)]
    return SubwordModel("unigram", tuple(vocab), (), UNK, "", fingerprint)


def segment_unigram(model: SubwordModel, word: str) -> list[str]:
    unk = model.unk_piece
    return viterbi(word, model.scores, model.max_piece_length, unk=unk,
                   unk_score=model.scores[unk], exclude=unk)
