"""Byte-pair encoding over characters, with merges confined to WordPunct pre-tokens."""
from __future__ import annotations

import heapq
from typing import Mapping

from ckbprep.tokenizers.merging import PairStats
from ckbprep.tokenizers.model import (
    UNK,
    SubwordModel,
    TrainerConfig,
    check_corpus,
    retained_alphabet,
)


def known_runs(word: str, alphabet: set[str]) -> list[str]:
    """Split ``word`` at characters outside ``alphabet``."""
    runs, cur = [], []
    for ch in word:
        if ch in alphabet:
            cur.append(ch)
        elif cur:
            runs.append("".join(cur))
            cur = []
    if cur:
        runs.append("".join(cur))
    return runs


def train_bpe(
    word_counts: Mapping[str, int],
    config: TrainerConfig = TrainerConfig(),
    fingerprint: str = "",
) -> SubwordModel:
    """Learn merges greedily: most frequent adjacent pair first, ties to the smallest pair."""
    check_corpus(word_counts)
    alphabet = retained_alphabet(word_counts, config.character_coverage)
    if config.vocabulary_size < len(alphabet) + 1:
        raise ValueError(
            f"vocabulary_size {config.vocabulary_size} is below the {len(alphabet) + 1} base pieces"
        )
    charset = set(alphabet)
    seqs, freqs = [], []
    for word in sorted(word_counts):
        count = word_counts[word]
        if count <= 0:
            continue
        for run in known_runs(word, charset):
            seqs.append(list(run))
            freqs.append(count)
    stats = PairStats(seqs, freqs)

    pieces = [UNK] + alphabet
    present = set(pieces)
    merges: list[tuple[str, str]] = []
    heap = [(-n, a, b) for (a, b), n in stats.pair_counts.items()]
    heapq.heapify(heap)
    while len(pieces) < config.vocabulary_size and heap:
        neg, a, b = heapq.heappop(heap)
        if stats.pair_counts.get((a, b), 0) != -neg:
            continue  # stale entry
        if -neg < config.min_pair_frequency:
            break
        new = a + b
        merges.append((a, b))
        if new not in present:
            pieces.append(new)
            present.add(new)
        for pair in stats.merge((a, b), new):
            n = stats.pair_counts.get(pair, 0)
            if n > 0:
                heapq.heappush(heap, (-n, pair[0], pair[1]))

    vocab = tuple((p, i, 0.0) for i, p in enumerate(pieces))
    return SubwordModel("bpe", vocab, tuple(merges), UNK, "", fingerprint)


def segment_bpe(model: SubwordModel, word: str) -> list[str]:
    ranks = model.merge_ranks
    known = model.piece_to_id
    out: list[str] = []
    symbols: list[str] = []

    def flush():
        while len(symbols) > 1:
            best = None
            for i in range(len(symbols) - 1):
                r = ranks.get((symbols[i], symbols[i + 1]))
                if r is not None and (best is None or r < best[0]):
                    best = (r, i)
            if best is None:
                break
            a, b = model.merges[best[0]]
            merged, i = [], 0
            while i < len(symbols):
                if i + 1 < len(symbols) and symbols[i] == a and symbols[i + 1] == b:
                    merged.append(a + b)
                    i += 2
                else:
                    merged.append(symbols[i])
                    i += 1
            symbols[:] = merged
        out.extend(symbols)
        symbols.clear()

    for ch in word:
        if ch in known and ch != model.unk_piece:
            symbols.append(ch)
        else:
            flush()
            out.append(model.unk_piece)
    flush()
    return out
