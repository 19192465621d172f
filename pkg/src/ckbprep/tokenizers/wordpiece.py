"""WordPiece: merges ranked by count(pair) / (count(left) * count(right)), greedy longest-match encoding."""
from __future__ import annotations

from typing import Mapping

from ckbprep.tokenizers.merging import PairStats
from ckbprep.tokenizers.model import (
    UNK,
    WORDPIECE_PREFIX,
    SubwordModel,
    TrainerConfig,
    check_corpus,
    retained_alphabet,
)


def is_continuation(piece: str, prefix: str = WORDPIECE_PREFIX) -> bool:
    # A bare "##" is an ordinary punctuation piece, not an empty continuation.
    return len(piece) > len(prefix) and piece.startswith(prefix)


def merged_symbol(left: str, right: str, prefix: str = WORDPIECE_PREFIX) -> str:
    return left + right[len(prefix):]


def _better(cand: tuple[int, int, int, tuple[str, str]], best) -> bool:
    """Compare (count, count_left, count_right, pair) by exact score, then smaller pair."""
    if best is None:
        return True
    n, l, r, pair = cand
    bn, bl, br, bpair = best
    lhs, rhs = n * bl * br, bn * l * r
    if lhs != rhs:
        return lhs > rhs
    return pair < bpair


def pair_score(n: int, left_count: int, right_count: int) -> float:
    return n / (left_count * right_count)


def select_pair(stats: PairStats, min_pair_frequency: int, prefix: str = WORDPIECE_PREFIX):
    best = None
    pc = stats.piece_counts
    for pair, n in stats.pair_counts.items():
        if n < min_pair_frequency:
            continue
        left, right = pair
        if not is_continuation(left, prefix) and is_continuation(merged_symbol(left, right, prefix), prefix):
            continue  # would be indistinguishable from a continuation piece
        cand = (n, pc[left], pc[right], pair)
        if _better(cand, best):
            best = cand
    return None if best is None else best[3]


def train_wordpiece(
    word_counts: Mapping[str, int],
    config: TrainerConfig = TrainerConfig(),
    fingerprint: str = "",
) -> SubwordModel:
    check_corpus(word_counts)
    prefix = WORDPIECE_PREFIX
    alphabet = retained_alphabet(word_counts, config.character_coverage)
    charset = set(alphabet)
    seqs, freqs = [], []
    continuation_chars = set()
    for word in sorted(word_counts):
        count = word_counts[word]
        # words with uncovered characters encode to a single unk and teach nothing
        if count <= 0 or not set(word) <= charset:
            continue
        seqs.append([word[0]] + [prefix + ch for ch in word[1:]])
        freqs.append(count)
        continuation_chars.update(word[1:])
    pieces = [UNK] + alphabet + [prefix + ch for ch in sorted(continuation_chars)]
    if config.vocabulary_size < len(pieces):
        raise ValueError(
            f"vocabulary_size {config.vocabulary_size} is below the {len(pieces)} base pieces"
        )
    present = set(pieces)
    stats = PairStats(seqs, freqs)
    while len(pieces) < config.vocabulary_size:
        pair = select_pair(stats, config.min_pair_frequency, prefix)
        if pair is None:
            break
        new = merged_symbol(*pair, prefix)
        if new not in present:
            pieces.append(new)
            present.add(new)
        stats.merge(pair, new)
    vocab = tuple((p, i, 0.0) for i, p in enumerate(pieces))
    return SubwordModel("wordpiece", vocab, (), UNK, prefix, fingerprint)


def segment_wordpiece(model: SubwordModel, word: str) -> list[str]:
    prefix = model.continuation_prefix
    known = model.piece_to_id
    longest = model.max_piece_length
    out = []
    start = 0
    while start < len(word):
        end = min(len(word), start + longest)
        found = None
        while end > start:
            sub = word[start:end]
            if start == 0:
                if sub in known and sub != model.unk_piece and not is_continuation(sub, prefix):
                    found = sub
            else:
                cand = prefix + sub
                if cand in known:
                    found = cand
            if found is not None:
                break
            end -= 1
        if found is None:
            return [model.unk_piece]
        out.append(found)
        start = end
    return out
