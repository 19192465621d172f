"""Trained subword model, trainer settings and the on-disk model format."""
from __future__ import annotations

import functools
import json
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Mapping

KINDS = ("bpe", "wordpiece", "unigram")
FORMAT_VERSION = 1
UNK = "<unk>"
WORDPIECE_PREFIX = "##"
# Prefixed to the first piece of a pre-token that followed whitespace in the input.
# The character is reserved: trainers never admit it into the alphabet.
BOUNDARY = "\u2581"


class ModelFormatError(ValueError):
    def __init__(self, message: str, field: str, line: int | None = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{field}{where}: {message}")
        self.field = field
        self.line = line


@dataclass(frozen=True)
class TrainerConfig:
    vocabulary_size: int = 50000
    character_coverage: float = 1.0
    max_piece_length: int = 16
    min_pair_frequency: int = 2
    unigram_seed_factor: int = 4
    unigram_prune_keep: float = 0.75
    em_iterations_per_round: int = 2

    def __post_init__(self):
        if self.vocabulary_size < 2:
            raise ValueError("vocabulary_size must be at least 2")
        if not 0.0 < self.character_coverage <= 1.0:
            raise ValueError("character_coverage must lie in (0, 1]")
        if self.max_piece_length < 1 or self.min_pair_frequency < 1:
            raise ValueError("max_piece_length and min_pair_frequency must be positive")
        if self.unigram_seed_factor < 1 or self.em_iterations_per_round < 1:
            raise ValueError("unigram_seed_factor and em_iterations_per_round must be positive")
        if not 0.0 < self.unigram_prune_keep < 1.0:
            raise ValueError("unigram_prune_keep must lie in (0, 1)")


def retained_alphabet(word_counts: Mapping[str, int], coverage: float) -> list[str]:
    """Most frequent characters covering ``coverage`` of all character occurrences.

    Returned in codepoint order.  Ties in frequency are broken by codepoint.
    """
    chars: Counter = Counter()
    for word, count in word_counts.items():
        for ch in word:
            chars[ch] += count
    chars.pop(BOUNDARY, None)
    total = sum(chars.values())
    if total == 0:
        raise ValueError("empty corpus")
    ranked = sorted(chars.items(), key=lambda kv: (-kv[1], kv[0]))
    if coverage >= 1.0:
        return sorted(chars)
    kept, running = [], 0
    for ch, n in ranked:
        kept.append(ch)
        running += n
        if running >= coverage * total:
            break
    return sorted(kept)


def check_corpus(word_counts: Mapping[str, int]) -> None:
    if not word_counts or not any(c > 0 for c in word_counts.values()):
        raise ValueError("empty corpus")
    for word, count in word_counts.items():
        if count < 0:
            raise ValueError(f"negative count for {word!r}")


@dataclass(frozen=True)
class SubwordModel:
    kind: str
    vocab: tuple[tuple[str, int, float], ...]
    merges: tuple[tuple[str, str], ...] = ()
    unk_piece: str = UNK
    continuation_prefix: str = ""
    normalization_fingerprint: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        seen = set()
        for expected, (piece, idx, _) in enumerate(self.vocab):
            if idx != expected:
                raise ValueError(f"vocab ids must be 0..n-1 in order; got {idx} at {expected}")
            if piece in seen:
                raise ValueError(f"duplicate piece {piece!r}")
            seen.add(piece)
        if self.unk_piece not in seen:
            raise ValueError("unk_piece missing from vocab")
        if self.kind == "unigram":
            scores = [s for _, _, s in self.vocab]
            if any(s > 0 for s in scores):
                raise ValueError("unigram scores must be log-probabilities")
            mass = math.fsum(math.exp(s) for s in scores)
            if abs(mass - 1.0) > 1e-6:
                raise ValueError(f"unigram probabilities sum to {mass}, not 1")
        if self.kind == "bpe":
            for left, right in self.merges:
                if left + right not in seen:
                    raise ValueError(f"merge result {left + right!r} missing from vocab")
        elif self.merges:
            raise ValueError("only BPE models carry merges")
        if self.kind == "wordpiece" and not self.continuation_prefix:
            raise ValueError("wordpiece models need a continuation prefix")

    @cached_property
    def piece_to_id(self) -> dict[str, int]:
        return {piece: idx for piece, idx, _ in self.vocab}

    @cached_property
    def scores(self) -> dict[str, float]:
        return {piece: score for piece, _, score in self.vocab}

    @cached_property
    def merge_ranks(self) -> dict[tuple[str, str], int]:
        ranks: dict[tuple[str, str], int] = {}
        for rank, pair in enumerate(self.merges):
            ranks.setdefault(pair, rank)
        return ranks

    @cached_property
    def max_piece_length(self) -> int:
        return max(len(p) for p, _, _ in self.vocab)

    @cached_property
    def _cache(self) -> dict[str, tuple[str, ...]]:
        return {}

    def __len__(self) -> int:
        return len(self.vocab)

    def segment(self, word: str) -> list[str]:
        """Pieces for one pre-token, without boundary marking."""
        cached = self._cache.get(word)
        if cached is None:
            if self.kind == "bpe":
                from ckbprep.tokenizers.bpe import segment_bpe as seg
            elif self.kind == "wordpiece":
                from ckbprep.tokenizers.wordpiece import segment_wordpiece as seg
            else:
                from ckbprep.tokenizers.unigram import segment_unigram as seg
            cached = tuple(seg(self, word))
            if len(self._cache) < 200_000:
                self._cache[word] = cached
        return list(cached)


def dumps_model(model: SubwordModel) -> str:
    dump = functools.partial(json.dumps, ensure_ascii=False)
    lines = [
        "{",
        f'  "kind": {dump(model.kind)},',
        f'  "version": {FORMAT_VERSION},',
        f'  "normalization_fingerprint": {dump(model.normalization_fingerprint)},',
        f'  "unk_piece": {dump(model.unk_piece)},',
        f'  "continuation_prefix": {dump(model.continuation_prefix)},',
        '  "vocab": [',
    ]
    for i, entry in enumerate(model.vocab):
        sep = "," if i < len(model.vocab) - 1 else ""
        lines.append(f"    {dump([entry[0], entry[1], float(entry[2])])}{sep}")
    lines.append("  ],")
    lines.append('  "merges": [')
    for i, pair in enumerate(model.merges):
        sep = "," if i < len(model.merges) - 1 else ""
        lines.append(f"    {dump(list(pair))}{sep}")
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_model(model: SubwordModel, path: str | Path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def _line_of(lines: list[str], key: str) -> int | None:
    needle = f'"{key}"'
    for i, line in enumerate(lines, 1):
        if needle in line:
            return i
    return None


def loads_model(text: str) -> SubwordModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(exc.msg, "document", exc.lineno) from None
    lines = text.split("\n")
    if not isinstance(doc, dict):
        raise ModelFormatError("expected an object", "document", 1)

    def need(key, kind):
        if key not in doc:
            raise ModelFormatError("missing field", key)
        if not isinstance(doc[key], kind):
            raise ModelFormatError(f"expected {kind.__name__}", key, _line_of(lines, key))
        return doc[key]

    kind = need("kind", str)
    if kind not in KINDS:
        raise ModelFormatError(f"unknown kind {kind!r}", "kind", _line_of(lines, "kind"))
    version = need("version", int)
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported version {version}", "version", _line_of(lines, "version"))
    fingerprint = need("normalization_fingerprint", str)
    unk = need("unk_piece", str)
    prefix = need("continuation_prefix", str)
    raw_vocab = need("vocab", list)
    raw_merges = need("merges", list)

    vocab_line = _line_of(lines, "vocab") or 0
    vocab = []
    for i, entry in enumerate(raw_vocab):
        ok = (
            isinstance(entry, list) and len(entry) == 3 and isinstance(entry[0], str)
            and isinstance(entry[1], int) and isinstance(entry[2], (int, float))
        )
        if not ok:
            raise ModelFormatError(f"bad entry {entry!r}", f"vocab[{i}]", vocab_line + 1 + i)
        vocab.append((entry[0], entry[1], float(entry[2])))
    merges_line = _line_of(lines, "merges") or 0
    merges = []
    for i, pair in enumerate(raw_merges):
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(p, str) for p in pair)):
            raise ModelFormatError(f"bad merge {pair!r}", f"merges[{i}]", merges_line + 1 + i)
        merges.append((pair[0], pair[1]))
    try:
        return SubwordModel(kind, tuple(vocab), tuple(merges), unk, prefix, fingerprint)
    except ValueError as exc:
        raise ModelFormatError(str(exc), "vocab", vocab_line) from None


def load_model(path: str | Path) -> SubwordModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))
