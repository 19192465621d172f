"""Corpus-level multi-reference BLEU."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

FLOOR_EPSILON = 1e-9
SMOOTHING = ("none", "floor")


@dataclass(frozen=True)
class NgramPrecision:
    order: int
    matches: int
    total: int

    @property
    def ratio(self) -> float:
        return self.matches / self.total if self.total else 0.0


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: tuple[NgramPrecision, ...]
    brevity_penalty: float
    hyp_len: int
    ref_len: int
    smoothing: str = "none"

    def as_dict(self) -> dict:
        return {
            "score": self.score,
            "ngram_precisions": [
                {"order": p.order, "matches": p.matches, "total": p.total, "ratio": p.ratio}
                for p in self.precisions
            ],
            "brevity_penalty": self.brevity_penalty,
            "hyp_len": self.hyp_len,
            "ref_len": self.ref_len,
            "smoothing": self.smoothing,
        }


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def closest_ref_length(hyp_len: int, ref_lens: Sequence[int]) -> int:
    return min(ref_lens, key=lambda r: (abs(r - hyp_len), r))


def sentence_stats(hyp: Sequence[str], refs: Sequence[Sequence[str]], max_order: int):
    """Clipped matches and totals per order, plus hyp and closest-ref length."""
    matches, totals = [], []
    for n in range(1, max_order + 1):
        h = ngrams(hyp, n)
        best: Counter = Counter()
        for ref in refs:
            for gram, c in ngrams(ref, n).items():
                if c > best[gram]:
                    best[gram] = c
        matches.append(sum(min(c, best[g]) for g, c in h.items()))
        totals.append(max(len(hyp) - n + 1, 0))
    return matches, totals, len(hyp), closest_ref_length(len(hyp), [len(r) for r in refs])


def _tokens(x) -> list[str]:
    return x.split() if isinstance(x, str) else list(x)


def bleu_corpus(
    hypotheses: Sequence,
    references: Sequence[Sequence],
    max_order: int = 4,
    smoothing: str = "none",
) -> BleuScore:
    """BLEU over aligned hypotheses and reference sets.

    Strings are split on whitespace; token sequences are used as given.
    """
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses but {len(references)} reference sets")
    if not hypotheses:
        raise ValueError("no segments to score")
    if not 1 <= max_order <= 4:
        raise ValueError("max_order must be between 1 and 4")
    if smoothing not in SMOOTHING:
        raise ValueError(f"unknown smoothing {smoothing!r}")
    matches = [0] * max_order
    totals = [0] * max_order
    hyp_len = ref_len = 0
    for hyp, refs in zip(hypotheses, references):
        refs = [_tokens(r) for r in refs]
        if not refs:
            raise ValueError("every segment needs at least one reference")
        m, t, h, r = sentence_stats(_tokens(hyp), refs, max_order)
        for i in range(max_order):
            matches[i] += m[i]
            totals[i] += t[i]
        hyp_len += h
        ref_len += r
    return bleu_from_counts(matches, totals, hyp_len, ref_len, smoothing)


def bleu_from_counts(matches: Sequence[int], totals: Sequence[int], hyp_len: int, ref_len: int,
                     smoothing: str = "none") -> BleuScore:
    precisions = tuple(NgramPrecision(i + 1, m, t) for i, (m, t) in enumerate(zip(matches, totals)))
    if hyp_len == 0:
        bp = 0.0
    elif hyp_len > ref_len:
        bp = 1.0
    else:
        bp = math.exp(1 - ref_len / hyp_len)
    # orders for which the hypotheses hold no n-gram at all carry no evidence
    # and are left out of the geometric mean
    ratios = [p.ratio for p in precisions if p.total > 0]
    if smoothing == "floor":
        ratios = [r if r > 0 else FLOOR_EPSILON for r in ratios]
    if bp == 0.0 or not ratios or min(ratios) <= 0.0:
        score = 0.0
    else:
        score = 100.0 * bp * math.exp(math.fsum(math.log(r) for r in ratios) / len(ratios))
    return BleuScore(score, precisions, bp, hyp_len, ref_len, smoothing)
