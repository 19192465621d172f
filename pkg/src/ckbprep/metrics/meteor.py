"""METEOR restricted to the exact-match stage."""
from __future__ import annotations

import functools
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Sequence

ALPHA_WEIGHT = 9.0  # Fmean = 10PR / (R + 9P)
PENALTY_GAMMA = 0.5
PENALTY_BETA = 3.0
EXHAUSTIVE_LIMIT = 12


@dataclass(frozen=True)
class MeteorScore:
    score: float
    matches: int
    chunks: int
    precision: float
    recall: float
    fmean: float
    penalty: float

    def as_dict(self) -> dict:
        return {
            "score": self.score, "matches": self.matches, "chunks": self.chunks,
            "P": self.precision, "R": self.recall, "Fmean": self.fmean, "penalty": self.penalty,
        }


def _exact_min_chunks(hyp: Sequence[str], ref_pos: dict[str, list[int]], need: dict[str, int]) -> int:
    n = len(hyp)
    suffix = [Counter() for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1].copy()
        suffix[i][hyp[i]] += 1

    @functools.lru_cache(maxsize=None)
    def best(i: int, mask: int, prev: int) -> int:
        if i == n:
            return 0
        w = hyp[i]
        positions = ref_pos.get(w, ())
        used = sum(1 for j in positions if mask >> j & 1)
        remaining = need.get(w, 0) - used
        result = None
        if suffix[i + 1][w] >= remaining:
            result = best(i + 1, mask, -1)
        if remaining > 0:
            for j in positions:
                if mask >> j & 1:
                    continue
                cost = 0 if prev >= 0 and j == prev + 1 else 1
                cand = cost + best(i + 1, mask | (1 << j), j)
                if result is None or cand < result:
                    result = cand
        return result

    return best(0, 0, -1)


def _greedy_chunks(hyp: Sequence[str], ref: Sequence[str], need: dict[str, int]) -> int:
    used = [False] * len(ref)
    remaining = dict(need)
    chunks = 0
    prev = -1
    for i, w in enumerate(hyp):
        if remaining.get(w, 0) <= 0:
            prev = -1
            continue
        if prev >= 0 and prev + 1 < len(ref) and not used[prev + 1] and ref[prev + 1] == w:
            j = prev + 1
        else:
            best_j, best_run = -1, -1
            for k, rw in enumerate(ref):
                if rw != w or used[k]:
                    continue
                run = 0
                while i + run < len(hyp) and k + run < len(ref) and hyp[i + run] == ref[k + run]:
                    run += 1
                if run > best_run:
                    best_j, best_run = k, run
            j = best_j
            chunks += 1
        used[j] = True
        remaining[w] -= 1
        prev = j
    return chunks


def align(hyp: Sequence[str], ref: Sequence[str]) -> tuple[int, int]:
    """Maximum exact-match count and, among maximal alignments, the fewest chunks."""
    hc, rc = Counter(hyp), Counter(ref)
    need = {w: min(c, rc[w]) for w, c in hc.items() if rc[w]}
    m = sum(need.values())
    if m == 0:
        return 0, 0
    if m <= EXHAUSTIVE_LIMIT:
        ref_pos: dict[str, list[int]] = defaultdict(list)
        for j, w in enumerate(ref):
            if w in need:
                ref_pos[w].append(j)
        return m, _exact_min_chunks(tuple(hyp), dict(ref_pos), need)
    return m, _greedy_chunks(hyp, ref, need)


def _single(hyp: Sequence[str], ref: Sequence[str]) -> MeteorScore:
    if not hyp and not ref:
        return MeteorScore(1.0, 0, 0, 1.0, 1.0, 1.0, 0.0)
    m, chunks = align(hyp, ref)
    if m == 0:
        return MeteorScore(0.0, 0, 0, 0.0, 0.0, 0.0, 0.0)
    p = m / len(hyp)
    r = m / len(ref)
    fmean = 10 * p * r / (r + ALPHA_WEIGHT * p)
    penalty = PENALTY_GAMMA * (chunks / m) ** PENALTY_BETA
    return MeteorScore(fmean * (1 - penalty), m, chunks, p, r, fmean, penalty)


def meteor_sentence(hyp, refs: Sequence) -> MeteorScore:
    """Best single-reference METEOR over ``refs``; the first reference wins ties."""
    if not refs:
        raise ValueError("at least one reference is required")
    hyp = hyp.split() if isinstance(hyp, str) else list(hyp)
    best = None
    for ref in refs:
        ref = ref.split() if isinstance(ref, str) else list(ref)
        s = _single(hyp, ref)
        if best is None or s.score > best.score:
            best = s
    return best
