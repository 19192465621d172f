"""Translation edit rate with greedy block shifts."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

MAX_SHIFT_SIZE = 10


@dataclass(frozen=True)
class TerScore:
    score: float
    edits: int
    shifts: int
    normalizer: float
    ref_index: int = 0

    def as_dict(self) -> dict:
        return {"score": self.score, "edits": self.edits, "shifts": self.shifts,
                "normalizer": self.normalizer, "ref_index": self.ref_index}


def edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Word-level Levenshtein distance with unit costs."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def apply_shift(words: Sequence[str], start: int, length: int, dest: int) -> list[str]:
    """Move ``words[start:start+length]`` so it begins at ``dest`` in the remaining list."""
    block = list(words[start:start + length])
    rest = list(words[:start]) + list(words[start + length:])
    return rest[:dest] + block + rest[dest:]


def _ref_blocks(ref: Sequence[str], max_len: int) -> set[tuple[str, ...]]:
    blocks = set()
    for j in range(len(ref)):
        for length in range(1, min(max_len, len(ref) - j) + 1):
            blocks.add(tuple(ref[j:j + length]))
    return blocks


def best_shift(hyp: Sequence[str], ref: Sequence[str], current: int, max_len: int = MAX_SHIFT_SIZE):
    """The shift with the largest edit-distance reduction, or ``None`` if none reduces it.

    Only blocks that occur somewhere in the reference and are not already
    aligned in place are moved.  Ties go to the leftmost block, then the
    shortest, then the leftmost destination.
    """
    ref_blocks = _ref_blocks(ref, max_len)
    best = None
    n = len(hyp)
    for start in range(n):
        for length in range(1, min(max_len, n - start) + 1):
            block = tuple(hyp[start:start + length])
            if block not in ref_blocks:
                break
            if tuple(ref[start:start + length]) == block:
                continue  # already aligned in place
            for dest in range(n - length + 1):
                if dest == start:
                    continue
                shifted = apply_shift(hyp, start, length, dest)
                gain = current - edit_distance(shifted, ref)
                if gain > 0 and (best is None or gain > best[0]):
                    best = (gain, start, length, dest, shifted)
    return best


def ter_single(hyp: Sequence[str], ref: Sequence[str], max_len: int = MAX_SHIFT_SIZE) -> tuple[int, int]:
    """(edits, shifts) after greedy shifting of ``hyp`` towards ``ref``."""
    hyp = list(hyp)
    current = edit_distance(hyp, ref)
    shifts = 0
    while current > 0:
        found = best_shift(hyp, ref, current, max_len)
        if found is None:
            break
        gain, _, _, _, hyp = found
        current -= gain
        shifts += 1
    return current, shifts


def ter_sentence(hyp, refs: Sequence, max_len: int = MAX_SHIFT_SIZE) -> TerScore:
    """TER against the reference needing the fewest edits plus shifts.

    The normalizer is the mean reference length.
    """
    if not refs:
        raise ValueError("at least one reference is required")
    hyp = hyp.split() if isinstance(hyp, str) else list(hyp)
    refs = [r.split() if isinstance(r, str) else list(r) for r in refs]
    if any(not r for r in refs):
        raise ValueError("empty reference")
    normalizer = sum(len(r) for r in refs) / len(refs)
    best = None
    for k, ref in enumerate(refs):
        edits, shifts = ter_single(hyp, ref, max_len)
        if best is None or edits + shifts < best[0] + best[1]:
            best = (edits, shifts, k)
    edits, shifts, k = best
    return TerScore((edits + shifts) / normalizer, edits, shifts, normalizer, k)
