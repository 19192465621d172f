"""Adjacent-pair bookkeeping shared by the BPE and WordPiece trainers."""
from __future__ import annotations

from collections import defaultdict

Pair = tuple[str, str]


class PairStats:
    """Weighted symbol sequences with incrementally maintained pair and piece counts."""

    def __init__(self, seqs: list[list[str]], freqs: list[int]):
        self.seqs = seqs
        self.freqs = freqs
        self.pair_counts: dict[Pair, int] = defaultdict(int)
        self.piece_counts: dict[str, int] = defaultdict(int)
        self.where: dict[Pair, set[int]] = defaultdict(set)
        for idx, seq in enumerate(seqs):
            self._add(idx, seq, +1)

    def _add(self, idx: int, seq: list[str], sign: int) -> set[Pair]:
        f = self.freqs[idx] * sign
        touched = set()
        for sym in seq:
            self.piece_counts[sym] += f
        for pair in zip(seq, seq[1:]):
            self.pair_counts[pair] += f
            touched.add(pair)
            if sign > 0:
                self.where[pair].add(idx)
        return touched

    def merge(self, pair: Pair, new_symbol: str) -> set[Pair]:
        """Merge every left-to-right occurrence of ``pair``; return pairs whose counts changed."""
        left, right = pair
        changed: set[Pair] = set()
        for idx in sorted(self.where.pop(pair, ())):
            seq = self.seqs[idx]
            if len(seq) < 2:
                continue
            changed |= self._add(idx, seq, -1)
            out = []
            i = 0
            while i < len(seq):
                if i + 1 < len(seq) and seq[i] == left and seq[i + 1] == right:
                    out.append(new_symbol)
                    i += 2
                else:
                    out.append(seq[i])
                    i += 1
            self.seqs[idx] = out
            changed |= self._add(idx, out, +1)
        for p in changed:
            if self.pair_counts.get(p, 0) <= 0:
                self.pair_counts.pop(p, None)
                self.where.pop(p, None)
        for sym in (left, right):
            if self.piece_counts.get(sym, 0) <= 0:
                self.piece_counts.pop(sym, None)
        changed.discard(pair)
        return changed
