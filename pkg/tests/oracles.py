"""Slow reference implementations shared by the unit and acceptance tests."""
import itertools
import math
import random
from collections import Counter
from fractions import Fraction

from ckbprep.metrics.ter import apply_shift, edit_distance


def exhaustive_ter_cost(hyp, ref, max_len=10):
    """Fewest shifts plus edits over every sequence of block moves (breadth first)."""
    hyp = tuple(hyp)
    best = edit_distance(hyp, ref)
    frontier, seen, depth = {hyp}, {hyp}, 0
    while frontier and depth + 1 < best:
        depth += 1
        nxt = set()
        for h in frontier:
            n = len(h)
            for s in range(n):
                for length in range(1, min(max_len, n - s) + 1):
                    for d in range(n - length + 1):
                        if d == s:
                            continue
                        t = tuple(apply_shift(h, s, length, d))
                        if t in seen:
                            continue
                        seen.add(t)
                        nxt.add(t)
                        best = min(best, depth + edit_distance(t, ref))
        frontier = nxt
    return best


def random_ter_pair(rng: random.Random):
    """Half independent random pairs, half perturbed copies of the reference (length <= 7)."""
    vocab = "abcdefg"[: rng.randint(2, 7)]
    ref = [rng.choice(vocab) for _ in range(rng.randint(1, 7))]
    if rng.random() < 0.5:
        hyp = [rng.choice(vocab) for _ in range(rng.randint(1, 7))]
    else:
        hyp = list(ref)
        for _ in range(rng.randint(1, 3)):
            op = rng.random()
            if op < 0.5 and len(hyp) > 1:
                s = rng.randrange(len(hyp))
                length = rng.randint(1, len(hyp) - s)
                hyp = apply_shift(hyp, s, length, rng.randint(0, len(hyp) - length))
            elif op < 0.8 and hyp:
                hyp[rng.randrange(len(hyp))] = rng.choice(vocab)
            elif len(hyp) < 7:
                hyp.insert(rng.randint(0, len(hyp)), rng.choice(vocab))
    return hyp[:7], ref


def ter_fuzz(cases: int = 500, seed: int = 0):
    """(hyp, ref, greedy cost, exhaustive cost) for a fixed fuzz suite."""
    from ckbprep.metrics.ter import ter_single

    rng = random.Random(seed)
    out = []
    for _ in range(cases):
        hyp, ref = random_ter_pair(rng)
        edits, shifts = ter_single(hyp, ref)
        out.append((hyp, ref, edits + shifts, exhaustive_ter_cost(hyp, ref)))
    return out


def meteor_alignment_oracle(hyp, ref):
    """(matches, fewest chunks) by enumerating every injective exact matching."""
    best_m, best_chunks = 0, 0
    options = [[None] + [j for j, r in enumerate(ref) if r == w] for w in hyp]
    for choice in itertools.product(*options):
        used = [j for j in choice if j is not None]
        if len(used) != len(set(used)):
            continue
        m = len(used)
        chunks, prev = 0, None
        for j in choice:
            if j is None:
                prev = None
                continue
            if prev is None or j != prev + 1:
                chunks += 1
            prev = j
        if m > best_m or (m == best_m and m and chunks < best_chunks):
            best_m, best_chunks = m, chunks
    return best_m, best_chunks


# -- tokenizers ------------------------------------------------------------------

def slow_bpe(word_counts, vocab_size, min_freq):
    """Recount every pair from scratch at each step."""
    alphabet = sorted({c for w in word_counts for c in w})
    words = {w: list(w) for w in word_counts}
    n_pieces, merges = 1 + len(alphabet), []
    seen = set(alphabet)
    while n_pieces < vocab_size:
        pairs = Counter()
        for w, syms in words.items():
            for a, b in zip(syms, syms[1:]):
                pairs[(a, b)] += word_counts[w]
        pairs = {p: n for p, n in pairs.items() if n >= min_freq}
        if not pairs:
            break
        best = min(pairs, key=lambda p: (-pairs[p], p))
        merges.append(best)
        if best[0] + best[1] not in seen:
            seen.add(best[0] + best[1])
            n_pieces += 1
        for w, syms in words.items():
            out, i = [], 0
            while i < len(syms):
                if i + 1 < len(syms) and (syms[i], syms[i + 1]) == best:
                    out.append(syms[i] + syms[i + 1])
                    i += 2
                else:
                    out.append(syms[i])
                    i += 1
            words[w] = out
    return merges


def slow_wordpiece(word_counts, vocab_size, min_freq):
    """Score every pair from scratch with exact fractions at each step."""
    words = {w: [w[0]] + ["##" + c for c in w[1:]] for w in word_counts}
    pieces = ["<unk>"] + sorted({c for w in words for c in w}) + ["##" + c for c in sorted({c for w in words for c in w[1:]})]
    learned = list(pieces)
    while len(learned) < vocab_size:
        units, pairs = Counter(), Counter()
        for w, syms in words.items():
            for s in syms:
                units[s] += word_counts[w]
            for a, b in zip(syms, syms[1:]):
                pairs[(a, b)] += word_counts[w]

        def merged(a, b):
            return a + b[2:]

        ok = {}
        for (a, b), n in pairs.items():
            m = merged(a, b)
            if n < min_freq:
                continue
            if not a.startswith("##") and len(m) > 2 and m.startswith("##"):
                continue
            ok[(a, b)] = Fraction(n, units[a] * units[b])
        if not ok:
            break
        best = min(ok, key=lambda p: (-ok[p], p))
        new = merged(*best)
        if new not in learned:
            learned.append(new)
        for w, syms in words.items():
            out, i = [], 0
            while i < len(syms):
                if i + 1 < len(syms) and (syms[i], syms[i + 1]) == best:
                    out.append(new)
                    i += 2
                else:
                    out.append(syms[i])
                    i += 1
            words[w] = out
    return learned


def random_counts(rng, alphabet="abcde", n_words=12, max_len=6):
    return {"".join(rng.choice(alphabet) for _ in range(rng.randint(1, max_len))): rng.randint(1, 9)
            for _ in range(n_words)}


def exhaustive_best(word, scores):
    best = None
    n = len(word)
    for cuts in itertools.product([0, 1], repeat=n - 1):
        pieces, start = [], 0
        for i, c in enumerate(cuts, 1):
            if c:
                pieces.append(word[start:i])
                start = i
        pieces.append(word[start:])
        if not all(p in scores for p in pieces):
            continue
        key = (-math.fsum(scores[p] for p in pieces), len(pieces), pieces)
        if best is None or key < best:
            best = key
    return best
