"""Regex tokenizer splitting text into runs of word characters and runs of punctuation."""
from __future__ import annotations

import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Sequence

WORDPUNCT_RE = re.compile(r"\w+|[^\w\s]+")


def wordpunct_tokenize(text: str) -> list[str]:
    return WORDPUNCT_RE.findall(text)


def _count(lines: Sequence[str]) -> Counter:
    counts: Counter = Counter()
    for line in lines:
        counts.update(WORDPUNCT_RE.findall(line))
    return counts


def count_pretokens(lines: Iterable[str], shards: int = 1) -> Counter:
    """Count WordPunct pre-tokens, optionally over ``shards`` parallel slices.

    Integer addition makes the merged result independent of shard count and order.
    """
    lines = list(lines)
    if shards <= 1 or len(lines) < 2:
        return _count(lines)
    size = -(-len(lines) // shards)
    chunks = [lines[i:i + size] for i in range(0, len(lines), size)]
    total: Counter = Counter()
    with ThreadPoolExecutor(max_workers=shards) as pool:
        for part in pool.map(_count, chunks):
            total.update(part)
    return total
