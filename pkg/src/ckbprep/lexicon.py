"""Corpus frequency lexicon and repair of a wrongly attached trailing conjunction (و)."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ckbprep.textio import split_lines

WAW = "\u0648"
MIN_STEM_LENGTH = 2


class LexiconFormatError(ValueError):
    pass


@dataclass(frozen=True)
class FrequencyLexicon:
    counts: Mapping[str, int] = field(default_factory=dict)
    source_tokens: int = 0

    def __post_init__(self):
        if any(c < 1 for c in self.counts.values()):
            raise ValueError("lexicon counts must be positive")
        if sum(self.counts.values()) != self.source_tokens:
            raise ValueError("source_tokens must equal the sum of counts")

    def __getitem__(self, token: str) -> int:
        return self.counts.get(token, 0)

    def __len__(self) -> int:
        return len(self.counts)

    def merge(self, other: "FrequencyLexicon") -> "FrequencyLexicon":
        counts = Counter(self.counts)
        counts.update(other.counts)
        return FrequencyLexicon(dict(counts), self.source_tokens + other.source_tokens)

    def dumps(self) -> str:
        lines = [f"#total\t{self.source_tokens}"]
        for token, count in sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0])):
            lines.append(f"{token}\t{count}")
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "FrequencyLexicon":
        counts: dict[str, int] = {}
        total = None
        for lineno, line in enumerate(split_lines(text), 1):
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconFormatError(f"line {lineno}: expected token<TAB>count")
            token, raw = parts
            try:
                count = int(raw)
            except ValueError:
                raise LexiconFormatError(f"line {lineno}: bad count {raw!r}") from None
            if token == "#total" and total is None and lineno == 1:
                total = count
                continue
            if token in counts:
                raise LexiconFormatError(f"line {lineno}: duplicate token {token!r}")
            counts[token] = count
        lex = cls(counts, sum(counts.values()))
        if total is not None and total != lex.source_tokens:
            raise LexiconFormatError(f"#total {total} does not match the sum of counts {lex.source_tokens}")
        return lex

    @classmethod
    def load(cls, path: str | Path) -> "FrequencyLexicon":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def build_lexicon(tokens: Iterable[str]) -> FrequencyLexicon:
    counts = Counter(tokens)
    return FrequencyLexicon(dict(counts), sum(counts.values()))


def split_trailing_conjunction(word: str, lexicon: FrequencyLexicon) -> list[str]:
    """Split a final و off ``word`` when the bare form is strictly more frequent."""
    if word.endswith(WAW):
        stem = word[:-1]
        if len(stem) >= MIN_STEM_LENGTH and lexicon[stem] > lexicon[word]:
            return [stem, WAW]
    return [word]


def repair_groups(tokens: Sequence[str], lexicon: FrequencyLexicon) -> list[list[str]]:
    """Per input token, the one or two tokens it was repaired into."""
    return [split_trailing_conjunction(tok, lexicon) for tok in tokens]


def repair_text(tokens: Sequence[str], lexicon: FrequencyLexicon) -> list[str]:
    return [piece for group in repair_groups(tokens, lexicon) for piece in group]
